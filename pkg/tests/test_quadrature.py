import math

import numpy as np
import pytest

from smoothext.quadrature import centroid_rule, collapsed_gauss, radon7, triangle_rule


def _monomial(a, b):
    """Exact integral of x^a y^b over the unit right triangle."""
    return math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)


def _apply(rule, a, b):
    x, y = rule.barycentric[:, 1], rule.barycentric[:, 2]
    return 0.5 * float(rule.weights @ (x ** a * y ** b))


@pytest.mark.parametrize("rule", [centroid_rule(), radon7(), collapsed_gauss(2),
                                  collapsed_gauss(4), triangle_rule(7)])
def test_exact_up_to_degree(rule):
    assert abs(rule.weights.sum() - 1.0) < 1e-14
    assert np.all(rule.barycentric >= 0)
    assert np.allclose(rule.barycentric.sum(axis=1), 1.0)
    for d in range(rule.degree + 1):
        for a in range(d + 1):
            assert abs(_apply(rule, a, d - a) - _monomial(a, d - a)) < 1e-14


def test_radon_not_exact_at_degree_six():
    errs = [abs(_apply(radon7(), a, 6 - a) - _monomial(a, 6 - a)) for a in range(7)]
    assert max(errs) > 1e-8


def test_selection():
    assert triangle_rule(1).degree == 1
    assert triangle_rule(5) is radon7()
    assert triangle_rule(7).degree >= 7


def test_points_map_to_physical_triangle():
    corners = np.array([[[1.0, 1.0], [3.0, 1.0], [1.0, 2.0]]])
    p = centroid_rule().points(corners)
    assert np.allclose(p[0, 0], [5 / 3, 4 / 3])
