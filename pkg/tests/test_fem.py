import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smoothext import fem, linalg
from smoothext.fem import (
    AnalyticField, CompositeField, NonCoerciveFormError, PiecewiseConstantCoefficient,
    assemble_interface_mass, assemble_load, assemble_stiffness, build_space, error_norms,
    interpolate, project_control, restriction_map,
)
from smoothext.mesh import Mesh, generate_disk_annulus, generate_square_split, interface_edges

REF = Mesh([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]], [1], [[0, 1], [1, 2], [2, 0]])

SINE = AnalyticField.smooth(
    lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y),
    lambda x, y: (np.pi * np.cos(np.pi * x) * np.sin(np.pi * y),
                  np.pi * np.sin(np.pi * x) * np.cos(np.pi * y)))
ONE = AnalyticField.smooth(lambda x, y: np.ones_like(x), lambda x, y: (0 * x, 0 * y))


def test_unsupported_degree():
    with pytest.raises(ValueError, match="unsupported degree"):
        build_space(REF, degree=2)


def test_square_n1_dimensions():
    m = generate_square_split(1)
    assert build_space(m).dimension == 1
    sub = build_space(m, region=2)
    assert sub.dimension == 1
    assert np.allclose(m.vertices[sub.free_vertices], [[0.5, 0.5]])


@pytest.mark.parametrize("region", [1, 2])
def test_subdomain_dofs_are_global_vertices(region):
    m = generate_square_split(2)
    V, W = build_space(m), build_space(m, region=region)
    rmap = restriction_map(V, W)
    ok = rmap >= 0
    assert np.array_equal(V.free_vertices[rmap[ok]], W.free_vertices[ok])
    # unmapped unknowns sit on the outer boundary
    assert np.all(m.is_boundary_vertex[W.free_vertices[~ok]])
    # interface vertices are free in the subdomain space unless they lie on the boundary
    iface = m.interface_vertices
    inner_iface = iface[~m.is_boundary_vertex[iface]]
    assert np.all(np.isin(inner_iface, W.free_vertices))
    assert W.dimension == len(W.domain_vertices) - len(W.constrained_vertices)


def test_restriction_preserves_values():
    m = generate_square_split(3)
    V, W = build_space(m), build_space(m, region=2)
    rmap = restriction_map(V, W)
    u = interpolate(V, SINE)
    r = W.function(fem.restrict(u.coefficients, rmap))
    assert np.allclose(r.vertex_values[W.free_vertices], u.vertex_values[W.free_vertices])
    assert np.array_equal(fem.restrict(np.zeros(V.dimension), rmap), np.zeros(W.dimension))
    ones = fem.restrict(np.ones(V.dimension), rmap)
    interior = ~m.is_boundary_vertex[W.free_vertices]
    assert np.all(ones[interior] == 1.0)


def test_restrict_extend_are_adjoint():
    m = generate_disk_annulus(4)
    V, W = build_space(m), build_space(m, region=2)
    rmap = restriction_map(V, W)
    rng = np.random.default_rng(0)
    g, c = rng.standard_normal(V.dimension), rng.standard_normal(W.dimension)
    lhs = fem.restrict(g, rmap) @ c
    rhs = g @ fem.extend(c, rmap, V.dimension)
    assert abs(lhs - rhs) < 1e-12 * (abs(lhs) + 1)


def test_restriction_map_mesh_mismatch():
    with pytest.raises(ValueError):
        restriction_map(build_space(generate_square_split(1)),
                        build_space(generate_square_split(1), region=2))


def test_reference_element_matrix():
    K = assemble_stiffness(build_space(REF, dirichlet=False), 1.0).to_dense()
    expected = np.array([[1, -0.5, -0.5], [-0.5, 0.5, 0], [-0.5, 0, 0.5]])
    assert np.allclose(K, expected, atol=1e-15)
    K2 = assemble_stiffness(build_space(REF, dirichlet=False), 2.0).to_dense()
    assert np.array_equal(K2, 2 * K)


def test_stiffness_spd_on_square():
    m = generate_square_split(2)
    K = assemble_stiffness(build_space(m), PiecewiseConstantCoefficient(1.0, 3.0))
    assert np.allclose(K.to_dense(), K.to_dense().T, atol=1e-15)
    linalg.factorize_spd(K)


def test_non_coercive_rejected():
    m = generate_square_split(2)
    c = PiecewiseConstantCoefficient(1.0, -2.0)
    with pytest.raises(NonCoerciveFormError, match="non-coercive form requested"):
        assemble_stiffness(build_space(m), c)
    # selecting the positive region only is fine
    assemble_stiffness(build_space(m), c, regions=1)


def test_coefficient_must_be_nonzero():
    with pytest.raises(ValueError):
        PiecewiseConstantCoefficient(0.0, 1.0)


def test_stiffness_annihilates_constants():
    m = generate_disk_annulus(5)
    V = build_space(m, dirichlet=False)
    K = assemble_stiffness(V, PiecewiseConstantCoefficient(2.0, 0.5))
    rows = np.asarray(K.csr.sum(axis=1)).ravel()
    interior = ~m.is_boundary_vertex[V.free_vertices]
    assert np.max(np.abs(rows[interior])) < 1e-12


def test_load_reference():
    b = assemble_load(build_space(REF, dirichlet=False), ONE)
    assert np.allclose(b, 1 / 6, atol=1e-15)
    assert np.array_equal(assemble_load(build_space(REF, dirichlet=False), AnalyticField.zero()),
                          np.zeros(3))


@pytest.mark.parametrize("mesh", [generate_square_split(2), generate_disk_annulus(4)])
@pytest.mark.parametrize("region", [1, 2])
def test_load_of_one_sums_to_region_area(mesh, region):
    b = assemble_load(build_space(mesh, dirichlet=False), ONE, regions=region)
    assert abs(b.sum() - mesh.region_area(region)) < 1e-12


def test_interface_mass_single_edge():
    m = Mesh([[0, 0], [1, 0], [0, 1], [1, -1]], [[0, 1, 2], [0, 3, 1]], [1, 2])
    M = assemble_interface_mass(m).to_dense()
    assert np.allclose(M, [[1 / 3, 1 / 6], [1 / 6, 1 / 3]], atol=1e-15)


def test_interface_mass_constant_and_linear_traces():
    m = generate_square_split(5)
    iv = m.interface_vertices
    M = assemble_interface_mass(m, iv)
    t = np.ones(len(iv))
    assert abs(t @ (M @ t) - 1.0) < 1e-12
    # linear trace t = 2y - 0.3 against two-point Gauss along each edge
    y = m.vertices[iv, 1]
    t = 2 * y - 0.3
    quad = 0.0
    gp = 0.5 * np.array([1 - 1 / math.sqrt(3), 1 + 1 / math.sqrt(3)])
    for (a, b), L in interface_edges(m):
        ya, yb = m.vertices[a, 1], m.vertices[b, 1]
        vals = 2 * (ya + gp * (yb - ya)) - 0.3
        quad += 0.5 * L * float(vals @ vals)
    assert abs(t @ (M @ t) - quad) < 1e-12


def test_interface_mass_spd():
    m = generate_disk_annulus(6)
    linalg.factorize_spd(assemble_interface_mass(m))


def test_interface_mass_empty():
    with pytest.raises(ValueError, match="empty interface"):
        assemble_interface_mass(REF)


def test_projection_of_discrete_function_is_identity():
    m = generate_square_split(4)
    W = build_space(m, region=2)
    hat = np.zeros(W.dimension)
    hat[W.dimension // 2] = 1.0
    # the analytic route: the hat function as a field with its piecewise gradient
    w = W.function(hat)
    p = project_control(w, W)
    assert np.allclose(p.coefficients, hat, atol=1e-12)
    V = build_space(m)
    wg = V.function(fem.extend(hat, restriction_map(V, W), V.dimension))
    p2 = project_control(wg, W)
    assert np.allclose(p2.coefficients, hat, atol=1e-12)


def test_projection_of_zero():
    W = build_space(generate_square_split(3), region=2)
    assert np.array_equal(project_control(AnalyticField.zero(), W).coefficients,
                          np.zeros(W.dimension))


@pytest.mark.parametrize("n", [2, 4, 8])
def test_projection_does_not_increase_norm(n):
    W = build_space(generate_square_split(n), region=2)
    p = project_control(SINE, W)
    S = assemble_stiffness(W, 1.0)
    discrete = p.coefficients @ (S @ p.coefficients)
    # closed form of the Dirichlet energy on (1/2, 1) x (0, 1)
    assert discrete <= math.pi ** 2 / 4


def test_error_norms_exact_for_linear_field():
    m = generate_square_split(3)
    lin = AnalyticField.smooth(lambda x, y: 1 + 2 * x - y, lambda x, y: (2 + 0 * x, -1 + 0 * y))
    V = build_space(m, dirichlet=False)
    l2, h1 = error_norms(interpolate(V, lin), lin)
    assert l2 <= 1e-12 and h1 <= 1e-12


def test_error_norms_of_zero():
    V = build_space(generate_square_split(3))
    assert error_norms(V.function(), SINE) == pytest.approx((1.0, 1.0), abs=1e-14)


def test_error_norms_zero_exact():
    V = build_space(generate_square_split(2))
    with pytest.raises(ValueError, match="zero norm"):
        error_norms(V.function(), AnalyticField.zero())


def _brute_l2(mesh, values, exact):
    """Relative L2 error by a plain loop with the classical 7-point rule."""
    a, b = 0.059715871789770, 0.470142064105115
    c, d = 0.797426985353087, 0.101286507323456
    pts = [(1 / 3, 1 / 3, 1 / 3), (a, b, b), (b, a, b), (b, b, a), (c, d, d), (d, c, d), (d, d, c)]
    wts = [0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3
    num = den = 0.0
    for tri in mesh.triangles:
        P = mesh.vertices[tri]
        e1, e2 = P[1] - P[0], P[2] - P[0]
        area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
        for lam, w in zip(pts, wts):
            x, y = np.dot(lam, P)
            uh = np.dot(lam, values[tri])
            u = float(exact(x, y))
            num += area * w * (uh - u) ** 2
            den += area * w * u ** 2
    return math.sqrt(num / den)


def test_error_norm_against_brute_force():
    m = generate_square_split(4)
    V = build_space(m)
    u = interpolate(V, SINE)
    l2, _ = error_norms(u, SINE)
    ref = _brute_l2(m, u.vertex_values, SINE)
    assert abs(l2 - ref) <= 0.1 * ref


def test_composite_field_uses_region_pieces():
    m = generate_square_split(3)
    V1, V2 = build_space(m, region=1), build_space(m, region=2)
    comp = CompositeField({1: interpolate(V1, SINE), 2: interpolate(V2, SINE)})
    whole = interpolate(build_space(m), SINE)
    assert error_norms(comp, SINE) == pytest.approx(error_norms(whole, SINE), rel=1e-12)


def test_analytic_field_gradient_check():
    SINE.check_gradient(np.random.default_rng(0).random((20, 2)))
    wrong = AnalyticField.smooth(lambda x, y: np.sin(x), lambda x, y: (0 * x, 0 * y))
    with pytest.raises(ValueError, match="gradient inconsistent"):
        wrong.check_gradient(np.random.default_rng(0).random((20, 2)) + 0.1)


def test_export_has_one_line_per_vertex():
    import io
    m = generate_square_split(2)
    buf = io.StringIO()
    fem.export_solution(interpolate(build_space(m), SINE), buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == m.n_vertices
    assert all(len(line.split()) == 3 for line in lines)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_stiffness_linear_in_piecewise_coefficient(c1, c2):
    m = generate_square_split(2)
    V = build_space(m)
    K = assemble_stiffness(V, PiecewiseConstantCoefficient(c1, c2)).to_dense()
    K1 = assemble_stiffness(V, 1.0, regions=1).to_dense()
    K2 = assemble_stiffness(V, 1.0, regions=2).to_dense()
    assert np.allclose(K, c1 * K1 + c2 * K2, atol=1e-12 * max(c1, c2))
