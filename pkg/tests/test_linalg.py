import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from smoothext import linalg
from smoothext.fem import assemble_stiffness, build_space
from smoothext.linalg import NotPositiveDefiniteError, factorize_spd, from_triplets
from smoothext.mesh import generate_disk_annulus

BACKENDS = ["superlu"] + (["cholmod"] if linalg.BACKEND == "cholmod" else [])


def test_triplets_mirror_lower_or_upper():
    m = from_triplets(2, [(0, 0, 2), (0, 1, 1), (1, 1, 2)])
    assert np.array_equal(m.to_dense(), [[2, 1], [1, 2]])
    m = from_triplets(2, [(0, 0, 2), (1, 0, 1), (1, 1, 2)])
    assert np.array_equal(m.to_dense(), [[2, 1], [1, 2]])


def test_triplets_sum_duplicates():
    m = from_triplets(1, [(0, 0, 1), (0, 0, 1)])
    assert m.to_dense()[0, 0] == 2
    assert m.nnz == 1


def test_triplets_out_of_range():
    with pytest.raises(IndexError):
        from_triplets(2, [(5, 0, 1.0)])


def test_triplets_asymmetric_full_input():
    with pytest.raises(ValueError, match="not symmetric"):
        from_triplets(2, [(0, 1, 1.0), (1, 0, 2.0), (0, 0, 1.0)])


def test_structure_sorted():
    rng = np.random.default_rng(0)
    rows = rng.integers(0, 20, 200)
    cols = rng.integers(0, 20, 200)
    keep = rows >= cols
    m = linalg.from_coo(20, rows[keep], cols[keep], rng.random(keep.sum()))
    for i in range(20):
        idx = m.indices[m.indptr[i]:m.indptr[i + 1]]
        assert np.all(np.diff(idx) > 0)
    assert np.allclose(m.to_dense(), m.to_dense().T)


@pytest.mark.parametrize("backend", BACKENDS)
def test_factorize_small(backend):
    f = factorize_spd(from_triplets(2, [(0, 0, 2), (0, 1, 1), (1, 1, 2)]), backend=backend)
    assert np.allclose(f.solve([1.0, 1.0]), [1 / 3, 1 / 3], atol=1e-12, rtol=0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_indefinite_rejected(backend):
    A = from_triplets(2, [(0, 0, 1), (0, 1, 2), (1, 1, 1)])
    with pytest.raises(NotPositiveDefiniteError, match=r"not positive definite \(probe\)"):
        factorize_spd(A, "probe", backend=backend)


@pytest.mark.parametrize("backend", BACKENDS)
def test_identity(backend):
    I = linalg.SparseSymMatrix(sp.identity(100, format="csr"))
    b = np.arange(100.0)
    assert np.array_equal(factorize_spd(I, backend=backend).solve(b), b)


@pytest.mark.parametrize("backend", BACKENDS)
def test_diagonal_and_zero_rhs(backend):
    A = linalg.SparseSymMatrix(sp.diags(np.arange(1.0, 6.0), format="csr"))
    f = factorize_spd(A, backend=backend)
    assert np.allclose(f.solve(linalg.matvec(A, np.ones(5))), np.ones(5), rtol=1e-14)
    assert np.array_equal(f.solve(np.zeros(5)), np.zeros(5))


@pytest.mark.parametrize("backend", BACKENDS)
def test_random_spd(backend):
    rng = np.random.default_rng(7)
    B = rng.standard_normal((50, 50))
    A = B @ B.T + 50 * np.eye(50)
    x = rng.standard_normal(50)
    f = factorize_spd(linalg.SparseSymMatrix(sp.csr_matrix(A)), backend=backend)
    assert np.linalg.norm(f.solve(A @ x) - x) / np.linalg.norm(x) <= 1e-9


def test_dimension_mismatch():
    f = factorize_spd(from_triplets(2, [(0, 0, 1), (1, 1, 1)]))
    with pytest.raises(ValueError, match="dimension mismatch"):
        f.solve(np.ones(3))
    with pytest.raises(ValueError):
        linalg.matvec(from_triplets(2, [(0, 0, 1)]), np.ones(3))
    with pytest.raises(ValueError):
        linalg.dot(np.ones(2), np.ones(3))


def test_vector_ops():
    A = from_triplets(2, [(0, 0, 2), (0, 1, 1), (1, 1, 2)])
    assert np.array_equal(linalg.matvec(A, [1, 0]), [2, 1])
    x = np.array([3.0, -4.0, 12.0])
    assert abs(linalg.dot(x, x) - linalg.norm(x) ** 2) <= 1e-14 * linalg.dot(x, x)
    I = linalg.SparseSymMatrix(sp.identity(3, format="csr"))
    assert np.array_equal(linalg.matvec(I, x), x)


@pytest.fixture(scope="module")
def fem_matrix():
    m = generate_disk_annulus(12)
    return assemble_stiffness(build_space(m), 1.0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_fem_matrix_round_trip(fem_matrix, backend):
    rng = np.random.default_rng(3)
    f = factorize_spd(fem_matrix, backend=backend)
    x = rng.standard_normal(fem_matrix.dimension)
    y = f.solve(linalg.matvec(fem_matrix, x))
    assert np.linalg.norm(y - x) <= 1e-9 * np.linalg.norm(x)
    # deterministic repeated solves
    assert np.array_equal(f.solve(x), f.solve(x))


def test_backends_agree(fem_matrix):
    if len(BACKENDS) < 2:
        pytest.skip("only one backend available")
    b = np.random.default_rng(1).standard_normal(fem_matrix.dimension)
    x1 = factorize_spd(fem_matrix, backend="cholmod").solve(b)
    x2 = factorize_spd(fem_matrix, backend="superlu").solve(b)
    assert np.linalg.norm(x1 - x2) <= 1e-10 * np.linalg.norm(x1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_energy_positive(fem_matrix, seed):
    x = np.random.default_rng(seed).standard_normal(fem_matrix.dimension)
    assert linalg.dot(linalg.matvec(fem_matrix, x), x) > 0
