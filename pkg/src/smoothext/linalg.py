"""Sparse symmetric positive definite storage and direct solves.

Matrices are kept in compressed sparse row form.  Factorization is a sparse
Cholesky with a fill-reducing ordering: CHOLMOD (through scikit-sparse) when it
is importable, otherwise SuperLU run without numerical pivoting under a
symmetric ordering, which is Gaussian elimination on a symmetric matrix and
certifies definiteness by the sign of its pivots.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

try:  # pragma: no cover - depends on the local SuiteSparse build
    from sksparse.cholmod import CholmodNotPositiveDefiniteError, cholesky as _cholmod
except ImportError:  # pragma: no cover
    _cholmod = None

__all__ = [
    "SparseSymMatrix",
    "SpdFactorization",
    "NotPositiveDefiniteError",
    "from_triplets",
    "from_coo",
    "factorize_spd",
    "solve",
    "matvec",
    "dot",
    "norm",
    "BACKEND",
]

BACKEND = "cholmod" if _cholmod is not None else "superlu"

_SYM_TOL = 1e-12


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """A matrix handed to :func:`factorize_spd` has a nonpositive pivot."""

    def __init__(self, name: str | None = None):
        self.operator = name
        what = f" ({name})" if name else ""
        super().__init__(f"not positive definite{what}")


class SparseSymMatrix:
    """Symmetric matrix in CSR form with sorted, duplicate-free column indices."""

    def __init__(self, csr: sp.csr_matrix):
        csr = sp.csr_matrix(csr)
        csr.sum_duplicates()
        csr.sort_indices()
        if csr.shape[0] != csr.shape[1]:
            raise ValueError(f"matrix must be square, got shape {csr.shape}")
        self.csr = csr

    @property
    def dimension(self) -> int:
        return self.csr.shape[0]

    @property
    def indptr(self) -> np.ndarray:
        return self.csr.indptr

    @property
    def indices(self) -> np.ndarray:
        return self.csr.indices

    @property
    def data(self) -> np.ndarray:
        return self.csr.data

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()

    def __matmul__(self, x):
        return matvec(self, x)

    def __repr__(self):
        return f"SparseSymMatrix(dimension={self.dimension}, nnz={self.nnz})"


def from_triplets(dimension: int, triplets) -> SparseSymMatrix:
    """Build a matrix from ``(row, col, value)`` triplets.

    Duplicates are summed.  If the triplets only touch one triangle (lower or
    upper) it is mirrored; otherwise the input must already be symmetric.

    >>> from_triplets(2, [(0, 0, 2.0), (0, 1, 1.0), (1, 1, 2.0)]).to_dense()
    array([[2., 1.],
           [1., 2.]])
    """
    triplets = list(triplets)
    if not triplets:
        return from_coo(dimension, [], [], [])
    rows, cols, values = zip(*triplets)
    return from_coo(dimension, rows, cols, values)


def from_coo(dimension: int, rows, cols, values) -> SparseSymMatrix:
    """Array form of :func:`from_triplets`."""
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if not (len(rows) == len(cols) == len(values)):
        raise ValueError("rows, cols and values must have equal length")
    if len(rows) and (min(rows.min(), cols.min()) < 0
                      or max(rows.max(), cols.max()) >= dimension):
        bad = int(np.flatnonzero((rows < 0) | (rows >= dimension)
                                 | (cols < 0) | (cols >= dimension))[0])
        raise IndexError(f"index ({rows[bad]}, {cols[bad]}) out of range for dimension {dimension}")

    lower = rows > cols
    upper = rows < cols
    if lower.any() != upper.any() or not (lower.any() or upper.any()):
        off = lower | upper
        rows, cols = np.concatenate([rows, cols[off]]), np.concatenate([cols, rows[off]])
        values = np.concatenate([values, values[off]])
        m = sp.csr_matrix((values, (rows, cols)), shape=(dimension, dimension))
    else:
        m = sp.csr_matrix((values, (rows, cols)), shape=(dimension, dimension))
        m.sum_duplicates()
        scale = np.abs(m.data).max() if m.nnz else 0.0
        asym = abs(m - m.T)
        if asym.nnz and asym.max() > _SYM_TOL * scale:
            raise ValueError(f"input is not symmetric (max |A - A^T| = {asym.max():.3e})")
    return SparseSymMatrix(m)


class SpdFactorization:
    """Sparse Cholesky factor of an SPD matrix, reusable for any number of solves."""

    def __init__(self, matrix: SparseSymMatrix, name: str | None = None,
                 backend: str | None = None):
        backend = backend or BACKEND
        if backend not in ("cholmod", "superlu"):
            raise ValueError(f"unknown backend {backend!r}")
        if backend == "cholmod" and _cholmod is None:
            raise ImportError("scikit-sparse is not installed")
        self.dimension = matrix.dimension
        self.backend = backend
        self.name = name
        self._solve = None
        if self.dimension == 0:
            self._solve = lambda b: np.zeros(0)
            return
        A = matrix.csr.tocsc()
        if backend == "cholmod":
            try:
                factor = _cholmod(A, mode="supernodal")
            except CholmodNotPositiveDefiniteError:
                raise NotPositiveDefiniteError(name) from None
            self._solve = factor.solve_A
        else:
            lu = splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                      options={"SymmetricMode": True})
            pivots = lu.U.diagonal()
            if not np.array_equal(lu.perm_r, lu.perm_c) or np.any(pivots <= 0):
                raise NotPositiveDefiniteError(name)
            self._solve = lu.solve

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.dimension:
            raise ValueError(f"dimension mismatch: factor is {self.dimension}, "
                             f"right-hand side has {b.shape[0]}")
        if not b.any():
            return np.zeros_like(b)
        return np.asarray(self._solve(b)).reshape(b.shape)

    def __repr__(self):
        return f"SpdFactorization(dimension={self.dimension}, name={self.name!r})"


def factorize_spd(m: SparseSymMatrix, name: str | None = None,
                  backend: str | None = None) -> SpdFactorization:
    """Cholesky-factorize ``m``; raise :class:`NotPositiveDefiniteError` if it is not SPD.

    ``name`` labels the operator in the error message.  ``backend`` selects
    ``"cholmod"`` or ``"superlu"`` (default: the best available).
    """
    return SpdFactorization(m, name, backend)


def solve(f: SpdFactorization, b) -> np.ndarray:
    return f.solve(b)


def matvec(m: SparseSymMatrix, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] != m.dimension:
        raise ValueError(f"dimension mismatch: matrix is {m.dimension}, vector has {x.shape[0]}")
    return m.csr @ x


def dot(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(x @ y)


def norm(x) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=float)))
