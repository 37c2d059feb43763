"""Discrete state, adjoint, cost and gradient of the smooth-extension control problem.

Everything is stated in a canonical orientation: the *source* region carries the
solution that is extended across the interface with a positive coefficient,
and the *control* region is where the negative coefficient lives.  When the
user picks region 2 as the source, the labels swap and the equation is
multiplied by -1, so the assembled matrices are always SPD.

Notation used below (all vectors are unknown coefficients):

    K   global stiffness with the extended coefficient
    S   control-region stiffness with the extension coefficient (control metric)
    P   control-region stiffness with minus the negative coefficient
    M   interface mass, on the control-region unknowns
    R   restriction of global unknowns to control-region unknowns
    F_s global load from the source region, F_c control-region load

    u  = K^{-1} (F_s + R^T S w)
    u2 = P^{-1} (-F_c - S (R u - w))
    d  = u2 - R u,   J(w) = d^T M d / 2 + lam w^T S w
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fem, linalg
from .fem import AnalyticField, FeFunction, FunctionSpace
from .mesh import Mesh, validate

__all__ = [
    "TransmissionProblem",
    "DiscreteOperators",
    "StatePair",
    "AdjointPair",
    "prepare",
    "solve_state",
    "misfit",
    "cost",
    "solve_adjoint",
    "gradient",
    "hessvec",
    "cost_and_gradient",
    "flux_balance_residual",
    "control_norm",
    "composite",
    "reference_control",
]


@dataclass(frozen=True)
class TransmissionProblem:
    """Sign-changing transmission problem ``-div(eps grad u) = f`` with ``u = 0`` on the boundary.

    ``eps1 > 0`` on region 1, ``eps2 < 0`` on region 2.  ``extension_source``
    names the region whose solution is extended; ``eps_ext`` is the extension
    coefficient used on the other region (default: the source coefficient's
    magnitude).
    """
    eps1: float
    eps2: float
    f: AnalyticField
    extension_source: int = 1
    eps_ext: float | None = None
    degree: int = 1

    def __post_init__(self):
        if not self.eps1 > 0:
            raise ValueError(f"eps1 must be positive, got {self.eps1}")
        if not self.eps2 < 0:
            raise ValueError(f"eps2 must be negative, got {self.eps2}")
        if self.extension_source not in (1, 2):
            raise ValueError("extension_source must be 1 or 2")
        if self.eps_ext is not None and not self.eps_ext > 0:
            raise ValueError(f"extension coefficient must be positive, got {self.eps_ext}")
        if self.degree != 1:
            raise ValueError(f"unsupported degree {self.degree}")

    @property
    def contrast(self) -> float:
        return self.eps2 / self.eps1

    @property
    def source_region(self) -> int:
        return self.extension_source

    @property
    def control_region(self) -> int:
        return 3 - self.extension_source

    @property
    def sign(self) -> float:
        """Factor applied to the equation so the source coefficient is positive."""
        return 1.0 if self.extension_source == 1 else -1.0

    def coefficient(self, region: int) -> float:
        return self.eps1 if region == 1 else self.eps2

    @property
    def extension_coefficient(self) -> float:
        if self.eps_ext is not None:
            return float(self.eps_ext)
        return abs(self.coefficient(self.source_region))


@dataclass(frozen=True)
class DiscreteOperators:
    problem: TransmissionProblem
    mesh: Mesh
    global_space: FunctionSpace
    control_space: FunctionSpace
    K: linalg.SparseSymMatrix
    K_source: linalg.SparseSymMatrix
    S: linalg.SparseSymMatrix
    P: linalg.SparseSymMatrix
    M: linalg.SparseSymMatrix
    F_s: np.ndarray
    F_c: np.ndarray
    rmap: np.ndarray
    K_factor: linalg.SpdFactorization
    S_factor: linalg.SpdFactorization
    P_factor: linalg.SpdFactorization

    @property
    def h(self) -> float:
        return self.mesh.h

    @property
    def source_region(self) -> int:
        return self.problem.source_region

    @property
    def control_region(self) -> int:
        return self.problem.control_region

    @property
    def n_control(self) -> int:
        return self.control_space.dimension

    @property
    def n_global(self) -> int:
        return self.global_space.dimension

    def restrict(self, g) -> np.ndarray:
        return fem.restrict(g, self.rmap)

    def extend(self, c) -> np.ndarray:
        return fem.extend(c, self.rmap, self.n_global)

    def metric_solve(self, g) -> np.ndarray:
        """Apply ``S^{-1}``, the Riesz map of the control metric."""
        return self.S_factor.solve(g)


@dataclass(frozen=True)
class StatePair:
    u: FeFunction
    u2: FeFunction

    def trace_difference(self, ops: DiscreteOperators) -> np.ndarray:
        """``u2 - u`` at the control unknowns; only interface entries enter the cost."""
        return self.u2.coefficients - ops.restrict(self.u.coefficients)


@dataclass(frozen=True)
class AdjointPair:
    g: FeFunction
    g2: FeFunction


def _touches_boundary(mesh: Mesh, region: int) -> bool:
    if not len(mesh.boundary_edges):
        return False
    t = mesh.triangles[mesh.regions == region]
    sides = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
    be = np.sort(mesh.boundary_edges, axis=1)
    n = mesh.n_vertices
    return bool(np.isin(be[:, 0] * n + be[:, 1], sides[:, 0] * n + sides[:, 1]).any())


def prepare(problem: TransmissionProblem, mesh: Mesh, check_mesh: bool = True,
            backend: str | None = None) -> DiscreteOperators:
    """Assemble and factorize every operator once."""
    if check_mesh:
        report = validate(mesh)
        if not report.conforming:
            raise ValueError("mesh is not conforming: " + "; ".join(report.issues))
    s, c = problem.source_region, problem.control_region
    if not (mesh.regions == c).any() or not (mesh.regions == s).any():
        raise ValueError("both regions must contain triangles")
    if not _touches_boundary(mesh, c):
        raise ValueError(f"region {c} has no outer boundary edges: its boundary away from the "
                         "interface must have positive measure")

    sigma = problem.sign
    eps_ext = problem.extension_coefficient
    src_coef = sigma * problem.coefficient(s)
    ctrl_coef = -sigma * problem.coefficient(c)
    ext = {s: src_coef, c: eps_ext}
    extended = fem.PiecewiseConstantCoefficient(ext[1], ext[2])
    f = problem.f
    load = AnalyticField(lambda x, y, r: sigma * f(x, y, r), None)

    V = fem.build_space(mesh)
    W = fem.build_space(mesh, region=c)
    K = fem.assemble_stiffness(V, extended)
    K_source = fem.assemble_stiffness(V, extended, regions=s)
    S = fem.assemble_stiffness(W, eps_ext)
    P = fem.assemble_stiffness(W, ctrl_coef)
    M = fem.assemble_interface_mass(mesh, W.free_vertices)
    F_s = fem.assemble_load(V, load, regions=s)
    F_c = fem.assemble_load(W, load)
    rmap = fem.restriction_map(V, W)
    return DiscreteOperators(
        problem, mesh, V, W, K, K_source, S, P, M, F_s, F_c, rmap,
        linalg.factorize_spd(K, "global extended stiffness", backend),
        linalg.factorize_spd(S, "control metric stiffness", backend),
        linalg.factorize_spd(P, "control-region stiffness", backend),
    )


def _coupling(ops: DiscreteOperators, w) -> np.ndarray:
    """``S w`` as a control-space vector; for an analytic ``w`` it is integrated directly."""
    if isinstance(w, AnalyticField):
        metric = fem.PiecewiseConstantCoefficient(ops.problem.extension_coefficient,
                                                  ops.problem.extension_coefficient)
        return fem._gradient_load(ops.control_space, metric, w, fem.triangle_rule(5))
    if isinstance(w, FeFunction):
        if w.space is not ops.control_space:
            raise ValueError("control lives in a different space")
        w = w.coefficients
    w = np.asarray(w, dtype=float)
    if w.shape != (ops.n_control,):
        raise ValueError(f"dimension mismatch: control has {w.shape}, expected ({ops.n_control},)")
    return ops.S @ w


def solve_state(ops: DiscreteOperators, w, homogeneous: bool = False) -> StatePair:
    """State pair for control ``w`` (vector, FeFunction or AnalyticField).

    ``homogeneous=True`` drops the source term, giving the linear part of the map.
    """
    Sw = _coupling(ops, w)
    rhs = ops.extend(Sw)
    if not homogeneous:
        rhs = rhs + ops.F_s
    u = ops.K_factor.solve(rhs)
    rhs2 = -(ops.S @ ops.restrict(u) - Sw)
    if not homogeneous:
        rhs2 = rhs2 - ops.F_c
    u2 = ops.P_factor.solve(rhs2)
    return StatePair(FeFunction(ops.global_space, u), FeFunction(ops.control_space, u2))


def misfit(ops: DiscreteOperators, state: StatePair) -> float:
    d = state.trace_difference(ops)
    return 0.5 * float(d @ (ops.M @ d))


def _control_vector(ops, w) -> np.ndarray:
    if isinstance(w, FeFunction):
        w = w.coefficients
    return np.asarray(w, dtype=float)


def cost(ops: DiscreteOperators, state: StatePair, w, lam: float) -> float:
    if not lam > 0:
        raise ValueError(f"regularization weight must be positive, got {lam}")
    w = _control_vector(ops, w)
    return misfit(ops, state) + lam * float(w @ (ops.S @ w))


def solve_adjoint(ops: DiscreteOperators, state: StatePair) -> AdjointPair:
    """Adjoint pair; the control-region equation is independent and solved first."""
    Md = ops.M @ state.trace_difference(ops)
    g2 = ops.P_factor.solve(Md)
    g = ops.K_factor.solve(ops.extend(ops.S @ g2 + Md))
    return AdjointPair(FeFunction(ops.global_space, g), FeFunction(ops.control_space, g2))


def gradient(ops: DiscreteOperators, w, state: StatePair, adjoint: AdjointPair,
             lam: float) -> np.ndarray:
    """Euclidean gradient of the regularized cost with respect to the control coefficients."""
    if lam < 0:
        raise ValueError(f"regularization weight must be nonnegative, got {lam}")
    w = _control_vector(ops, w)
    diff = adjoint.g2.coefficients - ops.restrict(adjoint.g.coefficients)
    return ops.S @ diff + 2.0 * lam * (ops.S @ w)


def cost_and_gradient(ops: DiscreteOperators, w, lam: float):
    """``(J, grad J, state)`` at ``w``: two state solves and two adjoint solves."""
    w = _control_vector(ops, w)
    state = solve_state(ops, w)
    adj = solve_adjoint(ops, state)
    return cost(ops, state, w, lam), gradient(ops, w, state, adj, lam), state


def hessvec(ops: DiscreteOperators, v, lam: float) -> np.ndarray:
    """Hessian of the cost applied to ``v``; the cost is quadratic so this is exact."""
    v = _control_vector(ops, v)
    lin = solve_state(ops, v, homogeneous=True)
    adj = solve_adjoint(ops, lin)
    return gradient(ops, v, lin, adj, lam)


def flux_balance_residual(ops: DiscreteOperators, state: StatePair,
                          relative: bool = False) -> float:
    """Max residual of the two state equations summed with matched test functions.

    The sum is the weak form of the original problem tested on the global
    space, with ``u`` on the source region and ``u2`` on the control region.
    With ``relative=True`` it is divided by the largest term in the sum.
    """
    a = ops.K_source @ state.u.coefficients
    b = ops.extend(ops.P @ state.u2.coefficients)
    f = ops.F_s + ops.extend(ops.F_c)
    r = float(np.max(np.abs(a - b - f), initial=0.0))
    if not relative:
        return r
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0),
                np.max(np.abs(f), initial=0.0))
    return r / scale if scale > 0 else r


def control_norm(ops: DiscreteOperators, w) -> float:
    w = _control_vector(ops, w)
    return float(np.sqrt(max(float(w @ (ops.S @ w)), 0.0)))


def composite(ops: DiscreteOperators, state: StatePair) -> fem.CompositeField:
    """Discrete approximation of the transmission solution: ``u`` on the source
    region, ``u2`` on the control region."""
    return fem.CompositeField({ops.source_region: state.u, ops.control_region: state.u2})


def reference_control(ops: DiscreteOperators, exact: AnalyticField) -> np.ndarray:
    """Control built from a known solution.

    The exact solution is interpolated on the source region and extended into
    the control region by the discrete harmonic extension of the metric; the
    control is the one whose coupling load reproduces that extension's
    residual at the control unknowns.
    """
    mesh = ops.mesh
    V, W = ops.global_space, ops.control_space
    s = ops.source_region
    src_vertices = mesh.region_vertices(s)
    e = np.zeros(mesh.n_vertices)
    p = mesh.vertices[src_vertices]
    e[src_vertices] = exact(p[:, 0], p[:, 1], s)
    e[mesh.is_boundary_vertex] = 0.0

    on_src = np.zeros(mesh.n_vertices, dtype=bool)
    on_src[src_vertices] = True
    inner = ~on_src[W.free_vertices]
    S = ops.S.csr
    known = e[W.free_vertices]
    if inner.any():
        S_ii = linalg.SparseSymMatrix(S[inner][:, inner])
        rhs = -(S[inner][:, ~inner] @ known[~inner])
        known[inner] = linalg.factorize_spd(S_ii, "harmonic extension").solve(rhs)
    e[W.free_vertices] = known
    E = e[V.free_vertices]
    return ops.metric_solve(ops.restrict(ops.K @ E - ops.F_s))
