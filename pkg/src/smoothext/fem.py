"""P1 Lagrange spaces, assembly, control projection and error norms.

Spaces live on the whole mesh or on the triangles of one region.  Dirichlet
vertices are eliminated from the unknowns, so assembled matrices are SPD.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, TextIO

import numpy as np

from . import linalg
from .mesh import Mesh
from .quadrature import TriangleRule, triangle_rule

__all__ = [
    "FunctionSpace",
    "FeFunction",
    "CompositeField",
    "AnalyticField",
    "PiecewiseConstantCoefficient",
    "NonCoerciveFormError",
    "build_space",
    "restriction_map",
    "interpolate",
    "assemble_stiffness",
    "assemble_load",
    "assemble_interface_mass",
    "project_control",
    "error_norms",
    "element_gradients",
    "export_solution",
    "format_solution",
]


class NonCoerciveFormError(ValueError):
    def __init__(self, detail: str = ""):
        msg = "non-coercive form requested"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class FunctionSpace:
    """Continuous P1 space on ``mesh``, restricted to ``region`` if given.

    The unknowns are the domain vertices that are not constrained.  With
    ``dirichlet=True`` the constrained vertices are those on the outer
    boundary; interface vertices of a subdomain space stay free.
    """

    def __init__(self, mesh: Mesh, region: int | None = None, degree: int = 1,
                 dirichlet: bool = True):
        if degree != 1:
            raise ValueError(f"unsupported degree {degree}")
        if region not in (None, 1, 2):
            raise ValueError(f"region must be None, 1 or 2, got {region!r}")
        self.mesh = mesh
        self.region = region
        self.degree = degree
        self.dirichlet = dirichlet

        if region is None:
            self.triangle_mask = np.ones(mesh.n_triangles, dtype=bool)
        else:
            self.triangle_mask = mesh.regions == region
        self.domain_vertices = np.unique(mesh.triangles[self.triangle_mask])
        in_domain = np.zeros(mesh.n_vertices, dtype=bool)
        in_domain[self.domain_vertices] = True
        constrained = in_domain & mesh.is_boundary_vertex if dirichlet \
            else np.zeros(mesh.n_vertices, dtype=bool)
        self.constrained_vertices = np.flatnonzero(constrained)
        self.free_vertices = np.flatnonzero(in_domain & ~constrained)
        dof = np.full(mesh.n_vertices, -1, dtype=np.int64)
        dof[self.free_vertices] = np.arange(len(self.free_vertices))
        self.dof_of_vertex = dof
        for a in (self.triangle_mask, self.domain_vertices, self.constrained_vertices,
                  self.free_vertices, self.dof_of_vertex):
            a.setflags(write=False)

    @property
    def dimension(self) -> int:
        return len(self.free_vertices)

    @property
    def triangles(self) -> np.ndarray:
        return np.flatnonzero(self.triangle_mask)

    def __repr__(self):
        where = "global" if self.region is None else f"region {self.region}"
        return f"FunctionSpace({where}, dimension={self.dimension})"

    def function(self, coefficients=None) -> "FeFunction":
        if coefficients is None:
            coefficients = np.zeros(self.dimension)
        return FeFunction(self, coefficients)


def build_space(mesh: Mesh, region: int | None = None, degree: int = 1,
                dirichlet: bool = True) -> FunctionSpace:
    return FunctionSpace(mesh, region, degree, dirichlet)


@dataclass(frozen=True)
class FeFunction:
    space: FunctionSpace
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float).reshape(-1)
        if len(c) != self.space.dimension:
            raise ValueError(f"expected {self.space.dimension} coefficients, got {len(c)}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @cached_property
    def vertex_values(self) -> np.ndarray:
        """Values at every mesh vertex; zero off the domain and on constrained vertices."""
        v = np.zeros(self.space.mesh.n_vertices)
        v[self.space.free_vertices] = self.coefficients
        return v

    def gradients(self) -> np.ndarray:
        """Constant gradient on each mesh triangle, shape (M, 2)."""
        g = element_gradients(self.space.mesh)
        vals = self.vertex_values[self.space.mesh.triangles]
        return np.einsum("tid,ti->td", g, vals)


@dataclass(frozen=True)
class CompositeField:
    """Piecewise discrete field: ``by_region[r]`` is used on region-``r`` triangles."""
    by_region: dict

    def piece(self, region: int) -> FeFunction:
        return self.by_region[region]

    @property
    def mesh(self) -> Mesh:
        return next(iter(self.by_region.values())).space.mesh


def _smooth(fn):
    return lambda x, y, region: fn(x, y)


@dataclass(frozen=True)
class AnalyticField:
    """Point-evaluable field with gradient.

    ``value(x, y, region)`` and ``grad(x, y, region)`` receive arrays of
    coordinates and the region label of the triangle being integrated, so
    fields with a kink across the interface are evaluated on the right side.
    ``grad`` returns a pair ``(dx, dy)``.
    """
    value: Callable
    grad: Callable | None = None
    piecewise: bool = True

    @classmethod
    def smooth(cls, value, grad=None) -> "AnalyticField":
        """Build from region-independent callables ``f(x, y)``."""
        return cls(_smooth(value), _smooth(grad) if grad is not None else None, False)

    @classmethod
    def zero(cls) -> "AnalyticField":
        z = lambda x, y: np.zeros_like(np.asarray(x, dtype=float))
        return cls.smooth(z, lambda x, y: (z(x, y), z(x, y)))

    def __call__(self, x, y, region: int = 1):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return np.broadcast_to(np.asarray(self.value(x, y, region), dtype=float), x.shape)

    def gradient(self, x, y, region: int = 1) -> tuple[np.ndarray, np.ndarray]:
        if self.grad is None:
            raise ValueError("field has no gradient")
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        gx, gy = self.grad(x, y, region)
        return (np.broadcast_to(np.asarray(gx, dtype=float), x.shape),
                np.broadcast_to(np.asarray(gy, dtype=float), x.shape))

    def gradient_mismatch(self, points, region: int = 1, step: float = 1e-5) -> float:
        """Largest relative gap between ``grad`` and central differences of ``value``.

        Relative to ``max(1, |grad|)`` at each point.
        """
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        x, y = p[:, 0], p[:, 1]
        fd_x = (self(x + step, y, region) - self(x - step, y, region)) / (2 * step)
        fd_y = (self(x, y + step, region) - self(x, y - step, region)) / (2 * step)
        gx, gy = self.gradient(x, y, region)
        scale = np.maximum(1.0, np.hypot(gx, gy))
        return float(np.max(np.hypot(fd_x - gx, fd_y - gy) / scale))

    def check_gradient(self, points, region: int = 1, step: float = 1e-5,
                       rtol: float = 1e-4) -> None:
        err = self.gradient_mismatch(points, region, step)
        if err > rtol:
            raise ValueError(f"gradient inconsistent with value on region {region} "
                             f"(relative mismatch {err:.3e})")


@dataclass(frozen=True)
class PiecewiseConstantCoefficient:
    region1: float
    region2: float

    def __post_init__(self):
        if self.region1 == 0 or self.region2 == 0:
            raise ValueError("coefficient values must be nonzero")

    def __getitem__(self, region: int) -> float:
        if region == 1:
            return float(self.region1)
        if region == 2:
            return float(self.region2)
        raise KeyError(region)

    def per_triangle(self, mesh: Mesh) -> np.ndarray:
        return np.where(mesh.regions == 1, float(self.region1), float(self.region2))

    def scaled(self, factor: float) -> "PiecewiseConstantCoefficient":
        return PiecewiseConstantCoefficient(factor * self.region1, factor * self.region2)


def _as_coefficient(c) -> PiecewiseConstantCoefficient:
    if isinstance(c, PiecewiseConstantCoefficient):
        return c
    return PiecewiseConstantCoefficient(float(c), float(c))


def element_gradients(mesh: Mesh) -> np.ndarray:
    """Gradients of the three barycentric coordinates on each triangle, (M, 3, 2)."""
    p = mesh.vertices[mesh.triangles]
    x, y = p[..., 0], p[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    twice = (2.0 * mesh.areas)[:, None]
    return np.stack([b / twice, c / twice], axis=2)


def restriction_map(global_space: FunctionSpace, sub_space: FunctionSpace) -> np.ndarray:
    """Global unknown index of each subdomain unknown.

    Entries are ``-1`` where the shared vertex is constrained globally; applying
    the map then yields 0 there.
    """
    if global_space.mesh is not sub_space.mesh:
        raise ValueError("spaces are built on different meshes")
    return global_space.dof_of_vertex[sub_space.free_vertices].copy()


def restrict(global_coefficients, rmap: np.ndarray) -> np.ndarray:
    g = np.asarray(global_coefficients, dtype=float)
    out = np.zeros(len(rmap))
    ok = rmap >= 0
    out[ok] = g[rmap[ok]]
    return out


def extend(sub_coefficients, rmap: np.ndarray, global_dimension: int) -> np.ndarray:
    """Transpose of :func:`restrict`."""
    out = np.zeros(global_dimension)
    ok = rmap >= 0
    np.add.at(out, rmap[ok], np.asarray(sub_coefficients, dtype=float)[ok])
    return out


def _selected(space: FunctionSpace, regions) -> np.ndarray:
    mask = space.triangle_mask.copy()
    if regions is not None:
        if isinstance(regions, int):
            regions = (regions,)
        mask &= np.isin(space.mesh.regions, tuple(regions))
    return np.flatnonzero(mask)


def interpolate(space: FunctionSpace, field: AnalyticField, region: int | None = None) -> FeFunction:
    """Nodal interpolant.  Vertices are evaluated with ``region`` or the space's region
    (default 1 on the global space)."""
    r = region if region is not None else (space.region or 1)
    p = space.mesh.vertices[space.free_vertices]
    return FeFunction(space, field(p[:, 0], p[:, 1], r))


def assemble_stiffness(space: FunctionSpace, coefficient, regions=None) -> linalg.SparseSymMatrix:
    """Matrix of ``int c grad(phi_i) . grad(phi_j)`` over the selected triangles.

    ``regions`` restricts the integration to triangles with those labels.  Every
    coefficient value met on the selected triangles must be positive.
    """
    coefficient = _as_coefficient(coefficient)
    mesh = space.mesh
    tris = _selected(space, regions)
    for r in np.unique(mesh.regions[tris]):
        if coefficient[int(r)] <= 0:
            raise NonCoerciveFormError(f"coefficient {coefficient[int(r)]:g} on region {int(r)}")
    g = element_gradients(mesh)[tris]
    c = coefficient.per_triangle(mesh)[tris] * mesh.areas[tris]
    local = c[:, None, None] * np.einsum("tid,tjd->tij", g, g)
    dofs = space.dof_of_vertex[mesh.triangles[tris]]
    rows = np.repeat(dofs, 3, axis=1).ravel()
    cols = np.tile(dofs, (1, 3)).ravel()
    vals = local.ravel()
    keep = (rows >= 0) & (cols >= 0)
    m = linalg.sp.csr_matrix((vals[keep], (rows[keep], cols[keep])),
                             shape=(space.dimension, space.dimension))
    return linalg.SparseSymMatrix(m)


def _quadrature(mesh: Mesh, tris: np.ndarray, rule: TriangleRule):
    pts = rule.points(mesh.vertices[mesh.triangles[tris]])
    return pts[..., 0], pts[..., 1]


def _eval_by_region(fn, mesh: Mesh, tris, x, y):
    out = np.empty_like(x)
    for r in (1, 2):
        sel = mesh.regions[tris] == r
        if sel.any():
            out[sel] = fn(x[sel], y[sel], r)
    return out


def assemble_load(space: FunctionSpace, field: AnalyticField, regions=None,
                  rule: TriangleRule | None = None) -> np.ndarray:
    """Vector of ``int f phi_i`` over the selected triangles (degree-5 rule by default)."""
    rule = rule or triangle_rule(5)
    mesh = space.mesh
    tris = _selected(space, regions)
    out = np.zeros(space.dimension)
    if not len(tris):
        return out
    x, y = _quadrature(mesh, tris, rule)
    f = _eval_by_region(field, mesh, tris, x, y)
    local = mesh.areas[tris, None] * np.einsum("tq,q,qi->ti", f, rule.weights, rule.barycentric)
    dofs = space.dof_of_vertex[mesh.triangles[tris]].ravel()
    keep = dofs >= 0
    np.add.at(out, dofs[keep], local.ravel()[keep])
    return out


def assemble_interface_mass(mesh: Mesh, vertices=None) -> linalg.SparseSymMatrix:
    """P1 mass matrix of the interface curve, indexed by ``vertices``.

    ``vertices`` lists the interface vertices that carry an unknown, in order
    (default: all interface vertices).  Edge contributions to other vertices
    are dropped, which is Dirichlet elimination on the trace space.
    """
    eids = mesh.interface_edge_ids
    if not len(eids):
        raise ValueError("empty interface")
    if vertices is None:
        vertices = mesh.interface_vertices
    vertices = np.asarray(vertices, dtype=np.int64)
    index = np.full(mesh.n_vertices, -1, dtype=np.int64)
    index[vertices] = np.arange(len(vertices))
    e = mesh.edges[eids]
    length = np.linalg.norm(mesh.vertices[e[:, 1]] - mesh.vertices[e[:, 0]], axis=1)
    local = length[:, None, None] / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
    dofs = index[e]
    rows = np.repeat(dofs, 2, axis=1).ravel()
    cols = np.tile(dofs, (1, 2)).ravel()
    vals = local.ravel()
    keep = (rows >= 0) & (cols >= 0)
    n = len(vertices)
    m = linalg.sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(n, n))
    return linalg.SparseSymMatrix(m)


def _gradient_load(space: FunctionSpace, metric: PiecewiseConstantCoefficient, w,
                   rule: TriangleRule) -> np.ndarray:
    """Entries ``int metric grad(w) . grad(phi_i)`` over the space's triangles."""
    mesh = space.mesh
    tris = space.triangles
    if isinstance(w, FeFunction):
        if w.space.mesh is not mesh:
            raise ValueError("function lives on a different mesh")
        gw = w.gradients()[tris]
        on_w = w.space.triangle_mask[tris]
        gw[~on_w] = 0.0
    else:
        x, y = _quadrature(mesh, tris, rule)
        gx = _eval_by_region(lambda a, b, r: w.gradient(a, b, r)[0], mesh, tris, x, y)
        gy = _eval_by_region(lambda a, b, r: w.gradient(a, b, r)[1], mesh, tris, x, y)
        gw = np.stack([gx @ rule.weights, gy @ rule.weights], axis=1)
    g = element_gradients(mesh)[tris]
    c = metric.per_triangle(mesh)[tris] * mesh.areas[tris]
    local = c[:, None] * np.einsum("tid,td->ti", g, gw)
    out = np.zeros(space.dimension)
    dofs = space.dof_of_vertex[mesh.triangles[tris]].ravel()
    keep = dofs >= 0
    np.add.at(out, dofs[keep], local.ravel()[keep])
    return out


def project_control(field, space: FunctionSpace, metric=1.0,
                    rule: TriangleRule | None = None,
                    factor: linalg.SpdFactorization | None = None) -> FeFunction:
    """Galerkin projection onto ``space`` in the energy inner product of ``metric``.

    ``field`` is an :class:`AnalyticField` with a gradient or an
    :class:`FeFunction` on the same mesh; the latter is integrated exactly.
    """
    metric = _as_coefficient(metric)
    if isinstance(field, FeFunction) and field.space is space:
        return FeFunction(space, field.coefficients.copy())
    rhs = _gradient_load(space, metric, field, rule or triangle_rule(5))
    if factor is None:
        factor = linalg.factorize_spd(assemble_stiffness(space, metric), name="projection metric")
    return FeFunction(space, factor.solve(rhs))


def error_norms(fe, exact: AnalyticField, rule: TriangleRule | None = None) -> tuple[float, float]:
    """Relative L2 and H1-seminorm errors of ``fe`` against ``exact``.

    ``fe`` is an :class:`FeFunction` (compared on its own triangles) or a
    :class:`CompositeField` (each region compared against its own piece).
    """
    rule = rule or triangle_rule(5)
    if isinstance(fe, FeFunction):
        pieces = {r: fe for r in (1, 2)}
        mask = fe.space.triangle_mask
        mesh = fe.space.mesh
    else:
        pieces = fe.by_region
        mesh = fe.mesh
        mask = np.isin(mesh.regions, tuple(pieces))
    tris = np.flatnonzero(mask)
    x, y = _quadrature(mesh, tris, rule)
    area = mesh.areas[tris]
    regs = mesh.regions[tris]
    uh = np.empty_like(x)
    guh = np.empty((len(tris), 2))
    for r, piece in pieces.items():
        sel = regs == r
        if not sel.any():
            continue
        vals = piece.vertex_values[mesh.triangles[tris[sel]]]
        uh[sel] = vals @ rule.barycentric.T
        guh[sel] = piece.gradients()[tris[sel]]
    u = _eval_by_region(exact, mesh, tris, x, y)
    gx = _eval_by_region(lambda a, b, r: exact.gradient(a, b, r)[0], mesh, tris, x, y)
    gy = _eval_by_region(lambda a, b, r: exact.gradient(a, b, r)[1], mesh, tris, x, y)

    def integral(v):
        return float(area @ (v @ rule.weights))

    l2_ref = integral(u ** 2)
    h1_ref = integral(gx ** 2 + gy ** 2)
    if l2_ref == 0.0 or h1_ref == 0.0:
        raise ValueError("exact solution has zero norm")
    l2 = integral((uh - u) ** 2)
    h1 = integral((guh[:, 0, None] - gx) ** 2 + (guh[:, 1, None] - gy) ** 2)
    return float(np.sqrt(l2 / l2_ref)), float(np.sqrt(h1 / h1_ref))


def composite_vertex_values(composite: CompositeField) -> np.ndarray:
    """Vertex values of a composite field.  Vertices shared by both regions get the
    mean of the two one-sided values."""
    mesh = composite.mesh
    total = np.zeros(mesh.n_vertices)
    count = np.zeros(mesh.n_vertices)
    for r, piece in composite.by_region.items():
        vs = mesh.region_vertices(r)
        total[vs] += piece.vertex_values[vs]
        count[vs] += 1
    return total / np.maximum(count, 1)


def format_solution(field) -> str:
    if isinstance(field, FeFunction):
        mesh, values = field.space.mesh, field.vertex_values
    else:
        mesh, values = field.mesh, composite_vertex_values(field)
    return "".join(f"{x:.17g} {y:.17g} {v:.17g}\n"
                   for (x, y), v in zip(mesh.vertices, values))


def export_solution(field, out: TextIO) -> None:
    """Write ``x y value`` per mesh vertex."""
    out.write(format_solution(field))
