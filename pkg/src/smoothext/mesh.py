"""Interface-conforming triangular meshes.

Every triangle carries a region label (1 or 2) and the interface is the set of
edges shared by triangles of different regions.  Three structured generators
cover the benchmark geometries: a split unit square, a disk inside an annulus
and a half-disk with a wedge-shaped subdomain at the origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "Mesh",
    "MeshError",
    "MeshParseError",
    "MeshQualityReport",
    "generate_square_split",
    "generate_disk_annulus",
    "generate_corner_halfdisk",
    "refine_uniform",
    "validate",
    "interface_edges",
    "read_mesh",
    "write_mesh",
    "GEOMETRIES",
]

GEOMETRIES = ("square-split", "disk-annulus", "corner-halfdisk")


class MeshError(ValueError):
    """Malformed mesh data (bad indices, labels or degenerate triangles)."""


class MeshParseError(MeshError):
    """Syntax error in the plain-text mesh format."""

    def __init__(self, lineno: int, token: str, message: str):
        self.lineno = lineno
        self.token = token
        super().__init__(f"line {lineno}: {message} (token {token!r})")


class Mesh:
    """Immutable triangle mesh with region labels and Dirichlet boundary edges.

    Parameters
    ----------
    vertices : (N, 2) array_like
    triangles : (M, 3) array_like of int
        Triangles with negative orientation are reordered to be counter-clockwise.
    regions : (M,) array_like of int
        Region label of each triangle, 1 or 2.
    boundary_edges : (B, 2) array_like of int
    geometry : str, optional
        Generator tag; enables the analytic region check in :func:`validate` and
        boundary projection in :func:`refine_uniform`.
    parents : (N, 2) array_like of int, optional
        For refined meshes, the two coarse vertices whose midpoint each vertex is
        (``(i, i)`` for inherited vertices).
    """

    def __init__(self, vertices, triangles, regions, boundary_edges=None,
                 geometry: str | None = None, parents=None):
        vertices = np.array(vertices, dtype=float).reshape(-1, 2)
        triangles = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        regions = np.array(regions, dtype=np.int64).reshape(-1)
        if boundary_edges is None:
            boundary_edges = np.zeros((0, 2), dtype=np.int64)
        boundary_edges = np.array(boundary_edges, dtype=np.int64).reshape(-1, 2)

        n = len(vertices)
        if len(regions) != len(triangles):
            raise MeshError("one region label per triangle is required")
        if triangles.size and (triangles.min() < 0 or triangles.max() >= n):
            raise MeshError("triangle vertex index out of range")
        if boundary_edges.size and (boundary_edges.min() < 0 or boundary_edges.max() >= n):
            raise MeshError("boundary edge vertex index out of range")
        bad = ~np.isin(regions, (1, 2))
        if bad.any():
            raise MeshError(f"region must be 1 or 2 (triangle {int(np.argmax(bad))} "
                            f"has {int(regions[bad][0])})")
        t = triangles
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise MeshError("degenerate triangle: repeated vertex index")
        if np.any(boundary_edges[:, 0] == boundary_edges[:, 1]):
            raise MeshError("degenerate boundary edge: repeated vertex index")
        if geometry is not None and geometry not in GEOMETRIES:
            raise MeshError(f"unknown geometry tag {geometry!r}")

        # canonical counter-clockwise orientation
        area2 = _signed_area2(vertices, triangles)
        flip = area2 < 0
        if flip.any():
            triangles = triangles.copy()
            triangles[flip, 1], triangles[flip, 2] = triangles[flip, 2], triangles[flip, 1].copy()

        if parents is not None:
            parents = np.array(parents, dtype=np.int64).reshape(n, 2)

        for a in (vertices, triangles, regions, boundary_edges, parents):
            if a is not None:
                a.setflags(write=False)
        self.vertices = vertices
        self.triangles = triangles
        self.regions = regions
        self.boundary_edges = boundary_edges
        self.geometry = geometry
        self.parents = parents

    def __repr__(self):
        return (f"Mesh(N={self.n_vertices}, triangles={self.n_triangles}, "
                f"geometry={self.geometry!r}, h={self.h:.4g})")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def areas(self) -> np.ndarray:
        return 0.5 * _signed_area2(self.vertices, self.triangles)

    @cached_property
    def h(self) -> float:
        """Meshsize: maximum over triangles of the longest edge."""
        if not self.n_triangles:
            return 0.0
        return float(self._edge_lengths.max())

    @cached_property
    def _edge_lengths(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return np.stack([np.linalg.norm(p[:, (i + 1) % 3] - p[:, i], axis=1)
                         for i in range(3)], axis=1)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges, sorted vertex pairs, shape (E, 2)."""
        return self._edge_structure[0]

    @cached_property
    def triangle_edges(self) -> np.ndarray:
        """Edge index of each triangle side (side i joins local vertices i, i+1)."""
        return self._edge_structure[1]

    @cached_property
    def _edge_structure(self):
        t = self.triangles
        raw = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        raw.sort(axis=1)
        edges, inv = np.unique(raw, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        return edges, inv.reshape(3, -1).T.copy()

    @cached_property
    def edge_triangle_count(self) -> np.ndarray:
        return np.bincount(self.triangle_edges.ravel(), minlength=len(self.edges))

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        """Sorted indices of vertices on a Dirichlet boundary edge."""
        return np.unique(self.boundary_edges)

    @cached_property
    def is_boundary_vertex(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_edges.ravel()] = True
        return mask

    @cached_property
    def interface_edge_ids(self) -> np.ndarray:
        """Indices into :attr:`edges` of edges shared by regions 1 and 2."""
        te = self.triangle_edges.ravel()
        reg = np.repeat(self.regions, 3)
        has1 = np.zeros(len(self.edges), dtype=bool)
        has2 = np.zeros(len(self.edges), dtype=bool)
        has1[te[reg == 1]] = True
        has2[te[reg == 2]] = True
        return np.flatnonzero(has1 & has2)

    @cached_property
    def interface_vertices(self) -> np.ndarray:
        return np.unique(self.edges[self.interface_edge_ids])

    def region_vertices(self, region: int) -> np.ndarray:
        return np.unique(self.triangles[self.regions == region])

    def region_area(self, region: int | None = None) -> float:
        if region is None:
            return float(self.areas.sum())
        return float(self.areas[self.regions == region].sum())


def _signed_area2(vertices, triangles):
    p = vertices[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]


# ---------------------------------------------------------------------------
# generators


def generate_square_split(n: int) -> Mesh:
    """Unit square cut at ``x = 1/2``; ``2n x 2n`` cells, two triangles each.

    Region 1 is ``x < 1/2``, region 2 is ``x > 1/2``.
    """
    n = _check_resolution(n, 1)
    m = 2 * n
    xs = np.linspace(0.0, 1.0, m + 1)
    xs[n] = 0.5
    X, Y = np.meshgrid(xs, xs)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (m + 1) + i

    i, j = np.meshgrid(np.arange(m), np.arange(m))
    i, j = i.ravel(), j.ravel()
    v00, v10, v11, v01 = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
    triangles = np.concatenate([np.column_stack([v00, v10, v11]),
                                np.column_stack([v00, v11, v01])])
    cell_region = np.where(i < n, 1, 2)
    regions = np.concatenate([cell_region, cell_region])

    k = np.arange(m)
    boundary = np.concatenate([
        np.column_stack([vid(k, 0), vid(k + 1, 0)]),
        np.column_stack([vid(m, k), vid(m, k + 1)]),
        np.column_stack([vid(m - k, m), vid(m - k - 1, m)]),
        np.column_stack([vid(0, m - k), vid(0, m - k - 1)]),
    ])
    return Mesh(vertices, triangles, regions, boundary, geometry="square-split")


def generate_disk_annulus(n: int) -> Mesh:
    """Unit disk (region 1) inside the annulus ``1 < |x| < 2`` (region 2).

    Rings sit at radii ``j/n`` for ``j = 0..2n`` and ring ``j`` carries ``6j``
    nodes placed exactly on the circle, so the interface ``|x| = 1`` is
    resolved by ``6n`` chords.
    """
    n = _check_resolution(n, 2)
    rings = [np.array([0])]
    coords = [np.zeros((1, 2))]
    count = 1
    for j in range(1, 2 * n + 1):
        m = 6 * j
        ang = 2.0 * np.pi * np.arange(m) / m
        coords.append((j / n) * np.column_stack([np.cos(ang), np.sin(ang)]))
        rings.append(np.arange(count, count + m))
        count += m
    vertices = np.concatenate(coords)

    tris, regs = [], []
    for j in range(1, 2 * n + 1):
        region = 1 if j <= n else 2
        outer = rings[j]
        m = len(outer)
        if j == 1:
            new = [(0, outer[k], outer[(k + 1) % m]) for k in range(m)]
        else:
            inner = rings[j - 1]
            mi = len(inner)
            new = _strip(np.append(inner, inner[0]), np.arange(mi + 1) / mi,
                         np.append(outer, outer[0]), np.arange(m + 1) / m)
        tris.extend(new)
        regs.extend([region] * len(new))

    outer = rings[-1]
    boundary = np.column_stack([outer, np.roll(outer, -1)])
    return Mesh(vertices, tris, regs, boundary, geometry="disk-annulus")


def generate_corner_halfdisk(n: int) -> Mesh:
    """Half-disk ``|x| < 1, 0 < arg x < pi`` split along the ray ``arg x = pi/4``.

    Region 1 is the wedge ``0 < arg x < pi/4``.  Ring ``j`` (radius ``j/n``)
    carries ``4j + 1`` nodes at angles ``k*pi/(4j)`` so that the interface ray
    and both straight boundary rays are unions of mesh edges.
    """
    n = _check_resolution(n, 2)
    rings = [np.array([0])]
    coords = [np.zeros((1, 2))]
    count = 1
    for j in range(1, n + 1):
        m = 4 * j
        ang = np.pi * np.arange(m + 1) / m
        coords.append((j / n) * np.column_stack([np.cos(ang), np.sin(ang)]))
        rings.append(np.arange(count, count + m + 1))
        count += m + 1
    vertices = np.concatenate(coords)
    # exact zeros on the straight boundary and exact diagonal on the interface
    for j in range(1, n + 1):
        r = j / n
        vertices[rings[j][0]] = (r, 0.0)
        vertices[rings[j][-1]] = (-r, 0.0)
        vertices[rings[j][2 * j]] = (0.0, r)
        vertices[rings[j][j]] = (r * math.sqrt(0.5), r * math.sqrt(0.5))

    tris, regs = [], []
    for j in range(1, n + 1):
        outer = rings[j]
        if j == 1:
            for k in range(4):
                tris.append((0, outer[k], outer[k + 1]))
                regs.append(1 if k == 0 else 2)
            continue
        inner = rings[j - 1]
        for region, (ai, bi, ao, bo) in ((1, (0, j - 1, 0, j)),
                                         (2, (j - 1, 4 * (j - 1), j, 4 * j))):
            ii = inner[ai:bi + 1]
            oo = outer[ao:bo + 1]
            new = _strip(ii, np.arange(ai, bi + 1) / (4 * (j - 1)),
                         oo, np.arange(ao, bo + 1) / (4 * j))
            tris.extend(new)
            regs.extend([region] * len(new))

    arc = rings[n]
    right = [rings[j][0] for j in range(n + 1)]
    left = [rings[j][-1] for j in range(n + 1)]
    boundary = ([(right[j], right[j + 1]) for j in range(n)]
                + list(zip(arc[:-1], arc[1:]))
                + [(left[j + 1], left[j]) for j in range(n)])
    return Mesh(vertices, tris, regs, boundary, geometry="corner-halfdisk")


def _strip(inner, inner_pos, outer, outer_pos):
    """Triangulate between two node chains ordered by the same angular parameter."""
    tris = []
    i = k = 0
    ni, no = len(inner) - 1, len(outer) - 1
    while i < ni or k < no:
        advance_outer = i == ni or (k < no and outer_pos[k + 1] <= inner_pos[i + 1])
        if advance_outer:
            tris.append((inner[i], outer[k], outer[k + 1]))
            k += 1
        else:
            tris.append((inner[i], outer[k], inner[i + 1]))
            i += 1
    return tris


def _check_resolution(n, minimum):
    if isinstance(n, bool) or int(n) != n:
        raise MeshError(f"resolution must be an integer, got {n!r}")
    n = int(n)
    if n < minimum:
        raise MeshError(f"resolution n must be >= {minimum}, got {n}")
    return n


# ---------------------------------------------------------------------------
# refinement


def refine_uniform(mesh: Mesh) -> Mesh:
    """Split every triangle into four through its edge midpoints.

    Midpoints of curved boundary or interface chords of the disk and half-disk
    generators are pushed back onto the corresponding circle.
    """
    edges = mesh.edges
    nv = mesh.n_vertices
    mid = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])

    radius = _circle_radius_per_edge(mesh)
    on_circle = ~np.isnan(radius)
    if on_circle.any():
        r = np.linalg.norm(mid[on_circle], axis=1)
        mid[on_circle] *= (radius[on_circle] / r)[:, None]

    vertices = np.concatenate([mesh.vertices, mid])
    te = mesh.triangle_edges + nv
    a, b, c = mesh.triangles.T
    m_ab, m_bc, m_ca = te[:, 0], te[:, 1], te[:, 2]
    triangles = np.concatenate([
        np.column_stack([a, m_ab, m_ca]),
        np.column_stack([m_ab, b, m_bc]),
        np.column_stack([m_ca, m_bc, c]),
        np.column_stack([m_ab, m_bc, m_ca]),
    ])
    regions = np.tile(mesh.regions, 4)

    be = mesh.boundary_edges
    be_ids = _edge_ids(mesh, be)
    bm = be_ids + nv
    boundary = np.column_stack([np.column_stack([be[:, 0], bm]),
                                np.column_stack([bm, be[:, 1]])]).reshape(-1, 2)

    parents = np.concatenate([np.repeat(np.arange(nv)[:, None], 2, axis=1), edges])
    return Mesh(vertices, triangles, regions, boundary,
                geometry=mesh.geometry, parents=parents)


def _edge_ids(mesh: Mesh, pairs: np.ndarray) -> np.ndarray:
    nv = mesh.n_vertices
    key = np.sort(pairs, axis=1)
    codes = mesh.edges[:, 0] * nv + mesh.edges[:, 1]
    q = key[:, 0] * nv + key[:, 1]
    pos = np.searchsorted(codes, q)
    if np.any(pos >= len(codes)) or np.any(codes[np.minimum(pos, len(codes) - 1)] != q):
        raise MeshError("boundary edge is not an edge of any triangle")
    return pos


def _circle_radius_per_edge(mesh: Mesh) -> np.ndarray:
    radius = np.full(len(mesh.edges), np.nan)
    if mesh.geometry not in ("disk-annulus", "corner-halfdisk"):
        return radius
    r = np.linalg.norm(mesh.vertices, axis=1)
    e = mesh.edges
    circles = (1.0, 2.0) if mesh.geometry == "disk-annulus" else (1.0,)
    candidates = np.zeros(len(e), dtype=bool)
    if mesh.geometry == "disk-annulus":
        candidates[mesh.interface_edge_ids] = True
    if len(mesh.boundary_edges):
        candidates[_edge_ids(mesh, mesh.boundary_edges)] = True
    for rc in circles:
        hit = candidates & (np.abs(r[e[:, 0]] - rc) < 1e-9) & (np.abs(r[e[:, 1]] - rc) < 1e-9)
        radius[hit] = rc
    return radius


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class MeshQualityReport:
    min_angle: float
    max_aspect_ratio: float
    conforming: bool
    interface_edge_count: int
    issues: tuple[str, ...] = field(default=())

    def lines(self) -> list[str]:
        out = [f"conforming={'true' if self.conforming else 'false'}",
               f"min_angle={self.min_angle:.6g}",
               f"max_aspect_ratio={self.max_aspect_ratio:.6g}",
               f"interface_edge_count={self.interface_edge_count}"]
        out += [f"issue={msg}" for msg in self.issues]
        return out


def _region_indicator(geometry, pts):
    """Signed indicator: negative inside region 1, positive inside region 2."""
    x, y = pts[..., 0], pts[..., 1]
    if geometry == "square-split":
        return x - 0.5
    if geometry == "disk-annulus":
        return np.hypot(x, y) - 1.0
    if geometry == "corner-halfdisk":
        # sign of the angle to the ray arg = pi/4, valid on the upper half-plane
        return y - x
    return None


def validate(mesh: Mesh) -> MeshQualityReport:
    """Check mesh invariants and report quality figures.

    Violations are listed in ``issues``; ``conforming`` is false when some
    triangle straddles the analytic interface of its generator, carries the
    wrong region label, or the interface is not made of simple polylines.
    Malformed index data raises :class:`MeshError` at construction time.
    """
    issues = []
    conforming = True
    areas = mesh.areas
    if np.any(areas <= 0):
        issues.append(f"{int(np.sum(areas <= 0))} triangle(s) with nonpositive area")

    L = mesh._edge_lengths
    p = mesh.vertices[mesh.triangles]
    angles = []
    for i in range(3):
        u = p[:, (i + 1) % 3] - p[:, i]
        v = p[:, (i + 2) % 3] - p[:, i]
        cosang = np.einsum("ij,ij->i", u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        angles.append(np.arccos(np.clip(cosang, -1.0, 1.0)))
    min_angle = float(np.min(angles)) if mesh.n_triangles else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        s = 0.5 * L.sum(axis=1)
        inradius = areas / s
        circumradius = L.prod(axis=1) / (4.0 * areas)
        aspect = circumradius / (2.0 * inradius)
    max_aspect = float(np.max(aspect)) if mesh.n_triangles else 1.0

    count = mesh.edge_triangle_count
    if np.any(count > 2):
        issues.append(f"{int(np.sum(count > 2))} edge(s) shared by more than two triangles")
        conforming = False
    if len(mesh.boundary_edges):
        ids = _edge_ids(mesh, mesh.boundary_edges)
        if np.any(count[ids] != 1):
            issues.append("boundary edge belonging to more than one triangle")
        listed = np.zeros(len(mesh.edges), dtype=bool)
        listed[ids] = True
        if np.any((count == 1) & ~listed):
            issues.append(f"{int(np.sum((count == 1) & ~listed))} outer edge(s) without a boundary label")
    elif np.any(count == 1):
        issues.append("mesh has no boundary edges")

    iface = mesh.edges[mesh.interface_edge_ids]
    if len(iface):
        degree = np.bincount(iface.ravel(), minlength=mesh.n_vertices)
        if degree.max() > 2:
            issues.append("interface edges do not form simple polylines")
            conforming = False

    phi = _region_indicator(mesh.geometry, mesh.vertices)
    if phi is not None:
        scale = max(1.0, float(np.abs(mesh.vertices).max()))
        tol = 1e-10 * scale
        tphi = phi[mesh.triangles]
        straddle = (tphi.max(axis=1) > tol) & (tphi.min(axis=1) < -tol)
        centroid = _region_indicator(mesh.geometry, p.mean(axis=1))
        mislabeled = np.where(mesh.regions == 1, centroid > tol, centroid < -tol)
        if straddle.any():
            issues.append(f"{int(straddle.sum())} triangle(s) cross the interface")
            conforming = False
        if mislabeled.any():
            issues.append(f"{int(mislabeled.sum())} triangle(s) labeled with the wrong region")
            conforming = False

    return MeshQualityReport(min_angle=min_angle, max_aspect_ratio=max_aspect,
                             conforming=conforming,
                             interface_edge_count=len(mesh.interface_edge_ids),
                             issues=tuple(issues))


def interface_edges(mesh: Mesh) -> list[tuple[tuple[int, int], float]]:
    """Edges shared by a region-1 and a region-2 triangle, with their lengths."""
    e = mesh.edges[mesh.interface_edge_ids]
    lengths = np.linalg.norm(mesh.vertices[e[:, 1]] - mesh.vertices[e[:, 0]], axis=1)
    return [((int(a), int(b)), float(length)) for (a, b), length in zip(e, lengths)]


# ---------------------------------------------------------------------------
# text format


def write_mesh(mesh: Mesh) -> str:
    out = []
    if mesh.geometry:
        out.append(f"# geometry {mesh.geometry}")
    out.append(f"vertices {mesh.n_vertices}")
    out.extend(f"{x:.17g} {y:.17g}" for x, y in mesh.vertices.tolist())
    out.append(f"triangles {mesh.n_triangles}")
    out.extend(f"{i} {j} {k} {r}" for (i, j, k), r in
               zip(mesh.triangles.tolist(), mesh.regions.tolist()))
    out.append(f"boundary_edges {len(mesh.boundary_edges)}")
    out.extend(f"{i} {j} dirichlet" for i, j in mesh.boundary_edges.tolist())
    return "\n".join(out) + "\n"


def read_mesh(text: str) -> Mesh:
    """Parse the plain-text mesh format written by :func:`write_mesh`."""
    geometry = None
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith("#"):
            parts = stripped[1:].split()
            if len(parts) == 2 and parts[0] == "geometry" and parts[1] in GEOMETRIES:
                geometry = parts[1]
            continue
        if stripped:
            lines.append((lineno, stripped.split()))

    pos = 0

    def header(name):
        nonlocal pos
        if pos >= len(lines):
            raise MeshParseError(len(text.splitlines()) + 1, "", f"expected '{name} <count>'")
        lineno, tok = lines[pos]
        if tok[0] != name or len(tok) != 2:
            raise MeshParseError(lineno, tok[0], f"expected '{name} <count>'")
        count = _parse_int(lineno, tok[1])
        if count < 0:
            raise MeshParseError(lineno, tok[1], "negative count")
        pos += 1
        return count

    def body(count, width, convert):
        nonlocal pos
        rows = []
        for _ in range(count):
            if pos >= len(lines):
                raise MeshParseError(len(text.splitlines()) + 1, "", "unexpected end of file")
            lineno, tok = lines[pos]
            if len(tok) != width:
                raise MeshParseError(lineno, tok[0], f"expected {width} fields, got {len(tok)}")
            rows.append(convert(lineno, tok))
            pos += 1
        return rows

    def vertex(lineno, tok):
        return [_parse_float(lineno, t) for t in tok]

    def triangle(lineno, tok):
        return [_parse_int(lineno, t) for t in tok]

    def bedge(lineno, tok):
        if tok[2] != "dirichlet":
            raise MeshParseError(lineno, tok[2], "unknown boundary label")
        return [_parse_int(lineno, tok[0]), _parse_int(lineno, tok[1])]

    verts = body(header("vertices"), 2, vertex)
    tris = body(header("triangles"), 4, triangle)
    edges = body(header("boundary_edges"), 3, bedge)
    if pos < len(lines):
        lineno, tok = lines[pos]
        raise MeshParseError(lineno, tok[0], "unexpected content after boundary edges")

    tris = np.array(tris, dtype=np.int64).reshape(-1, 4)
    return Mesh(verts, tris[:, :3], tris[:, 3], edges, geometry=geometry)


def _parse_int(lineno, token):
    try:
        return int(token)
    except ValueError:
        raise MeshParseError(lineno, token, "expected an integer") from None


def _parse_float(lineno, token):
    try:
        return float(token)
    except ValueError:
        raise MeshParseError(lineno, token, "expected a number") from None
