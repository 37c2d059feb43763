"""Manufactured-solution benchmarks and convergence studies.

Three cases: a flat interface in the unit square, a circular interface (unit
disk inside the annulus of radius 2) and a half-disk with an interface ray at
angle pi/4 meeting the straight boundary at the corner.  Each case checks its
own exact solution and hand-derived source term when it is built.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analysis, fem, mesh as meshmod, optimize, transmission as tm
from .fem import AnalyticField
from .quadrature import TriangleRule, triangle_rule

__all__ = [
    "ManufacturedCase",
    "LevelResult",
    "ConvergenceReport",
    "RateFit",
    "case_flat",
    "case_circular",
    "case_corner",
    "make_case",
    "level_meshes",
    "prolong",
    "run_level",
    "run_convergence",
    "fit_rate",
    "LevelError",
    "CASES",
]

CASES = ("flat", "circular", "corner")
_VERTEX_CAP = 50_000


@dataclass(frozen=True)
class ManufacturedCase:
    name: str
    kappa: float
    exact: AnalyticField
    source: AnalyticField
    geometry: Callable[[int], meshmod.Mesh]
    base_n: int
    extension_source: int
    schedule: optimize.Schedule
    q_interval: tuple[float, float]
    eps1: float = 1.0
    lambda0: float | None = None
    error_rule: TriangleRule = field(default_factory=lambda: triangle_rule(5))
    sampler: Callable | None = None  # rng -> dict of sample points, see _check
    fd_tol: float = 1e-5

    @property
    def eps2(self) -> float:
        return self.kappa * self.eps1

    def eps(self, region: int) -> float:
        return self.eps1 if region == 1 else self.eps2

    def problem(self, eps_ext: float | None = None) -> tm.TransmissionProblem:
        return tm.TransmissionProblem(self.eps1, self.eps2, self.source,
                                      self.extension_source, eps_ext)

    def check(self, seed: int = 0, n_points: int = 50) -> dict:
        """Continuity, flux continuity, boundary values and the source-term oracle.

        Returns the worst discrepancy of each check; raises ``ValueError`` if
        any exceeds its tolerance.
        """
        rng = np.random.default_rng(seed)
        pts = self.sampler(rng, n_points)
        u = self.exact
        worst = {}

        x, y, nx, ny = pts["interface"]
        u1, u2 = u(x, y, 1), u(x, y, 2)
        scale = max(1.0, float(np.max(np.abs(u1))))
        worst["continuity"] = float(np.max(np.abs(u1 - u2))) / scale
        g1 = u.gradient(x, y, 1)
        g2 = u.gradient(x, y, 2)
        flux1 = self.eps(1) * (g1[0] * nx + g1[1] * ny)
        flux2 = self.eps(2) * (g2[0] * nx + g2[1] * ny)
        fscale = max(1.0, float(np.max(np.abs(flux1))))
        worst["flux"] = float(np.max(np.abs(flux1 - flux2))) / fscale

        bx, by, br = pts["boundary"]
        worst["boundary"] = float(max(np.max(np.abs(u(bx[br == r], by[br == r], r)), initial=0.0)
                                      for r in (1, 2))) / scale

        fd = 0.0
        step = 1e-4
        for r in (1, 2):
            px, py = pts["interior"][r]
            lap = (u(px + step, py, r) + u(px - step, py, r) + u(px, py + step, r)
                   + u(px, py - step, r) - 4.0 * u(px, py, r)) / step ** 2
            f_fd = -self.eps(r) * lap
            f = self.source(px, py, r)
            fd = max(fd, float(np.max(np.abs(f - f_fd)) / max(1.0, np.max(np.abs(f)))))
        worst["source"] = fd
        limits = {"continuity": 1e-10, "flux": 1e-8, "boundary": 1e-10, "source": self.fd_tol}
        for key, lim in limits.items():
            if not worst[key] <= lim:
                raise ValueError(f"{self.name} case fails its {key} check: {worst[key]:.3e} > {lim:g}")
        return worst


# ---------------------------------------------------------------------------
# flat interface, unit square split at x = 1/2


def case_flat(kappa: float = -1.001, schedule: optimize.Schedule | None = None,
              base_n: int = 4) -> ManufacturedCase:
    if kappa == -1:
        raise ValueError("kappa must differ from -1")
    a = 1.0 / (2.0 * (kappa + 1.0))
    b = -(kappa + 2.0) / (2.0 * (kappa + 1.0))
    pi = math.pi
    eps = {1: 1.0, 2: kappa}

    def value(x, y, r):
        if r == 1:
            return (x * x + b * x) * np.sin(pi * y)
        return a * (x - 1.0) * np.sin(pi * y)

    def grad(x, y, r):
        if r == 1:
            return (2 * x + b) * np.sin(pi * y), (x * x + b * x) * pi * np.cos(pi * y)
        return a * np.sin(pi * y) + 0 * x, a * (x - 1.0) * pi * np.cos(pi * y)

    def source(x, y, r):
        if r == 1:
            return -eps[1] * (2.0 - pi ** 2 * (x * x + b * x)) * np.sin(pi * y)
        return eps[2] * pi ** 2 * a * (x - 1.0) * np.sin(pi * y)

    def sampler(rng, n):
        t = rng.uniform(0, 1, n)
        side = rng.integers(0, 4, n)
        s = rng.uniform(0, 1, n)
        bx = np.select([side == 0, side == 1, side == 2], [s, np.ones(n), s], np.zeros(n))
        by = np.select([side == 0, side == 1, side == 2], [np.zeros(n), s, np.ones(n)], s)
        m = 0.01
        return {
            "interface": (np.full(n, 0.5), t, np.ones(n), np.zeros(n)),
            "boundary": (bx, by, np.where(bx < 0.5, 1, 2)),
            "interior": {1: (rng.uniform(m, 0.5 - m, n), rng.uniform(m, 1 - m, n)),
                         2: (rng.uniform(0.5 + m, 1 - m, n), rng.uniform(m, 1 - m, n))},
        }

    q_int = optimize.recommended_q(1.0, 1.0)
    case = ManufacturedCase(
        "flat", float(kappa), AnalyticField(value, grad), AnalyticField(source),
        meshmod.generate_square_split, base_n, 1,
        schedule or optimize.Schedule(0.002, 2.0, q_int), q_int, sampler=sampler)
    case.check()
    return case


# ---------------------------------------------------------------------------
# circular interface, unit disk inside the annulus 1 < r < 2


def case_circular(kappa: float = -2.0, schedule: optimize.Schedule | None = None,
                  base_n: int = 4) -> ManufacturedCase:
    verdict = analysis.annulus_wellposed(kappa)
    if not verdict.well_posed:
        raise ValueError(f"forbidden contrast for the annulus: kappa={kappa} "
                         f"(distance {verdict.distance:.3g})")
    a = -1.0 / kappa
    b = a - 1.0
    eps = {1: 1.0, 2: kappa}

    def value(x, y, r):
        rad = np.hypot(x, y)
        if r == 1:
            return rad ** 2 + b
        return a * (rad - 2.0) ** 2

    def grad(x, y, r):
        if r == 1:
            return 2 * x, 2 * y
        rad = np.hypot(x, y)
        c = 2 * a * (rad - 2.0) / rad
        return c * x, c * y

    def source(x, y, r):
        if r == 1:
            return -4.0 * eps[1] + 0 * x
        return -4.0 * a * eps[2] * (1.0 - 1.0 / np.hypot(x, y))

    def sampler(rng, n):
        th = rng.uniform(0, 2 * np.pi, n)
        c, s = np.cos(th), np.sin(th)
        r1 = np.sqrt(rng.uniform(0.01, 0.98, n))
        r2 = np.sqrt(rng.uniform(1.02, 3.96, n))
        th1, th2 = rng.uniform(0, 2 * np.pi, (2, n))
        return {
            "interface": (c, s, c, s),
            "boundary": (2 * c, 2 * s, np.full(n, 2)),
            "interior": {1: (r1 * np.cos(th1), r1 * np.sin(th1)),
                         2: (r2 * np.cos(th2), r2 * np.sin(th2))},
        }

    q_int = optimize.recommended_q(1.0, 1.0)
    case = ManufacturedCase(
        "circular", float(kappa), AnalyticField(value, grad), AnalyticField(source),
        meshmod.generate_disk_annulus, base_n, 1,
        schedule or optimize.Schedule(0.002, 2.0, q_int), q_int, sampler=sampler)
    case.check()
    return case


# ---------------------------------------------------------------------------
# corner: half-disk, interface ray at angle pi/4


_CORNER_SCHEDULES = {-5.0: (1.0, 1.3), -3.1: (1.0, 0.4)}


def case_corner(kappa: float = -5.0, schedule: optimize.Schedule | None = None,
                base_n: int = 8) -> ManufacturedCase:
    """Singular solution ``(1 - r) r**lam0 Theta(theta)`` of the corner problem.

    Away from the two contrasts with a preset schedule, the default is
    ``C = 1`` and ``q`` at the middle of the admissible interval.
    """
    verdict = analysis.corner_wellposed(kappa)
    if not verdict.well_posed:
        raise ValueError(f"critical interval: kappa={kappa} lies in [-3, -1]")
    lam = analysis.corner_lambda0(kappa)
    eps = {1: 1.0, 2: kappa}
    s1 = math.sin(lam * math.pi / 4)
    s2 = math.sin(3 * lam * math.pi / 4)
    pi = math.pi

    def angular(theta, r):
        if r == 1:
            return np.sin(lam * theta) / s1, lam * np.cos(lam * theta) / s1
        return np.sin(lam * (pi - theta)) / s2, -lam * np.cos(lam * (pi - theta)) / s2

    def polar(x, y):
        rad = np.hypot(x, y)
        theta = np.arctan2(y, x)
        # points on the negative x-axis belong to theta = pi
        theta = np.where(theta < -pi / 2, theta + 2 * pi, theta)
        return rad, theta

    def value(x, y, r):
        rad, theta = polar(x, y)
        T, _ = angular(theta, r)
        return (1.0 - rad) * rad ** lam * T

    def grad(x, y, r):
        rad, theta = polar(x, y)
        T, dT = angular(theta, r)
        with np.errstate(divide="ignore", invalid="ignore"):
            ur = (lam * rad ** (lam - 1.0) - (lam + 1.0) * rad ** lam) * T
            ut = (1.0 - rad) * rad ** (lam - 1.0) * dT
        c, s = np.cos(theta), np.sin(theta)
        return ur * c - ut * s, ur * s + ut * c

    def source(x, y, r):
        rad, theta = polar(x, y)
        T, _ = angular(theta, r)
        with np.errstate(divide="ignore"):
            return eps[r] * (2.0 * lam + 1.0) * rad ** (lam - 1.0) * T

    def sampler(rng, n):
        d = np.sqrt(0.5)
        t = rng.uniform(0.05, 1.0, n)
        th = rng.uniform(0, pi, n)
        s = rng.uniform(-1, 1, n)
        bx = np.concatenate([np.cos(th), s])
        by = np.concatenate([np.sin(th), np.zeros(n)])
        br = np.where(np.arctan2(by, bx) < pi / 4, 1, 2)
        br[n:] = np.where(s > 0, 1, 2)
        ri = np.sqrt(rng.uniform(0.05 ** 2, 0.98 ** 2, (2, n)))
        th1 = rng.uniform(0.02, pi / 4 - 0.02, n)
        th2 = rng.uniform(pi / 4 + 0.02, pi - 0.02, n)
        return {
            "interface": (t * d, t * d, -d * np.ones(n), d * np.ones(n)),
            "boundary": (bx, by, br),
            "interior": {1: (ri[0] * np.cos(th1), ri[0] * np.sin(th1)),
                         2: (ri[1] * np.cos(th2), ri[1] * np.sin(th2))},
        }

    q_int = optimize.recommended_q(lam, 1.0)
    if schedule is None:
        C, q = _CORNER_SCHEDULES.get(float(kappa), (1.0, 0.5 * q_int[1]))
        schedule = optimize.Schedule(C, q, q_int)
    case = ManufacturedCase(
        "corner", float(kappa), AnalyticField(value, grad), AnalyticField(source),
        meshmod.generate_corner_halfdisk, base_n, 2, schedule, q_int, lambda0=lam,
        error_rule=triangle_rule(7), sampler=sampler, fd_tol=1e-4)
    case.check()
    return case


def make_case(name: str, kappa: float | None = None, **kw) -> ManufacturedCase:
    builders = {"flat": case_flat, "circular": case_circular, "corner": case_corner}
    if name not in builders:
        raise ValueError(f"unknown case {name!r}; choose from {', '.join(CASES)}")
    if kappa is not None:
        kw["kappa"] = kappa
    return builders[name](**kw)


# ---------------------------------------------------------------------------
# convergence studies


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    max_residual: float


def fit_rate(pairs) -> RateFit:
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError("need at least 3 points to fit a rate")
    h, e = np.array(pairs, dtype=float).T
    if np.any(h <= 0) or np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise ValueError("meshsizes and errors must be positive")
    lh, le = np.log(h), np.log(e)
    slope, intercept = np.polyfit(lh, le, 1)
    resid = le - (slope * lh + intercept)
    return RateFit(float(slope), float(intercept), float(np.max(np.abs(resid))))


class LevelError(RuntimeError):
    def __init__(self, level: int, cause: Exception):
        self.level = level
        self.cause = cause
        super().__init__(f"level {level}: {cause}")


@dataclass(frozen=True)
class LevelResult:
    level: int
    h: float
    N: int
    lam: float
    iters: int
    cost: float
    misfit: float
    rel_l2: float
    rel_h1: float
    reason: str
    control: np.ndarray = field(repr=False, compare=False, default=None)


@dataclass
class ConvergenceReport:
    case: str
    kappa: float
    levels: list
    rate_l2: RateFit
    rate_h1: RateFit

    HEADER = "level,h,N,lambda,iters,cost,misfit,relL2,relH1"

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(self.HEADER + "\n")
        for r in self.levels:
            out.write(f"{r.level},{r.h:.17g},{r.N},{r.lam:.17g},{r.iters},{r.cost:.17g},"
                      f"{r.misfit:.17g},{r.rel_l2:.17g},{r.rel_h1:.17g}\n")
        out.write(f"# rate_L2={self.rate_l2.slope:.6f} rate_H1={self.rate_h1.slope:.6f} "
                  f"residual_L2={self.rate_l2.max_residual:.3g} "
                  f"residual_H1={self.rate_h1.max_residual:.3g}\n")
        return out.getvalue()

    def errors(self, which: str = "l2") -> np.ndarray:
        return np.array([getattr(r, f"rel_{which}") for r in self.levels])


def level_meshes(case: ManufacturedCase, levels: int, base_n: int | None = None) -> list:
    """Nested meshes: the generator at ``base_n`` followed by uniform refinements.

    Refinement stops early if the next mesh would exceed about 5e4 vertices.
    """
    meshes = [case.geometry(base_n or case.base_n)]
    while len(meshes) < levels:
        nxt = meshmod.refine_uniform(meshes[-1])
        if nxt.n_vertices > _VERTEX_CAP:
            raise ValueError(f"level {len(meshes)} would have {nxt.n_vertices} vertices, "
                             f"above the cap of {_VERTEX_CAP}")
        meshes.append(nxt)
    return meshes


def prolong(values: np.ndarray, fine: meshmod.Mesh) -> np.ndarray:
    """Coarse vertex values onto a refined mesh by averaging each vertex's parents."""
    if fine.parents is None:
        raise ValueError("mesh carries no refinement parents")
    return 0.5 * (values[fine.parents[:, 0]] + values[fine.parents[:, 1]])


def run_level(case: ManufacturedCase, mesh: meshmod.Mesh, level: int = 0,
              opts: optimize.OptimizerOptions | None = None, w0=None) -> LevelResult:
    try:
        ops = tm.prepare(case.problem(), mesh)
        lam = optimize.lambda_of(case.schedule, mesh.h)
        w, state, hist = optimize.minimize(ops, lam, w0, opts)
        l2, h1 = fem.error_norms(tm.composite(ops, state), case.exact, case.error_rule)
    except Exception as exc:
        raise LevelError(level, exc) from exc
    return LevelResult(level, mesh.h, mesh.n_vertices, lam, hist.iterations,
                       hist.rows[-1][1], tm.misfit(ops, state), l2, h1, hist.reason,
                       ops.control_space.function(w).vertex_values)


def run_convergence(case: ManufacturedCase, levels: int = 4, base_n: int | None = None,
                    opts: optimize.OptimizerOptions | None = None,
                    warm_start: bool = False, jobs: int = 1) -> ConvergenceReport:
    """Solve on a ladder of nested meshes and fit convergence rates.

    With ``warm_start`` each level starts from the previous control prolonged to
    the finer mesh.  It is off by default: the prolonged control carries
    components the misfit hardly sees, which only the small regularization
    term removes, and the zero start needs fewer iterations on every case
    tried.  ``jobs > 1`` runs the levels concurrently, each from the zero
    control, so warm starting is skipped.
    """
    if levels < 3:
        raise ValueError("need >= 3 levels")
    meshes = level_meshes(case, levels, base_n)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda im: run_level(case, im[1], im[0], opts),
                                    enumerate(meshes)))
    else:
        results = []
        prev = None
        for i, m in enumerate(meshes):
            w0 = None
            if warm_start and prev is not None:
                space = fem.build_space(m, region=3 - case.extension_source)
                w0 = prolong(prev.control, m)[space.free_vertices]
            prev = run_level(case, m, i, opts, w0)
            results.append(prev)
    rl2 = fit_rate([(r.h, r.rel_l2) for r in results])
    rh1 = fit_rate([(r.h, r.rel_h1) for r in results])
    return ConvergenceReport(case.name, case.kappa, results, rl2, rh1)
