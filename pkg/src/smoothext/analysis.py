"""Closed-form well-posedness checks for the annulus and the pi/4 corner.

The annulus (inner radius 1, outer radius 2) is ill-posed exactly for contrasts
in ``{-1}`` and a sequence accumulating at -1.  The corner problem is well
posed off the closed interval [-3, -1]; there the regularity exponent is the
smallest positive root of the corner dispersion relation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

__all__ = [
    "ContrastDiagnostics",
    "WellPosednessVerdict",
    "PoleError",
    "CriticalIntervalError",
    "NoRootError",
    "contrast_diagnostics",
    "annulus_forbidden_value",
    "annulus_forbidden_set",
    "annulus_wellposed",
    "corner_dispersion",
    "corner_lambda0",
    "corner_wellposed",
    "N_CUT",
    "WELL_POSED",
    "ILL_POSED",
    "CRITICAL",
]

WELL_POSED = "well-posed"
ILL_POSED = "ill-posed"
CRITICAL = "critical-interval"

N_CUT = 30
CORNER_INTERVAL = (-3.0, -1.0)
_POLE = 2.0 / 3.0
_ROOT_TOL = 1e-12


class PoleError(ArithmeticError):
    """The dispersion function was evaluated at one of its poles."""


class CriticalIntervalError(ValueError):
    pass


class NoRootError(ValueError):
    pass


@dataclass(frozen=True)
class ContrastDiagnostics:
    """Contrasts of a coefficient with ``eps1`` in [eps1_min, eps1_max] > 0 and
    ``eps2`` in [eps2_min, eps2_max] < 0."""
    eps1_min: float
    eps1_max: float
    eps2_min: float
    eps2_max: float

    @property
    def kappa1(self) -> float:
        """Ratio of the smallest positive magnitude to the largest negative magnitude."""
        return self.eps1_min / abs(self.eps2_min)

    @property
    def kappa2(self) -> float:
        return abs(self.eps2_max) / self.eps1_max

    @property
    def kappa(self) -> float:
        """Signed contrast ``eps2 / eps1``; only defined for constant pieces."""
        if self.eps1_min != self.eps1_max or self.eps2_min != self.eps2_max:
            raise ValueError("signed contrast needs piecewise constant coefficients")
        return self.eps2_min / self.eps1_min


def contrast_diagnostics(eps1: float, eps2: float) -> ContrastDiagnostics:
    if not eps1 > 0 or not eps2 < 0:
        raise ValueError("need eps1 > 0 and eps2 < 0")
    return ContrastDiagnostics(eps1, eps1, eps2, eps2)


@dataclass(frozen=True)
class WellPosednessVerdict:
    geometry: str  # "annulus" or "corner-pi/4"
    kappa: float
    verdict: str
    distance: float
    sigma_d: float | None = None

    @property
    def well_posed(self) -> bool:
        return self.verdict == WELL_POSED

    def lines(self) -> list[str]:
        out = [f"geometry={self.geometry}", f"kappa={self.kappa:.17g}",
               f"verdict={self.verdict}", f"distance={self.distance:.12g}"]
        if self.sigma_d is not None:
            out.append(f"sigma_D={self.sigma_d:.10f}")
        return out


def annulus_forbidden_value(n: int) -> float:
    """``-(1 - 4**-n) / (1 + 4**-n)``; rounds to -1.0 in double precision from n = 27 on."""
    t = 0.25 ** n
    return -(1.0 - t) / (1.0 + t)


def annulus_forbidden_set(n_max: int) -> list[float]:
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    return [annulus_forbidden_value(n) for n in range(1, n_max + 1)]


def annulus_wellposed(kappa: float, tol: float = 1e-9) -> WellPosednessVerdict:
    """Ill-posed when ``kappa`` is within ``tol`` of -1 or of a forbidden value.

    Forbidden values beyond ``N_CUT`` lie closer to -1 than ``2**-61`` and are
    covered by the distance to -1.
    """
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    if not tol > 0:
        raise ValueError("tol must be positive")
    candidates = [-1.0] + annulus_forbidden_set(N_CUT)
    dist = min(abs(kappa - s) for s in candidates)
    verdict = ILL_POSED if dist <= tol else WELL_POSED
    return WellPosednessVerdict("annulus", float(kappa), verdict, float(dist))


def corner_dispersion(lam: float) -> float:
    """``-tan(3 lam pi/4) / tan(lam pi/4)``, with the limit -3 at ``lam -> 0``."""
    if abs(lam) < 1e-12:
        return -3.0
    a = 3.0 * lam * math.pi / 4.0
    b = lam * math.pi / 4.0
    ca, cb, sb = math.cos(a), math.cos(b), math.sin(b)
    # poles of tan(3 lam pi/4) and zeros of tan(lam pi/4)
    if abs(ca) < 1e-15 or abs(sb) < 1e-15:
        raise PoleError(f"dispersion relation has a pole at lambda={lam}")
    return -(math.sin(a) / ca) * (cb / sb)


def _bisect(g, lo, hi, atol):
    glo, ghi = g(lo), g(hi)
    # an end point that solves the relation to rounding counts as a root;
    # lambda = 1 is one for kappa = 1
    if abs(glo) <= atol:
        return lo
    if abs(ghi) <= atol:
        return hi
    if glo * ghi > 0:
        return None
    return brentq(g, lo, hi, xtol=_ROOT_TOL, maxiter=500)


def corner_lambda0(kappa: float) -> float:
    """Smallest root in (0, 1] of ``corner_dispersion(lam) = kappa``.

    The search stays in (0, 1] because the regularity exponent lives there.
    The interval is split at the pole 2/3 and each piece is bracketed
    separately.
    """
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    if CORNER_INTERVAL[0] <= kappa <= CORNER_INTERVAL[1]:
        raise CriticalIntervalError(f"critical interval: kappa={kappa} lies in [-3, -1]")
    g = lambda lam: corner_dispersion(lam) - kappa
    eps = 1e-13
    for lo, hi in ((eps, _POLE - eps), (_POLE + eps, 1.0)):
        root = _bisect(g, lo, hi, 1e-12 * max(1.0, abs(kappa)))
        if root is not None:
            return float(root)
    raise NoRootError(f"no root of the dispersion relation in (0, 1] for kappa={kappa}")


def corner_wellposed(kappa: float) -> WellPosednessVerdict:
    """Well-posed iff ``kappa`` is outside [-3, -1].

    The regularity exponent is attached when the dispersion relation has a
    root in (0, 1]; otherwise it is capped at 1.
    """
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    lo, hi = CORNER_INTERVAL
    if lo <= kappa <= hi:
        dist = min(kappa - lo, hi - kappa)
        return WellPosednessVerdict("corner-pi/4", float(kappa), CRITICAL, float(dist))
    dist = lo - kappa if kappa < lo else kappa - hi
    try:
        sigma = corner_lambda0(kappa)
    except NoRootError:
        sigma = 1.0
    return WellPosednessVerdict("corner-pi/4", float(kappa), WELL_POSED, float(dist), sigma)
