"""Minimization of the regularized discrete cost.

Two solvers share one interface:

* ``lbfgs``: limited-memory quasi-Newton with Armijo backtracking, using the
  control metric ``S`` as the initial inverse-Hessian guess.
* ``cg``: preconditioned conjugate gradients on the exact quadratic, using
  Hessian-vector products.

Gradient norms are measured in the dual metric, ``sqrt(g^T S^{-1} g)``, and
the tolerance is relative to the gradient norm at the zero control, so a good
initial guess (for instance a prolonged coarse solution) saves iterations.
"""
from __future__ import annotations

import io
import warnings
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from . import transmission as tm

__all__ = [
    "Schedule",
    "OptimizerOptions",
    "IterationHistory",
    "lambda_of",
    "recommended_q",
    "minimize",
    "PRESETS",
    "TOLERANCE_MET",
    "MAX_ITERATIONS",
    "LINE_SEARCH_FAILURE",
]

TOLERANCE_MET = "tolerance met"
MAX_ITERATIONS = "max iterations"
LINE_SEARCH_FAILURE = "line-search failure"


@dataclass(frozen=True)
class Schedule:
    """Regularization weight ``C * h**q``.

    ``admissible`` is an optional open interval for ``q``; leaving it emits a
    warning.
    """
    C: float
    q: float
    admissible: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if not self.q > 0:
            raise ValueError(f"q must be positive, got {self.q}")
        if self.admissible is not None:
            lo, hi = self.admissible
            if not lo < self.q < hi:
                warnings.warn(f"q={self.q} lies outside the admissible interval ({lo:g}, {hi:g})",
                              stacklevel=3)

    def __call__(self, h: float) -> float:
        return lambda_of(self, h)


def lambda_of(schedule: Schedule, h: float) -> float:
    if not h > 0:
        raise ValueError(f"meshsize must be positive, got {h}")
    return schedule.C * h ** schedule.q


def recommended_q(p_prime: float, sigma: float, degree: int = 1) -> tuple[float, float]:
    """Open interval of exponents ``q`` for which ``C h**q`` gives convergence."""
    if not 0 < p_prime <= degree:
        raise ValueError(f"p_prime must lie in (0, {degree}], got {p_prime}")
    if not 0 < sigma <= 1:
        raise ValueError(f"sigma must lie in (0, 1], got {sigma}")
    return (0.0, 2.0 * p_prime + sigma)


@dataclass(frozen=True)
class OptimizerOptions:
    method: str = "lbfgs"
    tol: float = 1e-8
    max_iter: int = 200
    c1: float = 1e-4
    backtrack: float = 0.5
    max_linesearch: int = 30
    memory: int = 10

    def __post_init__(self):
        if self.method not in ("lbfgs", "cg"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.c1 < 1 or not 0 < self.backtrack < 1:
            raise ValueError("line-search constants must lie in (0, 1)")
        if self.max_linesearch < 1 or self.memory < 1:
            raise ValueError("max_linesearch and memory must be at least 1")

    @classmethod
    def preset(cls, name: str, **overrides) -> "OptimizerOptions":
        try:
            base = PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None
        return replace(base, **overrides)


PRESETS = {
    "default": OptimizerOptions(),
    # eps = 1e-6, nbiter = 10, nbiterline = 1
    "paper-freefem": OptimizerOptions(tol=1e-6, max_iter=10, max_linesearch=1),
}


@dataclass
class IterationHistory:
    rows: list = field(default_factory=list)
    reason: str | None = None
    initial_gradnorm: float = 0.0

    COLUMNS = ("iter", "cost", "misfit", "reg", "gradnorm", "step")

    def record(self, cost, misfit, reg, gradnorm, step):
        self.rows.append((len(self.rows), float(cost), float(misfit), float(reg),
                          float(gradnorm), float(step)))

    @property
    def iterations(self) -> int:
        return max(len(self.rows) - 1, 0)

    @property
    def costs(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    @property
    def final_gradnorm(self) -> float:
        return self.rows[-1][4] if self.rows else float("nan")

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(self.COLUMNS) + "\n")
        for r in self.rows:
            out.write(f"{r[0]}," + ",".join(f"{v:.17g}" for v in r[1:]) + "\n")
        out.write(f"# termination={self.reason}\n")
        return out.getvalue()


def _dual_norm(ops, g) -> float:
    return float(np.sqrt(max(float(g @ ops.metric_solve(g)), 0.0)))


def minimize(ops: tm.DiscreteOperators, lam: float, w0=None,
             opts: OptimizerOptions | None = None):
    """Minimize the regularized cost.

    Returns ``(w, state, history)`` where ``state`` is the state pair at ``w``.
    Termination is declared in ``history.reason``.
    """
    if not lam > 0:
        raise ValueError(f"regularization weight must be positive, got {lam}")
    opts = opts or OptimizerOptions()
    n = ops.n_control
    w = np.zeros(n) if w0 is None else np.array(w0, dtype=float).reshape(-1)
    if w.shape != (n,):
        raise ValueError(f"initial control has {w.shape[0]} entries, expected {n}")

    _, g_zero, _ = tm.cost_and_gradient(ops, np.zeros(n), lam)
    ref = _dual_norm(ops, g_zero)
    history = IterationHistory(initial_gradnorm=ref)
    if ref == 0.0:
        # the gradient vanishes at the origin, which is therefore the minimizer
        w = np.zeros(n)
        state = tm.solve_state(ops, w)
        history.record(tm.cost(ops, state, w, lam), tm.misfit(ops, state), 0.0, 0.0, 0.0)
        history.reason = TOLERANCE_MET
        return w, state, history
    target = opts.tol * ref
    if opts.method == "lbfgs":
        return _lbfgs(ops, lam, w, opts, history, target)
    return _cg(ops, lam, w, opts, history, target)


def _evaluate(ops, w, lam):
    state = tm.solve_state(ops, w)
    mis = tm.misfit(ops, state)
    reg = lam * float(w @ (ops.S @ w))
    return state, mis, reg


def _lbfgs(ops, lam, w, opts, history, target):
    state, mis, reg = _evaluate(ops, w, lam)
    J = mis + reg
    g = tm.gradient(ops, w, state, tm.solve_adjoint(ops, state), lam)
    gn = _dual_norm(ops, g)
    history.record(J, mis, reg, gn, 0.0)
    memory: deque = deque(maxlen=opts.memory)

    while True:
        if gn <= target:
            history.reason = TOLERANCE_MET
            break
        if history.iterations >= opts.max_iter:
            history.reason = MAX_ITERATIONS
            break
        d = -_two_loop(ops, g, memory)
        slope = float(g @ d)
        if slope >= 0:
            memory.clear()
            d = -ops.metric_solve(g)
            slope = float(g @ d)

        # J is quadratic, so its change along the step is exactly the
        # trapezoidal average of the end-point slopes; this stays accurate
        # when the decrease is far below the rounding level of J itself
        alpha = 1.0
        accepted = None
        for _ in range(opts.max_linesearch):
            w_try = w + alpha * d
            st, m_try, r_try = _evaluate(ops, w_try, lam)
            g_try = tm.gradient(ops, w_try, st, tm.solve_adjoint(ops, st), lam)
            change = 0.5 * alpha * float((g + g_try) @ d)
            if change <= opts.c1 * alpha * slope:
                accepted = (w_try, st, m_try, r_try, g_try)
                break
            alpha *= opts.backtrack
        if accepted is None:
            history.reason = LINE_SEARCH_FAILURE
            break

        w_new, state, mis, reg, g_new = accepted
        s, y = w_new - w, g_new - g
        sy = float(s @ y)
        if sy > 1e-14 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            memory.append((s, y, 1.0 / sy))
        w, g, J = w_new, g_new, mis + reg
        gn = _dual_norm(ops, g)
        history.record(J, mis, reg, gn, alpha)
    return w, state, history


def _two_loop(ops, g, memory):
    """Inverse-Hessian estimate applied to ``g``, seeded with a scaled ``S^{-1}``."""
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(memory):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if memory:
        s, y, rho = memory[-1]
        Sy = ops.metric_solve(y)
        gamma = float(s @ y) / float(y @ Sy)
    else:
        gamma = 1.0
    r = gamma * ops.metric_solve(q)
    for (s, y, rho), a in zip(memory, reversed(alphas)):
        b = rho * float(y @ r)
        r += (a - b) * s
    return r


def _linearized(ops, v, lam):
    """Hessian product and the trace difference of the homogeneous state for ``v``."""
    lin = tm.solve_state(ops, v, homogeneous=True)
    adj = tm.solve_adjoint(ops, lin)
    return tm.gradient(ops, v, lin, adj, lam), lin.trace_difference(ops)


def _cg(ops, lam, w, opts, history, target):
    state, mis, reg = _evaluate(ops, w, lam)
    g = tm.gradient(ops, w, state, tm.solve_adjoint(ops, state), lam)
    d = state.trace_difference(ops)
    gn = _dual_norm(ops, g)
    history.record(mis + reg, mis, reg, gn, 0.0)
    while True:
        r = -g
        z = ops.metric_solve(r)
        p = z.copy()
        rz = float(r @ z)
        stalled = False
        while gn > target and history.iterations < opts.max_iter:
            Hp, dp = _linearized(ops, p, lam)
            curv = float(p @ Hp)
            if not curv > 0:
                stalled = True
                break
            alpha = rz / curv
            w = w + alpha * p
            d = d + alpha * dp
            g = g + alpha * Hp
            mis = 0.5 * float(d @ (ops.M @ d))
            reg = lam * float(w @ (ops.S @ w))
            r = -g
            z = ops.metric_solve(r)
            rz_new = float(r @ z)
            gn = float(np.sqrt(max(rz_new, 0.0)))
            history.record(mis + reg, mis, reg, gn, alpha)
            p = z + (rz_new / rz) * p
            rz = rz_new
        # the recurrences drift; confirm with a freshly computed gradient and
        # restart from the current iterate if needed
        state, mis, reg = _evaluate(ops, w, lam)
        g = tm.gradient(ops, w, state, tm.solve_adjoint(ops, state), lam)
        d = state.trace_difference(ops)
        gn = _dual_norm(ops, g)
        if gn <= target:
            history.reason = TOLERANCE_MET
            break
        if stalled:
            history.reason = LINE_SEARCH_FAILURE
            break
        if history.iterations >= opts.max_iter:
            history.reason = MAX_ITERATIONS
            break
    rows = history.rows
    if rows:
        it, _, _, _, _, step = rows[-1]
        rows[-1] = (it, mis + reg, mis, reg, gn, step)
    return w, state, history
