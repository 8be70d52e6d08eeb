"""Limited-memory BFGS with a strong Wolfe line search.

Minimal, self-contained minimizer for smooth unconstrained problems of a few
hundred variables. The caller supplies a single callback returning the value
and gradient together, which keeps shared work (factorizations) in one place.
Line-search failure is not fatal: the best iterate seen so far is returned
with a warning string, so outer alternating loops can carry on monotonically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

FG = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass
class LbfgsResult:
    x: np.ndarray
    f: float
    grad_norm: float
    iterations: int
    n_evals: int
    converged: bool
    warning: str | None = None
    trace: np.ndarray = field(default_factory=lambda: np.empty(0))


def _zoom(fg, x, p, a_lo, a_hi, f_lo, f0, df0, c1, c2, evals, max_zoom=30):
    """Wolfe zoom phase on the bracket [a_lo, a_hi] (Nocedal-Wright style)."""
    for _ in range(max_zoom):
        a = 0.5 * (a_lo + a_hi)
        f, g = fg(x + a * p)
        evals[0] += 1
        df = float(g @ p)
        if f > f0 + c1 * a * df0 or f >= f_lo:
            a_hi = a
        else:
            if abs(df) <= -c2 * df0:
                return a, f, g
            if df * (a_hi - a_lo) >= 0:
                a_hi = a_lo
            a_lo, f_lo = a, f
        if abs(a_hi - a_lo) < 1e-16 * max(1.0, abs(a_lo)):
            break
    return None


def _wolfe_search(fg, x, p, f0, grad0, c1, c2, evals, a_init=1.0, a_max=1e10, max_iter=25):
    """Find a step satisfying the strong Wolfe conditions; None on failure."""
    df0 = float(grad0 @ p)
    if df0 >= 0:
        return None
    a_prev, f_prev = 0.0, f0
    a = a_init
    for i in range(max_iter):
        f, g = fg(x + a * p)
        evals[0] += 1
        df = float(g @ p)
        if f > f0 + c1 * a * df0 or (i > 0 and f >= f_prev):
            return _zoom(fg, x, p, a_prev, a, f_prev, f0, df0, c1, c2, evals)
        if abs(df) <= -c2 * df0:
            return a, f, g
        if df >= 0:
            return _zoom(fg, x, p, a, a_prev, f, f0, df0, c1, c2, evals)
        a_prev, f_prev = a, f
        a = min(2.0 * a, a_max)
    return None


def minimize_lbfgs(fg: FG, x0: np.ndarray, *, gtol: float = 1e-6, maxiter: int = 500,
                   memory: int = 10, c1: float = 1e-4, c2: float = 0.9) -> LbfgsResult:
    """Minimize f via L-BFGS; returns the best iterate seen.

    Stops when the gradient 2-norm drops below gtol, the iteration budget is
    exhausted, or the line search fails (warning set, not an error). The
    objective trace over accepted iterates is non-increasing by construction.
    """
    x = np.asarray(x0, dtype=float).copy()
    evals = [0]
    f, g = fg(x)
    evals[0] += 1
    if not np.isfinite(f):
        raise ValueError("objective is not finite at the starting point")
    trace = [f]
    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    rho_hist: list[float] = []
    warning = None
    converged = False
    it = 0

    for it in range(1, maxiter + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= gtol:
            converged = True
            it -= 1
            break

        # two-loop recursion
        q = g.copy()
        alpha = np.empty(len(s_hist))
        for j in range(len(s_hist) - 1, -1, -1):
            alpha[j] = rho_hist[j] * float(s_hist[j] @ q)
            q -= alpha[j] * y_hist[j]
        if s_hist:
            gamma = float(s_hist[-1] @ y_hist[-1]) / float(y_hist[-1] @ y_hist[-1])
            q *= gamma
        for j in range(len(s_hist)):
            beta = rho_hist[j] * float(y_hist[j] @ q)
            q += (alpha[j] - beta) * s_hist[j]
        p = -q

        hit = _wolfe_search(fg, x, p, f, g, c1, c2, evals)
        if hit is None and s_hist:
            # retry from a fresh steepest-descent direction
            s_hist.clear(); y_hist.clear(); rho_hist.clear()
            p = -g / max(1.0, float(np.linalg.norm(g)))
            hit = _wolfe_search(fg, x, p, f, g, c1, c2, evals)
        if hit is None:
            warning = "line_search_failure"
            it -= 1
            break

        a, f_new, g_new = hit
        s = a * p
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-10 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            s_hist.append(s)
            y_hist.append(y)
            rho_hist.append(1.0 / sy)
            if len(s_hist) > memory:
                s_hist.pop(0); y_hist.pop(0); rho_hist.pop(0)
        x = x + s
        f, g = f_new, g_new
        trace.append(f)
    else:
        it = maxiter

    gnorm = float(np.linalg.norm(g))
    if gnorm <= gtol:
        converged = True
    return LbfgsResult(x=x, f=f, grad_norm=gnorm, iterations=it, n_evals=evals[0],
                       converged=converged, warning=warning, trace=np.asarray(trace))
