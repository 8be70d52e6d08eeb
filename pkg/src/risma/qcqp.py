"""Log-barrier Newton solver for small dense convex QCQPs.

Problem form, all matrices PSD so every piece is convex:

    minimize    u^T Q0 u + c0^T u + d0
    subject to  u^T Qj u + cj^T u + dj <= 0,   j = 1..m

The centering path is followed by damped Newton on

    mu * objective(u) - sum_j log(-constraint_j(u))

with mu multiplied by a fixed factor per outer stage until it reaches
m / gap_tol, which bounds the barrier duality gap by gap_tol. A short
primal-dual Newton polish then drives the KKT residual to machine
precision. Problems here are tiny (tens of variables), so dense solves
and stacked constraint tensors are the right tools.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class Quadratic:
    """q(u) = u^T Q u + c^T u + d with symmetric Q; gradient 2 Q u + c."""

    Q: np.ndarray
    c: np.ndarray
    d: float

    def value(self, u: np.ndarray) -> float:
        return float(u @ self.Q @ u + self.c @ u + self.d)

    def grad(self, u: np.ndarray) -> np.ndarray:
        return 2.0 * (self.Q @ u) + self.c


class QcqpError(RuntimeError):
    """Barrier solve did not reach the requested accuracy.

    Carries the best iterate and its KKT residual so callers can decide
    whether to continue with it.
    """

    def __init__(self, message: str, best: np.ndarray, residual: float):
        super().__init__(f"{message} (kkt residual {residual:.3e})")
        self.best = best
        self.residual = residual


@dataclass
class QcqpResult:
    x: np.ndarray
    objective: float
    duals: np.ndarray          # KKT multiplier estimates, one per constraint
    kkt_residual: float        # max of stationarity, complementarity, violation
    newton_steps: int = 0
    barrier_stages: int = 0
    constraint_values: np.ndarray = field(default_factory=lambda: np.empty(0))


class _Stacked:
    """Constraints as stacked tensors for vectorized barrier iterations."""

    def __init__(self, constraints: list[Quadratic]):
        self.Q = np.stack([g.Q for g in constraints])      # (m, n, n)
        self.c = np.stack([g.c for g in constraints])      # (m, n)
        self.d = np.array([g.d for g in constraints])      # (m,)

    def values(self, u: np.ndarray) -> np.ndarray:
        Qu = self.Q @ u                                    # (m, n)
        return Qu @ u + self.c @ u + self.d

    def values_and_grads(self, u: np.ndarray):
        Qu = self.Q @ u
        return Qu @ u + self.c @ u + self.d, 2.0 * Qu + self.c


def solve_qcqp(objective: Quadratic, constraints: list[Quadratic], x0: np.ndarray, *,
               gap_tol: float = 1e-8, newton_tol: float = 1e-10, stat_tol: float = 1e-8,
               mu0: float = 1.0, mu_factor: float = 10.0,
               max_newton_per_stage: int = 60) -> QcqpResult:
    """Minimize `objective` over the intersection of quadratic sublevel sets.

    x0 must be strictly feasible. The returned point satisfies
    max(stationarity, complementarity, violation) <= max(gap_tol, stat_tol)
    measured on the problem as given, so callers should normalize scales
    beforehand.
    """
    m = len(constraints)
    if m == 0:
        raise ValueError("need at least one constraint")
    u = np.asarray(x0, dtype=float).copy()
    cons = _Stacked(constraints)
    cons_vals = cons.values(u)
    if np.any(cons_vals >= 0):
        raise ValueError(f"x0 is not strictly feasible (max constraint {cons_vals.max():.3e})")

    # exceeding the target barrier weight buys nothing and pushes the Newton
    # system into its numerical noise floor, so the last stage lands on it;
    # if the polish still falls short a few extra stages are attempted
    mu_final = m / gap_tol
    mu = min(float(mu0), mu_final)
    newton_count = [0]
    stages = 0
    n_stages = int(np.ceil(np.log(mu_final / mu) / np.log(mu_factor))) + 1
    tol = max(gap_tol, stat_tol)

    while True:
        stages += 1
        # intermediate stages only need approximate centering
        stage_tol = newton_tol if mu >= mu_final else max(newton_tol, 1e-9)
        u = _center(objective, cons, u, mu, stage_tol, max_newton_per_stage, newton_count)
        if mu >= mu_final or stages > n_stages + 4:
            break
        mu = min(mu * mu_factor, mu_final)

    target = 0.9 * tol
    duals = 1.0 / (mu * (-cons.values(u)))
    u_p, duals_p = _polish_kkt(objective, cons, u, duals, target)
    cons_vals, _, _, residual = _kkt_pieces(objective, cons, u_p, duals_p)
    best = (u_p, duals_p, cons_vals, residual)
    for _ in range(3):
        if best[3] <= tol:
            break
        mu *= mu_factor
        stages += 1
        u = _center(objective, cons, u, mu, newton_tol, max_newton_per_stage, newton_count)
        duals = 1.0 / (mu * (-cons.values(u)))
        u_p, duals_p = _polish_kkt(objective, cons, u, duals, target)
        cons_vals, _, _, residual = _kkt_pieces(objective, cons, u_p, duals_p)
        if residual < best[3]:
            best = (u_p, duals_p, cons_vals, residual)

    u_p, duals_p, cons_vals, residual = best
    result = QcqpResult(x=u_p, objective=objective.value(u_p), duals=duals_p,
                        kkt_residual=residual, newton_steps=newton_count[0],
                        barrier_stages=stages, constraint_values=cons_vals)
    if residual > tol:
        raise QcqpError("barrier solve stalled before reaching tolerance", u_p, residual)
    return result


def _center(objective, cons: _Stacked, u, mu, newton_tol, max_steps, count):
    """Damped Newton on the barrier-augmented objective at fixed mu."""
    for _ in range(max_steps):
        cons_vals, cons_grads = cons.values_and_grads(u)
        inv_neg = 1.0 / (-cons_vals)

        grad = mu * objective.grad(u) + cons_grads.T @ inv_neg
        H = 2.0 * mu * objective.Q
        H = H + (cons_grads.T * inv_neg**2) @ cons_grads
        H += np.tensordot(2.0 * inv_neg, cons.Q, axes=1)
        count[0] += 1

        try:
            cho = scipy.linalg.cho_factor(H, check_finite=False)
            step = -scipy.linalg.cho_solve(cho, grad, check_finite=False)
        except scipy.linalg.LinAlgError:
            ridge = 1e-12 * max(1.0, np.abs(np.diag(H)).max())
            step = -np.linalg.solve(H + ridge * np.eye(H.shape[0]), grad)

        decrement2 = float(-grad @ step)
        if decrement2 / 2.0 <= newton_tol:
            break

        # backtrack to stay strictly feasible, then Armijo on the barrier
        bval = mu * objective.value(u) - np.sum(np.log(-cons_vals))
        gs = float(grad @ step)
        t = 1.0
        for _ in range(60):
            u_try = u + t * step
            vals_try = cons.values(u_try)
            if np.all(vals_try < 0):
                b_try = mu * objective.value(u_try) - np.sum(np.log(-vals_try))
                if b_try <= bval + 0.25 * t * gs:
                    u = u_try
                    break
            t *= 0.5
        else:
            break  # no acceptable step; Newton has stalled at this stage
    return u


def _kkt_pieces(objective, cons: _Stacked, x, nu):
    vals, grads = cons.values_and_grads(x)
    stat = objective.grad(x) + grads.T @ nu
    res = max(float(np.abs(stat).max()), float(np.abs(nu * vals).max()),
              float(max(0.0, vals.max())), float(max(0.0, -nu.min())))
    return vals, grads, stat, res


def _polish_kkt(objective, cons: _Stacked, u, duals, target: float = 0.0):
    """Primal-dual Newton polish of the full KKT complementarity system.

    The barrier point satisfies nu_j * (-g_j) = 1/mu; a few Newton steps on
    (stationarity, nu_j g_j = 0) push the residual toward machine precision
    and decide by themselves which constraints are truly active. Stops once
    the residual reaches `target`; the best point seen is returned, so this
    can only improve things.
    """
    n = u.size
    m = cons.d.size
    x, nu = u.copy(), duals.copy()
    vals, grads, stat, res = _kkt_pieces(objective, cons, x, nu)
    best = (x.copy(), nu.copy(), res)
    if res <= target:
        return best[0], best[1]

    for _ in range(25):
        H = 2.0 * objective.Q + np.tensordot(2.0 * nu, cons.Q, axes=1)
        J = np.zeros((n + m, n + m))
        J[:n, :n] = H
        J[:n, n:] = grads.T
        J[n:, :n] = nu[:, None] * grads
        J[n:, n:] = np.diag(vals)
        rhs = -np.concatenate([stat, nu * vals])
        try:
            step = np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(J, rhs, rcond=None)
        if not np.all(np.isfinite(step)):
            break
        dx, dnu = step[:n], step[n:]

        # fraction to boundary on the duals, then backtrack on the residual
        alpha = 1.0
        neg = dnu < 0
        if np.any(neg):
            alpha = min(1.0, 0.9995 * float(np.min(-nu[neg] / dnu[neg])))
        improved = False
        for _ in range(30):
            x_try = x + alpha * dx
            nu_try = np.maximum(nu + alpha * dnu, 0.0)
            vals_t, grads_t, stat_t, res_t = _kkt_pieces(objective, cons, x_try, nu_try)
            if res_t < res:
                x, nu, vals, grads, stat, res = x_try, nu_try, vals_t, grads_t, stat_t, res_t
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break
        if res < best[2]:
            best = (x.copy(), nu.copy(), res)
        if res <= max(target, 1e-12):
            break
    return best[0], best[1]
