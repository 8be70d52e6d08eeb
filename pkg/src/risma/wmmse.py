"""Weighted-MMSE beamformer design for fixed effective channels.

Sum-rate maximization over the beamformers is recast as minimization of
augmented per-stream MSEs: with the MMSE equalizers and the weights set to
the inverse MSEs, each augmented MSE equals one minus the stream rate (all
logarithms base 2), so the alternating updates below never decrease the
sum-rate. The beamformer block is a convex QCQP solved to high accuracy by
the in-repo barrier solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcqp import Quadratic, QcqpResult, solve_qcqp
from .rates import Beamformers, stream_gains, sum_rate_from_gains

MODES = ("rsma", "sdma")


@dataclass(frozen=True)
class WmmseState:
    """Equalizers, weights, and augmented MSEs at one beamformer iterate."""

    e0: np.ndarray        # (K,) shared-stream equalizers
    e: np.ndarray         # (K,) private equalizers
    lambda0: np.ndarray   # (K,) shared-stream weights, 1/mse
    lam: np.ndarray       # (K,) private weights
    T0: np.ndarray        # (K,) total received power
    T: np.ndarray         # (K,) power after shared-stream removal
    xi0: np.ndarray       # (K,) augmented MSEs of the shared stream
    xi: np.ndarray        # (K,) augmented MSEs of the private streams


def _received_powers(S: np.ndarray, noise: float):
    P = np.abs(S) ** 2
    T = P[:, 1:].sum(axis=1) + noise
    T0 = T + P[:, 0]
    return T0, T


def mmse_equalizers(g_eff: np.ndarray, bf: Beamformers, noise: float):
    """Scalar MMSE equalizers and received powers: (e0, e, T0, T)."""
    if noise <= 0:
        raise ValueError("noise power must be positive")
    S = stream_gains(g_eff, bf)
    T0, T = _received_powers(S, noise)
    e0 = np.conj(S[:, 0]) / T0
    e = np.conj(np.diagonal(S[:, 1:])) / T
    return e0, e, T0, T


def mmse_errors(g_eff: np.ndarray, bf: Beamformers, noise: float):
    """Minimum MSEs (eps0, eps) of the shared and private streams."""
    S = stream_gains(g_eff, bf)
    T0, T = _received_powers(S, noise)
    eps0 = 1.0 - np.abs(S[:, 0]) ** 2 / T0
    eps = 1.0 - np.abs(np.diagonal(S[:, 1:])) ** 2 / T
    return eps0, eps


def optimal_weights(eps0: np.ndarray, eps: np.ndarray):
    """Weights 1/eps minimizing the augmented MSEs; eps must lie in (0, 1]."""
    if np.any(eps0 <= 0) or np.any(eps <= 0):
        raise ValueError("MSE values must be positive; upstream state is broken")
    return 1.0 / eps0, 1.0 / eps


def build_state(g_eff: np.ndarray, bf: Beamformers, noise: float) -> WmmseState:
    """MMSE equalizers, optimal weights, and the resulting augmented MSEs."""
    e0, e, T0, T = mmse_equalizers(g_eff, bf, noise)
    eps0, eps = mmse_errors(g_eff, bf, noise)
    lambda0, lam = optimal_weights(eps0, eps)
    xi0 = lambda0 * eps0 - np.log2(lambda0)
    xi = lam * eps - np.log2(lam)
    return WmmseState(e0=e0, e=e, lambda0=lambda0, lam=lam, T0=T0, T=T, xi0=xi0, xi=xi)


def augmented_mses(g_eff: np.ndarray, bf: Beamformers, noise: float,
                   state: WmmseState):
    """xi values of an arbitrary beamformer under fixed equalizers/weights."""
    S = stream_gains(g_eff, bf)
    T0, T = _received_powers(S, noise)
    eps0 = np.abs(state.e0) ** 2 * T0 - 2.0 * np.real(state.e0 * S[:, 0]) + 1.0
    eps = np.abs(state.e) ** 2 * T - 2.0 * np.real(state.e * np.diagonal(S[:, 1:])) + 1.0
    xi0 = state.lambda0 * eps0 - np.log2(state.lambda0)
    xi = state.lam * eps - np.log2(state.lam)
    return xi0, xi


def _composite_pair(a: np.ndarray):
    """Real composites of a and j*a; |a^H w|^2 = (a1.x)^2 + (a2.x)^2."""
    return np.concatenate([a.real, a.imag]), np.concatenate([-a.imag, a.real])


def _build_qcqp(g_eff: np.ndarray, state: WmmseState, Pt: float, mode: str, noise: float):
    """Assemble the (scaled) epigraph QCQP over real-composite beamformers.

    Variables are x-tilde = W / sqrt(Pt) blocks plus, in rsma mode, the
    epigraph scalar for the worst shared-stream augmented MSE. All quadratics
    except the unit power ball are divided by a common magnitude so the
    barrier solver sees O(1) coefficients.
    """
    K, M = g_eff.shape
    two_m = 2 * M
    rsma = mode == "rsma"
    nblk = K + 1 if rsma else K
    dim = two_m * nblk + (1 if rsma else 0)
    s = np.sqrt(Pt)

    def blk(i):
        # rsma: block 0 is w0; sdma: block i is w_{i+1}
        return slice(i * two_m, (i + 1) * two_m)

    comps = [_composite_pair(g_eff[k]) for k in range(K)]

    # objective: sum_k lam_k eps_k(W); only private blocks appear
    Q_priv = np.zeros((two_m, two_m))
    for k in range(K):
        a1, a2 = comps[k]
        coef = state.lam[k] * np.abs(state.e[k]) ** 2 * Pt
        Q_priv += coef * (np.outer(a1, a1) + np.outer(a2, a2))
    Q0 = np.zeros((dim, dim))
    c0 = np.zeros(dim)
    d0 = float(np.sum(state.lam * (1.0 + np.abs(state.e) ** 2 * noise)
                      - np.log2(state.lam)))
    for k in range(K):
        i = (k + 1) if rsma else k
        Q0[blk(i), blk(i)] = Q_priv
        b = np.conj(state.e[k]) * g_eff[k]
        b1, _ = _composite_pair(b)
        c0[blk(i)] = -2.0 * state.lam[k] * s * b1

    constraints = []
    if rsma:
        c0[-1] = 1.0  # epigraph variable
        for k in range(K):
            a1, a2 = comps[k]
            coef = state.lambda0[k] * np.abs(state.e0[k]) ** 2 * Pt
            Rk = coef * (np.outer(a1, a1) + np.outer(a2, a2))
            Qk = np.zeros((dim, dim))
            for i in range(nblk):
                Qk[blk(i), blk(i)] = Rk
            ck = np.zeros(dim)
            b = np.conj(state.e0[k]) * g_eff[k]
            b1, _ = _composite_pair(b)
            ck[blk(0)] = -2.0 * state.lambda0[k] * s * b1
            ck[-1] = -1.0
            dk = float(state.lambda0[k] * (1.0 + np.abs(state.e0[k]) ** 2 * noise)
                       - np.log2(state.lambda0[k]))
            constraints.append((Qk, ck, dk))

    # common magnitude normalization (power ball stays at unit scale)
    mats = [Q0] + [q for q, _, _ in constraints]
    vecs = [c0] + [c for _, c, _ in constraints]
    s0 = max(1.0, max(np.abs(m).max() for m in mats), max(np.abs(v).max() for v in vecs))

    objective = Quadratic(Q0 / s0, c0 / s0, d0 / s0)
    scaled = [Quadratic(q / s0, c / s0, d / s0) for q, c, d in constraints]
    if rsma:
        # epigraph variable was rescaled along with the xi terms
        objective = Quadratic(objective.Q, objective.c.copy(), objective.d)
        objective.c[-1] = 1.0
        for q in scaled:
            q.c[-1] = -1.0

    Q_pow = np.zeros((dim, dim))
    Q_pow[:two_m * nblk, :two_m * nblk] = np.eye(two_m * nblk)
    scaled.append(Quadratic(Q_pow, np.zeros(dim), -1.0))
    return objective, scaled, dim, s, s0


def _unpack_solution(u: np.ndarray, K: int, M: int, mode: str, s: float, Pt: float) -> Beamformers:
    two_m = 2 * M
    rsma = mode == "rsma"
    if rsma:
        w0 = s * (u[:M] + 1j * u[M:two_m])
        off = two_m
    else:
        w0 = np.zeros(M, dtype=complex)
        off = 0
    w = np.empty((K, M), dtype=complex)
    for k in range(K):
        x = u[off + k * two_m: off + (k + 1) * two_m]
        w[k] = s * (x[:M] + 1j * x[M:])
    return Beamformers(w0=w0, w=w, Pt=Pt)


def solve_beamformer_qcqp(g_eff: np.ndarray, state: WmmseState, Pt: float,
                          mode: str = "rsma", noise: float = 1.0,
                          bf_start: Beamformers | None = None,
                          return_info: bool = False):
    """Globally solve the weighted-MSE beamformer block.

    rsma minimizes (epigraph of max shared xi) + sum of private xi under the
    power ball; sdma drops the shared stream entirely and returns w0 = 0.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    K, M = g_eff.shape
    objective, constraints, dim, s, _ = _build_qcqp(g_eff, state, Pt, mode, noise)

    x0 = np.zeros(dim)
    if bf_start is not None:
        vecs = ([bf_start.w0] if mode == "rsma" else []) + list(bf_start.w)
        xw = np.concatenate([np.concatenate([v.real, v.imag]) for v in vecs]) / s
        nrm = np.linalg.norm(xw)
        # keep the start well inside the power ball; a start hugging the
        # boundary makes the first centering stage crawl
        if nrm >= 0.95:
            xw *= 0.9 / nrm
        x0[:xw.size] = xw
    if mode == "rsma":
        xi0_at0 = max(c.value(np.concatenate([x0[:-1], [0.0]])) for c in constraints[:-1])
        x0[-1] = xi0_at0 + 1.0

    result: QcqpResult = solve_qcqp(objective, constraints, x0)
    # the polished point may sit on the power boundary up to rounding; pull
    # it back so feasibility holds in absolute terms at any budget
    bf = _unpack_solution(result.x, K, M, mode, s, Pt).scaled_into_budget()
    if return_info:
        return bf, result
    return bf


def init_beamformers(g_eff: np.ndarray, Pt: float, mode: str = "rsma",
                     common_fraction: float = 0.1) -> Beamformers:
    """Deterministic warm start.

    Shared stream along the dominant left singular vector of the stacked
    channels with a small power fraction; private streams are matched
    filters splitting the rest equally. sdma puts everything in the
    matched filters.
    """
    K, M = g_eff.shape
    norms = np.linalg.norm(g_eff, axis=1)
    w = np.zeros((K, M), dtype=complex)
    if mode == "sdma":
        frac = 0.0
    else:
        frac = common_fraction if norms.max() > 0 else 0.0
    p_priv = (1.0 - frac) * Pt / K
    for k in range(K):
        if norms[k] > 0:
            w[k] = np.sqrt(p_priv) * g_eff[k] / norms[k]
    w0 = np.zeros(M, dtype=complex)
    if frac > 0:
        u_left, _, _ = np.linalg.svd(g_eff.T, full_matrices=False)
        w0 = np.sqrt(frac * Pt) * u_left[:, 0]
    return Beamformers(w0=w0, w=w, Pt=Pt)


def _random_beamformers(g_eff, Pt, mode, rng) -> Beamformers:
    K, M = g_eff.shape
    w0 = (rng.standard_normal(M) + 1j * rng.standard_normal(M)) if mode == "rsma" else np.zeros(M, dtype=complex)
    w = rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M))
    bf = Beamformers(w0=np.asarray(w0, dtype=complex), w=w, Pt=Pt)
    p = bf.total_power
    c = np.sqrt(0.999 * Pt / p)
    return Beamformers(w0=bf.w0 * c, w=bf.w * c, Pt=Pt)


def wmmse(g_eff: np.ndarray, bf_init: Beamformers | None, Pt: float,
          tol: float = 1e-4, mode: str = "rsma", noise: float = 1.0,
          max_iter: int = 1000, restarts: int = 1,
          rng: np.random.Generator | None = None):
    """Alternate equalizers, weights, and the QCQP until the sum-rate settles.

    Returns (beamformers, sum-rate trace); the trace starts at the initial
    point and is non-decreasing up to solver tolerance. With restarts > 1,
    extra runs from random feasible starts are taken and the best final
    sum-rate wins (the returned trace is that run's trace).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if bf_init is not None and mode == "sdma" and np.any(bf_init.w0 != 0):
        # a warm start carrying a shared-stream vector is still usable, but
        # its power must go (and the start sum-rate must not count it)
        bf_init = Beamformers(np.zeros_like(bf_init.w0), bf_init.w, bf_init.Pt)
    starts = [bf_init if bf_init is not None else init_beamformers(g_eff, Pt, mode)]
    if restarts > 1:
        rng = rng if rng is not None else np.random.default_rng(0)
        starts += [_random_beamformers(g_eff, Pt, mode, rng) for _ in range(restarts - 1)]

    best = None
    for bf in starts:
        bf_run, trace = _wmmse_single(g_eff, bf, Pt, tol, mode, noise, max_iter)
        if best is None or trace[-1] > best[1][-1]:
            best = (bf_run, trace)
    return best


def _wmmse_single(g_eff, bf, Pt, tol, mode, noise, max_iter):
    bf = bf.scaled_into_budget()
    sr = sum_rate_from_gains(stream_gains(g_eff, bf), noise)
    trace = [sr]
    for _ in range(max_iter):
        state = build_state(g_eff, bf, noise)
        bf_new = solve_beamformer_qcqp(g_eff, state, Pt, mode, noise, bf_start=bf)
        sr_new = sum_rate_from_gains(stream_gains(g_eff, bf_new), noise)
        if sr_new < sr:
            # inside the barrier solver's duality gap; keep the better point
            # (the loop then terminates on a zero-length step)
            bf_new, sr_new = bf, sr
        bf, sr = bf_new, sr_new
        trace.append(sr)
        if abs(trace[-1] - trace[-2]) < tol:
            break
    return bf, np.asarray(trace)
