"""Sum-rate optimization over the packed reactance parameters.

For fixed beamformers the sum-rate is an unconstrained smooth function of
the real reactance parameters (packed upper triangle for fully connected
networks, per-port diagonal for single connected ones), because the
reactance-to-scattering map lands on feasible matrices by construction.
The negative sum-rate is minimized with L-BFGS.

Gradients come in two flavors: central finite differences (the default of
`gradient`, requiring nothing but objective calls) and an analytic chain
rule through the scattering map, which shares one LU factorization with the
objective and is the optimizer's default.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .channel import ChannelRealization
from .lbfgs import LbfgsResult, minimize_lbfgs
from .rates import Beamformers
from .scattering import n_from_packed_length, theta_single_entries, unpack_reactance

_LN2 = np.log(2.0)


@dataclass(frozen=True)
class ReactanceVector:
    """Packed reactance parameters of one architecture.

    fully: length N(N+1)/2 upper triangle of X; single: length N diagonal.
    """

    v: np.ndarray
    architecture: str

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        object.__setattr__(self, "v", v)
        if self.architecture not in ("fully", "single"):
            raise ValueError(f"no reactances to optimize for architecture {self.architecture!r}")
        if v.ndim != 1 or v.size == 0:
            raise ValueError("packed reactance vector must be a non-empty 1-D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("reactance parameters must be finite")
        if self.architecture == "fully":
            n_from_packed_length(v.size)  # raises if not triangular

    @property
    def n_ports(self) -> int:
        if self.architecture == "fully":
            return n_from_packed_length(self.v.size)
        return self.v.size


@dataclass
class ReactanceOptResult:
    rv: ReactanceVector
    objective: float          # negative sum-rate at rv
    trace: np.ndarray         # objective over accepted iterates, non-increasing
    iterations: int
    converged: bool
    warning: str | None = None


class _Evaluator:
    """Shared precomputation for repeated evaluations at fixed beamformers.

    Stream gains decompose as S = base + h^H theta (G W); only the
    theta-dependent part is recomputed per point, via one LU factorization
    of (jX + z0 I) with G W and conj(h) as right-hand sides.
    """

    def __init__(self, real: ChannelRealization, bf: Beamformers, noise: float,
                 z0: float, architecture: str):
        self.noise = float(noise)
        self.z0 = float(z0)
        self.architecture = architecture
        self.n = real.h.shape[1]
        self.base = np.conj(real.g) @ bf.matrix        # (K, K+1)
        self.P = real.G @ bf.matrix                    # (N, K+1)
        self.hc = np.conj(real.h)                      # (K, N), rows h_k^H
        self.K = real.g.shape[0]

    def _gains_fully(self, v):
        X = unpack_reactance(v, self.n)
        A = 1j * X + self.z0 * np.eye(self.n)
        lu = scipy.linalg.lu_factor(A, check_finite=False)
        B = 1j * X - self.z0 * np.eye(self.n)
        Y = scipy.linalg.lu_solve(lu, B @ self.P, check_finite=False)   # theta @ (G W)
        S = self.base + self.hc @ Y
        return S, Y, lu

    def _gains_single(self, v):
        th = theta_single_entries(v, self.z0)
        Y = th[:, None] * self.P
        S = self.base + self.hc @ Y
        return S, Y, th

    def sum_rate(self, v) -> float:
        if self.architecture == "fully":
            S = self._gains_fully(v)[0]
        else:
            S = self._gains_single(v)[0]
        return self._rate_from_gains(S)[0]

    def _rate_from_gains(self, S):
        P = np.abs(S) ** 2
        own = np.diagonal(P[:, 1:])
        T = P[:, 1:].sum(axis=1) + self.noise
        T0 = T + P[:, 0]
        r0k = np.log2(T0 / T)
        sr = float(np.min(r0k) + np.sum(np.log2(T / (T - own))))
        return sr, P, own, T, T0, int(np.argmin(r0k))

    def _rate_coeffs(self, S):
        """d(sum-rate)/d|S_{k,i}|^2 and the pieces needed for the chain rule."""
        sr, P, own, T, T0, kstar = self._rate_from_gains(S)
        K = self.K
        D = T - own
        c = np.zeros_like(P)
        rows = np.arange(K)
        c[rows, rows + 1] = 1.0 / (T * _LN2)
        off = (-own / (T * D * _LN2))[:, None] * np.ones((K, K))
        off[rows, rows] = 0.0
        c[:, 1:] += off
        c[kstar, 0] = 1.0 / (T0[kstar] * _LN2)
        c[kstar, 1:] += 1.0 / (T0[kstar] * _LN2) - 1.0 / (T[kstar] * _LN2)
        return sr, c

    def value_and_grad(self, v):
        """(negative sum-rate, analytic gradient w.r.t. the packed vector)."""
        if self.architecture == "fully":
            S, Y, lu = self._gains_fully(v)
            sr, c = self._rate_coeffs(S)
            Q = self.P - Y                                  # columns (I - theta) G w_i
            Z = Q @ (1j * (c * np.conj(S))).T               # (N, K), columns z_k
            U = scipy.linalg.lu_solve(lu, self.hc.T, check_finite=False)
            Gfull = 2.0 * np.real(U @ Z.T)                  # d sum-rate / d X entries
            Gsym = Gfull + Gfull.T
            grad = Gsym[np.triu_indices(self.n)]
            diag = np.arange(self.n)
            grad[_packed_diag_positions(self.n)] = Gfull[diag, diag]
            return -sr, -grad
        S, Y, th = self._gains_single(v)
        sr, c = self._rate_coeffs(S)
        Q = (1.0 - th)[:, None] * self.P
        Z = Q @ (1j * (c * np.conj(S))).T
        U = self.hc.T / (1j * v + self.z0)[:, None]
        grad = 2.0 * np.real(np.sum(U * Z, axis=1))
        return -sr, -grad


def _packed_diag_positions(n: int) -> np.ndarray:
    """Indices of the diagonal entries inside the packed upper triangle."""
    return np.cumsum(np.concatenate([[0], np.arange(n, 1, -1)])).astype(int)


def objective(rv: ReactanceVector, bf: Beamformers, real: ChannelRealization,
              noise: float, z0: float = 50.0) -> float:
    """Negative sum-rate at the given packed reactances (minimization sign)."""
    if rv.n_ports != real.h.shape[1]:
        raise ValueError(f"reactance vector is for N={rv.n_ports}, channels have N={real.h.shape[1]}")
    ev = _Evaluator(real, bf, noise, z0, rv.architecture)
    return -ev.sum_rate(rv.v)


def gradient(rv: ReactanceVector, bf: Beamformers, real: ChannelRealization,
             noise: float, z0: float = 50.0, method: str = "fd",
             rel_step: float = 1e-6, abs_floor: float = 1e-8) -> np.ndarray:
    """Gradient of `objective` w.r.t. the packed vector.

    method "fd" (default) uses central differences with per-coordinate step
    max(rel_step * (1 + |v_i|), abs_floor); "analytic" uses the chain rule
    through the scattering map and must agree with "fd".
    """
    ev = _Evaluator(real, bf, noise, z0, rv.architecture)
    if method == "analytic":
        return ev.value_and_grad(rv.v)[1]
    if method != "fd":
        raise ValueError(f"unknown gradient method {method!r}")
    return _fd_grad(ev, rv.v, rel_step, abs_floor)


def _fd_grad(ev: _Evaluator, v: np.ndarray, rel_step: float, abs_floor: float) -> np.ndarray:
    grad = np.empty_like(v)
    for i in range(v.size):
        h = max(rel_step * (1.0 + abs(v[i])), abs_floor)
        vp = v.copy(); vp[i] += h
        vm = v.copy(); vm[i] -= h
        fp = -ev.sum_rate(vp)
        fm = -ev.sum_rate(vm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ValueError(f"objective not finite while probing coordinate {i}")
        grad[i] = (fp - fm) / (2.0 * h)
    return grad


@dataclass
class ReactanceOpts:
    gtol: float = 1e-6
    maxiter: int = 500
    memory: int = 10
    gradient: str = "analytic"   # optimizer default; the `gradient` op defaults to fd
    rel_step: float = 1e-6
    abs_floor: float = 1e-8


def optimize_reactance(rv0: ReactanceVector, bf: Beamformers, real: ChannelRealization,
                       noise: float, opts: ReactanceOpts | None = None,
                       z0: float = 50.0) -> ReactanceOptResult:
    """Quasi-Newton descent on the negative sum-rate from the warm start rv0.

    Never returns a point worse than the start; a failed line search is
    reported through `warning`, not raised, so alternating optimization can
    continue from the best iterate.
    """
    opts = opts or ReactanceOpts()
    if rv0.n_ports != real.h.shape[1]:
        raise ValueError(f"reactance vector is for N={rv0.n_ports}, channels have N={real.h.shape[1]}")
    ev = _Evaluator(real, bf, noise, z0, rv0.architecture)

    if opts.gradient == "analytic":
        fg = ev.value_and_grad
    else:
        def fg(v):
            return -ev.sum_rate(v), _fd_grad(ev, v, opts.rel_step, opts.abs_floor)

    res: LbfgsResult = minimize_lbfgs(fg, rv0.v, gtol=opts.gtol, maxiter=opts.maxiter,
                                      memory=opts.memory)
    rv = ReactanceVector(res.x, rv0.architecture)
    return ReactanceOptResult(rv=rv, objective=res.f, trace=res.trace,
                              iterations=res.iterations, converged=res.converged,
                              warning=res.warning)
