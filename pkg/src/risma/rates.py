"""Per-stream SINRs and achievable rates of the rate-splitting downlink.

Every user first decodes the shared stream treating all private streams as
interference, removes it, then decodes its own private stream. The shared
stream must be decodable by everyone, so its rate is the minimum over users.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, effective_channels
from .scattering import ScatteringNetwork


@dataclass(frozen=True)
class Beamformers:
    """Transmit vectors for the shared stream (w0) and the K private streams.

    w0 : (M,) complex
    w  : (K, M) complex, rows are private beamformers
    Pt : transmit power budget (linear); feasibility means
         ||w0||^2 + sum_k ||w_k||^2 <= Pt (+1e-9 slack)
    """

    w0: np.ndarray
    w: np.ndarray
    Pt: float

    def __post_init__(self):
        if self.w0.ndim != 1 or self.w.ndim != 2 or self.w.shape[1] != self.w0.shape[0]:
            raise ValueError(f"inconsistent shapes w0 {self.w0.shape}, w {self.w.shape}")
        if self.Pt <= 0:
            raise ValueError("power budget must be positive")

    @property
    def matrix(self) -> np.ndarray:
        """All beamformers column-stacked, shape (M, K+1), shared stream first."""
        return np.column_stack([self.w0, self.w.T])

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.w0) ** 2) + np.sum(np.abs(self.w) ** 2))

    def is_feasible(self, slack: float = 1e-9) -> bool:
        return self.total_power <= self.Pt + slack

    def scaled_into_budget(self, margin: float = 1.0) -> "Beamformers":
        """Rescale onto (a margin of) the budget if the power exceeds it."""
        p = self.total_power
        cap = self.Pt * margin
        if p <= cap:
            return self
        c = np.sqrt(cap / p)
        return Beamformers(self.w0 * c, self.w * c, self.Pt)


@dataclass(frozen=True)
class RateReport:
    """Rates of one (channel, surface, beamformer) design, in bits/s/Hz."""

    gamma0: np.ndarray   # (K,) SINRs of the shared stream at each user
    gamma: np.ndarray    # (K,) private SINRs
    r0k: np.ndarray      # (K,) per-user shared-stream rates
    r0: float            # min_k r0k, the decodable shared rate
    rk: np.ndarray       # (K,) private rates
    sum_rate: float      # r0 + sum_k rk


def stream_gains(g_eff: np.ndarray, bf: Beamformers) -> np.ndarray:
    """Complex gains S[k, i] = g_eff_k^H w_i, shape (K, K+1); column 0 is w0."""
    return np.conj(g_eff) @ bf.matrix


def rates_from_gains(S: np.ndarray, noise: float):
    """(gamma0, gamma, r0k, rk) from the stream-gain matrix."""
    P = np.abs(S) ** 2
    own = np.diagonal(P[:, 1:]).copy()          # |g_k^H w_k|^2
    T = P[:, 1:].sum(axis=1) + noise            # received power minus shared stream
    gamma0 = P[:, 0] / T
    gamma = own / (T - own)
    r0k = np.log2(1.0 + gamma0)
    rk = np.log2(1.0 + gamma)
    return gamma0, gamma, r0k, rk


def stream_sinrs(g_eff_k: np.ndarray, bf: Beamformers, noise: float, user_index: int) -> tuple[float, float]:
    """SINRs (shared, private) of one user given its effective channel."""
    if noise <= 0:
        raise ValueError("noise power must be positive")
    s = np.conj(g_eff_k) @ bf.matrix
    p = np.abs(s) ** 2
    T = p[1:].sum() + noise
    own = p[1 + user_index]
    return float(p[0] / T), float(own / (T - own))


def report_from_gains(S: np.ndarray, noise: float) -> RateReport:
    gamma0, gamma, r0k, rk = rates_from_gains(S, noise)
    r0 = float(np.min(r0k))
    return RateReport(gamma0=gamma0, gamma=gamma, r0k=r0k, r0=r0,
                      rk=rk, sum_rate=r0 + float(np.sum(rk)))


def sum_rate_from_gains(S: np.ndarray, noise: float) -> float:
    """Sum-rate only; the hot path of the scattering optimizer."""
    P = np.abs(S) ** 2
    own = np.diagonal(P[:, 1:])
    T = P[:, 1:].sum(axis=1) + noise
    r0 = np.min(np.log2(1.0 + P[:, 0] / T))
    return float(r0 + np.sum(np.log2(T / (T - own))))


def rate_report(real: ChannelRealization, net: ScatteringNetwork,
                bf: Beamformers, noise: float) -> RateReport:
    """Full rate breakdown for one channel realization and surface design."""
    if noise <= 0:
        raise ValueError("noise power must be positive")
    g_eff = effective_channels(real, net.theta)
    return report_from_gains(stream_gains(g_eff, bf), noise)
