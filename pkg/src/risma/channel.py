"""Planar simulation geometry, path loss, and Rayleigh channel draws.

The downlink layout is a base station, an N-port reflecting surface, and K
single-antenna users placed uniformly at random inside a disc. Every channel
entry is i.i.d. circularly symmetric complex Gaussian with per-entry variance
given by a distance power law.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Point = tuple[float, float]


@dataclass(frozen=True)
class Scenario:
    """Static geometry and link-budget parameters of one simulation setup.

    Rates are computed in transmit-SNR units: the simulated noise power is
    noise_power (1 by convention) and the power budget is the transmit SNR
    in linear scale. For that convention to carry physical meaning, the
    receiver-side links (direct and surface-to-user) are normalized by the
    physical noise floor `noise_floor_db`; the feed link to the surface
    keeps its raw gain so the cascaded path is normalized exactly once.
    Set noise_floor_db = 0 to draw raw path-loss variances.
    """

    bs_position: Point = (0.0, 0.0)
    ris_position: Point = (50.0, 50.0)
    user_circle_center: Point = (150.0, 0.0)
    user_circle_diameter: float = 20.0
    M: int = 4
    K: int = 4
    N: int = 32
    L0_db: float = -30.0
    alpha_bs_user: float = 3.5
    alpha_bs_ris: float = 2.0
    alpha_ris_user: float = 2.2
    noise_power: float = 1.0
    noise_floor_db: float = -80.0

    def __post_init__(self):
        if self.M < 1 or self.K < 1 or self.N < 0:
            raise ValueError(f"need M >= 1, K >= 1, N >= 0, got M={self.M} K={self.K} N={self.N}")
        if min(self.alpha_bs_user, self.alpha_bs_ris, self.alpha_ris_user) <= 0:
            raise ValueError("path-loss exponents must be positive")
        if self.user_circle_diameter <= 0:
            raise ValueError("user_circle_diameter must be positive")
        if self.noise_power <= 0:
            raise ValueError("noise_power must be positive")


@dataclass(frozen=True)
class ChannelRealization:
    """One Monte Carlo draw of all links.

    g : (K, M) direct BS-to-user channels (rows are users)
    h : (K, N) surface-to-user channels
    G : (N, M) BS-to-surface channel
    """

    g: np.ndarray
    h: np.ndarray
    G: np.ndarray
    user_positions: np.ndarray = field(repr=False)
    seed: int = 0
    draw_index: int = 0


def path_loss(d: float, L0_db: float, alpha: float) -> float:
    """Linear power gain 10^(L0_db/10) * d^(-alpha) at link distance d meters."""
    if d <= 0:
        raise ValueError(f"link distance must be positive, got {d}")
    return 10.0 ** (L0_db / 10.0) * float(d) ** (-alpha)


def _cn_matrix(rng: np.random.Generator, shape, variance) -> np.ndarray:
    """CN(0, variance) entries; `variance` broadcasts over rows."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    if scale.ndim == 1:
        scale = scale[:, None]
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return scale * z


def draw_realization(scenario: Scenario, seed: int, draw_index: int) -> ChannelRealization:
    """Draw user positions and all fading links for one realization.

    Deterministic: the generator is keyed by (seed, draw_index), so draws are
    order-independent and safe to generate in parallel. The draw order is
    fixed (positions, then g, h, G); changing it would change the stream.
    """
    sc = scenario
    rng = np.random.default_rng([int(seed), int(draw_index)])

    radius = sc.user_circle_diameter / 2.0
    # uniform over the disc: radius needs the sqrt area correction
    r = radius * np.sqrt(rng.random(sc.K))
    phi = 2.0 * np.pi * rng.random(sc.K)
    center = np.asarray(sc.user_circle_center, dtype=float)
    pos = center + np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)

    bs = np.asarray(sc.bs_position, dtype=float)
    ris = np.asarray(sc.ris_position, dtype=float)
    d_bs_user = np.linalg.norm(pos - bs, axis=1)
    d_ris_user = np.linalg.norm(pos - ris, axis=1)
    d_bs_ris = float(np.linalg.norm(ris - bs))

    floor = 10.0 ** (sc.noise_floor_db / 10.0)
    var_g = np.array([path_loss(d, sc.L0_db, sc.alpha_bs_user) for d in d_bs_user]) / floor
    var_h = np.array([path_loss(d, sc.L0_db, sc.alpha_ris_user) for d in d_ris_user]) / floor
    var_G = path_loss(d_bs_ris, sc.L0_db, sc.alpha_bs_ris)

    g = _cn_matrix(rng, (sc.K, sc.M), var_g)
    h = _cn_matrix(rng, (sc.K, sc.N), var_h)
    G = _cn_matrix(rng, (sc.N, sc.M), var_G)

    return ChannelRealization(g=g, h=h, G=G, user_positions=pos,
                              seed=int(seed), draw_index=int(draw_index))


def effective_channels(real: ChannelRealization, theta: np.ndarray | None) -> np.ndarray:
    """Per-user channels seen through the surface, rows g_k + (theta G)^H h_k.

    With theta None (no surface in the scheme) the direct channels are
    returned unchanged.
    """
    if theta is None:
        return real.g.copy()
    N = real.h.shape[1]
    theta = np.asarray(theta)
    if theta.shape != (N, N):
        raise ValueError(f"theta must be {N}x{N}, got {theta.shape}")
    # rows hold g_eff_k itself, i.e. g_eff_k^H = g_k^H + h_k^H theta G
    return real.g + np.conj(np.conj(real.h) @ theta @ real.G)
