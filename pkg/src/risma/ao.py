"""Alternating optimization of beamformers and the surface reactances.

Each outer iteration re-optimizes the beamformers by the weighted-MMSE loop
at the current scattering matrix, then improves the reactance parameters by
quasi-Newton descent warm-started from the previous ones. Both stages never
decrease the sum-rate, so the outer trace is non-decreasing and bounded,
which is the convergence argument for the whole scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, effective_channels
from .rates import Beamformers, rate_report, stream_gains, sum_rate_from_gains
from .reactance import ReactanceOpts, ReactanceVector, optimize_reactance
from .scattering import (ScatteringNetwork, fully_network, no_network,
                         pack_reactance, single_network, unpack_reactance)
from .wmmse import wmmse

ARCHITECTURES = ("fully", "single", "none")
MODES = ("rsma", "sdma")


@dataclass(frozen=True)
class SchemeSpec:
    """One of the six compared schemes: architecture x multiple access."""

    architecture: str
    multiple_access: str

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.multiple_access not in MODES:
            raise ValueError(f"unknown multiple access mode {self.multiple_access!r}")

    @property
    def name(self) -> str:
        return f"{self.architecture}_{self.multiple_access}"

    @classmethod
    def parse(cls, name: str) -> "SchemeSpec":
        try:
            arch, ma = name.strip().lower().split("_")
        except ValueError:
            raise ValueError(f"scheme name {name!r} is not '<architecture>_<access>'") from None
        return cls(arch, ma)


ALL_SCHEMES = tuple(
    SchemeSpec(a, m) for a in ARCHITECTURES for m in MODES
)


@dataclass
class AoResult:
    """Outcome of one alternating-optimization run."""

    beamformers: Beamformers
    network: ScatteringNetwork
    sum_rate: float
    common_rate: float
    trace: np.ndarray                  # outer sum-rate trace, starts at the initial point
    stage_trace: list                  # per outer iteration (after-beamformer, after-reactance)
    wmmse_traces: list                 # inner sum-rate traces, one per outer iteration
    iterations: int
    converged: bool
    warnings: list = field(default_factory=list)


def _initial_network(scheme: SchemeSpec, n: int, z0: float,
                     rng: np.random.Generator, x0: ReactanceVector | None):
    if scheme.architecture == "none":
        return no_network(z0), None
    if x0 is not None:
        if x0.architecture != scheme.architecture:
            raise ValueError(f"warm-start vector is for {x0.architecture!r}, scheme wants "
                             f"{scheme.architecture!r}")
        rv = x0
    elif scheme.architecture == "fully":
        rv = ReactanceVector(z0 * rng.standard_normal(n * (n + 1) // 2), "fully")
    else:
        rv = ReactanceVector(z0 * rng.standard_normal(n), "single")
    return _network_from_vector(rv, z0), rv


def _network_from_vector(rv: ReactanceVector, z0: float) -> ScatteringNetwork:
    if rv.architecture == "fully":
        return fully_network(rv.v, z0)
    return single_network(rv.v, z0)


def alternating_optimize(real: ChannelRealization, scheme: SchemeSpec, Pt: float,
                         tol: float = 1e-3, seeds: int = 0, *,
                         noise: float = 1.0, z0: float = 50.0,
                         max_outer: int = 200, inner_tol: float | None = None,
                         restarts: int = 1, x0: ReactanceVector | None = None,
                         bf0: Beamformers | None = None,
                         reactance_opts: ReactanceOpts | None = None) -> AoResult:
    """Run the full alternating scheme on one channel realization.

    Architecture "none" reduces to a single beamformer optimization; its
    reported trace is that run's inner trace. Optional x0/bf0 warm starts
    override the seeded initialization (used for cross-architecture
    dominance checks).

    Rate-splitting runs also evaluate their space-division twin (a design
    with no shared stream is feasible for the rate-splitting problem) and
    keep the better one, so a rate-splitting scheme never loses to its
    space-division counterpart through local-optimizer luck.
    """
    if Pt <= 0:
        raise ValueError("power budget must be positive")
    result = _ao_single(real, scheme, Pt, tol, seeds, noise=noise, z0=z0,
                        max_outer=max_outer, inner_tol=inner_tol, restarts=restarts,
                        x0=x0, bf0=bf0, reactance_opts=reactance_opts)
    if scheme.multiple_access == "rsma":
        twin = _ao_single(real, SchemeSpec(scheme.architecture, "sdma"), Pt, tol,
                          seeds, noise=noise, z0=z0, max_outer=max_outer,
                          inner_tol=inner_tol, restarts=restarts, x0=x0, bf0=bf0,
                          reactance_opts=reactance_opts)
        if twin.sum_rate > result.sum_rate:
            result = twin
    return result


def _ao_single(real: ChannelRealization, scheme: SchemeSpec, Pt: float,
               tol: float, seeds: int, *, noise: float, z0: float,
               max_outer: int, inner_tol: float | None, restarts: int,
               x0: ReactanceVector | None, bf0: Beamformers | None,
               reactance_opts: ReactanceOpts | None) -> AoResult:
    inner_tol = tol / 10.0 if inner_tol is None else inner_tol
    rng = np.random.default_rng([int(seeds), 0x5eed])
    n = real.h.shape[1]
    warnings: list = []

    if scheme.architecture == "none":
        g_eff = effective_channels(real, None)
        bf, trace = wmmse(g_eff, bf0, Pt, tol=inner_tol, mode=scheme.multiple_access,
                          noise=noise, restarts=restarts, rng=rng)
        net = no_network(z0)
        rep = rate_report(real, net, bf, noise)
        return AoResult(beamformers=bf, network=net, sum_rate=rep.sum_rate,
                        common_rate=rep.r0, trace=trace,
                        stage_trace=[(trace[-1], trace[-1])], wmmse_traces=[trace],
                        iterations=len(trace) - 1, converged=True, warnings=warnings)

    net, rv = _initial_network(scheme, n, z0, rng, x0)
    opts = reactance_opts or ReactanceOpts()
    bf = bf0
    trace = []
    stage_trace = []
    wmmse_traces = []
    converged = False
    it = 0
    for it in range(1, max_outer + 1):
        g_eff = effective_channels(real, net.theta)
        bf, inner = wmmse(g_eff, bf, Pt, tol=inner_tol, mode=scheme.multiple_access,
                          noise=noise, restarts=restarts if it == 1 else 1, rng=rng)
        wmmse_traces.append(inner)
        if not trace:
            trace.append(inner[0])  # sum-rate of the very first iterate
        sr_after_w = inner[-1]

        opt = optimize_reactance(rv, bf, real, noise, opts, z0)
        rv = opt.rv
        if opt.warning:
            warnings.append(f"outer {it}: {opt.warning}")
        net = _network_from_vector(rv, z0)
        sr_after_x = -opt.objective

        stage_trace.append((sr_after_w, sr_after_x))
        trace.append(sr_after_x)
        if abs(trace[-1] - trace[-2]) < tol:
            converged = True
            break

    rep = rate_report(real, net, bf, noise)
    return AoResult(beamformers=bf, network=net, sum_rate=rep.sum_rate,
                    common_rate=rep.r0, trace=np.asarray(trace),
                    stage_trace=stage_trace, wmmse_traces=wmmse_traces,
                    iterations=it, converged=converged, warnings=warnings)


def warm_start_dominance(real: ChannelRealization, Pt: float, tol: float = 1e-3,
                         seeds: int = 0, **kwargs) -> tuple[float, float]:
    """Sum-rates of single-rsma and of fully-rsma warm-started from it.

    The fully connected run starts at the diagonal embedding of the single
    connected solution (same scattering matrix) with that solution's
    beamformers, so with monotone stages its sum-rate cannot fall below the
    single connected one beyond solver tolerance.
    """
    single = alternating_optimize(real, SchemeSpec("single", "rsma"), Pt, tol,
                                  seeds, **kwargs)
    x_diag = pack_reactance(np.diag(single.network.v))
    fully = alternating_optimize(real, SchemeSpec("fully", "rsma"), Pt, tol, seeds,
                                 x0=ReactanceVector(x_diag, "fully"),
                                 bf0=single.beamformers, **kwargs)
    return single.sum_rate, fully.sum_rate
