"""Joint rate-splitting beamformer and surface scattering-matrix optimization."""

from .ao import ALL_SCHEMES, AoResult, SchemeSpec, alternating_optimize, warm_start_dominance
from .channel import ChannelRealization, Scenario, draw_realization, effective_channels, path_loss
from .harness import ExperimentConfig, ResultRow, run, summarize, trace_run
from .rates import Beamformers, RateReport, rate_report, stream_sinrs
from .reactance import (ReactanceOptResult, ReactanceOpts, ReactanceVector, gradient,
                        objective, optimize_reactance)
from .scattering import (ScatteringNetwork, fully_network, no_network, pack_reactance,
                         single_network, theta_fully, theta_single, unpack_reactance,
                         validate_scattering)
from .wmmse import WmmseState, build_state, mmse_equalizers, optimal_weights, solve_beamformer_qcqp, wmmse

__all__ = [
    "ALL_SCHEMES", "AoResult", "Beamformers", "ChannelRealization", "ExperimentConfig",
    "RateReport", "ReactanceOptResult", "ReactanceOpts", "ReactanceVector", "ResultRow",
    "Scenario", "ScatteringNetwork", "SchemeSpec", "WmmseState",
    "alternating_optimize", "build_state", "draw_realization", "effective_channels",
    "fully_network", "gradient", "mmse_equalizers", "no_network", "objective",
    "optimal_weights", "optimize_reactance", "pack_reactance", "path_loss",
    "rate_report", "run", "single_network", "solve_beamformer_qcqp", "stream_sinrs",
    "summarize", "theta_fully", "theta_single", "trace_run", "unpack_reactance",
    "validate_scattering", "warm_start_dominance", "wmmse",
]

__version__ = "0.1.0"
