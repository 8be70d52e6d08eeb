"""Monte Carlo experiment runner, CSV schemas, and aggregation.

A run sweeps (scheme, transmit SNR, element count, realization) cells. All
schemes inside one cell consume the identical channel draw so comparisons
are paired, and the draw is keyed by (master seed, realization index) so
results are reproducible regardless of execution order or parallelism.
"""

from __future__ import annotations

import csv
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .ao import ALL_SCHEMES, SchemeSpec, alternating_optimize
from .channel import Scenario, draw_realization

CSV_HEADER = "scheme,snr_db,n_elements,realization,sum_rate,common_rate,iterations,converged,wall_time_s"
AGG_HEADER = "scheme,snr_db,n_elements,realizations,mean_sum_rate,ci_lo,ci_hi"
GAIN_HEADER = "scheme_a,scheme_b,snr_db,n_elements,rel_gain,gain_ci_lo,gain_ci_hi"
TRACE_HEADER = "scheme,iteration,sum_rate"

DEFAULT_SCHEMES = tuple(s.name for s in ALL_SCHEMES)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario = field(default_factory=Scenario)
    schemes: tuple = DEFAULT_SCHEMES
    snr_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    n_elements: tuple = (32,)
    realizations: int = 100
    seed: int = 0
    out: str = "results.csv"
    tol: float = 1e-3
    inner_tol: float | None = None       # defaults to tol/10 inside the AO driver
    restarts: int = 1
    max_outer: int = 200
    jobs: int = 1

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError("need at least one realization")
        if not self.snr_db or not self.n_elements or not self.schemes:
            raise ValueError("snr_db, n_elements, and schemes must be non-empty")
        for name in self.schemes:
            SchemeSpec.parse(name)

    def power(self, snr_db: float) -> float:
        return self.scenario.noise_power * 10.0 ** (snr_db / 10.0)


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    snr_db: float
    n_elements: int
    realization: int
    sum_rate: float
    common_rate: float
    iterations: int
    converged: bool
    wall_time_s: float


def _run_cell(config: ExperimentConfig, snr_db: float, n: int, realization: int) -> list:
    """All schemes on one paired channel draw; failures land in the row."""
    scenario = replace(config.scenario, N=n)
    real = draw_realization(scenario, config.seed, realization)
    Pt = config.power(snr_db)
    rows = []
    for name in config.schemes:
        scheme = SchemeSpec.parse(name)
        t0 = time.perf_counter()
        try:
            res = alternating_optimize(
                real, scheme, Pt, tol=config.tol, seeds=config.seed,
                noise=scenario.noise_power, inner_tol=config.inner_tol,
                restarts=config.restarts, max_outer=config.max_outer)
            row = ResultRow(name, snr_db, n, realization, res.sum_rate, res.common_rate,
                            res.iterations, res.converged, time.perf_counter() - t0)
        except Exception as exc:  # noqa: BLE001 - cell failures must not kill the sweep
            print(f"cell failed: {name} snr={snr_db} n={n} r={realization}: {exc}",
                  file=sys.stderr)
            row = ResultRow(name, snr_db, n, realization, float("nan"), float("nan"),
                            0, False, time.perf_counter() - t0)
        rows.append(row)
    return rows


def run(config: ExperimentConfig) -> list:
    """Execute the full sweep; rows come back in canonical order."""
    cells = [(snr, n, r)
             for snr in config.snr_db
             for n in config.n_elements
             for r in range(config.realizations)]
    rows: list = []
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(_run_cell, config, *cell) for cell in cells]
            for fut in futures:
                rows.extend(fut.result())
    else:
        for cell in cells:
            rows.extend(_run_cell(config, *cell))
    rows.sort(key=lambda r: (r.scheme, r.snr_db, r.n_elements, r.realization))
    return rows


def trace_run(config: ExperimentConfig, snr_db: float, n: int, realization: int) -> list:
    """Per-iteration sum-rate traces of each scheme on one realization."""
    scenario = replace(config.scenario, N=n)
    real = draw_realization(scenario, config.seed, realization)
    Pt = config.power(snr_db)
    out = []
    for name in config.schemes:
        res = alternating_optimize(
            real, SchemeSpec.parse(name), Pt, tol=config.tol, seeds=config.seed,
            noise=scenario.noise_power, inner_tol=config.inner_tol,
            restarts=config.restarts, max_outer=config.max_outer)
        for i, sr in enumerate(res.trace):
            out.append((name, i, float(sr)))
    return out


# ---------------------------------------------------------------------------
# aggregation

def summarize(rows: list, pairs: list | None = None, n_boot: int = 1000,
              seed: int = 0):
    """Per-cell means with bootstrap 95% CIs, plus paired relative gains.

    Gains (a - b)/b are ratios of per-cell means; their CIs resample
    realizations jointly for both schemes, which requires the two schemes to
    cover identical realization sets in every cell.
    """
    if not rows:
        raise ValueError("no rows to summarize")
    cells: dict = {}
    for r in rows:
        if np.isfinite(r.sum_rate):
            cells.setdefault((r.scheme, r.snr_db, r.n_elements), {})[r.realization] = r.sum_rate

    rng = np.random.default_rng(seed)
    aggregates = []
    for key in sorted(cells):
        vals = np.array([cells[key][i] for i in sorted(cells[key])])
        mean = float(vals.mean())
        lo, hi = _bootstrap_ci(vals, rng, n_boot)
        aggregates.append((key[0], key[1], key[2], len(vals), mean, lo, hi))

    gains = []
    for a, b in pairs or []:
        grid = sorted({(snr, n) for (s, snr, n) in cells if s in (a, b)})
        for snr, n in grid:
            ca = cells.get((a, snr, n))
            cb = cells.get((b, snr, n))
            if ca is None or cb is None:
                continue
            if set(ca) != set(cb):
                raise ValueError(f"mismatched pairing for {a} vs {b} at snr={snr} n={n}")
            idx = sorted(ca)
            va = np.array([ca[i] for i in idx])
            vb = np.array([cb[i] for i in idx])
            gain = float((va.mean() - vb.mean()) / vb.mean())
            glo, ghi = _bootstrap_gain_ci(va, vb, rng, n_boot)
            gains.append((a, b, snr, n, gain, glo, ghi))
    return aggregates, gains


def _bootstrap_ci(vals, rng, n_boot, level=0.95):
    if len(vals) == 1:
        return float(vals[0]), float(vals[0])
    idx = rng.integers(0, len(vals), size=(n_boot, len(vals)))
    means = vals[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    return (float(np.quantile(means, alpha)), float(np.quantile(means, 1.0 - alpha)))


def _bootstrap_gain_ci(va, vb, rng, n_boot, level=0.95):
    if len(va) == 1:
        g = float((va[0] - vb[0]) / vb[0])
        return g, g
    idx = rng.integers(0, len(va), size=(n_boot, len(va)))
    ma = va[idx].mean(axis=1)
    mb = vb[idx].mean(axis=1)
    g = (ma - mb) / mb
    alpha = (1.0 - level) / 2.0
    return float(np.quantile(g, alpha)), float(np.quantile(g, 1.0 - alpha))


# ---------------------------------------------------------------------------
# CSV round-trip (repr floats survive parse exactly)

def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_rows(rows: list, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for r in rows:
            w.writerow([r.scheme, _fmt(r.snr_db), r.n_elements, r.realization,
                        _fmt(r.sum_rate), _fmt(r.common_rate), r.iterations,
                        _fmt(r.converged), _fmt(r.wall_time_s)])


def read_rows(path: str) -> list:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != CSV_HEADER:
            raise ValueError(f"unexpected header in {path}: {','.join(header)}")
        for rec in reader:
            rows.append(ResultRow(rec[0], float(rec[1]), int(rec[2]), int(rec[3]),
                                  float(rec[4]), float(rec[5]), int(rec[6]),
                                  rec[7] == "true", float(rec[8])))
    return rows


def write_aggregates(aggregates: list, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(AGG_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for scheme, snr, n, cnt, mean, lo, hi in aggregates:
            w.writerow([scheme, _fmt(float(snr)), n, cnt, _fmt(mean), _fmt(lo), _fmt(hi)])


def write_gains(gains: list, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(GAIN_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for a, b, snr, n, g, lo, hi in gains:
            w.writerow([a, b, _fmt(float(snr)), n, _fmt(g), _fmt(lo), _fmt(hi)])


def write_trace(trace: list, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(TRACE_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for scheme, it, sr in trace:
            w.writerow([scheme, it, _fmt(sr)])
