"""Monte-Carlo experiment driver: trials, metrics, sweeps, CSV emission.

A trial is a pure function of (config, trial_index): it owns an independent
random substream, so any worker count and any execution order reproduce the
same records bit for bit.  Averages are accumulated in ascending trial order
and converted to dB only at the reporting edge.
"""

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .allocator import Allocation, TradeoffWeight, allocate
from .baseline import BitLevelSet, greedy_allocate, uniform_power
from .channel import ChannelParams, draw_realization, interference_profile, trial_rng
from .config import LinkConfig
from .model import compute_cinrs

__all__ = [
    "TrialRecord",
    "MetricsRecord",
    "CalibrationError",
    "run_trial",
    "aggregate",
    "sweep_noise",
    "sweep_alpha",
    "compare",
    "calibrate_interference_scale",
    "emit_csv",
    "read_csv",
    "emit_plot_data",
    "dump_realizations",
]

CSV_COLUMNS = (
    "algorithm",
    "noise_var_uw",
    "avg_snr_db",
    "avg_sir_db",
    "avg_throughput_bits",
    "avg_power_uw",
    "active_fraction",
    "n_trials",
    "master_seed",
)


@dataclass(frozen=True)
class TrialRecord:
    """Totals and metric sums of one Monte-Carlo trial."""

    trial_index: int
    algorithm: str
    noise_var: float
    master_seed: int
    n_subcarriers: int
    n_affected: int
    total_bits: int
    total_power: float
    snr_sum: float   # sum of P_i * |H_i|^2 / noise_var over all subcarriers
    sir_sum: float   # sum of P_i * |H_i|^2 / interf_var over affected ones
    n_active: int


@dataclass(frozen=True)
class MetricsRecord:
    """Trial-set averages for one sweep point."""

    algorithm: str
    noise_var: float
    avg_snr_db: float
    avg_sir_db: Optional[float]  # None when no subcarrier is affected
    avg_throughput: float
    avg_power: float
    active_fraction: float
    n_trials: int
    master_seed: int


class CalibrationError(RuntimeError):
    """Interference calibration did not converge; carries the best attempt."""

    def __init__(self, message: str, best_scale: float, achieved_db: float):
        super().__init__(message)
        self.best_scale = best_scale
        self.achieved_db = achieved_db


def _interference(config: LinkConfig):
    return interference_profile(
        config.n_subcarriers,
        config.n_affected,
        config.beta,
        config.interference_scale,
        config.start_index(),
    )


def _allocate_for(config: LinkConfig, algorithm: str, cinrs,
                  uniform_power_uw: Optional[float]) -> Allocation:
    if algorithm == "proposed":
        return allocate(cinrs, TradeoffWeight(config.alpha), config.ber_target)
    if algorithm == "baseline":
        if uniform_power_uw is None:
            raise ValueError("baseline trials need a uniform power budget")
        return greedy_allocate(
            cinrs,
            uniform_power_uw,
            config.ber_target,
            BitLevelSet.up_to(config.baseline_max_bits),
            config.baseline_weighted_mean,
        )
    raise ValueError(f"unknown algorithm {algorithm!r}")


def run_trial(
    config: LinkConfig,
    trial_index: int,
    algorithm: str = "proposed",
    uniform_power_uw: Optional[float] = None,
) -> TrialRecord:
    """Draw one channel realization and run one loading algorithm on it.

    The channel depends only on (master_seed, trial_index); the interference
    profile is fixed across trials.  For the baseline, ``uniform_power_uw``
    is the per-subcarrier budget (the comparison rule derives it from the
    proposed algorithm's average power).
    """
    rng = trial_rng(config.master_seed, trial_index)
    params = ChannelParams(config.n_taps, config.decay, config.n_subcarriers)
    realization = draw_realization(params, rng)
    profile = _interference(config)
    cinrs = compute_cinrs(realization.gain_sq, config.noise_var, profile.variances)
    alloc = _allocate_for(config, algorithm, cinrs, uniform_power_uw)

    signal = alloc.power * realization.gain_sq
    snr_sum = float(np.sum(signal) / config.noise_var)
    start = config.start_index()
    sl = slice(start, start + config.n_affected)
    sig_a, var_a = signal[sl], profile.variances[sl]
    with np.errstate(divide="ignore", invalid="ignore"):
        sir_terms = np.where(sig_a > 0.0, sig_a / var_a, 0.0)
    sir_sum = float(np.sum(sir_terms))

    return TrialRecord(
        trial_index=trial_index,
        algorithm=algorithm,
        noise_var=config.noise_var,
        master_seed=config.master_seed,
        n_subcarriers=config.n_subcarriers,
        n_affected=config.n_affected,
        total_bits=alloc.total_bits,
        total_power=alloc.total_power,
        snr_sum=snr_sum,
        sir_sum=sir_sum,
        n_active=alloc.n_active,
    )


def _run_trials(config, algorithm, uniform_power_uw=None, n_trials=None):
    indices = range(config.n_trials if n_trials is None else n_trials)
    if config.workers <= 1:
        return [run_trial(config, k, algorithm, uniform_power_uw) for k in indices]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(
            pool.map(lambda k: run_trial(config, k, algorithm, uniform_power_uw), indices)
        )


def _to_db(x: float) -> float:
    if x == 0.0:
        return -math.inf
    if math.isinf(x):
        return math.inf
    return 10.0 * math.log10(x)


def aggregate(records: Sequence[TrialRecord], snr_average: str = "all") -> MetricsRecord:
    """Average a trial set into one metrics record.

    The SNR average counts every subcarrier (nulled ones contribute zero)
    unless ``snr_average="active"``; the SIR average runs over affected
    subcarriers only and is None when none are affected.  Sums accumulate in
    ascending trial order so the result is reproducible bit for bit.
    """
    if not records:
        raise ValueError("cannot aggregate an empty record set")
    recs = sorted(records, key=lambda r: r.trial_index)
    first = recs[0]
    k = len(recs)

    snr_total = sir_total = power_total = 0.0
    bits_total = active_total = 0
    for r in recs:
        snr_total += r.snr_sum
        sir_total += r.sir_sum
        power_total += r.total_power
        bits_total += r.total_bits
        active_total += r.n_active

    snr_den = first.n_subcarriers * k if snr_average == "all" else active_total
    avg_snr = snr_total / snr_den if snr_den > 0 else 0.0
    if first.n_affected > 0:
        avg_sir_db = _to_db(sir_total / (first.n_affected * k))
    else:
        avg_sir_db = None
    return MetricsRecord(
        algorithm=first.algorithm,
        noise_var=first.noise_var,
        avg_snr_db=_to_db(avg_snr),
        avg_sir_db=avg_sir_db,
        avg_throughput=bits_total / k,
        avg_power=power_total / k,
        active_fraction=active_total / (first.n_subcarriers * k),
        n_trials=k,
        master_seed=first.master_seed,
    )


def _resolve_scale(config: LinkConfig) -> LinkConfig:
    """Replace a target SIR by the interference scale that realizes it."""
    if config.target_sir_db is None or config.n_affected == 0:
        return config
    scale, _ = calibrate_interference_scale(config, config.target_sir_db)
    return config.override(interference_scale=scale, target_sir_db=None)


def _point_records(config: LinkConfig):
    """Run one sweep point; returns (proposed, baseline) metrics.

    The baseline reuses the proposed algorithm's channel realizations and
    spends its average total power uniformly across subcarriers.
    """
    config = _resolve_scale(config)
    proposed = aggregate(_run_trials(config, "proposed"), config.snr_average)
    baseline = None
    if config.algorithm in ("baseline", "both"):
        budget = uniform_power(proposed.avg_power, config.n_subcarriers)
        baseline = aggregate(
            _run_trials(config, "baseline", uniform_power_uw=budget),
            config.snr_average,
        )
    return proposed, baseline


def sweep_noise(config: LinkConfig, noise_var_grid: Sequence[float]):
    """One metrics record per noise-variance grid point (Fig. 2/3/5 style).

    The measured average SNR is the x-coordinate of each record; sweeping the
    noise floor reconstructs an SNR axis parametrically, since allocated
    power (hence SNR) is an algorithm output, not a control knob.
    """
    grid = [float(v) for v in noise_var_grid]
    if not grid or any(not (math.isfinite(v) and v > 0.0) for v in grid):
        raise ValueError("noise_var_grid must be non-empty and positive")
    config.validate()
    out = []
    for noise_var in grid:
        proposed, baseline = _point_records(config.override(noise_var=noise_var))
        if config.algorithm in ("proposed", "both"):
            out.append(proposed)
        if baseline is not None:
            out.append(baseline)
    return out


def sweep_alpha(config: LinkConfig, alpha_grid: Sequence[float]):
    """One metrics record per tradeoff-weight grid point (Fig. 4 style)."""
    grid = [float(a) for a in alpha_grid]
    if not grid:
        raise ValueError("alpha_grid must be non-empty")
    config.validate()
    out = []
    for alpha in grid:
        proposed, baseline = _point_records(config.override(alpha=alpha))
        if config.algorithm in ("proposed", "both"):
            out.append(proposed)
        if baseline is not None:
            out.append(baseline)
    return out


def compare(config: LinkConfig, noise_var_grid: Sequence[float]):
    """Paired (proposed, baseline) records per grid point, shared seeds."""
    grid = [float(v) for v in noise_var_grid]
    if not grid or any(not (math.isfinite(v) and v > 0.0) for v in grid):
        raise ValueError("noise_var_grid must be non-empty and positive")
    config = config.override(algorithm="both")
    return [_point_records(config.override(noise_var=v)) for v in grid]


def _measure_sir_db(config: LinkConfig, scale: float, n_trials: int) -> float:
    cfg = config.override(
        interference_scale=scale, target_sir_db=None, n_trials=n_trials
    )
    return aggregate(_run_trials(cfg, "proposed"), cfg.snr_average).avg_sir_db


def calibrate_interference_scale(
    config: LinkConfig,
    target_sir_db: float,
    n_trials: int = 200,
    tol_db: float = 0.1,
    max_iter: int = 30,
) -> tuple[float, float]:
    """Find the interference scale whose measured average SIR hits a target.

    Expanding bracket plus bisection in log-scale on the monotone map
    scale -> average SIR, measured on a calibration batch.  The +inf target
    maps to scale 0 (no interference) and -inf to the nulling sentinel.

    Returns
    -------
    (scale, achieved_db)

    Raises
    ------
    CalibrationError
        When the tolerance is not met within ``max_iter`` measurements; the
        error carries the best scale found.
    """
    if config.n_affected == 0:
        raise ValueError("cannot calibrate interference with n_affected = 0")
    if math.isnan(target_sir_db):
        raise ValueError("target_sir_db must not be NaN")
    if target_sir_db == math.inf:
        return 0.0, math.inf
    if target_sir_db == -math.inf:
        return math.inf, -math.inf

    evals = 0

    def measure(scale: float) -> float:
        nonlocal evals
        evals += 1
        return _measure_sir_db(config, scale, n_trials)

    best = (math.inf, math.nan, math.nan)  # (|error|, scale, achieved)

    def track(scale: float, achieved: float) -> bool:
        nonlocal best
        err = abs(achieved - target_sir_db)
        if err < best[0]:
            best = (err, scale, achieved)
        return err <= tol_db

    scale = 1.0
    achieved = measure(scale)
    if track(scale, achieved):
        return scale, achieved

    # Expand toward a bracket: measured SIR decreases as scale grows.
    lo, hi = scale, scale  # lo: SIR above target, hi: SIR below target
    if achieved > target_sir_db:
        while evals < max_iter:
            hi *= 100.0
            achieved = measure(hi)
            if track(hi, achieved):
                return hi, achieved
            if achieved < target_sir_db or math.isinf(achieved):
                break
            lo = hi
    else:
        while evals < max_iter:
            lo /= 100.0
            achieved = measure(lo)
            if track(lo, achieved):
                return lo, achieved
            if achieved > target_sir_db:
                break
            hi = lo

    while evals < max_iter:
        mid = math.sqrt(lo * hi)
        achieved = measure(mid)
        if track(mid, achieved):
            return mid, achieved
        if achieved > target_sir_db:
            lo = mid
        else:
            hi = mid

    raise CalibrationError(
        f"no scale within {tol_db} dB of {target_sir_db} dB after "
        f"{evals} measurements (best: {best[2]:.3f} dB at scale {best[1]:.6g})",
        best_scale=best[1],
        achieved_db=best[2],
    )


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.10g}"


def emit_csv(records: Sequence[MetricsRecord], destination) -> None:
    """Write metrics records to CSV (path or text file object)."""
    own = isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__")
    fh = open(destination, "w", newline="") if own else destination
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.algorithm,
                    _format_cell(r.noise_var),
                    _format_cell(r.avg_snr_db),
                    _format_cell(r.avg_sir_db),
                    _format_cell(r.avg_throughput),
                    _format_cell(r.avg_power),
                    _format_cell(r.active_fraction),
                    _format_cell(r.n_trials),
                    _format_cell(r.master_seed),
                ]
            )
    finally:
        if own:
            fh.close()


def read_csv(source) -> list:
    """Read back records written by :func:`emit_csv`."""
    own = isinstance(source, (str, bytes)) or hasattr(source, "__fspath__")
    fh = open(source, "r", newline="") if own else source
    try:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        out = []
        for row in reader:
            out.append(
                MetricsRecord(
                    algorithm=row[0],
                    noise_var=float(row[1]),
                    avg_snr_db=float(row[2]),
                    avg_sir_db=None if row[3] == "" else float(row[3]),
                    avg_throughput=float(row[4]),
                    avg_power=float(row[5]),
                    active_fraction=float(row[6]),
                    n_trials=int(row[7]),
                    master_seed=int(row[8]),
                )
            )
        return out
    finally:
        if own:
            fh.close()


def emit_plot_data(records: Sequence[MetricsRecord], destination_dir,
                   x_field: str = "avg_snr_db", x_values=None) -> list:
    """Write one whitespace-separated file per algorithm curve.

    Columns: x, avg_throughput_bits, avg_power_uw.  ``x_values`` overrides
    the x column (e.g. the alpha grid of a tradeoff sweep).  Returns the
    written paths.
    """
    import os

    os.makedirs(destination_dir, exist_ok=True)
    by_algorithm = {}
    for i, r in enumerate(records):
        x = x_values[i] if x_values is not None else getattr(r, x_field)
        by_algorithm.setdefault(r.algorithm, []).append((x, r))
    paths = []
    for algorithm, rows in by_algorithm.items():
        path = os.path.join(destination_dir, f"{algorithm}.dat")
        with open(path, "w", newline="") as fh:
            fh.write(f"# {x_field} avg_throughput_bits avg_power_uw\n")
            for x, r in rows:
                fh.write(
                    f"{_format_cell(float(x))} {_format_cell(r.avg_throughput)} "
                    f"{_format_cell(r.avg_power)}\n"
                )
        paths.append(path)
    return paths


def dump_realizations(config: LinkConfig, n_trials: int, destination) -> None:
    """Dump channel draws to CSV for debugging and cross-checking.

    Columns: trial, subcarrier, re_h, im_h, gain_sq, interf_var.  Uses the
    same per-trial substreams as :func:`run_trial`, so row (k, i) is exactly
    what trial k saw on subcarrier i.
    """
    params = ChannelParams(config.n_taps, config.decay, config.n_subcarriers)
    profile = _interference(config)
    own = isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__")
    fh = open(destination, "w", newline="") if own else destination
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "subcarrier", "re_h", "im_h", "gain_sq", "interf_var"])
        for k in range(n_trials):
            realization = draw_realization(params, trial_rng(config.master_seed, k))
            for i in range(config.n_subcarriers):
                writer.writerow(
                    [
                        k,
                        i,
                        f"{realization.gains[i].real:.17g}",
                        f"{realization.gains[i].imag:.17g}",
                        f"{realization.gain_sq[i]:.17g}",
                        f"{profile.variances[i]:.17g}",
                    ]
                )
    finally:
        if own:
            fh.close()
