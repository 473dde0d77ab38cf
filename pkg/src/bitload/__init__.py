"""Joint bit and power loading for OFDM links.

Closed-form per-subcarrier bit/power allocation under per-subcarrier BER
constraints, a greedy uniform-power baseline, a Rayleigh frequency-selective
channel simulator, optimality verification tooling, and a Monte-Carlo sweep
harness with CSV output.
"""

from .allocator import (
    Allocation,
    ContinuousSolution,
    JointBitPowerLoader,
    TradeoffWeight,
    allocate,
    allocate_subcarrier,
    cinr_threshold,
    continuous_solution,
)
from .baseline import (
    BitLevelSet,
    GreedyUniformPowerLoader,
    greedy_allocate,
    uniform_power,
    weighted_mean_ber,
)
from .channel import (
    ChannelParams,
    ChannelRealization,
    InterferenceProfile,
    draw_realization,
    interference_profile,
    sigma_h_sq,
    trial_rng,
)
from .config import ConfigError, LinkConfig, parse_config
from .harness import (
    CalibrationError,
    MetricsRecord,
    TrialRecord,
    aggregate,
    calibrate_interference_scale,
    compare,
    dump_realizations,
    emit_csv,
    emit_plot_data,
    read_csv,
    run_trial,
    sweep_alpha,
    sweep_noise,
)
from .kkt import (
    KktReport,
    grid_oracle,
    kkt_residuals,
    lagrange_multiplier,
    verification_battery,
)
from .model import (
    ApproximationWarning,
    SubcarrierChannelState,
    ber_mqam,
    cinr,
    compute_cinrs,
    power_for_target_ber,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "ApproximationWarning",
    "BitLevelSet",
    "CalibrationError",
    "ChannelParams",
    "ChannelRealization",
    "ConfigError",
    "ContinuousSolution",
    "GreedyUniformPowerLoader",
    "InterferenceProfile",
    "JointBitPowerLoader",
    "KktReport",
    "LinkConfig",
    "MetricsRecord",
    "SubcarrierChannelState",
    "TradeoffWeight",
    "TrialRecord",
    "aggregate",
    "allocate",
    "allocate_subcarrier",
    "ber_mqam",
    "calibrate_interference_scale",
    "cinr",
    "cinr_threshold",
    "compare",
    "compute_cinrs",
    "continuous_solution",
    "draw_realization",
    "dump_realizations",
    "emit_csv",
    "emit_plot_data",
    "greedy_allocate",
    "grid_oracle",
    "interference_profile",
    "kkt_residuals",
    "lagrange_multiplier",
    "parse_config",
    "power_for_target_ber",
    "read_csv",
    "run_trial",
    "sigma_h_sq",
    "sweep_alpha",
    "sweep_noise",
    "trial_rng",
    "uniform_power",
    "verification_battery",
    "weighted_mean_ber",
]
