"""Experiment configuration: one flat key = value file, validated on load."""

import math
from dataclasses import dataclass, fields, replace
from typing import Optional, Union

__all__ = ["LinkConfig", "ConfigError", "parse_config"]

ALGORITHMS = ("proposed", "baseline", "both")
SNR_AVERAGE_MODES = ("all", "active")


class ConfigError(ValueError):
    """Malformed or invalid configuration; carries a line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class LinkConfig:
    """All experiment parameters, with desk-scale defaults."""

    n_subcarriers: int = 128          # N
    alpha: float = 0.5                # power-vs-throughput weight
    ber_target: float = 1e-4          # per-subcarrier BER threshold
    noise_var: float = 1e-3           # AWGN variance, microwatt
    n_taps: int = 5                   # channel impulse response length
    decay: float = 0.2                # PDP decay factor
    n_affected: int = 40              # interference-hit subcarriers
    beta: float = -0.25               # interference shape exp(-beta*x)
    interference_scale: float = 1.0   # kappa; inf = nulling sentinel, 0 = off
    target_sir_db: Optional[float] = None  # when set, kappa is calibrated
    interference_start_index: Union[int, str] = 0  # index or "centered"
    n_trials: int = 1000
    master_seed: int = 12345
    algorithm: str = "proposed"       # proposed | baseline | both
    baseline_max_bits: int = 12
    baseline_weighted_mean: bool = True
    snr_average: str = "all"          # count nulled subcarriers ("all") or not
    workers: int = 1

    def validate(self) -> "LinkConfig":
        if self.n_subcarriers < 1:
            raise ConfigError("n_subcarriers must be >= 1")
        if not 0.01 <= self.alpha <= 0.99:
            raise ConfigError(
                f"alpha must lie in [0.01, 0.99], got {self.alpha} "
                "(the derived tradeoff constant degenerates outside)"
            )
        if not 0.0 < self.ber_target < 0.2:
            raise ConfigError(f"ber_target must lie in (0, 0.2), got {self.ber_target}")
        if not (math.isfinite(self.noise_var) and self.noise_var > 0.0):
            raise ConfigError(f"noise_var must be finite and > 0, got {self.noise_var}")
        if self.n_taps < 1:
            raise ConfigError("n_taps must be >= 1")
        if self.decay < 0.0:
            raise ConfigError("decay must be >= 0")
        if not 0 <= self.n_affected <= self.n_subcarriers:
            raise ConfigError(
                f"n_affected must lie in [0, {self.n_subcarriers}], got {self.n_affected}"
            )
        if math.isnan(self.interference_scale) or self.interference_scale < 0.0:
            raise ConfigError("interference_scale must be >= 0 (inf allowed)")
        start = self.start_index()
        if not (0 <= start and start + self.n_affected <= self.n_subcarriers):
            raise ConfigError(
                f"interference block [{start}, {start + self.n_affected}) out of range"
            )
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.baseline_max_bits < 2:
            raise ConfigError("baseline_max_bits must be >= 2")
        if self.snr_average not in SNR_AVERAGE_MODES:
            raise ConfigError(f"snr_average must be one of {SNR_AVERAGE_MODES}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.target_sir_db is not None and math.isnan(self.target_sir_db):
            raise ConfigError("target_sir_db must not be NaN")
        return self

    def start_index(self) -> int:
        """Resolved interference block start ("centered" convenience value)."""
        if self.interference_start_index == "centered":
            return (self.n_subcarriers - self.n_affected) // 2
        if isinstance(self.interference_start_index, int):
            return self.interference_start_index
        raise ConfigError(
            f"interference_start_index must be an integer or 'centered', "
            f"got {self.interference_start_index!r}"
        )

    def override(self, **kwargs) -> "LinkConfig":
        """Copy with replacements, revalidated."""
        return replace(self, **kwargs).validate()


def _parse_value(name: str, text: str, line: int):
    text = text.strip()
    py_type = {f.name: f.type for f in fields(LinkConfig)}[name]
    try:
        if name == "target_sir_db":
            return None if text.lower() in ("none", "") else float(text)
        if name == "interference_start_index":
            return "centered" if text == "centered" else int(text)
        if py_type is int or py_type == "int":
            return int(text)
        if py_type is float or py_type == "float":
            return float(text)
        if py_type is bool or py_type == "bool":
            if text.lower() in ("true", "yes", "1"):
                return True
            if text.lower() in ("false", "no", "0"):
                return False
            raise ValueError(text)
        return text
    except ValueError:
        raise ConfigError(f"cannot parse value {text!r} for key {name!r}", line) from None


def parse_config(text: str) -> LinkConfig:
    """Parse ``key = value`` lines into a validated LinkConfig.

    Blank lines and ``#`` comments are skipped; unknown keys and malformed
    lines raise :class:`ConfigError` with the offending line number.
    Missing keys keep their documented defaults.
    """
    known = {f.name for f in fields(LinkConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in known:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        values[key] = _parse_value(key, value, lineno)
    return LinkConfig(**values).validate()
