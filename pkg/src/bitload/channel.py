"""Frequency-selective Rayleigh channel and narrowband interference profiles.

Taps follow an exponential power delay profile normalized so the expected
energy of every subcarrier gain is exactly 1; interference hits a contiguous
block of subcarriers with an exponentially shaped variance profile.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelParams",
    "ChannelRealization",
    "InterferenceProfile",
    "sigma_h_sq",
    "tap_variances",
    "trial_rng",
    "draw_realization",
    "interference_profile",
]


def sigma_h_sq(n_taps: int, decay: float) -> float:
    """Leading-tap variance normalizing total tap energy to 1.

    Closed form ``(1 - e**-decay) / (1 - e**(-decay * n_taps))``; the
    ``decay = 0`` limit is the uniform profile ``1 / n_taps``.
    """
    if n_taps < 1:
        raise ValueError(f"n_taps must be >= 1, got {n_taps}")
    if decay < 0.0:
        raise ValueError(f"decay must be >= 0, got {decay}")
    if decay == 0.0:
        return 1.0 / n_taps
    return math.expm1(-decay) / math.expm1(-decay * n_taps)


@dataclass(frozen=True)
class ChannelParams:
    """Static channel shape: tap count, PDP decay, subcarrier count."""

    n_taps: int
    decay: float
    n_subcarriers: int

    def __post_init__(self):
        sigma_h_sq(self.n_taps, self.decay)  # validates n_taps/decay
        if self.n_subcarriers < 1:
            raise ValueError("n_subcarriers must be >= 1")

    @property
    def sigma_h_sq(self) -> float:
        return sigma_h_sq(self.n_taps, self.decay)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw: complex taps, per-subcarrier gains, squared magnitudes."""

    taps: np.ndarray      # (n_taps,) complex
    gains: np.ndarray     # (n_subcarriers,) complex, direct DFT of taps
    gain_sq: np.ndarray   # |gains|**2


@dataclass(frozen=True)
class InterferenceProfile:
    """Per-subcarrier interference variances (microwatt), zero off-block."""

    variances: np.ndarray
    n_affected: int
    shape_beta: float
    scale: float
    start_index: int


def tap_variances(params: ChannelParams) -> np.ndarray:
    """Expected tap energies ``sigma_h_sq * e**(-n * decay)``; sums to 1."""
    n = np.arange(params.n_taps)
    return params.sigma_h_sq * np.exp(-n * params.decay)


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent substream for one trial.

    Seeded by the (master_seed, trial_index) counter pair, so the draw for a
    trial never depends on trial order or worker count.
    """
    return np.random.default_rng(np.random.SeedSequence([master_seed, trial_index]))


@functools.lru_cache(maxsize=8)
def _dft_matrix(n_taps: int, n_subcarriers: int) -> np.ndarray:
    # Direct DFT over a handful of taps; no fast transform needed at this size.
    n = np.arange(n_taps)[:, None]
    i = np.arange(n_subcarriers)[None, :]
    return np.exp(-2j * math.pi * n * i / n_subcarriers)


def draw_realization(params: ChannelParams, rng: np.random.Generator) -> ChannelRealization:
    """Draw one Rayleigh channel realization.

    Each tap is zero-mean complex Gaussian with the PDP variance, generated
    by the polar transform (exponential magnitude-squared, uniform phase)
    from exactly two uniforms per tap.  Gains are the direct DFT of the taps.
    """
    var = tap_variances(params)
    u1 = 1.0 - rng.random(params.n_taps)   # in (0, 1]: keeps log finite
    u2 = rng.random(params.n_taps)
    radius = np.sqrt(-var * np.log(u1))
    taps = radius * np.exp(2j * math.pi * u2)
    gains = taps @ _dft_matrix(params.n_taps, params.n_subcarriers)
    return ChannelRealization(taps, gains, np.abs(gains) ** 2)


def interference_profile(
    n_subcarriers: int,
    n_affected: int,
    beta: float,
    scale: float,
    start_index: int = 0,
) -> InterferenceProfile:
    """Contiguous interference block with variances ``scale * e**(-beta * x)``.

    ``x`` runs 0..n_affected-1 across the block; the bundled experiments use
    a negative ``beta``, so the profile grows across the block.  A ``scale``
    of ``inf`` is the strong-interference sentinel (affected subcarriers end
    up with zero CINR); 0 disables interference.
    """
    if not 0 <= n_affected <= n_subcarriers:
        raise ValueError(
            f"n_affected must lie in [0, {n_subcarriers}], got {n_affected}"
        )
    if not (0 <= start_index and start_index + n_affected <= n_subcarriers):
        raise ValueError(
            f"block [{start_index}, {start_index + n_affected}) out of range "
            f"for {n_subcarriers} subcarriers"
        )
    if math.isnan(scale) or scale < 0.0:
        raise ValueError(f"scale must be >= 0, got {scale}")
    variances = np.zeros(n_subcarriers)
    x = np.arange(n_affected)
    variances[start_index : start_index + n_affected] = scale * np.exp(-beta * x)
    return InterferenceProfile(variances, n_affected, beta, scale, start_index)
