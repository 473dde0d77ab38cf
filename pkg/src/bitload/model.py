"""M-QAM bit error rate model shared by every loading algorithm.

All powers are carried in linear microwatts; dB conversion happens only at
the reporting boundary (see :mod:`bitload.harness`).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ApproximationWarning",
    "SubcarrierChannelState",
    "cinr",
    "compute_cinrs",
    "ber_mqam",
    "power_for_target_ber",
    "BER_COEF",
    "EXP_COEF",
    "BER_VALIDITY_LIMIT",
]

# BER_i ~= BER_COEF * exp(-EXP_COEF * P_i * C_i / (2^b_i - 1)) for M-ary QAM.
BER_COEF = 0.2
EXP_COEF = 1.6

# The exponential approximation is tight (within 1 dB) only for BER <= 1e-3;
# looser targets are allowed but flagged.
BER_VALIDITY_LIMIT = 1e-3


class ApproximationWarning(UserWarning):
    """Raised when a BER target lies outside the model's validity range."""


@dataclass(frozen=True)
class SubcarrierChannelState:
    """Channel state of one subcarrier.

    Attributes
    ----------
    gain_sq : float
        Squared channel gain magnitude (dimensionless), >= 0.
    noise_var : float
        AWGN variance in microwatts, > 0.
    interf_var : float
        Interference variance in microwatts, >= 0 (zero when unaffected,
        ``inf`` is the strong-interference sentinel).
    """

    gain_sq: float
    noise_var: float
    interf_var: float = 0.0


def cinr(state: SubcarrierChannelState) -> float:
    """Channel-to-interference-plus-noise ratio of one subcarrier.

    Parameters
    ----------
    state : SubcarrierChannelState

    Returns
    -------
    float
        ``gain_sq / (noise_var + interf_var)``, dimensionless.

    Raises
    ------
    ValueError
        If gain or noise is non-finite or violates its sign constraint.
        ``interf_var = inf`` is accepted and yields 0 (nulled by
        overwhelming interference).
    """
    g, n, u = state.gain_sq, state.noise_var, state.interf_var
    if not math.isfinite(g) or g < 0.0:
        raise ValueError(f"gain_sq must be finite and >= 0, got {g}")
    if not math.isfinite(n) or n <= 0.0:
        raise ValueError(f"noise_var must be finite and > 0, got {n}")
    if math.isnan(u) or u < 0.0:
        raise ValueError(f"interf_var must be >= 0, got {u}")
    if math.isinf(u):
        return 0.0
    return g / (n + u)


def compute_cinrs(gain_sq, noise_var, interf_var) -> np.ndarray:
    """Vectorized CINR over all subcarriers of one channel realization.

    ``interf_var`` entries of ``inf`` produce a CINR of exactly 0.
    """
    g = np.asarray(gain_sq, dtype=float)
    u = np.asarray(interf_var, dtype=float)
    if np.any(~np.isfinite(g)) or np.any(g < 0.0):
        raise ValueError("gain_sq entries must be finite and >= 0")
    if not (math.isfinite(noise_var) and noise_var > 0.0):
        raise ValueError(f"noise_var must be finite and > 0, got {noise_var}")
    if np.any(np.isnan(u)) or np.any(u < 0.0):
        raise ValueError("interf_var entries must be >= 0")
    with np.errstate(divide="ignore"):
        out = g / (noise_var + u)
    out[np.isinf(u)] = 0.0
    return out


def ber_mqam(power: float, bits: float, cinr: float) -> float:
    """Approximate BER of square M-QAM on one subcarrier.

    Parameters
    ----------
    power : float
        Transmit power in microwatts, >= 0.
    bits : float
        Bits per symbol, > 0.  Real values are accepted because the
        continuous optimum is evaluated before rounding.
    cinr : float
        Channel-to-interference-plus-noise ratio, >= 0.

    Returns
    -------
    float
        ``0.2 * exp(-1.6 * power * cinr / (2**bits - 1))``, in (0, 0.2].
    """
    if bits <= 0.0:
        raise ValueError(f"bits must be > 0 (2^bits - 1 divides), got {bits}")
    if power < 0.0:
        raise ValueError(f"power must be >= 0, got {power}")
    if cinr < 0.0:
        raise ValueError(f"cinr must be >= 0, got {cinr}")
    return BER_COEF * math.exp(-EXP_COEF * power * cinr / (2.0 ** bits - 1.0))


def power_for_target_ber(bits: float, cinr: float, ber_target: float) -> float:
    """Power that makes the BER constraint exactly active at a given bit load.

    Inverts the M-QAM BER approximation:
    ``P = -(2**bits - 1) * ln(5 * ber_target) / (1.6 * cinr)``.

    Parameters
    ----------
    bits : float
        Bits per symbol, >= 2 for M-QAM.
    cinr : float
        Channel-to-interference-plus-noise ratio, > 0.
    ber_target : float
        Target BER, in (0, 0.2).

    Returns
    -------
    float
        Required power in microwatts; ``ber_mqam`` of the result reproduces
        ``ber_target`` to within 1e-12 relative.

    Raises
    ------
    ValueError
        If ``cinr`` is 0 (no finite power can meet the target) or the
        target lies outside (0, 0.2).
    """
    check_ber_target(ber_target)
    if bits <= 0.0:
        raise ValueError(f"bits must be > 0, got {bits}")
    if cinr <= 0.0:
        raise ValueError(f"target BER {ber_target} infeasible at cinr {cinr}")
    return -(2.0 ** bits - 1.0) * math.log(5.0 * ber_target) / (EXP_COEF * cinr)


def check_ber_target(ber_target: float) -> float:
    """Validate a BER target; warn when outside the tight-approximation range."""
    if not 0.0 < ber_target < BER_COEF:
        raise ValueError(
            f"ber_target must lie in (0, {BER_COEF}), got {ber_target}"
        )
    if ber_target > BER_VALIDITY_LIMIT:
        warnings.warn(
            f"BER target {ber_target:g} exceeds {BER_VALIDITY_LIMIT:g}; the "
            "exponential M-QAM approximation is loose there",
            ApproximationWarning,
            stacklevel=3,
        )
    return ber_target
