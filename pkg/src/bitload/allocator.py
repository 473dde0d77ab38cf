"""Closed-form joint bit and power loading.

Per subcarrier, the tradeoff between total power and throughput (weight
``alpha``) admits a closed-form optimum when the BER constraint is active:

    b* = log2(Gamma * 1.6 * C / -ln(5 * t))      Gamma = (1-alpha)/(alpha*ln 2)
    P* = Gamma * (1 - 2**-b*)

valid whenever b* >= 2 (square M-QAM), i.e. whenever the CINR ``C`` clears an
activation threshold; below it the subcarrier is nulled.  The final integer
allocation rounds b* to the nearest integer and recomputes the power so the
BER constraint stays exactly active.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .model import EXP_COEF, ber_mqam, check_ber_target, power_for_target_ber

__all__ = [
    "TradeoffWeight",
    "ContinuousSolution",
    "Allocation",
    "cinr_threshold",
    "continuous_solution",
    "allocate_subcarrier",
    "allocate",
    "JointBitPowerLoader",
]

MIN_BITS = 2  # square M-QAM needs at least 4 points

# Mantissa-log grid: with the fractional part of b* snapped to 2^-47, the sum
# e + log2(mantissa) is exact in a double for any exponent < 64, so doubling
# the CINR shifts b* by exactly 1.0 (bit-doubling law) instead of only up to
# library log2 rounding.
_BIT_QUANTUM = 2.0 ** -47


@dataclass(frozen=True)
class TradeoffWeight:
    """Power-vs-throughput weight ``alpha`` in (0, 1)."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def gamma(self) -> float:
        """Derived constant (1 - alpha) / (alpha * ln 2); always > 0."""
        return (1.0 - self.alpha) / (self.alpha * math.log(2.0))


@dataclass(frozen=True)
class ContinuousSolution:
    """Pre-rounding optimum of one subcarrier (zeros when inactive)."""

    bits_cont: float
    power_cont: float
    active: bool


@dataclass
class Allocation:
    """Integer per-subcarrier allocation with totals.

    ``bits[i] == 0`` iff ``power[i] == 0`` (nulled subcarrier); every active
    subcarrier meets its BER threshold with equality.
    """

    bits: np.ndarray
    power: np.ndarray
    ber: np.ndarray
    total_bits: int = field(default=0)
    total_power: float = field(default=0.0)

    @property
    def n_active(self) -> int:
        return int(np.count_nonzero(self.bits))


def _log2_quantized(x: float) -> float:
    # x = m * 2**e with m in [0.5, 1); snap log2(m) to the 2^-47 grid so the
    # sum below is exact (see _BIT_QUANTUM note).
    m, e = math.frexp(x)
    return e + round(math.log2(m) / _BIT_QUANTUM) * _BIT_QUANTUM


def _round_bits(bits_cont: float, rounding: str) -> int:
    if rounding == "half-up":
        return int(math.floor(bits_cont + 0.5))
    if rounding == "half-even":
        return round(bits_cont)
    raise ValueError(f"unknown rounding rule {rounding!r}")


def cinr_threshold(weight: TradeoffWeight, ber_target: float) -> float:
    """Minimum CINR at which the continuous optimum reaches 2 bits.

    Returns ``-(4/1.6) * (alpha*ln2/(1-alpha)) * ln(5*ber_target)``.
    Subcarriers below this are nulled.
    """
    check_ber_target(ber_target)
    a = weight.alpha
    return -(4.0 / EXP_COEF) * (a * math.log(2.0) / (1.0 - a)) * math.log(5.0 * ber_target)


def continuous_solution(
    cinr: float, weight: TradeoffWeight, ber_target: float
) -> ContinuousSolution:
    """Closed-form continuous optimum for one subcarrier.

    Active iff ``cinr`` clears :func:`cinr_threshold`; then
    ``bits_cont = log2(Gamma * 1.6 * cinr / -ln(5*ber_target))`` and
    ``power_cont = Gamma * (1 - 2**-bits_cont)``.  Inactive subcarriers get
    zeros.
    """
    if cinr < cinr_threshold(weight, ber_target):
        return ContinuousSolution(0.0, 0.0, False)
    gamma = weight.gamma
    arg = (gamma * EXP_COEF * cinr) / -math.log(5.0 * ber_target)
    bits = _log2_quantized(arg)
    power = gamma * (1.0 - 2.0 ** -bits)
    return ContinuousSolution(bits, power, True)


def allocate_subcarrier(
    cinr: float,
    weight: TradeoffWeight,
    ber_target: float,
    rounding: str = "half-up",
    max_bits: Optional[int] = None,
) -> tuple[int, float]:
    """Integer bit/power pair for one subcarrier.

    Rounds the continuous optimum to the nearest integer (ties per
    ``rounding``, default half-up) and recomputes the power so the BER
    constraint is active again; nulls the subcarrier when inactive or when
    rounding lands below 2 bits.
    """
    sol = continuous_solution(cinr, weight, ber_target)
    if not sol.active:
        return 0, 0.0
    # bits_cont >= 2 whenever active; the guard mirrors the rounding step's
    # defensive structure rather than a reachable branch.
    if sol.bits_cont < MIN_BITS:
        return 0, 0.0
    bits = _round_bits(sol.bits_cont, rounding)
    if max_bits is not None:
        bits = min(bits, max_bits)
    if bits < MIN_BITS:
        return 0, 0.0
    return bits, power_for_target_ber(bits, cinr, ber_target)


def allocate(
    cinrs: Sequence[float],
    weight: TradeoffWeight,
    ber_targets: Union[float, Sequence[float]],
    rounding: str = "half-up",
    max_bits: Optional[int] = None,
) -> Allocation:
    """Run the per-subcarrier loading loop over a whole OFDM symbol.

    ``ber_targets`` may be a scalar (applied to every subcarrier) or one
    value per subcarrier.  Each subcarrier is independent; totals accumulate
    in ascending subcarrier index.  Linear in the number of subcarriers.
    """
    c = np.asarray(cinrs, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("cinrs must be a non-empty 1-D sequence")
    n = c.size
    t_in = np.asarray(ber_targets, dtype=float)
    if t_in.ndim == 0:
        t = np.full(n, float(t_in))
    elif t_in.shape == (n,):
        t = t_in
    else:
        raise ValueError(f"got {t_in.size} BER targets for {n} subcarriers")

    bits = np.zeros(n, dtype=int)
    power = np.zeros(n)
    ber = np.zeros(n)
    total_bits = 0
    total_power = 0.0
    for i in range(n):
        b, p = allocate_subcarrier(c[i], weight, t[i], rounding, max_bits)
        if b:
            bits[i] = b
            power[i] = p
            ber[i] = ber_mqam(p, b, c[i])
            total_bits += b
            total_power += p
    return Allocation(bits, power, ber, total_bits, total_power)


class JointBitPowerLoader(BaseEstimator):
    """Closed-form joint bit/power loading as a scikit-learn style transformer.

    Rows of ``X`` are per-subcarrier CINR vectors (one row per channel
    realization).  The loader is stateless: ``fit`` only validates the
    parameters and derives constants.

    Parameters
    ----------
    alpha : float, default=0.5
        Power-vs-throughput tradeoff weight, in (0, 1).
    ber_target : float or array-like, default=1e-4
        BER threshold per subcarrier (scalar broadcasts).
    rounding : {"half-up", "half-even"}, default="half-up"
        Tie rule when the continuous bit load lands exactly on .5.
    max_bits : int or None, default=None
        Optional constellation cap; None reproduces the uncapped algorithm.

    Attributes
    ----------
    weight_ : TradeoffWeight
        Validated tradeoff weight.
    cinr_threshold_ : float
        Activation threshold, set when ``ber_target`` is a scalar.
    """

    def __init__(self, alpha=0.5, ber_target=1e-4, rounding="half-up", max_bits=None):
        self.alpha = alpha
        self.ber_target = ber_target
        self.rounding = rounding
        self.max_bits = max_bits

    def fit(self, X=None, y=None):
        """Validate parameters and derive constants; returns self."""
        self.weight_ = TradeoffWeight(self.alpha)
        if np.ndim(self.ber_target) == 0:
            self.cinr_threshold_ = cinr_threshold(self.weight_, float(self.ber_target))
        else:
            for t in np.asarray(self.ber_target, dtype=float):
                check_ber_target(t)
        _round_bits(2.0, self.rounding)  # reject unknown rules early
        if X is not None:
            X = np.atleast_2d(np.asarray(X, dtype=float))
            self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "weight_"):
            raise NotFittedError(
                "This JointBitPowerLoader instance is not fitted yet; call "
                "'fit' before using this estimator."
            )

    def allocate(self, cinrs) -> Allocation:
        """Full allocation (bits, powers, BERs, totals) for one realization."""
        self._check_fitted()
        return allocate(cinrs, self.weight_, self.ber_target, self.rounding, self.max_bits)

    def transform(self, X) -> np.ndarray:
        """Map CINR rows to ``[bits | powers]`` rows of width ``2 * n_subcarriers``."""
        self._check_fitted()
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], 2 * X.shape[1]))
        for k, row in enumerate(X):
            alloc = self.allocate(row)
            out[k, : X.shape[1]] = alloc.bits
            out[k, X.shape[1]:] = alloc.power
        return out

    def predict(self, X) -> np.ndarray:
        """Integer bit loads per subcarrier, one row per realization."""
        self._check_fitted()
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.vstack([self.allocate(row).bits for row in X])
