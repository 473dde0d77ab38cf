"""Greedy decremental bit loading under uniform power and a mean-BER cap.

Comparison scheme: every subcarrier spends the same power, all start at the
largest constellation, and the subcarrier with the worst BER is stepped down
one level at a time (ties to the lowest index) until the throughput-weighted
mean BER meets the target.  Worst case O(N^2) subcarrier scans, against the
closed-form loader's O(N).
"""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .allocator import Allocation
from .model import BER_COEF, EXP_COEF, check_ber_target

__all__ = [
    "BitLevelSet",
    "uniform_power",
    "weighted_mean_ber",
    "greedy_allocate",
    "GreedyUniformPowerLoader",
]


@dataclass(frozen=True)
class BitLevelSet:
    """Allowed bit loads: 0 plus ascending M-QAM sizes (never 1)."""

    levels: tuple

    def __post_init__(self):
        ls = self.levels
        if not ls or ls[0] != 0:
            raise ValueError("level set must start at 0")
        if any(b != int(b) or b < 0 for b in ls):
            raise ValueError("levels must be nonnegative integers")
        if 1 in ls:
            raise ValueError("1 bit is not a valid M-QAM load")
        if any(a >= b for a, b in zip(ls, ls[1:])):
            raise ValueError("levels must be strictly ascending")
        if len(ls) < 2:
            raise ValueError("need at least one nonzero level")

    @classmethod
    def up_to(cls, b_max: int = 12) -> "BitLevelSet":
        """Unit-step levels {0} + {2..b_max}."""
        if b_max < 2:
            raise ValueError(f"b_max must be >= 2, got {b_max}")
        return cls((0,) + tuple(range(2, b_max + 1)))

    @property
    def b_max(self) -> int:
        return self.levels[-1]


def uniform_power(avg_total_power: float, n_subcarriers: int) -> float:
    """Per-subcarrier share of a total power budget."""
    if avg_total_power < 0.0:
        raise ValueError(f"total power must be >= 0, got {avg_total_power}")
    if n_subcarriers < 1:
        raise ValueError(f"n_subcarriers must be >= 1, got {n_subcarriers}")
    return avg_total_power / n_subcarriers


def _ber_vec(bits: np.ndarray, power: float, cinrs: np.ndarray) -> np.ndarray:
    """Per-subcarrier BER at a uniform power; 0 where no bits are loaded."""
    out = np.zeros(len(bits))
    on = bits > 0
    out[on] = BER_COEF * np.exp(
        -EXP_COEF * power * cinrs[on] / (2.0 ** bits[on] - 1.0)
    )
    return out


def weighted_mean_ber(bits, power: float, cinrs, weighted: bool = True) -> float:
    """System mean BER at a uniform per-subcarrier power.

    Throughput-weighted by default (errored bits over transmitted bits); the
    unweighted variant averages the BER of loaded subcarriers arithmetically.
    Returns 0 when nothing is loaded.
    """
    bits = np.asarray(bits)
    cinrs = np.asarray(cinrs, dtype=float)
    if bits.shape != cinrs.shape:
        raise ValueError("bits and cinrs must have equal length")
    if power < 0.0:
        raise ValueError(f"power must be >= 0, got {power}")
    ber = _ber_vec(bits, power, cinrs)
    if weighted:
        total = bits.sum()
        return float((bits * ber).sum() / total) if total > 0 else 0.0
    n_on = int(np.count_nonzero(bits))
    return float(ber[bits > 0].sum() / n_on) if n_on else 0.0


def greedy_allocate(
    cinrs,
    power: float,
    mean_ber_target: float,
    levels: BitLevelSet = None,
    weighted: bool = True,
) -> Allocation:
    """Decremental greedy bit loading at a fixed uniform power.

    Start every subcarrier at the top level; while the mean BER exceeds the
    target and anything is still loaded, drop the subcarrier with the largest
    per-subcarrier BER to the next lower level (lowest index wins ties).
    The returned allocation always satisfies the mean-BER constraint.
    """
    check_ber_target(mean_ber_target)
    if levels is None:
        levels = BitLevelSet.up_to()
    c = np.asarray(cinrs, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("cinrs must be a non-empty 1-D sequence")
    if power < 0.0:
        raise ValueError(f"power must be >= 0, got {power}")
    n = c.size
    lv = np.asarray(levels.levels)

    # BER at every (level, subcarrier) pair; level 0 rows stay at 0.
    table = np.zeros((len(lv), n))
    for j, b in enumerate(lv[1:], start=1):
        table[j] = BER_COEF * np.exp(-EXP_COEF * power * c / (2.0 ** b - 1.0))

    idx = np.full(n, len(lv) - 1)  # current level index per subcarrier
    bits = lv[idx].astype(float)
    ber = table[idx, np.arange(n)]
    while bits.any():
        if weighted:
            mean = (bits * ber).sum() / bits.sum()
        else:
            on = bits > 0
            mean = ber[on].sum() / np.count_nonzero(on)
        if mean <= mean_ber_target:
            break
        worst = int(np.argmax(np.where(bits > 0, ber, -1.0)))
        idx[worst] -= 1
        bits[worst] = lv[idx[worst]]
        ber[worst] = table[idx[worst], worst]

    bits = bits.astype(int)
    power_vec = np.where(bits > 0, power, 0.0)
    total_bits = 0
    total_power = 0.0
    for i in range(n):  # ascending-index totals
        total_bits += int(bits[i])
        total_power += power_vec[i]
    return Allocation(bits, power_vec, ber, total_bits, total_power)


class GreedyUniformPowerLoader(BaseEstimator):
    """Greedy mean-BER bit loader as a scikit-learn style transformer.

    Rows of ``X`` are per-subcarrier CINR vectors.  Stateless; ``fit`` only
    validates parameters.

    Parameters
    ----------
    power : float, default=1.0
        Uniform per-subcarrier transmit power in microwatts.
    mean_ber_target : float, default=1e-4
        Cap on the throughput-weighted mean BER.
    max_bits : int, default=12
        Top constellation size; levels are {0} + {2..max_bits}.
    weighted : bool, default=True
        Weight the mean BER by bits (False: arithmetic mean over loaded
        subcarriers).
    """

    def __init__(self, power=1.0, mean_ber_target=1e-4, max_bits=12, weighted=True):
        self.power = power
        self.mean_ber_target = mean_ber_target
        self.max_bits = max_bits
        self.weighted = weighted

    def fit(self, X=None, y=None):
        """Validate parameters and derive the level set; returns self."""
        check_ber_target(self.mean_ber_target)
        if self.power < 0.0:
            raise ValueError(f"power must be >= 0, got {self.power}")
        self.levels_ = BitLevelSet.up_to(self.max_bits)
        if X is not None:
            X = np.atleast_2d(np.asarray(X, dtype=float))
            self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "levels_"):
            raise NotFittedError(
                "This GreedyUniformPowerLoader instance is not fitted yet; "
                "call 'fit' before using this estimator."
            )

    def allocate(self, cinrs) -> Allocation:
        """Full allocation for one realization."""
        self._check_fitted()
        return greedy_allocate(
            cinrs, self.power, self.mean_ber_target, self.levels_, self.weighted
        )

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
