"""First-order optimality checks for the closed-form loading solution.

The per-subcarrier problem is separable, so every check runs on a single
(cinr, alpha, ber_target) triple: the Lagrange multiplier has a closed form
that is positive wherever defined, the stationarity and constraint residuals
vanish at the closed-form optimum, and an independent brute-force grid search
over the constraint-active manifold reproduces the continuous bit load.
"""

import math
from dataclasses import dataclass

import numpy as np

from .allocator import (
    ContinuousSolution,
    TradeoffWeight,
    cinr_threshold,
    continuous_solution,
)
from .model import BER_COEF, EXP_COEF

__all__ = [
    "KktReport",
    "lagrange_multiplier",
    "kkt_residuals",
    "lagrangian",
    "objective",
    "grid_oracle",
    "verification_battery",
]


@dataclass(frozen=True)
class KktReport:
    """Multiplier and residuals of one subcarrier's optimality system."""

    lam: float            # Lagrange multiplier, > 0 at an optimum
    stationarity_p: float  # d L / d power
    stationarity_b: float  # d L / d bits
    constraint: float      # BER equality residual (slack folded in)
    slack: float           # squared slack variable, 0 at an active optimum


def _ber(power: float, bits: float, cinr: float) -> float:
    return BER_COEF * math.exp(-EXP_COEF * cinr * power / (2.0 ** bits - 1.0))


def lagrange_multiplier(
    cinr: float, bits: float, power: float, weight: TradeoffWeight
) -> float:
    """Closed-form multiplier ``alpha / (d BER / d power)`` magnitude.

    Strictly positive for every valid (cinr, bits, power); positivity is the
    third first-order optimality condition.
    """
    if bits <= 0.0 or cinr <= 0.0:
        raise ValueError("bits and cinr must be positive")
    denom = BER_COEF * (EXP_COEF * cinr / (2.0 ** bits - 1.0)) * math.exp(
        -EXP_COEF * cinr * power / (2.0 ** bits - 1.0)
    )
    if denom == 0.0:
        raise ValueError("multiplier undefined: BER derivative underflowed to 0")
    return weight.alpha / denom


def lagrangian(
    power: float,
    bits: float,
    slack_sq: float,
    lam: float,
    cinr: float,
    weight: TradeoffWeight,
    ber_target: float,
) -> float:
    """Single-subcarrier Lagrangian (objective + multiplier * equality)."""
    a = weight.alpha
    return (
        a * power
        - (1.0 - a) * bits
        + lam * (_ber(power, bits, cinr) - ber_target + slack_sq)
    )


def kkt_residuals(
    cinr: float,
    sol: ContinuousSolution,
    weight: TradeoffWeight,
    ber_target: float,
) -> KktReport:
    """Evaluate the stationarity system analytically at a continuous solution.

    All four residuals are ~0 (double-precision roundoff) at the closed-form
    optimum and move away from 0 under any perturbation of bits or power.

    Raises
    ------
    ValueError
        For an inactive solution; a nulled subcarrier has no interior
        stationary point to certify.
    """
    if not sol.active:
        raise ValueError("KKT residuals are not applicable to a nulled subcarrier")
    a = weight.alpha
    b, p = sol.bits_cont, sol.power_cont
    lam = lagrange_multiplier(cinr, b, p, weight)
    m = 2.0 ** b - 1.0
    e = math.exp(-EXP_COEF * cinr * p / m)
    st_p = a - BER_COEF * lam * (EXP_COEF * cinr / m) * e
    st_b = -(1.0 - a) + BER_COEF * math.log(2.0) * lam * (
        EXP_COEF * cinr * p * 2.0 ** b / m ** 2
    ) * e
    constraint = BER_COEF * e - ber_target
    return KktReport(lam, st_p, st_b, constraint, 0.0)


def objective(bits: float, power: float, weight: TradeoffWeight) -> float:
    """Scalarized tradeoff ``alpha * power - (1 - alpha) * bits``.

    Nulling a subcarrier scores exactly 0; a loaded subcarrier is preferable
    only when its objective is negative.
    """
    return weight.alpha * power - (1.0 - weight.alpha) * bits


def grid_oracle(
    cinr: float,
    weight: TradeoffWeight,
    ber_target: float,
    b_max: float = 10.0,
    steps: int = 100_000,
) -> tuple[float, float]:
    """Brute-force minimizer of the tradeoff over a uniform bit grid.

    Searches b in [2, b_max] along the constraint-active manifold
    ``P(b) = -(2**b - 1) * ln(5 t) / (1.6 C)``: at fixed b the objective
    strictly decreases as power decreases until the BER constraint binds, so
    nothing off the manifold can win.  Ties break toward the lowest b.

    Returns
    -------
    (bits, power)
        The grid point minimizing the objective.
    """
    if steps < 1000:
        raise ValueError(f"steps must be >= 1000, got {steps}")
    if b_max <= 2.0:
        raise ValueError(f"b_max must exceed 2, got {b_max}")
    if cinr <= 0.0:
        raise ValueError("grid oracle needs cinr > 0")
    b = np.linspace(2.0, b_max, steps)
    p = -(2.0 ** b - 1.0) * math.log(5.0 * ber_target) / (EXP_COEF * cinr)
    f = weight.alpha * p - (1.0 - weight.alpha) * b
    i = int(np.argmin(f))  # first minimum == lowest b
    return float(b[i]), float(p[i])


def finite_difference_gradients(
    cinr: float,
    sol: ContinuousSolution,
    weight: TradeoffWeight,
    ber_target: float,
    step: float = 1e-6,
) -> tuple[float, float]:
    """Central-difference gradients of the Lagrangian at a solution point."""
    lam = lagrange_multiplier(cinr, sol.bits_cont, sol.power_cont, weight)

    def L(p, b):
        return lagrangian(p, b, 0.0, lam, cinr, weight, ber_target)

    p, b = sol.power_cont, sol.bits_cont
    g_p = (L(p + step, b) - L(p - step, b)) / (2.0 * step)
    g_b = (L(p, b + step) - L(p, b - step)) / (2.0 * step)
    return g_p, g_b


def random_active_triples(n: int, rng: np.random.Generator):
    """Random (cinr, weight, ber_target) triples on the active region.

    CINRs land between 1x and ~32x the activation threshold, keeping the
    continuous bit load comfortably inside the default oracle grid.
    """
    out = []
    for _ in range(n):
        weight = TradeoffWeight(float(rng.uniform(0.05, 0.95)))
        t = float(10.0 ** rng.uniform(-6.0, -3.0))
        c = cinr_threshold(weight, t) * 10.0 ** float(rng.uniform(0.0, 1.5))
        out.append((c, weight, t))
    return out


def verification_battery(
    n_triples: int = 100, steps: int = 100_000, seed: int = 0
) -> list:
    """Run every optimality check; returns (name, passed, detail) rows.

    Certifies the active branch only: the multiplier-free branch of the
    stationarity system is underdetermined and has no solution to check.
    """
    rng = np.random.default_rng(seed)
    triples = random_active_triples(n_triples, rng)
    results = []

    worst_resid = worst_rel = 0.0
    lam_ok = True
    for c, w, t in triples:
        sol = continuous_solution(c, w, t)
        rep = kkt_residuals(c, sol, w, t)
        worst_resid = max(
            worst_resid, abs(rep.stationarity_p), abs(rep.stationarity_b), rep.slack
        )
        worst_rel = max(worst_rel, abs(rep.constraint) / t)
        lam_ok = lam_ok and rep.lam > 0.0
    results.append(
        (
            "kkt-stationarity",
            worst_resid < 1e-9,
            f"max |residual| = {worst_resid:.3e} (tolerance 1e-9)",
        )
    )
    results.append(
        (
            "ber-constraint-active",
            worst_rel < 1e-12,
            f"max relative constraint residual = {worst_rel:.3e} (tolerance 1e-12)",
        )
    )
    results.append(("multiplier-positive", lam_ok, "lambda > 0 at every optimum"))

    grid_step = 8.0 / (steps - 1)
    worst_gap = 0.0
    for c, w, t in triples:
        sol = continuous_solution(c, w, t)
        b_grid, _ = grid_oracle(c, w, t, b_max=10.0, steps=steps)
        worst_gap = max(worst_gap, abs(b_grid - sol.bits_cont))
    results.append(
        (
            "grid-oracle-agreement",
            worst_gap <= grid_step,
            f"max |grid - closed form| = {worst_gap:.3e} (grid step {grid_step:.3e})",
        )
    )

    worst_fd = 0.0
    for c, w, t in triples[: min(20, len(triples))]:
        sol = continuous_solution(c, w, t)
        rep = kkt_residuals(c, sol, w, t)
        g_p, g_b = finite_difference_gradients(c, sol, w, t)
        worst_fd = max(worst_fd, abs(g_p - rep.stationarity_p), abs(g_b - rep.stationarity_b))
    results.append(
        (
            "finite-difference",
            worst_fd < 1e-5,
            f"max |numeric - analytic| = {worst_fd:.3e} (tolerance 1e-5)",
        )
    )

    doubling_ok = True
    for _ in range(1000):
        w = TradeoffWeight(float(rng.uniform(0.05, 0.95)))
        t = float(10.0 ** rng.uniform(-6.0, -3.0))
        c = cinr_threshold(w, t) * 10.0 ** float(rng.uniform(0.0, 2.0))
        b1 = continuous_solution(c, w, t).bits_cont
        b2 = continuous_solution(2.0 * c, w, t).bits_cont
        doubling_ok = doubling_ok and (b2 == b1 + 1.0)
    results.append(
        ("bit-doubling-exact", doubling_ok, "bits(2C) == bits(C) + 1, exact")
    )

    # Residuals at the optimum sit near 1e-16; perturbed points must clear
    # these floors by many orders so the check demonstrably has power.
    power_ok = True
    for c, w, t in triples[: min(20, len(triples))]:
        sol = continuous_solution(c, w, t)
        bumped_b = ContinuousSolution(sol.bits_cont + 0.1, sol.power_cont, True)
        bumped_p = ContinuousSolution(sol.bits_cont, sol.power_cont * 1.05, True)
        power_ok = power_ok and abs(kkt_residuals(c, bumped_b, w, t).stationarity_b) > 1e-6
        power_ok = power_ok and abs(kkt_residuals(c, bumped_p, w, t).constraint) > 1e-9
    results.append(
        ("perturbation-detected", power_ok, "residuals move off 0 at perturbed points")
    )
    return results

