import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bitload.allocator import (
    TradeoffWeight,
    allocate,
    allocate_subcarrier,
    cinr_threshold,
    continuous_solution,
)
from bitload.model import ber_mqam

import reference_oracle as ref

W5 = TradeoffWeight(0.5)

active_triples = st.tuples(
    st.floats(0.05, 0.95),
    st.floats(-6.0, -3.0),
    st.floats(0.0, 2.0),
).map(
    lambda z: (
        TradeoffWeight(z[0]),
        10.0 ** z[1],
        cinr_threshold(TradeoffWeight(z[0]), 10.0 ** z[1]) * 10.0 ** z[2],
    )
)


class TestTradeoffWeight:
    def test_gamma_derivation(self):
        assert W5.gamma == pytest.approx(1.0 / math.log(2.0), rel=1e-15)
        assert TradeoffWeight(0.25).gamma == pytest.approx(3.0 / math.log(2.0))

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
    def test_alpha_bounds(self, alpha):
        with pytest.raises(ValueError):
            TradeoffWeight(alpha)


class TestCinrThreshold:
    def test_reference_point(self):
        assert cinr_threshold(W5, 1e-4) == pytest.approx(13.1716, abs=1e-3)
        assert cinr_threshold(W5, 1e-4) == pytest.approx(ref.threshold(0.5, 1e-4), rel=1e-15)

    def test_looser_target_lowers_threshold(self):
        assert cinr_threshold(W5, 1e-3) == pytest.approx(9.1810, abs=1e-3)
        with pytest.warns(Warning, match="approximation is loose"):
            loose = cinr_threshold(W5, 0.04)
        assert loose == pytest.approx(2.5 * math.log(2.0) * math.log(5.0), rel=1e-12)
        assert loose < cinr_threshold(W5, 1e-3) < cinr_threshold(W5, 1e-4)


class TestContinuousSolution:
    def test_at_threshold_exactly_two_bits(self):
        th = cinr_threshold(W5, 1e-4)
        sol = continuous_solution(th, W5, 1e-4)
        assert sol.active
        assert sol.bits_cont == pytest.approx(2.0, abs=1e-3)
        assert sol.power_cont == pytest.approx(1.08202, abs=1e-3)

    def test_double_threshold_adds_one_bit(self):
        sol = continuous_solution(26.3432, W5, 1e-4)
        assert sol.bits_cont == pytest.approx(3.0, abs=1e-3)
        assert sol.power_cont == pytest.approx(1.26236, abs=1e-3)
        assert sol.power_cont == pytest.approx(W5.gamma * 7.0 / 8.0, rel=1e-4)

    def test_below_threshold_inactive(self):
        sol = continuous_solution(13.0, W5, 1e-4)
        assert sol == type(sol)(0.0, 0.0, False)

    def test_generic_point(self):
        sol = continuous_solution(40.0, W5, 1e-4)
        assert sol.bits_cont == pytest.approx(3.6026, abs=1e-3)
        assert sol.power_cont == pytest.approx(1.32392, abs=1e-3)
        assert sol.bits_cont == pytest.approx(ref.bits_cont(40.0, 0.5, 1e-4), rel=1e-13)
        assert sol.power_cont == pytest.approx(ref.power_cont(40.0, 0.5, 1e-4), rel=1e-13)

    @given(active_triples)
    @settings(max_examples=300)
    def test_constraint_active(self, triple):
        w, t, c = triple
        sol = continuous_solution(c, w, t)
        assert ber_mqam(sol.power_cont, sol.bits_cont, c) == pytest.approx(t, rel=1e-12)

    @given(active_triples)
    @settings(max_examples=300)
    def test_two_power_formulas_agree(self, triple):
        w, t, c = triple
        sol = continuous_solution(c, w, t)
        arg = -w.gamma * 1.6 * c / math.log(5.0 * t)
        closed_form = w.gamma * (1.0 - 1.0 / arg)
        assert sol.power_cont == pytest.approx(closed_form, rel=1e-12)

    @given(active_triples)
    @settings(max_examples=500)
    def test_bit_doubling_law_exact(self, triple):
        w, t, c = triple
        b1 = continuous_solution(c, w, t).bits_cont
        b2 = continuous_solution(2.0 * c, w, t).bits_cont
        assert b2 == b1 + 1.0

    @given(active_triples)
    @settings(max_examples=300)
    def test_power_strictly_below_gamma(self, triple):
        w, t, c = triple
        assert continuous_solution(c, w, t).power_cont < w.gamma

    @given(active_triples, st.floats(1.01, 10.0))
    @settings(max_examples=200)
    def test_monotone_in_cinr(self, triple, scale):
        w, t, c = triple
        lo = continuous_solution(c, w, t)
        hi = continuous_solution(c * scale, w, t)
        assert hi.bits_cont > lo.bits_cont
        assert hi.power_cont > lo.power_cont

    @given(
        st.floats(0.05, 0.95),
        st.floats(-6.0, -3.0),
        st.floats(0.02, 50.0),
    )
    @settings(max_examples=500)
    def test_activation_equivalence(self, alpha, log_t, factor):
        w, t = TradeoffWeight(alpha), 10.0 ** log_t
        c = cinr_threshold(w, t) * factor
        sol = continuous_solution(c, w, t)
        assert sol.active == (c >= cinr_threshold(w, t))
        if sol.active:
            assert sol.bits_cont >= 2.0


class TestAllocateSubcarrier:
    def test_rounds_up_to_sixteen_qam(self):
        bits, power = allocate_subcarrier(40.0, W5, 1e-4)
        assert bits == 4
        assert power == pytest.approx(1.78146, abs=1e-4)

    def test_boundary_keeps_qpsk(self):
        bits, power = allocate_subcarrier(13.1716, W5, 1e-4)
        assert bits == 2
        assert power == pytest.approx(1.08201, abs=1e-4)

    def test_below_threshold_nulled(self):
        assert allocate_subcarrier(5.0, W5, 1e-4) == (0, 0.0)

    def test_half_bit_ties(self):
        c = cinr_threshold(W5, 1e-4) * 2.0 ** 0.5
        sol = continuous_solution(c, W5, 1e-4)
        assert sol.bits_cont == 2.5  # exact on the quantized bit grid
        assert allocate_subcarrier(c, W5, 1e-4, rounding="half-up")[0] == 3
        assert allocate_subcarrier(c, W5, 1e-4, rounding="half-even")[0] == 2

    def test_unknown_rounding_rejected(self):
        with pytest.raises(ValueError, match="rounding"):
            allocate_subcarrier(40.0, W5, 1e-4, rounding="floor")

    def test_max_bits_cap(self):
        bits, power = allocate_subcarrier(4000.0, W5, 1e-4, max_bits=6)
        assert bits == 6
        assert power == pytest.approx(ref.power_for(6, 4000.0, 1e-4), rel=1e-12)

    @given(active_triples)
    @settings(max_examples=300)
    def test_post_rounding_ber_exact(self, triple):
        w, t, c = triple
        bits, power = allocate_subcarrier(c, w, t)
        assert bits >= 2
        assert ber_mqam(power, bits, c) == pytest.approx(t, rel=1e-12)

    @given(active_triples)
    @settings(max_examples=300)
    def test_matches_reference_decision(self, triple):
        w, t, c = triple
        assert allocate_subcarrier(c, w, t)[0] == ref.allocate_subcarrier(c, w.alpha, t)[0]


class TestAllocate:
    def test_three_subcarrier_composition(self):
        a = allocate([40.0, 13.1716, 5.0], W5, 1e-4)
        np.testing.assert_array_equal(a.bits, [4, 2, 0])
        assert a.power[0] == pytest.approx(1.78146, abs=1e-4)
        assert a.power[1] == pytest.approx(1.08201, abs=1e-4)
        assert a.power[2] == 0.0
        assert a.total_bits == 6
        assert a.total_power == pytest.approx(a.power.sum(), rel=1e-12)

    def test_all_dead_channel(self):
        a = allocate([0.0, 0.0, 0.0], W5, 1e-4)
        assert a.total_bits == 0
        assert a.total_power == 0.0
        assert not a.bits.any()

    def test_uniform_channel(self):
        a = allocate([26.3432] * 128, W5, 1e-4)
        assert a.total_bits == 384
        assert a.total_power == pytest.approx(128 * 1.26236, abs=0.1)

    def test_nulled_iff_zero_power(self):
        rng = np.random.default_rng(7)
        a = allocate(rng.exponential(20.0, 256), W5, 1e-4)
        np.testing.assert_array_equal(a.bits == 0, a.power == 0.0)
        assert set(np.unique(a.bits)) <= ({0} | set(range(2, 20)))

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="targets"):
            allocate([40.0, 30.0], W5, [1e-4, 1e-4, 1e-4])

    def test_empty_input(self):
        with pytest.raises(ValueError):
            allocate([], W5, 1e-4)

    def test_per_subcarrier_targets(self):
        a = allocate([40.0, 40.0], W5, [1e-4, 1e-5])
        assert a.bits[0] >= a.bits[1]  # tighter target, higher threshold
        assert ber_mqam(a.power[0], a.bits[0], 40.0) == pytest.approx(1e-4, rel=1e-12)
        assert ber_mqam(a.power[1], a.bits[1], 40.0) == pytest.approx(1e-5, rel=1e-12)

    def test_totals_match_reference(self):
        rng = np.random.default_rng(3)
        c = rng.exponential(30.0, 64)
        a = allocate(c, W5, 1e-4)
        want_bits = sum(ref.allocate_subcarrier(ci, 0.5, 1e-4)[0] for ci in c)
        want_power = sum(ref.allocate_subcarrier(ci, 0.5, 1e-4)[1] for ci in c)
        assert a.total_bits == want_bits
        assert a.total_power == pytest.approx(want_power, rel=1e-12)
