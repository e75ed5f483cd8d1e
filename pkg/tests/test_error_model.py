import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qcordic.error_model import (ErrorBreakdown, angle_error_bound, angle_mse,
                                 epsilon, rounding_bound_per_stage,
                                 rounding_mse, rounding_mse_empirical_reference,
                                 rounding_mse_expected, scaling_mse, total_mse)
from qcordic.reference import CordicParams, PROFILES, propagation_matrix

PAPER = PROFILES["paper"]
STD = PROFILES["standard"]


def exact_rounding_mse(sigmas, b, params):
    """Independent recompute: expand the per-term product from scratch."""
    eps2 = Fraction(1, 4 ** (b + 1))
    total = Fraction(0)
    for j in range(params.stages):
        prod = Fraction(1)
        for i in range(j):
            prod *= Fraction(sigmas[i], 2 ** params.shift_exponent(i))
        total += (1 - prod) ** 2
    return Fraction(4, 3) * eps2 * total


class TestEpsilon:
    def test_values(self):
        assert epsilon(15) == 1.52587890625e-05
        assert epsilon(1) == 0.25
        assert epsilon(0) == 0.5

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            epsilon(-1)


class TestAngleError:
    def test_zero(self):
        assert angle_error_bound(0.0) == 0.0
        assert angle_mse(0.0) == 0.0

    def test_small_angle_is_linear(self):
        # 2 sin(d/2) = d - d^3/24 + ...: below d but within the cubic term
        d = math.ldexp(1.0, -16)
        assert 0.0 < d - angle_error_bound(d) < d ** 3

    def test_half_turn(self):
        assert abs(angle_error_bound(math.pi) - 2.0) < 1e-15

    @given(st.floats(-3.2, 3.2, allow_nan=False))
    def test_mse_is_bound_squared(self, d):
        assume(d == 0.0 or abs(d) > 1e-150)
        assert angle_mse(d) == angle_error_bound(d) ** 2

    @given(st.floats(-3.2, 3.2, allow_nan=False))
    def test_symmetry(self, d):
        assert angle_error_bound(-d) == angle_error_bound(d)
        assert angle_mse(-d) == angle_mse(d)


class TestScalingMse:
    def test_values(self):
        assert scaling_mse(1) == 1.0 / 48.0
        assert scaling_mse(15) == math.ldexp(1.0, -30) / 12.0
        assert scaling_mse(15) == pytest.approx(7.761021455128987e-11,
                                                rel=1e-15)

    def test_rejects_bad_bits(self):
        with pytest.raises(ValueError):
            scaling_mse(0)

    @pytest.mark.parametrize("b", range(1, 21))
    def test_matches_uniform_second_moment(self, b):
        # integrate x^2 over the uniform quantization-error density
        half = epsilon(b)
        val, err = quad(lambda x: x * x / (2.0 * half), -half, half)
        assert err < 1e-12 * val
        assert abs(val - scaling_mse(b)) <= 1e-15 * scaling_mse(b)

    @pytest.mark.parametrize("b", [8, 15])
    def test_matches_sampled_variance(self, b):
        half = epsilon(b)
        rng = np.random.default_rng(99)
        draws = rng.uniform(-half, half, 1_000_000)
        sample = float(np.mean(draws * draws))
        assert abs(sample - scaling_mse(b)) < 0.05 * scaling_mse(b)

    def test_each_bit_quarters_the_power(self):
        for b in range(1, 19):
            assert scaling_mse(b + 1) == scaling_mse(b) / 4.0


class TestRoundingBound:
    def test_value(self):
        e = epsilon(15)
        assert rounding_bound_per_stage(e) == math.sqrt(2.0) * e

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            rounding_bound_per_stage(-1e-9)


class TestRoundingMse:
    def test_single_stage_is_noiseless_in_model(self):
        p = CordicParams(stages=1, start_index=0)
        assert rounding_mse([1], 15, p) == 0.0
        assert rounding_mse([-1], 15, p) == 0.0

    def test_two_stage_values(self):
        p = CordicParams(stages=2, start_index=0)
        e2 = Fraction(1, 4 ** 16)
        assert rounding_mse([-1, 1], 15, p) == float(Fraction(16, 3) * e2)
        assert rounding_mse([-1, -1], 15, p) == float(Fraction(16, 3) * e2)
        assert rounding_mse([1, 1], 15, p) == 0.0

    def test_direction_of_last_stage_is_irrelevant(self):
        sig = [1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1]
        assert rounding_mse(sig + [1], 15, PAPER) == \
            rounding_mse(sig + [-1], 15, PAPER)

    @pytest.mark.parametrize("start_index", [0, 1])
    @pytest.mark.parametrize("b", [3, 15])
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_exhaustive_against_independent_recompute(self, n, b, start_index):
        p = CordicParams(stages=n, start_index=start_index, frac_bits=b)
        for sig in itertools.product((-1, 1), repeat=n):
            want = exact_rounding_mse(sig, b, p)
            assert rounding_mse(sig, b, p) == float(want)

    def test_validates_directions(self):
        with pytest.raises(ValueError):
            rounding_mse([1] * 15, 15, PAPER)  # wrong length
        with pytest.raises(ValueError):
            rounding_mse([1] * 15 + [0], 15, PAPER)

    @given(st.lists(st.sampled_from((-1, 1)), min_size=16, max_size=16))
    def test_bounded_by_worst_case(self, sig):
        # every term (1 - prod)^2 <= 4, so the sum is below (16/3)eps^2 N
        val = rounding_mse(sig, 15, STD)
        assert 0.0 <= val <= 16.0 / 3.0 * epsilon(15) ** 2 * 16


class TestRoundingMseExpected:
    def test_frobenius_identity(self):
        # E = (2 eps^2 / 3) sum_j ||B(j)||_F^2 with numerically built B(j)
        sig = [1, -1, -1, 1, 1, 1, -1, 1, -1, -1, 1, -1, 1, 1, -1, 1]
        for p in (PAPER, STD):
            e = epsilon(p.frac_bits)
            acc = 0.0
            for j in range(p.stages):
                m = propagation_matrix(j, sig, p)
                acc += float(np.sum(m * m))
            want = 2.0 * e * e / 3.0 * acc
            got = rounding_mse_expected(p, p.frac_bits)
            assert abs(got - want) <= 1e-12 * want

    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("start_index", [0, 1])
    def test_small_pipelines_by_enumeration(self, n, start_index):
        # brute-force the noise model: 9^n equally likely error tuples
        b = 8
        p = CordicParams(stages=n, start_index=start_index, frac_bits=b)
        sig = [(-1) ** j for j in range(n)]
        mats = [propagation_matrix(j, sig, p) for j in range(n)]
        e = epsilon(b)
        opts = [np.array([a, c]) * e
                for a in (-1.0, 0.0, 1.0) for c in (-1.0, 0.0, 1.0)]
        total = 0.0
        count = 0
        for combo in itertools.product(opts, repeat=n):
            v = np.zeros(2)
            for j in range(n):
                v = v + mats[j] @ combo[j]
            total += float(v @ v)
            count += 1
        want = total / count
        got = rounding_mse_expected(p, b)
        assert got == pytest.approx(want, rel=1e-12)

    def test_monotone_in_stages(self):
        vals = [rounding_mse_expected(
            CordicParams(stages=n, start_index=1), 15) for n in range(1, 17)]
        assert all(a < b for a, b in zip(vals, vals[1:]))


class TestRoundingMseEmpirical:
    def test_deterministic(self):
        sig = [1, -1] * 8
        a = rounding_mse_empirical_reference(sig, STD, 4000, seed=5)
        b = rounding_mse_empirical_reference(sig, STD, 4000, seed=5)
        c = rounding_mse_empirical_reference(sig, STD, 4000, seed=6)
        assert a == b
        assert a != c

    def test_two_stage_within_three_standard_errors(self):
        b = 8
        p = CordicParams(stages=2, start_index=0, frac_bits=b)
        sig = [1, -1]
        mats = [propagation_matrix(j, sig, p) for j in range(2)]
        e = epsilon(b)
        opts = [np.array([a, c]) * e
                for a in (-1.0, 0.0, 1.0) for c in (-1.0, 0.0, 1.0)]
        sq = [float((mats[0] @ u + mats[1] @ v) @ (mats[0] @ u + mats[1] @ v))
              for u in opts for v in opts]
        mean = sum(sq) / len(sq)
        var = sum((x - mean) ** 2 for x in sq) / len(sq)
        trials = 20000
        est = rounding_mse_empirical_reference(sig, p, trials, seed=17)
        assert abs(est - mean) <= 3.0 * math.sqrt(var / trials)

    def test_converges_to_expectation(self):
        sig = [1, -1] * 8
        want = rounding_mse_expected(PAPER, PAPER.frac_bits)
        ests = [rounding_mse_empirical_reference(sig, PAPER, 20000, seed=s)
                for s in range(20)]
        mean = sum(ests) / len(ests)
        assert abs(mean - want) < 0.02 * want

    def test_sigma_choice_does_not_move_the_mean(self):
        # the propagation matrices differ but their norms do not
        a = rounding_mse_empirical_reference([1] * 16, PAPER, 30000, seed=3)
        b = rounding_mse_empirical_reference([-1, 1] * 8, PAPER, 30000, seed=3)
        want = rounding_mse_expected(PAPER, PAPER.frac_bits)
        assert abs(a - want) < 0.05 * want
        assert abs(b - want) < 0.05 * want

    def test_validates_arguments(self):
        with pytest.raises(ValueError):
            rounding_mse_empirical_reference([1] * 16, PAPER, 0, seed=1)
        with pytest.raises(ValueError):
            rounding_mse_empirical_reference([1] * 3, PAPER, 10, seed=1)


class TestTotalMse:
    def test_composition(self):
        sig = [1, -1] * 8
        out = total_mse(1e-5, sig, 15, PAPER)
        assert out.angle_mse == angle_mse(1e-5)
        assert out.scaling_mse == scaling_mse(15)
        assert out.rounding_mse == rounding_mse(sig, 15, PAPER)
        assert out.epsilon == epsilon(15)
        assert out.delta == 1e-5

    @given(st.floats(-1e-4, 1e-4, allow_nan=False),
           st.lists(st.sampled_from((-1, 1)), min_size=16, max_size=16),
           st.integers(4, 20))
    @settings(max_examples=200)
    def test_total_is_plain_sum(self, delta, sig, b):
        out = total_mse(delta, sig, b, STD)
        assert out.total_mse == out.angle_mse + out.scaling_mse + \
            out.rounding_mse

    def test_rejects_negative_components(self):
        with pytest.raises(ValueError):
            ErrorBreakdown(angle_mse=-1e-9, scaling_mse=0.0, rounding_mse=0.0,
                           total_mse=0.0, epsilon=0.5, delta=0.0)
