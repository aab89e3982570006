# -*- coding: utf-8 -*-
from itertools import product
import math

import numpy as np
import pytest

from smb_lab import cylinders, exceptions, process
from smb_lab.process import Word

from tests.conftest import (
    BERNOULLI_QUARTER_ENTROPY_RATE,
    BERNOULLI_QUARTER_VARIANCE,
    MARKOV_ENTROPY_RATE,
    near_uniform_chain,
)

#: H(p) of the two-state example.
MARKOV_EXAMPLE_HP = -(2 / 3 * math.log(2 / 3) + 1 / 3 * math.log(1 / 3))


class TestEnumeration:

    def test_prunes_forbidden_transitions(self, markov_three_state):
        table = cylinders.enumerate_cylinders(markov_three_state, 2)
        assert len(table) == 8
        assert np.all(np.isfinite(table.log_measure))

    @pytest.mark.parametrize('n', [1, 2, 3, 5])
    def test_matches_cylinder_measure(self, markov_three_state, n):
        spec = markov_three_state
        table = cylinders.enumerate_cylinders(spec, n)
        expected = sorted(
            value for value in (
                process.cylinder_measure(spec, Word(word)).value
                for word in product(range(spec.size), repeat=n)
            ) if value > -math.inf
        )
        np.testing.assert_allclose(sorted(table.log_measure), expected, rtol=0, atol=1e-14)
        assert cylinders.fsum(table.measure) == pytest.approx(1.0, abs=1e-12)

    def test_budget(self, markov_example):
        with pytest.raises(exceptions.BudgetExceeded) as excinfo:
            cylinders.enumerate_cylinders(markov_example, 20, budget=1000)
        assert excinfo.value.budget == 1000
        assert excinfo.value.required > 1000

    def test_invalid_order(self, markov_example):
        with pytest.raises(exceptions.InvalidOrder):
            cylinders.enumerate_cylinders(markov_example, 0)

    @pytest.mark.parametrize('gap', [0, 1, 4])
    def test_pairs_match_shift_concat(self, markov_three_state, gap):
        spec = markov_three_state
        pairs = cylinders.enumerate_pairs(spec, 2, 1, gap)
        words = [w for w in product(range(3), repeat=2)
                 if process.cylinder_measure(spec, Word(w)).value > -math.inf]
        for b, left in enumerate(words):
            for c in range(3):
                value = process.shift_concat_measure(spec, Word(left), gap, Word((c,))).value
                assert pairs.log_joint[b, c] == value

    def test_pair_marginals(self, markov_example):
        pairs = cylinders.enumerate_pairs(markov_example, 2, 3, 2)
        np.testing.assert_allclose(pairs.joint.sum(axis=1), pairs.left.measure, atol=1e-14)
        np.testing.assert_allclose(pairs.joint.sum(axis=0), pairs.right.measure, atol=1e-14)


class TestEntropy:

    def test_entropy_rates(self, markov_example, bernoulli_quarter, bernoulli_uniform):
        assert cylinders.entropy_rate(markov_example) == \
            pytest.approx(MARKOV_ENTROPY_RATE, abs=1e-6)
        assert cylinders.entropy_rate(bernoulli_quarter) == \
            pytest.approx(BERNOULLI_QUARTER_ENTROPY_RATE, abs=1e-6)
        assert cylinders.entropy_rate(bernoulli_uniform) == pytest.approx(math.log(2), abs=1e-15)

    def test_third_join(self, markov_example):
        assert cylinders.join_entropy(markov_example, 3) == pytest.approx(1.403560, abs=1e-6)

    @pytest.mark.parametrize('n', list(range(1, 17)))
    def test_closed_form_markov(self, markov_example, n):
        assert cylinders.join_entropy(markov_example, n) == \
            pytest.approx(cylinders.closed_join_entropy(markov_example, n), abs=1e-10)

    @pytest.mark.parametrize('n', [1, 2, 5, 9])
    def test_closed_form_three_state(self, markov_three_state, n):
        assert cylinders.join_entropy(markov_three_state, n) == \
            pytest.approx(cylinders.closed_join_entropy(markov_three_state, n), abs=1e-10)

    def test_bernoulli_is_additive(self, bernoulli_quarter):
        h = cylinders.entropy_rate(bernoulli_quarter)
        for n in range(1, 12):
            assert cylinders.join_entropy(bernoulli_quarter, n) == pytest.approx(n * h, abs=1e-10)

    def test_approximation_gap(self, markov_example):
        gap = MARKOV_EXAMPLE_HP - cylinders.entropy_rate(markov_example)
        for m in range(1, 9):
            assert cylinders.entropy_approximation_gap(markov_example, m) == \
                pytest.approx(gap / m, abs=1e-10)

    def test_max_cylinder_measure(self, markov_example):
        for n in range(1, 8):
            assert cylinders.max_cylinder_measure(markov_example, n) == \
                pytest.approx(2 / 3 * 0.9 ** (n - 1), rel=1e-12)


class TestMoments:

    def test_k1_is_entropy(self, markov_three_state):
        for n in (1, 3, 6):
            assert cylinders.moment_K(markov_three_state, n, 1) == \
                cylinders.join_entropy(markov_three_state, n)

    def test_variance_identity(self, any_spec):
        for n in (1, 2, 4, 7):
            H = cylinders.join_entropy(any_spec, n)
            K2 = cylinders.moment_K(any_spec, n, 2)
            M2 = cylinders.centered_moment_M(any_spec, n, 2)
            assert M2 == pytest.approx(K2 - H ** 2, abs=1e-10)

    def test_fractional_exponent(self, bernoulli_quarter):
        expected = 0.25 * math.log(4) ** 5.5 + 0.75 * math.log(4 / 3) ** 5.5
        assert cylinders.moment_K(bernoulli_quarter, 1, 5.5) == pytest.approx(expected, rel=1e-13)

    def test_invalid_exponents(self, markov_example):
        with pytest.raises(exceptions.InvalidExponent):
            cylinders.moment_K(markov_example, 2, -1)
        with pytest.raises(exceptions.InvalidExponent):
            cylinders.centered_moment_M(markov_example, 2, 0.5)

    def test_moment_table(self, markov_example):
        table = cylinders.moment_table(markov_example, [1, 2, 3])
        assert len(table) == 3
        assert cylinders.MomentTable.columns == ('n', 'H_n', 'K2', 'K4', 'M2', 'M4', 'var_n')
        for row, values in zip(table, table.as_rows()):
            assert row.K[1] == row.H_n
            assert row.M[2] == row.var_n
            assert values[0] == row.n
            assert len(values) == len(table.columns)

    def test_conditional_K(self, markov_example):
        # sum_i p_i sum_j P_ij log^2 P_ij
        assert cylinders.conditional_K(markov_example, 1, 1, 0, 2) == \
            pytest.approx(0.546085, abs=1e-6)


class TestVariance:

    def test_bernoulli_exact_for_every_n(self, bernoulli_quarter):
        report = cylinders.limit_variance(bernoulli_quarter, n_max=20)
        assert report.sigma2_limit == pytest.approx(BERNOULLI_QUARTER_VARIANCE, abs=1e-6)
        for value in report.sigma2_by_n:
            assert value == pytest.approx(report.sigma2_limit, abs=1e-10)

    def test_uniform_is_zero(self, bernoulli_uniform):
        report = cylinders.limit_variance(bernoulli_uniform, n_max=10)
        assert report.sigma2_limit == 0.0
        assert all(value == 0.0 for value in report.sigma2_by_n)
        assert report.fitted_rate is None

    def test_iid_chain_matches_bernoulli(self, bernoulli_quarter):
        chain = process.validate_spec({'type': 'markov', 'P': [[0.25, 0.75], [0.25, 0.75]]})
        assert cylinders.variance_formula(chain) == \
            pytest.approx(cylinders.variance_formula(bernoulli_quarter), abs=1e-12)

    def test_markov_finite_n_converges_to_formula(self, markov_example):
        report = cylinders.limit_variance(markov_example, n_max=20)
        sigma2 = report.sigma2_limit
        assert report.series_terms > 1
        # var_n = n sigma^2 + c + o(1), so n (var_n/n - sigma^2) settles
        offsets = [n * (value - sigma2) for n, value in zip(report.n_values, report.sigma2_by_n)]
        assert abs(offsets[-1] - offsets[-5]) < 0.05
        assert abs(report.sigma2_by_n[-1] - sigma2) < abs(report.sigma2_by_n[7] - sigma2)
        assert report.fitted_rate <= -0.2

    def test_rate_fitted_over_large_orders(self, markov_example):
        report = cylinders.limit_variance(markov_example, n_max=20)
        n_values = np.array(report.n_values[7:], dtype=np.float64)
        gaps = np.abs(report.sigma2_limit - np.array(report.sigma2_by_n[7:]))
        assert n_values[0] == 8
        slope, _ = np.polyfit(np.log(n_values), np.log(gaps), 1)
        assert report.fitted_rate == pytest.approx(slope, abs=1e-12)

    def test_rate_falls_back_to_small_orders(self, markov_example):
        report = cylinders.limit_variance(markov_example, n_max=5)
        n_values = np.array(report.n_values, dtype=np.float64)
        gaps = np.abs(report.sigma2_limit - np.array(report.sigma2_by_n))
        slope, _ = np.polyfit(np.log(n_values), np.log(gaps), 1)
        assert report.fitted_rate == pytest.approx(slope, abs=1e-12)

    def test_extrapolation_method(self, markov_example):
        report = cylinders.limit_variance(markov_example, n_max=12, method='extrapolation')
        assert report.method == 'extrapolation'
        assert report.sigma2_limit == report.extrapolated

    def test_unknown_method(self, markov_example):
        with pytest.raises(ValueError):
            cylinders.limit_variance(markov_example, method='bootstrap')


class TestSubadditivity:

    @pytest.mark.parametrize('n, m, gap', [(1, 1, 0), (2, 1, 1), (1, 3, 2), (3, 3, 4)])
    def test_entropy_case_holds_everywhere(self, any_spec, n, m, gap):
        report = cylinders.subadditivity_check(any_spec, n, m, gap, 1)
        assert report.holds()
        assert report.conditional >= -1e-10
        assert report.join >= -1e-10

    @pytest.mark.parametrize('w', [2, 3, 5.5])
    def test_chain_and_variance_hold_without_convention(self, markov_example, w):
        for n, m, gap in product((1, 2, 4), (1, 3), (0, 2, 4)):
            report = cylinders.subadditivity_check(markov_example, n, m, gap, w)
            assert report.chain >= -1e-10
            assert report.variance >= -1e-10
            assert report.holds()

    def test_conditional_inequality_needs_small_atoms(self, markov_example):
        report = cylinders.subadditivity_check(markov_example, 1, 1, 0, 2)
        assert not report.convention_holds
        assert report.values['K_conditional'] == pytest.approx(0.546085, abs=1e-6)
        assert report.values['K_C'] == pytest.approx(0.511917, abs=1e-6)
        assert report.conditional < 0

    @pytest.mark.parametrize('k, w', [(10, 2), (25, 3), (300, 5.5)])
    def test_all_hold_under_convention(self, k, w):
        spec = near_uniform_chain(k)
        assert cylinders.small_atom_convention(spec, w)
        for gap in (0, 1, 2):
            report = cylinders.subadditivity_check(spec, 1, 1, gap, w)
            assert report.convention_holds
            assert min(report.slacks) >= -1e-10
            assert report.holds()

    def test_invalid_exponent(self, markov_example):
        with pytest.raises(exceptions.InvalidExponent):
            cylinders.subadditivity_check(markov_example, 1, 1, 0, 0.5)

    def test_k_growth_entropy(self, markov_example):
        ratios = cylinders.k_growth_ratios(markov_example, range(1, 17), 1)
        assert ratios[0] == pytest.approx(1.0)
        assert all(ratio <= 1 + 1e-10 for ratio in ratios)

    def test_k_growth_under_convention(self):
        spec = near_uniform_chain(10)
        ratios = cylinders.k_growth_ratios(spec, [1, 2, 3, 4], 2)
        assert all(ratio <= 1 + 1e-10 for ratio in ratios)


class TestConditionalProbGap:

    @pytest.mark.parametrize('n', [0, 1, 5])
    def test_bernoulli(self, bernoulli_quarter, n):
        assert cylinders.conditional_prob_gap(bernoulli_quarter, n) == 0.0

    @pytest.mark.parametrize('n', [1, 2, 10])
    def test_markov_one_step_memory(self, markov_example, n):
        assert cylinders.conditional_prob_gap(markov_example, n) == 0.0

    def test_markov_without_memory(self, markov_example):
        assert cylinders.conditional_prob_gap(markov_example, 0) == \
            pytest.approx(0.574051, abs=1e-6)

    def test_negative_order(self, markov_example):
        with pytest.raises(exceptions.InvalidOrder):
            cylinders.conditional_prob_gap(markov_example, -1)
