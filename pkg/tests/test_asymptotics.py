# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from smb_lab import asymptotics, cylinders, exceptions, process

from tests.conftest import MARKOV_ENTROPY_RATE


@pytest.fixture(scope='module')
def markov_path(markov_example):
    return process.sample_trajectory(markov_example, 20000, seed=11)


class TestInformationPath:

    def test_matches_cylinder_measure(self, markov_example, markov_path):
        grid = [1, 5, 64, 1000, 20000]
        path = asymptotics.information_path(markov_example, markov_path, grid)
        assert path.n_grid == tuple(grid)
        assert path.seed == 11
        for n, value in zip(grid, path.I_values):
            assert value == -process.cylinder_measure(markov_example, markov_path.word(0, n)).value

    def test_uniform(self, bernoulli_uniform):
        trajectory = process.sample_trajectory(bernoulli_uniform, 500, seed=0)
        path = asymptotics.information_path(bernoulli_uniform, trajectory, [10, 500])
        assert path.I_values == pytest.approx((10 * math.log(2), 500 * math.log(2)), rel=1e-12)

    def test_grid_exceeds_trajectory(self, markov_example, markov_path):
        with pytest.raises(exceptions.GridExceedsTrajectory):
            asymptotics.information_path(markov_example, markov_path, [10, 20001])

    @pytest.mark.parametrize('grid', [[], [0, 5], [10, 10], [20, 10]])
    def test_invalid_grid(self, markov_example, markov_path, grid):
        with pytest.raises(exceptions.InvalidOrder):
            asymptotics.information_path(markov_example, markov_path, grid)

    def test_path_stats_must_not_decrease(self):
        with pytest.raises(ValueError):
            asymptotics.PathStats((1, 2), (3.0, 2.0))

    def test_segment_information(self, markov_three_state):
        trajectory = process.sample_trajectory(markov_three_state, 300, seed=2)
        starts, lengths = [0, 17, 100, 250], [1, 40, 7, 50]
        values = asymptotics.segment_information(
            markov_three_state, trajectory.symbols, starts, lengths)
        for value, start, length in zip(values, starts, lengths):
            expected = process.cylinder_measure(
                markov_three_state, trajectory.word(start, length)).information
            assert value == pytest.approx(expected, rel=1e-12)


class TestSmb:

    def test_rows(self, markov_example):
        rows = asymptotics.smb_experiment(markov_example, 1000, paths=2, seed=0, workers=1)
        assert [row[:2] for row in rows] == [(0, 10), (0, 100), (0, 1000),
                                             (1, 10), (1, 100), (1, 1000)]
        for _, n, value, rate, error in rows:
            assert rate == value / n
            assert error == pytest.approx(abs(rate - MARKOV_ENTROPY_RATE), abs=1e-6)

    @pytest.mark.parametrize('spec_name', ['markov_example', 'bernoulli_quarter'])
    def test_converges(self, request, spec_name):
        spec = request.getfixturevalue(spec_name)
        rows = asymptotics.smb_experiment(spec, 10 ** 5, paths=2, seed=3, workers=1)
        assert all(row[4] < 0.03 for row in rows if row[1] == 10 ** 5)

    @pytest.mark.slow
    @pytest.mark.parametrize('spec_name', ['markov_example', 'bernoulli_quarter'])
    def test_converges_at_scale(self, request, spec_name):
        spec = request.getfixturevalue(spec_name)
        rows = asymptotics.smb_experiment(spec, 10 ** 6, paths=3, seed=1, n_grid=[10 ** 6])
        assert all(row[4] < 0.01 for row in rows)

    def test_lil_diagnostic(self, markov_example, markov_path):
        value = asymptotics.lil_diagnostic(markov_example, markov_path)
        assert math.isfinite(value)
        assert value > 0


class TestClt:

    def test_sample_size(self, markov_example):
        with pytest.raises(exceptions.InvalidSampleSize):
            asymptotics.clt_experiment(markov_example, n=100, samples=10, seed=0)

    def test_degenerate_variance(self, bernoulli_uniform):
        with pytest.raises(exceptions.DegenerateVariance):
            asymptotics.clt_experiment(bernoulli_uniform, n=10, samples=100, seed=0)

    def test_small_run(self, markov_example):
        report = asymptotics.clt_experiment(markov_example, n=500, samples=400, seed=7, workers=1)
        assert report.samples == 400
        assert report.h_used == cylinders.entropy_rate(markov_example)
        assert report.sigma_used == pytest.approx(
            math.sqrt(cylinders.variance_formula(markov_example)))
        assert report.ks_distance < 0.15
        assert abs(report.mean) < 0.3
        assert 0.6 < report.variance < 1.4

    def test_iid_skew_band(self, bernoulli_quarter):
        report = asymptotics.clt_experiment(bernoulli_quarter, n=1000, samples=2000, seed=3,
                                            workers=1)
        assert abs(report.skew) < 3 * math.sqrt(15 / report.samples)

    @pytest.mark.slow
    def test_markov_at_scale(self, markov_example):
        report = asymptotics.clt_experiment(markov_example, n=2000, samples=20000, seed=7)
        assert report.ks_distance < 0.05
        assert abs(report.mean) < 3 / math.sqrt(20000)
        assert abs(report.variance - 1) < 0.05

    @pytest.mark.slow
    def test_bernoulli_at_scale(self, bernoulli_quarter):
        report = asymptotics.clt_experiment(bernoulli_quarter, n=1000, samples=20000, seed=7)
        assert report.ks_distance < 0.02
        assert abs(report.skew) < 3 * math.sqrt(15 / report.samples)


class TestMomentGrowth:

    def test_exact_second_moment(self, markov_example):
        report = asymptotics.moment_growth_experiment(markov_example, 2, range(8, 17))
        sigma2 = cylinders.variance_formula(markov_example)
        assert report.max_min_ratio < 2
        assert report.ratios[-1] == pytest.approx(sigma2, rel=0.25)
        assert report.method == 'exact'

    def test_exact_fourth_moment(self, markov_example):
        report = asymptotics.moment_growth_experiment(markov_example, 4, range(8, 21))
        assert report.n_grid == tuple(range(8, 21))
        assert report.max_min_ratio < 3

    def test_monte_carlo(self, bernoulli_quarter):
        report = asymptotics.moment_growth_experiment(
            bernoulli_quarter, 2, [50, 100], method='monte_carlo', samples=2000, seed=0,
            workers=1)
        assert report.ratios == pytest.approx([0.226303] * 2, rel=0.15)

    def test_unknown_method(self, markov_example):
        with pytest.raises(ValueError):
            asymptotics.moment_growth_experiment(markov_example, 2, [4], method='bootstrap')


class TestBlocks:

    def test_small_schedule(self):
        schedule = asymptotics.block_schedule(10, 0.5)
        assert schedule.blocks == ((1, 1, 0), (1, 1, 2), (1, 1, 4), (2, 1, 6))
        assert schedule.Q == 4
        assert schedule.remainder == 1
        assert schedule.lengths.tolist() == [1, 1, 1, 2]

    def test_counts_agree_with_schedule(self):
        n_values = [4, 10, 57, 1000, 12345]
        Q, remainder = asymptotics.block_counts(n_values, 0.5)
        for n, q, r in zip(n_values, Q, remainder):
            schedule = asymptotics.block_schedule(n, 0.5)
            assert (schedule.Q, schedule.remainder) == (q, r)

    @pytest.mark.parametrize('alpha', [0.25, 0.5, 0.9])
    def test_partition_identity(self, alpha):
        assert asymptotics.partition_identity_holds(10 ** 5, alpha)

    @pytest.mark.slow
    def test_partition_identity_at_scale(self):
        assert asymptotics.partition_identity_holds(10 ** 6, 0.5)

    def test_growth_exponent(self):
        n_values = np.unique(np.logspace(3, 6, 30).astype(np.int64))
        assert 0.6 <= asymptotics.schedule_growth_exponent(n_values, 0.5) <= 0.73

    @pytest.mark.parametrize('alpha', [0, 1, 1.5, -0.2])
    def test_invalid_alpha(self, alpha):
        with pytest.raises(exceptions.InvalidAlpha):
            asymptotics.block_schedule(100, alpha)

    def test_too_short(self):
        with pytest.raises(exceptions.InvalidLength):
            asymptotics.block_schedule(3, 0.5)

    def test_bernoulli_error_lives_off_the_blocks(self, bernoulli_quarter):
        spec = bernoulli_quarter
        n = 2000
        trajectory = process.sample_trajectory(spec, n, seed=4)
        schedule = asymptotics.block_schedule(n, 0.5)
        in_block = np.zeros(n, dtype=bool)
        for length, _, start in schedule.blocks:
            in_block[start:start + length] = True
        outside = -spec.log_stationary[trajectory.symbols[~in_block]]
        expected = abs(cylinders.fsum(outside) - (~in_block).sum() * cylinders.entropy_rate(spec))
        error = asymptotics.block_decomposition_error(spec, trajectory, n, 0.5)
        assert error == pytest.approx(expected, abs=1e-8)

    def test_decomposition_needs_long_enough_path(self, markov_example):
        trajectory = process.sample_trajectory(markov_example, 100, seed=0)
        with pytest.raises(exceptions.GridExceedsTrajectory):
            asymptotics.block_decomposition_error(markov_example, trajectory, 101, 0.5)

    def test_error_experiment(self, markov_example):
        rows = asymptotics.block_error_experiment(
            markov_example, [100, 1000], 0.5, paths=5, seed=0, workers=1)
        assert [row[0] for row in rows] == [100, 1000]
        for n, Q, remainder, median, p90, median_rate, p90_rate in rows:
            assert Q == asymptotics.block_schedule(n, 0.5).Q
            assert 0 <= median <= p90
            assert median_rate == median / n

    @pytest.mark.slow
    def test_error_trend_at_scale(self, markov_example):
        rows = asymptotics.block_error_experiment(
            markov_example, [10 ** 3, 10 ** 4, 10 ** 5], 0.5, paths=100, seed=0)
        scaled = [row[5] for row in rows]
        assert scaled == sorted(scaled, reverse=True)
