import pytest

from drivetext.errors import EmptyMixture
from drivetext.mixture import empirical_ratios, plan, sample_stream


class TestPlan:
    def test_direct_formula(self):
        p = plan([30, 70], 2)
        assert p.probabilities == (0.3, 0.7)
        assert p.total_iterations == 200

    def test_single_dataset(self):
        assert plan([42], 1).probabilities == (1.0,)

    def test_uniform_three(self):
        p = plan([1, 1, 1], 1)
        assert p.total_iterations == 3
        assert all(q == pytest.approx(1 / 3) for q in p.probabilities)

    def test_fractional_epochs_round_half_up(self):
        assert plan([3], 0.5).total_iterations == 2  # 1.5 rounds up
        assert plan([10], 0.74).total_iterations == 7

    def test_scale_invariance(self):
        a = plan([3, 7, 10], 2)
        b = plan([30, 70, 100], 2)
        assert a.probabilities == b.probabilities
        assert b.total_iterations == 10 * a.total_iterations

    def test_errors(self):
        with pytest.raises(EmptyMixture):
            plan([], 1)
        with pytest.raises(ValueError):
            plan([0, 5], 1)
        with pytest.raises(ValueError):
            plan([5], 0)


class TestStream:
    def test_single_singleton_dataset(self):
        p = plan([1], 3)
        draws = list(sample_stream(p, 0))
        assert draws == [(0, 0)] * 3

    def test_length_is_total_iterations(self):
        p = plan([5, 5], 2.5)
        assert len(list(sample_stream(p, 1))) == p.total_iterations

    def test_same_seed_identical(self):
        p = plan([10, 20, 30], 1)
        assert list(sample_stream(p, 99)) == list(sample_stream(p, 99))

    def test_different_seeds_differ(self):
        p = plan([10, 20, 30], 1)
        assert list(sample_stream(p, 0)) != list(sample_stream(p, 1))

    def test_example_indices_in_range(self):
        p = plan([3, 8], 5)
        for task, example in sample_stream(p, 4):
            assert 0 <= example < p.sizes[task]

    def test_two_equal_datasets_frequencies(self):
        p = plan([5000, 5000], 10)
        draws = list(sample_stream(p, 123))
        ratios = empirical_ratios(draws, 2)
        assert abs(ratios[0] - 0.5) <= 0.02
        assert abs(ratios[1] - 0.5) <= 0.02


class TestEmpiricalRatios:
    def test_indicator_for_single_draw(self):
        assert empirical_ratios([(1, 0)], 3) == [0.0, 1.0, 0.0]

    def test_sum_to_one(self):
        p = plan([2, 3, 4], 2)
        draws = list(sample_stream(p, 7))
        assert sum(empirical_ratios(draws, 3)) == pytest.approx(1.0)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            empirical_ratios([], 2)
