"""
Tests for the frustration curve, the rare-event Monte Carlo and the
Poisson user-count tail.
"""
import math

import numpy as np
import pytest
from scipy.stats import poisson

from core.errors import DomainError, ParameterError
from core.experiments import (
    conditioned_stats,
    frustration_curve,
    poisson_tail,
    rare_event_mc,
    wilson_interval,
)
from core.minimizer import RadialProblem
from models.network import GridResolution
from tests.conftest import HERTZIAN_I0


class TestPoissonTail:
    def test_reference_value(self):
        assert poisson_tail(50, 80) == pytest.approx(3.436e-5, abs=1e-8)
        assert poisson_tail(50, 80) == pytest.approx(poisson.sf(80, 50), rel=1e-9)

    def test_small_mean(self):
        assert poisson_tail(1.0, 0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-12)

    def test_negative_threshold(self):
        assert poisson_tail(3.0, -1) == 1.0

    def test_mean_must_be_positive(self):
        with pytest.raises(ParameterError):
            poisson_tail(0.0, 5)


class TestWilson:
    def test_no_successes(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == pytest.approx(0.0, abs=1e-15)
        assert hi == pytest.approx(1.959964 ** 2 / (100 + 1.959964 ** 2), rel=1e-9)

    def test_contains_estimate(self):
        lo, hi = wilson_interval(30, 100)
        assert lo < 0.3 < hi

    def test_empty_sample(self):
        with pytest.raises(ParameterError):
            wilson_interval(0, 0)


class TestCurve:
    def test_up_dir_shape(self, hertzian_model):
        c_plus = hertzian_model.qos.c_plus
        points = frustration_curve(hertzian_model, "up-dir", [0.1, 0.5, 1.1, 1.5, c_plus])
        p = [pt.p for pt in points]
        assert p[0] == 0.0
        assert p[2] <= 0.6
        assert p[-1] == pytest.approx(1.0, abs=1e-9)
        assert all(np.diff(p) >= 0)

    def test_zero_exactly_at_minimal_uplink_level(self, hertzian_model):
        k = RadialProblem.from_model(hertzian_model, c=1.0).k_updir
        assert k == pytest.approx(1.0 / HERTZIAN_I0, rel=1e-6)
        p = [pt.p for pt in frustration_curve(hertzian_model, "up-dir", [0.5 * k, k, 1.2 * k])]
        assert p[0] == 0.0
        assert p[1] == 0.0
        assert p[2] > 0.0

    def test_kink_at_half_plateau(self, hertzian_model):
        c_plus = hertzian_model.qos.c_plus
        h = 0.02 * c_plus

        def secant_jump(c0):
            p = [pt.p for pt in frustration_curve(hertzian_model, "up-dir", [c0 - h, c0, c0 + h])]
            return abs((p[2] - p[1]) / h - (p[1] - p[0]) / h)

        # the capped disk ell = 5 starts to count above c+/2
        kink = secant_jump(0.5 * c_plus)
        smooth = secant_jump(0.75 * c_plus)
        assert kink > 10.0 * smooth
        assert kink > 0.3

    def test_relayed_downlink_on_grid(self, hertzian_model):
        res = GridResolution(n_space=8, n_angle=8, n_fading=4)
        grid = np.linspace(0.1, hertzian_model.qos.c_plus, 12)
        p = [pt.p for pt in frustration_curve(hertzian_model, "do-dir", grid, res)]
        assert all(0.0 <= v <= 1.0 for v in p)
        assert all(np.diff(p) >= 0)

    def test_threshold_above_plateau(self, hertzian_model):
        with pytest.raises(DomainError):
            frustration_curve(hertzian_model, "up-dir", [hertzian_model.qos.c_plus + 0.1])

    def test_unknown_mode(self, hertzian_model):
        with pytest.raises(DomainError):
            frustration_curve(hertzian_model, "uplink", [1.0])


class TestMonteCarlo:
    def test_independent_of_workers(self, hertzian_model):
        kwargs = dict(lam=50.0, n_samples=2_000, c=1.1, b_fraction=0.6, seed=7, block_size=500)
        one = rare_event_mc(hertzian_model, workers=1, **kwargs)
        three = rare_event_mc(hertzian_model, workers=3, **kwargs)
        assert one.model_dump(exclude={"wall_clock_s"}) == three.model_dump(exclude={"wall_clock_s"})
        assert one.seed.blocks == 4

    def test_mean_user_count(self, hertzian_model):
        report = rare_event_mc(hertzian_model, 50.0, 2_000, 1.1, 0.5, seed=1)
        assert report.mean_users == pytest.approx(50.0, abs=1.0)

    def test_any_frustration_is_typical(self, hertzian_model):
        report = rare_event_mc(hertzian_model, 50.0, 500, 1.1, 0.0, seed=3)
        assert report.hit_count >= 0.99 * 500
        assert report.ci_low <= report.frequency <= report.ci_high

    def test_absolute_level_out_of_reach(self, hertzian_model):
        report = rare_event_mc(hertzian_model, 50.0, 500, 1.1, 10.0, seed=3, absolute=True)
        assert report.hit_count == 0
        assert report.hit_mean_fading is None
        assert report.hits == []

    def test_pathloss_free_downlink_all_or_none(self, plfree_model):
        report = rare_event_mc(plfree_model, 50.0, 200, 0.9, 0.5, mode="do-dir", seed=11)
        assert report.hit_count > 0
        assert all(h.frustrated_fraction == 1.0 for h in report.hits)

    def test_progress_reaches_total(self, hertzian_model):
        seen = []
        rare_event_mc(hertzian_model, 50.0, 1_000, 1.1, 0.5, block_size=300, progress=lambda d, n: seen.append((d, n)))
        assert seen[-1] == (1_000, 1_000)
        assert [d for d, _ in seen] == sorted(d for d, _ in seen)

    @pytest.mark.parametrize("kwargs,error", [
        (dict(lam=0.0), ParameterError),
        (dict(n_samples=0), ParameterError),
        (dict(c=5.0), DomainError),
        (dict(b_fraction=1.0), DomainError),
        (dict(mode="sideways"), DomainError),
    ])
    def test_rejects_bad_parameters(self, hertzian_model, kwargs, error):
        args = dict(lam=50.0, n_samples=10, c=1.1, b_fraction=0.5)
        args.update(kwargs)
        with pytest.raises(error):
            rare_event_mc(hertzian_model, **args)


class TestConditioned:
    def test_high_count_frequency(self, hertzian_model):
        report = conditioned_stats(hertzian_model, 50.0, 2_000, 60, 1.1, 0.9, seed=5)
        stats = report.conditioned
        assert report.kind == "conditioned"
        assert stats.poisson_tail == pytest.approx(poisson.sf(60, 50), rel=1e-9)
        assert stats.high_frequency == pytest.approx(stats.poisson_tail, abs=0.03)
        assert 1.0 <= stats.mean_fading_high <= 2.0

    def test_negative_threshold(self, hertzian_model):
        with pytest.raises(ParameterError):
            conditioned_stats(hertzian_model, 50.0, 10, -1, 1.1, 0.5)


@pytest.mark.slow
class TestRareUplinkEvent:
    """A million samples of the Hertzian disk: nearly every user frustrated."""

    @pytest.fixture(scope="class")
    def report(self, hertzian):
        ex = hertzian.experiment
        return conditioned_stats(
            hertzian.model, ex.lam, 1_000_000, 80, ex.c, ex.b_fraction, seed=ex.seed, workers=4,
        )

    def test_hit_frequency(self, report):
        assert 2e-6 <= report.frequency <= 5e-5

    def test_hits_need_many_users(self, report):
        assert report.hit_count > 0
        many = sum(h.n_users >= 80 for h in report.hits)
        assert many >= 0.9 * report.hit_count

    def test_hit_fading(self, report):
        assert 1.40 <= report.hit_mean_fading <= 1.55

    def test_high_count_matches_poisson(self, report):
        stats = report.conditioned
        expected = stats.poisson_expected
        assert abs(stats.n_high - expected) <= 3 * math.sqrt(expected) + 1
        assert 1.42 <= stats.mean_fading_high <= 1.53
