"""
Tests for the Poisson point process sampler and the seeded streams.
"""
import numpy as np
import pytest
from scipy import stats

from core.errors import ParameterError
from core.landscape import kernel_column, tabulated_cdf
from core.sampler import PositionSampler, empirical_measure, make_rng, sample_batch, sample_ppp
from models.kernel import AreasKernel, ContinuousKernel
from models.network import DiscreteFading, UniformFading


class TestStreams:
    def test_same_seed_same_draws(self):
        np.testing.assert_array_equal(make_rng(7, 3).random(5), make_rng(7, 3).random(5))

    def test_streams_differ(self):
        assert not np.array_equal(make_rng(7, 0).random(5), make_rng(7, 1).random(5))

    def test_sample_is_reproducible(self, hertzian_model):
        a = sample_ppp(hertzian_model, None, 50.0, seed=11)
        b = sample_ppp(hertzian_model, None, 50.0, seed=11)
        np.testing.assert_array_equal(a.users.positions, b.users.positions)
        np.testing.assert_array_equal(a.users.fadings, b.users.fadings)
        assert a.seed.algorithm == "PCG64"


class TestPoissonCounts:
    """lambda mu(W) = 50 on the Hertzian disk."""

    def test_mean_count(self, hertzian_model):
        n = 100_000
        draw = sample_batch(hertzian_model, None, 50.0, n, make_rng(1))
        # 3 sigma of the sample mean
        assert abs(draw.counts.mean() - 50.0) < 3.0 * np.sqrt(50.0 / n)

    def test_counts_fit_poisson(self, hertzian_model):
        n = 20_000
        counts = sample_batch(hertzian_model, None, 50.0, n, make_rng(12)).counts
        law = stats.poisson(50.0)
        inner = np.arange(36, 65)
        observed = np.concatenate([
            [np.sum(counts <= 35)],
            [np.sum(counts == k) for k in inner],
            [np.sum(counts >= 65)],
        ])
        probs = np.concatenate([[law.cdf(35)], law.pmf(inner), [law.sf(64)]])
        expected = n * probs / probs.sum()
        assert stats.chisquare(observed, expected).pvalue > 1e-3

    def test_fading_mean(self, hertzian_model):
        draw = sample_batch(hertzian_model, None, 50.0, 2_000, make_rng(2))
        sigma = np.sqrt(1.0 / 12.0 / len(draw.fadings))
        assert abs(draw.fadings.mean() - 1.5) < 4.0 * sigma
        assert draw.fadings.min() >= 1.0 and draw.fadings.max() <= 2.0

    def test_offsets_partition_users(self, hertzian_model):
        draw = sample_batch(hertzian_model, None, 20.0, 50, make_rng(3))
        assert draw.offsets[-1] == len(draw.positions) == len(draw.fadings)
        assert len(draw.base_fadings) == 50

    def test_lambda_must_be_positive(self, hertzian_model):
        with pytest.raises(ParameterError):
            sample_ppp(hertzian_model, None, 0.0, seed=1)


class TestPositions:
    def test_uniform_disk_radii(self, hertzian_model):
        pts = PositionSampler(hertzian_model).draw(make_rng(4), 5_000)
        r2 = np.sum(pts ** 2, axis=1)
        assert r2.max() <= 1.0
        # |x|^2 is U(0, 1) for the uniform disk
        assert stats.kstest(r2, "uniform").pvalue > 1e-3

    def test_box_positions(self, box_model):
        pts = PositionSampler(box_model).draw(make_rng(5), 1_000)
        assert pts.shape == (1_000, 2)
        assert np.all(np.abs(pts) <= 1.0)

    def test_random_base_is_drawn(self, random_base_model):
        draw = sample_batch(random_base_model, None, 5.0, 1_000, make_rng(6))
        assert 1.0 <= draw.base_fadings.min() < draw.base_fadings.max() <= 2.0


class TestEmpiricalMeasure:
    def test_weights_are_one_over_lambda(self, hertzian_model):
        sample = sample_ppp(hertzian_model, None, 50.0, seed=8)
        nu = empirical_measure(sample)
        assert len(nu) == sample.n_users
        np.testing.assert_allclose(nu.weights, 1.0 / 50.0)

    def test_empty_sample(self, hertzian_model):
        # lambda mu(W) = 1e-6: essentially always empty
        sample = sample_ppp(hertzian_model, None, 1e-6, seed=9)
        assert sample.n_users == 0
        assert empirical_measure(sample).total_mass == 0.0


class TestKernelFadings:
    """Fadings drawn per region must follow the local law p(x, .)."""

    def test_areas_kernel_per_band(self, constant_model):
        kernel = AreasKernel(
            breaks=(0.5,),
            laws=(UniformFading(low=1.0, high=1.5), UniformFading(low=1.5, high=2.0)),
        )
        draw = sample_batch(constant_model, kernel, 50.0, 400, make_rng(21))
        radii = np.linalg.norm(draw.positions, axis=1)
        inner = radii < 0.5
        assert inner.any() and (~inner).any()
        assert stats.kstest(draw.fadings[inner], stats.uniform(loc=1.0, scale=0.5).cdf).pvalue > 1e-3
        assert stats.kstest(draw.fadings[~inner], stats.uniform(loc=1.5, scale=0.5).cdf).pvalue > 1e-3

    def test_areas_kernel_discrete_band(self, constant_model):
        kernel = AreasKernel(
            breaks=(0.7,),
            laws=(DiscreteFading(values=(1.0, 2.0), weights=(0.25, 0.75)), UniformFading(low=1.0, high=2.0)),
        )
        draw = sample_batch(constant_model, kernel, 50.0, 400, make_rng(22))
        inner = np.linalg.norm(draw.positions, axis=1) < 0.7
        values = draw.fadings[inner]
        observed = np.array([np.sum(values == 1.0), np.sum(values == 2.0)])
        assert observed.sum() == len(values)
        expected = len(values) * np.array([0.25, 0.75])
        assert stats.chisquare(observed, expected).pvalue > 1e-3

    def test_continuous_kernel_per_column(self, constant_model):
        kernel = ContinuousKernel.from_scaling(
            np.linspace(1.0, 1.25, 11), np.full(11, 4.0), s=[0.0, 1.0], k=[1.0, 1.6],
        )
        draw = sample_batch(constant_model, kernel, 50.0, 400, make_rng(23))
        cols = kernel_column(kernel, np.linalg.norm(draw.positions, axis=1))
        u = np.asarray(kernel.u)
        for k in (0, 1):
            sel = cols == k
            assert sel.sum() > 1_000
            column = np.asarray(kernel.f[k], dtype=float)
            result = stats.kstest(draw.fadings[sel], lambda t: tabulated_cdf(u, column, t))
            assert result.pvalue > 1e-3
        # column 1 lives on [1.6, 2]
        assert draw.fadings[cols == 1].min() >= 1.6 - 1e-2
