"""
Tests for relative entropy, its linear perturbation and the Poisson rate.
"""
import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from core.discretization import TriadicGrid, discretize_intensity, pushforward
from core.entropy import (
    cellwise,
    perturbation_bounds,
    poisson_rate,
    rel_entropy_density,
    rel_entropy_discrete,
    rel_entropy_masses,
    scaled_entropy,
)
from core.errors import DomainError, GridMismatchError, ParameterError
from core.landscape import product_intensity
from core.measures import MarkedMeasure
from models.network import GridResolution


class TestCellwise:
    def test_conventions(self):
        np.testing.assert_allclose(cellwise(np.array([0.0, 1.0]), np.array([2.0, 1.0])), [2.0, 0.0])
        assert math.isinf(cellwise(np.array([1.0]), np.array([0.0]))[0])

    def test_zero_against_zero(self):
        assert rel_entropy_masses(np.zeros(3), np.zeros(3)).value == 0.0

    def test_not_absolutely_continuous(self):
        value = rel_entropy_masses(np.array([1.0, 1.0]), np.array([1.0, 0.0]))
        assert not value.finite

    def test_negative_mass(self):
        with pytest.raises(DomainError):
            cellwise(np.array([-1.0]), np.array([1.0]))


class TestDiscrete:
    def test_doubling(self, box_model):
        g = TriadicGrid(box_model, 1 / 9)
        mu = discretize_intensity(g, box_model).scaled(0.25)      # mu(W) = 1
        h = rel_entropy_discrete(mu.scaled(2.0), mu).value
        assert h == pytest.approx(2 * math.log(2) - 1, abs=1e-12)

    def test_self_entropy_zero(self, box_model):
        g = TriadicGrid(box_model, 1 / 9)
        mu = discretize_intensity(g, box_model)
        assert rel_entropy_discrete(mu, mu).value == pytest.approx(0.0, abs=1e-14)

    def test_grids_must_match(self, box_model):
        a = discretize_intensity(TriadicGrid(box_model, 1 / 3), box_model)
        b = discretize_intensity(TriadicGrid(box_model, 1 / 9), box_model)
        with pytest.raises(GridMismatchError):
            rel_entropy_discrete(a, b)


class TestDensity:
    def test_constant_density(self, hertzian_model):
        mu = product_intensity(hertzian_model, GridResolution(n_space=8, n_angle=8, n_fading=4))
        a = 1.7
        value = rel_entropy_density(np.full(len(mu), a), mu).value
        assert value == pytest.approx((a * math.log(a) - a + 1) * mu.total_mass, rel=1e-12)

    def test_tilt_matches_discrete(self, box_model):
        g = TriadicGrid(box_model, 1 / 9)
        mu = discretize_intensity(g, box_model)
        marked = mu.as_marked()
        f = np.exp(0.4 * marked.fadings) / np.exp(0.6)
        nu = pushforward(g, MarkedMeasure(marked.positions, marked.fadings, f * marked.weights))
        assert rel_entropy_density(f, marked).value == pytest.approx(rel_entropy_discrete(nu, mu).value, abs=1e-6)

    def test_negative_density(self, hertzian_model):
        mu = product_intensity(hertzian_model, GridResolution(n_space=2, n_angle=2, n_fading=2))
        f = np.ones(len(mu))
        f[0] = -1.0
        with pytest.raises(DomainError):
            rel_entropy_density(f, mu)


class TestScaling:
    def test_scaled_entropy_identity(self):
        rng = np.random.default_rng(42)
        for _ in range(1_000):
            n = int(rng.integers(1, 20))
            nu = rng.uniform(0.0, 2.0, n)
            mu = rng.uniform(0.1, 2.0, n)
            a = float(rng.uniform(0.05, 3.0))
            h = rel_entropy_masses(nu, mu).value
            direct = rel_entropy_masses(a * nu, mu).value
            predicted = scaled_entropy(a, h, nu.sum(), mu.sum())
            assert predicted == pytest.approx(direct, rel=1e-9, abs=1e-12)

    def test_perturbation_bounds(self):
        rng = np.random.default_rng(42)
        for _ in range(500):
            n = int(rng.integers(1, 20))
            nu = rng.uniform(0.0, 3.0, n)
            mu = rng.uniform(0.1, 2.0, n)
            eps = float(rng.uniform(0.01, 0.49))
            h = rel_entropy_masses(nu, mu).value
            lower, upper = perturbation_bounds(eps, h, mu.sum())
            assert rel_entropy_masses((1 - eps) * nu, mu).value >= lower - 1e-12
            assert rel_entropy_masses((1 + eps) * nu, mu).value <= upper + 1e-12

    def test_eps_range(self):
        with pytest.raises(ParameterError):
            perturbation_bounds(0.5, 1.0, 1.0)


class TestPoissonRate:
    def test_known_value(self):
        assert poisson_rate(3.0, 1.0) == pytest.approx(3 * math.log(3) - 2, abs=1e-12)
        assert poisson_rate(2.0, 2.0) == 0.0
        assert poisson_rate(0.0, 2.5) == pytest.approx(2.5)

    def test_legendre_transform(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            y = float(rng.uniform(0.1, 10.0))
            m = float(rng.uniform(0.1, 10.0))
            res = minimize_scalar(lambda a: -(a * y + m * (1.0 - math.exp(a))),
                                  bracket=(-1.0, 1.0), tol=1e-12)
            assert poisson_rate(y, m) == pytest.approx(-res.fun, abs=1e-8)

    def test_mean_must_be_positive(self):
        with pytest.raises(ParameterError):
            poisson_rate(1.0, 0.0)
