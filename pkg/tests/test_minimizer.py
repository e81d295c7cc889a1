"""
Tests for the relative-entropy minimizers and the brute-force grid oracle.
"""
import numpy as np
import pytest

from core.errors import DomainError, ModelError, ParameterError
from core.minimizer import (
    RadialProblem,
    anchored_uplink,
    b0_ladder,
    density_gap,
    entropic_cost,
    frustrated_mass_constraint,
    minimize_b0,
    minimize_direct_uplink,
    minimize_pathloss_free_downlink,
    oracle_b0,
    oracle_direct_uplink,
    oracle_grid,
    oracle_pathloss_free_downlink,
    solve_kind,
    solve_multipliers,
    tilt_newton,
)
from core.sir import minimal_sir_vector
from models.network import GridResolution
from tests.conftest import HERTZIAN_I0


@pytest.fixture(scope="module")
def unlikely(hertzian_model):
    return RadialProblem.from_model(hertzian_model, c=1.1, b=0.9)


@pytest.fixture(scope="module")
def updir_solution(unlikely):
    return minimize_direct_uplink(unlikely)


class TestProblem:
    def test_constants(self, unlikely):
        assert unlikely.mu_mass == pytest.approx(1.0, abs=1e-12)
        assert unlikely.a_min == pytest.approx(1.0)
        assert unlikely.a_max == pytest.approx(10.0)
        assert unlikely.k_updir == pytest.approx(unlikely.a_min / unlikely.i_origin)

    def test_k_updir_uses_distance_to_origin(self, hertzian_model):
        # ell_min over |x| <= r is ell(1) = 1; over diam(W) it would be ell(2) = 1/16
        k = minimal_sir_vector(hertzian_model, GridResolution(n_space=6, n_angle=6, n_fading=4)).up_dir
        assert k == pytest.approx(1.0 / HERTZIAN_I0, rel=1e-2)
        assert k > 1.0 / (16.0 * HERTZIAN_I0)
        assert RadialProblem.from_model(hertzian_model, c=1.0).k_updir == pytest.approx(1.0 / HERTZIAN_I0, rel=1e-6)

    def test_prior_level_below_b(self, unlikely):
        assert 0.0 < unlikely.b_prior <= 0.6
        assert unlikely.unlikely

    def test_requires_disk(self, box_model):
        with pytest.raises(ModelError):
            RadialProblem.from_model(box_model, c=0.5)

    def test_c_range(self, hertzian_model):
        with pytest.raises(DomainError):
            RadialProblem.from_model(hertzian_model, c=hertzian_model.qos.c_plus)


class TestNewton:
    def test_single_statistic(self):
        weights = np.full(10, 0.1)
        x, res = tilt_newton(np.ones((1, 10)), weights, np.array([3.0]))
        assert x[0] == pytest.approx(np.log(3.0), abs=1e-12)
        assert abs(res[0]) < 1e-12

    def test_newton_matches_bisection(self, unlikely, updir_solution):
        alpha = updir_solution.alpha
        newton = solve_multipliers(unlikely, alpha, "newton")
        bisection = solve_multipliers(unlikely, alpha, "bisection")
        assert newton.beta == pytest.approx(bisection.beta, abs=1e-6)
        assert newton.delta == pytest.approx(bisection.delta, abs=1e-6)


class TestDirectUplink:
    def test_constraints_met(self, updir_solution):
        assert max(updir_solution.residuals) < 1e-8
        assert updir_solution.entropy > 0

    def test_sign_condition(self, updir_solution):
        m = updir_solution.multipliers
        assert max(m["beta"], m["delta"]) >= -1e-10

    def test_cost_consistent(self, unlikely, updir_solution):
        assert entropic_cost(unlikely, updir_solution.alpha) == pytest.approx(updir_solution.entropy, rel=1e-9)

    def test_likely_event_returns_prior(self, unlikely):
        solution = minimize_direct_uplink(unlikely.with_b(0.5 * unlikely.b_prior))
        assert solution.entropy == 0.0
        assert solution.note is not None

    def test_b_zero_rejected(self, unlikely):
        with pytest.raises(DomainError):
            minimize_direct_uplink(unlikely.with_b(0.0))

    @staticmethod
    def _seeded_problem(model, k):
        rng = np.random.default_rng(100 + k)
        c = float(rng.uniform(0.6, 1.5))
        problem = RadialProblem.from_model(model, c=c)
        b = problem.b_prior + float(rng.uniform(0.3, 0.7)) * (1.2 - problem.b_prior)
        return problem.with_b(b)

    @pytest.mark.parametrize("k", range(10))
    def test_seeded_draws_sign_condition(self, hertzian_model, k):
        problem = self._seeded_problem(hertzian_model, k)
        assert problem.unlikely
        solution = minimize_direct_uplink(problem)
        m = solution.multipliers
        assert max(solution.residuals) < 1e-8
        assert max(m["beta"], m["delta"]) >= -1e-10

    @pytest.mark.slow
    @pytest.mark.parametrize("k", range(10))
    def test_seeded_draws_match_oracle(self, hertzian_model, k):
        problem = self._seeded_problem(hertzian_model, k)
        solution = minimize_direct_uplink(problem)
        oracle = oracle_direct_uplink(problem, n_s=40, n_u=20)
        assert oracle.converged
        assert oracle.entropy == pytest.approx(solution.entropy, rel=0.01)

    @pytest.mark.slow
    def test_matches_oracle(self, unlikely, updir_solution):
        oracle = oracle_direct_uplink(unlikely, n_s=40, n_u=20)
        assert oracle.converged
        assert oracle.entropy == pytest.approx(updir_solution.entropy, rel=0.01)

    @pytest.mark.slow
    def test_oracle_rotationally_symmetric(self, unlikely):
        oracle = oracle_direct_uplink(unlikely, n_s=16, n_u=8, layout="cartesian")
        ratio = oracle.ratio
        keys = np.round(np.column_stack([oracle.grid.s, oracle.grid.u]), 12)
        _, groups = np.unique(keys, axis=0, return_inverse=True)
        for g in np.unique(groups):
            members = ratio[groups.ravel() == g]
            assert np.ptp(members) <= 1e-4 * members.max()


class TestZeroMass:
    def test_gamma_vanishes_at_k_updir(self, hertzian_model):
        k = RadialProblem.from_model(hertzian_model, c=1.0).k_updir
        solution = minimize_b0(RadialProblem.from_model(hertzian_model, c=k))
        assert solution.multipliers["gamma"] == pytest.approx(0.0, abs=1e-6)

    def test_below_k_updir(self, hertzian_model):
        problem = RadialProblem.from_model(hertzian_model, c=0.15)
        solution = minimize_b0(problem)
        assert solution.multipliers["gamma"] > 0
        assert solution.residuals[0] < 1e-8

    def test_above_k_updir_is_prior(self, hertzian_model):
        solution = minimize_b0(RadialProblem.from_model(hertzian_model, c=1.1))
        assert solution.entropy == 0.0

    def test_density_gap_is_zero_on_itself(self, hertzian_model):
        low = minimize_b0(RadialProblem.from_model(hertzian_model, c=0.15))
        high = minimize_b0(RadialProblem.from_model(hertzian_model, c=0.17))
        assert density_gap(low, low) == 0.0
        assert density_gap(low, high) > 0.0

    def test_oracle_agrees(self, hertzian_model):
        problem = RadialProblem.from_model(hertzian_model, c=0.15)
        oracle = oracle_b0(problem)
        assert oracle.converged
        assert oracle.entropy == pytest.approx(minimize_b0(problem).entropy, rel=0.01)


class TestPathlossFreeDownlink:
    @pytest.mark.parametrize("c,b", [(0.9, 0.5), (0.6, 1.65), (0.6, 1.7), (1.2, 0.2)])
    def test_constraints(self, plfree_model, c, b):
        solution = minimize_pathloss_free_downlink(plfree_model, c, b)
        level = 1.5 / c
        assert solution.mean_fading * solution.total_mass >= level - 1e-8
        assert solution.total_mass >= b - 1e-8
        assert all(r < 1e-8 for r in solution.residuals)

    def test_prior_feasible(self, plfree_model):
        # int u dmu' = 1.5 >= F_o / t = 1.5 / 1.2
        solution = minimize_pathloss_free_downlink(plfree_model, 1.2, 0.5)
        assert solution.entropy == 0.0

    @pytest.mark.parametrize("c,b", [(0.9, 0.5), (0.6, 1.65)])
    def test_matches_oracle(self, plfree_model, c, b):
        solution = minimize_pathloss_free_downlink(plfree_model, c, b)
        oracle = oracle_pathloss_free_downlink(plfree_model, c, b)
        assert oracle.converged
        assert oracle.entropy == pytest.approx(solution.entropy, rel=0.01)

    def test_needs_constant_path_loss(self, hertzian_model):
        with pytest.raises(ModelError):
            minimize_pathloss_free_downlink(hertzian_model, 1.0, 0.5)


class TestOracleGrid:
    def test_masses_sum_to_prior(self, hertzian_model):
        grid = oracle_grid(hertzian_model, n_s=10, n_u=5, alpha=2.0)
        assert grid.masses.sum() == pytest.approx(1.0, abs=1e-10)
        assert grid.inside.any() and (~grid.inside).any()

    def test_mass_constraint_needs_alpha(self, hertzian_model):
        with pytest.raises(ParameterError):
            frustrated_mass_constraint(oracle_grid(hertzian_model, n_s=4, n_u=2), 0.5)


class TestDispatch:
    def test_solve_kind_table(self, hertzian_model):
        summary, (s, u, density) = solve_kind(hertzian_model, "b0", 0.15, 0.0)
        assert summary.kind == "b0"
        assert len(s) == len(u) == len(density)
        assert np.all(density >= 0)

    def test_oracle_for_constant_path_loss(self, plfree_model):
        summary, _ = solve_kind(plfree_model, "oracle", 0.9, 0.5)
        assert summary.kind == "oracle"
        assert "fading_moment" in summary.multipliers


class TestVanishingMass:
    @pytest.fixture(scope="class")
    def ladder(self, hertzian_model):
        return b0_ladder(RadialProblem.from_model(hertzian_model, c=0.15), (1e-1, 1e-2, 1e-3))

    def test_sup_gap_strictly_decreasing(self, ladder):
        _, rungs = ladder
        gaps = [gap for _, _, gap in rungs]
        assert gaps[0] > gaps[1] > gaps[2] > 0.0

    def test_beta_tends_to_gamma0(self, ladder):
        limit, rungs = ladder
        gamma0 = limit.multipliers["gamma"]
        assert gamma0 > 0
        distances = [abs(sol.multipliers["beta"] - gamma0) for _, sol, _ in rungs]
        assert distances[0] > distances[1] > distances[2]
        assert distances[2] < 0.5 * distances[1]

    def test_small_b_close_to_gamma0(self, ladder, hertzian_model):
        limit, _ = ladder
        problem = RadialProblem.from_model(hertzian_model, c=0.15, b=1e-6)
        beta = anchored_uplink(problem).multipliers["beta"]
        assert beta == pytest.approx(limit.multipliers["gamma"], rel=0.02)

    def test_delta_tends_to_zero(self, ladder):
        _, rungs = ladder
        for _, sol, _ in rungs:
            assert abs(sol.multipliers["delta"]) < 1e-6

    def test_alpha_decreases_to_alpha_min(self, ladder):
        _, rungs = ladder
        alphas = [sol.alpha for _, sol, _ in rungs]
        assert alphas[0] > alphas[1] > alphas[2] > 1.0

    def test_constraints_hold(self, ladder):
        _, rungs = ladder
        for _, sol, _ in rungs:
            assert max(sol.residuals) < 1e-8

    def test_entropy_above_limit(self, ladder):
        limit, rungs = ladder
        entropies = [sol.entropy for _, sol, _ in rungs]
        assert entropies[0] > entropies[1] > entropies[2] > limit.entropy - 1e-9

    def test_rejects_zero_mass(self, hertzian_model):
        with pytest.raises(DomainError):
            anchored_uplink(RadialProblem.from_model(hertzian_model, c=0.15))
