"""
Tests for the exponential / subexponential decay classifier.

Most cases run on the constant path-loss disk: there the up-dir QoS of a cell
is F/1.5 and every downlink QoS equals F_o/1.5, so the frustrated masses are
known in closed form.
"""
import re

import numpy as np
import pytest

from core.classifier import (
    EPSILON_LADDER,
    a_priori_frustration,
    classify_fixed,
    classify_random_base,
    grid_minimal_qos,
)
from core.errors import DomainError, ModelError
from core.experiments import frustration_curve
from models.network import GridResolution, RandomBase, UniformFading

RES = GridResolution(n_space=10, n_angle=10, n_fading=5)
# uplink c = 1.2: fading cells 1.1 .. 1.7 frustrated, downlink c = 1.1: all frustrated
C_TYPICAL = [1.2, 1.2, 1.1, 1.1]


@pytest.fixture(scope="module")
def random_plfree(plfree_model):
    return plfree_model.model_copy(update={"base": RandomBase(law=UniformFading(low=1.0, high=2.0))})


class TestAPriori:
    def test_up_dir_matches_curve(self, hertzian_model):
        fine = GridResolution(n_space=40, n_angle=4, n_fading=20)
        mass = a_priori_frustration(hertzian_model, [1.1] * 4, fine)
        (point,) = frustration_curve(hertzian_model, "up-dir", [1.1])
        assert mass[1] == pytest.approx(point.p, abs=0.03)

    def test_closed_form_masses(self, plfree_model):
        mass = a_priori_frustration(plfree_model, C_TYPICAL, RES)
        np.testing.assert_allclose(mass, [0.8, 0.8, 1.0, 1.0], atol=1e-6)

    def test_scaling_grows_mass(self, hertzian_model):
        plain = a_priori_frustration(hertzian_model, [1.5] * 4, RES)
        scaled = a_priori_frustration(hertzian_model, [1.5] * 4, RES, eps=0.25)
        assert np.all(scaled >= plain)

    def test_minimal_qos_below_c_plus(self, hertzian_model):
        k = grid_minimal_qos(hertzian_model, RES)
        assert np.all(k > 0)
        assert np.all(k <= hertzian_model.qos.c_plus)
        # relaying never lowers the QoS
        assert k[0] >= k[1] - 1e-12
        assert k[2] >= k[3] - 1e-12


class TestFixedBase:
    def test_large_b_is_exponential(self, plfree_model):
        verdict = classify_fixed(plfree_model, [2.0] * 4, C_TYPICAL, RES)
        assert verdict.verdict == "Exponential"
        assert verdict.case == 1
        assert verdict.epsilon == EPSILON_LADDER[0]

    def test_typical_frustration_is_subexponential(self, plfree_model):
        verdict = classify_fixed(plfree_model, [0.0] * 4, C_TYPICAL, RES)
        assert verdict.verdict == "Subexponential"
        assert verdict.case == 2
        assert verdict.epsilon is None

    def test_nobody_frustrated(self, plfree_model):
        verdict = classify_fixed(plfree_model, [0.0] * 4, [0.5] * 4, RES)
        assert verdict.case == 5
        assert verdict.verdict == "Exponential"

    def test_one_exponential_mode_suffices(self, plfree_model):
        verdict = classify_fixed(plfree_model, [2.0, 0.0, 0.0, 0.0], C_TYPICAL, RES)
        assert verdict.verdict == "Exponential"
        assert verdict.case == 6
        assert verdict.modes[0].exponential
        assert not verdict.modes[1].exponential

    def test_monotone_in_b(self, hertzian_model):
        verdicts = [
            classify_fixed(hertzian_model, [b] * 4, [1.5] * 4, RES).verdict == "Exponential"
            for b in np.linspace(0.0, 1.5, 7)
        ]
        # once exponential, larger b stays exponential
        first = verdicts.index(True) if True in verdicts else len(verdicts)
        assert all(verdicts[first:])

    def test_record_line(self, plfree_model):
        verdict = classify_fixed(plfree_model, [2.0] * 4, C_TYPICAL, RES)
        pattern = r"verdict=Exponential case=1 epsilon=\S+ K=([0-9.e+-]+,){3}[0-9.e+-]+"
        assert re.fullmatch(pattern, verdict.record_line())

    def test_c_must_be_below_plateau(self, hertzian_model):
        with pytest.raises(DomainError):
            classify_fixed(hertzian_model, [0.0] * 4, [hertzian_model.qos.c_plus] * 4, RES)

    def test_vectors_need_four_entries(self, hertzian_model):
        with pytest.raises(DomainError):
            classify_fixed(hertzian_model, [0.0] * 3, [1.0] * 3, RES)

    def test_negative_b(self, hertzian_model):
        with pytest.raises(DomainError):
            classify_fixed(hertzian_model, [-0.1, 0.0, 0.0, 0.0], [1.0] * 4, RES)


class TestRandomBase:
    def test_needs_random_base(self, hertzian_model):
        with pytest.raises(ModelError):
            classify_random_base(hertzian_model, [0.0] * 4, [1.0] * 4, RES)

    def test_exponential_without_critical_mass(self, random_plfree):
        verdict = classify_random_base(random_plfree, [2.0] * 4, C_TYPICAL, RES, n_u=5, workers=2)
        assert verdict.verdict == "Exponential"
        assert verdict.critical_mass == 0.0
        assert not [c for c in verdict.critical if c.kind == "C"]

    def test_critical_set_is_low_base_fading(self, random_plfree):
        # downlink QoS is u / 1.5: frustrated iff u < 1.65
        verdict = classify_random_base(random_plfree, [0.0] * 4, C_TYPICAL, RES, n_u=5, workers=2)
        assert verdict.verdict == "Subexponential"
        assert verdict.critical_mass == pytest.approx(0.625)
        (c_set,) = [c for c in verdict.critical if c.kind == "C"]
        assert (c_set.low, c_set.high) == pytest.approx((1.0, 1.5))
        (a_set,) = [c for c in verdict.critical if c.kind == "A"]
        assert a_set.high == pytest.approx(1.5)

    def test_point_mass_reduces_to_fixed(self, plfree_model):
        model = plfree_model.model_copy(update={"base": RandomBase(law=UniformFading(low=1.5, high=1.5))})
        fixed = classify_fixed(plfree_model, [0.0] * 4, C_TYPICAL, RES, base_fading=1.5)
        random = classify_random_base(model, [0.0] * 4, C_TYPICAL, RES)
        assert random.record_line() == fixed.record_line()
