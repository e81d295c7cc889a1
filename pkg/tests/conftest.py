"""
Shared fixtures: the bundled scenarios and small hand-built models.
"""
from pathlib import Path

import numpy as np
import pytest

from models.network import (
    ConstantPathLoss,
    DiscreteFading,
    FixedBase,
    NetworkModel,
    TruncatedIdentityQos,
    TruncatedPowerPathLoss,
    UniformFading,
    UniformIntensity,
    Window,
)
from utils.rate_limit import compute_rate_limiter, mc_rate_limiter
from utils.scenario_file import load_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

# I(o) of the Hertzian disk: 1.5 * (5 / sqrt(5) + sqrt(5) - 1)
HERTZIAN_I0 = 1.5 * (2.0 * np.sqrt(5.0) - 1.0)


@pytest.fixture(scope="session")
def hertzian():
    return load_scenario(SCENARIOS / "hertzian_disk.ini")


@pytest.fixture(scope="session")
def hertzian_model(hertzian):
    return hertzian.model


@pytest.fixture(scope="session")
def plfree_model():
    return load_scenario(SCENARIOS / "pathloss_free.ini").model


@pytest.fixture(scope="session")
def random_base_model():
    return load_scenario(SCENARIOS / "random_base.yaml").model


@pytest.fixture(scope="session")
def box_model():
    """[-1,1]^2, ell = min{2, s^-2}, fadings 1 or 2 with equal weight, mu(W) = 4."""
    return NetworkModel(
        window=Window(shape="box", r=1.0, d=2),
        path_loss=TruncatedPowerPathLoss(cap=2.0, exponent=2.0),
        fading=DiscreteFading(values=(1.0, 2.0), weights=(0.5, 0.5)),
        qos=TruncatedIdentityQos(cap=1.0),
        intensity=UniformIntensity(mass=4.0),
    )


@pytest.fixture(scope="session")
def constant_model():
    """Constant path-loss 3 on the unit disk, mu(W) = 1, U[1,2], F_o = 1.5."""
    return NetworkModel(
        window=Window(shape="disk", r=1.0),
        path_loss=ConstantPathLoss(value=3.0),
        fading=UniformFading(low=1.0, high=2.0),
        qos=TruncatedIdentityQos(cap=10.0),
        intensity=UniformIntensity(mass=1.0),
        base=FixedBase(value=1.5),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def scenario_text():
    return (SCENARIOS / "hertzian_disk.ini").read_text(encoding="utf-8")


@pytest.fixture(autouse=True)
def _fresh_rate_limits():
    compute_rate_limiter.reset()
    mc_rate_limiter.reset()
    yield
