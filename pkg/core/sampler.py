"""
Realizations of the marked Poisson point process X^lambda.

Randomness comes from numpy Generators on PCG64, seeded by a SeedSequence
with spawn key (stream,), so that replication ``stream`` of seed ``seed`` is
reproducible independently of how replications are spread over workers.
"""
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import cumulative_trapezoid

from core.errors import ModelError, ParameterError
from core.landscape import (
    area_index,
    check_kernel,
    fading_ppf,
    intensity_mass,
    kernel_column,
    radial_q,
    tabulated_ppf,
)
from core.measures import MarkedMeasure
from models.kernel import AreasKernel, ContinuousKernel, FadingKernel, IidKernel
from models.network import NetworkModel

logger = logging.getLogger("core.sampler")

RNG_ALGORITHM = "PCG64"
_RADIAL_TABLE = 4097


class SeedRecord(BaseModel):
    model_config = ConfigDict(frozen=True)
    seed: int = Field(..., ge=0)
    stream: int = Field(0, ge=0)
    algorithm: str = RNG_ALGORITHM


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for replication ``stream`` of ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


class Sample:
    """One realization: users with unit weights plus the base-station fading."""
    __slots__ = ("users", "lam", "base_fading_draw", "seed")

    def __init__(self, users: MarkedMeasure, lam: float, base_fading_draw: float, seed: SeedRecord):
        self.users = users
        self.lam = lam
        self.base_fading_draw = base_fading_draw
        self.seed = seed

    @property
    def n_users(self) -> int:
        return len(self.users)

    def __repr__(self) -> str:
        return f"Sample(n={self.n_users}, lambda={self.lam}, F_o={self.base_fading_draw:.4g})"


# --------------------------------------------------------------------------- #
# Positions                                                                    #
# --------------------------------------------------------------------------- #

class PositionSampler:
    """Draws i.i.d. positions with law mu / mu(W)."""

    def __init__(self, model: NetworkModel):
        self.model = model
        w = model.window
        it = model.intensity
        self._radial_cdf = None
        if it.kind == "radial":
            s = np.linspace(0.0, w.r, _RADIAL_TABLE)
            self._radial_s = s
            self._radial_q = radial_q(model, s)
            self._radial_cdf = cumulative_trapezoid(self._radial_q, s, initial=0.0)
            if self._radial_cdf[-1] <= 0:
                self._radial_cdf = None

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        w = self.model.window
        if n == 0:
            return np.empty((0, w.d))
        if w.shape == "box":
            return rng.uniform(-w.r, w.r, size=(n, w.d))
        p = rng.random(n)
        if self._radial_cdf is None:
            radius = w.r * np.sqrt(p)
        else:
            # inverse CDF of the piecewise-linear q on the table
            radius = tabulated_ppf(self._radial_s, self._radial_q, p)
        theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
        return np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])


# --------------------------------------------------------------------------- #
# Fadings                                                                      #
# --------------------------------------------------------------------------- #

def draw_fadings(
    model: NetworkModel,
    kernel: FadingKernel | None,
    positions: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Independent fadings, the one at x drawn from p(x, .)."""
    n = len(positions)
    p = rng.random(n)
    if kernel is None or isinstance(kernel, IidKernel):
        return fading_ppf(model.fading, p)
    radii = np.linalg.norm(positions, axis=1)
    out = np.empty(n)
    if isinstance(kernel, AreasKernel):
        region = area_index(kernel, radii)
        for k, law in enumerate(kernel.laws):
            sel = region == k
            if np.any(sel):
                out[sel] = fading_ppf(law, p[sel])
        return out
    if isinstance(kernel, ContinuousKernel):
        cols = kernel_column(kernel, radii)
        u = np.asarray(kernel.u)
        for k in np.unique(cols):
            sel = cols == k
            out[sel] = tabulated_ppf(u, np.asarray(kernel.f[k], dtype=float), p[sel])
        return out
    raise ModelError(f"Unbekannter Fading-Kern: {kernel!r}")


def draw_base_fading(model: NetworkModel, rng: np.random.Generator) -> float:
    if model.base.kind == "random":
        return float(fading_ppf(model.base.law, rng.random(1))[0])
    return float(model.base_value)


# --------------------------------------------------------------------------- #
# Public API                                                                   #
# --------------------------------------------------------------------------- #

def sample_ppp(
    model: NetworkModel,
    kernel: FadingKernel | None,
    lam: float,
    seed: int,
    stream: int = 0,
) -> Sample:
    """N ~ Poisson(lam mu(W)), positions i.i.d. ~ mu, fadings from the kernel."""
    if lam <= 0:
        raise ParameterError("lambda muss positiv sein.")
    check_kernel(model, kernel)
    rng = make_rng(seed, stream)
    n = int(rng.poisson(lam * intensity_mass(model)))
    positions = PositionSampler(model).draw(rng, n)
    fadings = draw_fadings(model, kernel, positions, rng)
    base = draw_base_fading(model, rng)
    users = MarkedMeasure(positions, fadings, np.ones(n)) if n else MarkedMeasure.zero(model.window.d)
    return Sample(users, lam, base, SeedRecord(seed=seed, stream=stream))


def empirical_measure(sample: Sample) -> MarkedMeasure:
    """L_lambda = (1/lambda) sum of the user atoms."""
    if sample.n_users == 0:
        return MarkedMeasure.zero(sample.users.dim)
    return sample.users.scaled(1.0 / sample.lam)


class BatchDraw:
    """Many samples drawn at once; users of sample k are rows offsets[k]:offsets[k+1]."""
    __slots__ = ("counts", "offsets", "positions", "fadings", "base_fadings")

    def __init__(self, counts, positions, fadings, base_fadings):
        self.counts = counts
        self.offsets = np.concatenate([[0], np.cumsum(counts)])
        self.positions = positions
        self.fadings = fadings
        self.base_fadings = base_fadings


def sample_batch(
    model: NetworkModel,
    kernel: FadingKernel | None,
    lam: float,
    n_samples: int,
    rng: np.random.Generator,
    sampler: PositionSampler | None = None,
) -> BatchDraw:
    """Vectorized draw of ``n_samples`` independent realizations from one stream."""
    counts = rng.poisson(lam * intensity_mass(model), size=n_samples)
    total = int(counts.sum())
    positions = (sampler or PositionSampler(model)).draw(rng, total)
    fadings = draw_fadings(model, kernel, positions, rng)
    if model.base.kind == "random":
        base = fading_ppf(model.base.law, rng.random(n_samples))
    else:
        base = np.full(n_samples, model.base_value)
    return BatchDraw(counts, positions, fadings, base)
