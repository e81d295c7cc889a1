"""
Triadic discretization of W x [F_min, F_max].

Spatial centers lie on delta*2r*Z^d, fading centers on F_o + 2 delta
(F_max - F_min) Z, so (o, F_o) is always a center. Cells are identified by
integer index vectors (k_1, ..., k_d, j); measures on the grid store the
occupied cells only.

Point-to-center assignment rounds to the nearest center and resolves ties
towards the smaller index in every coordinate, i.e. the lexicographically
smallest neighbouring center. For delta' = delta/3 every fine center lies
strictly inside one coarse cell, so coarsening by re-assigning centers is
exact.
"""
import logging
import math
from typing import NamedTuple

import numpy as np

from core.errors import DegenerateModelError, DomainError, GridMismatchError, ParameterError
from core.landscape import fading_cdf, is_continuous, local_partition, spatial_density
from core.measures import MarkedMeasure, inside_window
from core.quadrature import gauss_legendre
from core.sir import Mode, frustration_measure
from models.kernel import FadingKernel, IidKernel
from models.network import DiscreteFading, NetworkModel

logger = logging.getLogger("core.discretization")

DEFAULT_LADDER: tuple[float, ...] = tuple(3.0 ** -m for m in range(2, 6))
_TIE_TOL = 1e-9
_SUB_ORDER = 6


def triadic_exponent(delta: float) -> int:
    """m with delta = 3^-m; ParameterError if delta is not of that form."""
    if not 0 < delta <= 1:
        raise ParameterError(f"delta={delta} liegt nicht in (0, 1].")
    m = int(round(-math.log(delta, 3)))
    if abs(3.0 ** -m - delta) > 1e-12 * delta:
        raise ParameterError(f"delta={delta} ist keine Potenz von 1/3.")
    return m


class TriadicGrid:
    """Cell geometry of the delta-discretization anchored at (o, F_o)."""
    __slots__ = ("window", "delta", "f_min", "f_max", "anchor", "h", "hf", "k_max", "j_lo", "j_hi")

    def __init__(self, model: NetworkModel, delta: float):
        m = triadic_exponent(delta)
        self.window = model.window
        self.delta = 3.0 ** -m
        self.f_min = model.f_min
        self.f_max = model.f_max
        # random F_o: anchor at the midpoint of the fading range
        base = model.base_value
        self.anchor = base if base is not None else 0.5 * (model.f_min + model.f_max)
        self.h = 2.0 * self.delta * self.window.r
        self.hf = 2.0 * self.delta * (self.f_max - self.f_min)
        self.k_max = (3 ** m - 1) // 2
        if self.hf > 0:
            self.j_lo = math.ceil((self.f_min - self.anchor) / self.hf - 1e-12)
            self.j_hi = math.floor((self.f_max - self.anchor) / self.hf + 1e-12)
        else:
            self.j_lo = self.j_hi = 0

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TriadicGrid) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"TriadicGrid(delta=3^-{triadic_exponent(self.delta)}, anchor={self.anchor:.6g})"

    @property
    def key(self) -> tuple:
        w = self.window
        return (w.shape, w.r, w.d, self.delta, self.f_min, self.f_max, self.anchor)

    @property
    def d(self) -> int:
        return self.window.d

    # -- assignment --------------------------------------------------------- #

    def index_of(self, positions: np.ndarray, fadings: np.ndarray, model: NetworkModel | None = None) -> np.ndarray:
        """Integer cell indices (n, d+1) of points; DomainError outside W."""
        positions = np.atleast_2d(np.asarray(positions, dtype=float))
        fadings = np.atleast_1d(np.asarray(fadings, dtype=float))
        tol = 1e-12 * max(1.0, self.f_max)
        if np.any(fadings < self.f_min - tol) or np.any(fadings > self.f_max + tol):
            raise DomainError("Fading ausserhalb von [F_min, F_max].")
        if model is not None and not np.all(inside_window(model, positions)):
            raise DomainError("Punkt liegt ausserhalb des Fensters.")
        if np.any(np.abs(positions) > self.window.r * (1 + 1e-12)):
            raise DomainError("Punkt liegt ausserhalb des Fensters.")
        k = np.ceil(positions / self.h - 0.5 - _TIE_TOL).astype(np.int64)
        k = np.clip(k, -self.k_max, self.k_max)
        if self.hf > 0:
            j = np.ceil((fadings - self.anchor) / self.hf - 0.5 - _TIE_TOL).astype(np.int64)
            j = np.clip(j, self.j_lo, self.j_hi)
        else:
            j = np.zeros(len(fadings), dtype=np.int64)
        return np.column_stack([k, j])

    def centers(self, index: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        index = np.atleast_2d(index)
        return index[:, :-1] * self.h, self.anchor + index[:, -1] * self.hf

    def fading_extent(self, j: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Nearest-center fading cells clipped to [F_min, F_max]."""
        c = self.anchor + np.asarray(j) * self.hf
        lo = np.where(j == self.j_lo, self.f_min, c - 0.5 * self.hf)
        hi = np.where(j == self.j_hi, self.f_max, c + 0.5 * self.hf)
        return lo, hi

    def spatial_index_range(self) -> np.ndarray:
        return np.arange(-self.k_max, self.k_max + 1)

    def fading_index_range(self) -> np.ndarray:
        return np.arange(self.j_lo, self.j_hi + 1)

    def discretize_point(self, position, fading: float, model: NetworkModel | None = None) -> tuple[np.ndarray, float]:
        """Center (position, fading) of the cell containing one point."""
        idx = self.index_of(np.asarray(position, dtype=float)[None, :], np.array([fading]), model)
        pos, fad = self.centers(idx)
        return pos[0], float(fad[0])


def discretize_point(g: TriadicGrid, position, fading: float, model: NetworkModel | None = None):
    return g.discretize_point(position, fading, model)


# --------------------------------------------------------------------------- #
# Discretized measures                                                         #
# --------------------------------------------------------------------------- #

class DiscretizedMeasure:
    """Occupied cells (sorted unique index rows) and their masses."""
    __slots__ = ("grid", "index", "masses")

    def __init__(self, grid: TriadicGrid, index: np.ndarray, masses: np.ndarray):
        self.grid = grid
        self.index = np.asarray(index, dtype=np.int64).reshape(-1, grid.d + 1)
        self.masses = np.asarray(masses, dtype=float)

    def __len__(self) -> int:
        return len(self.masses)

    def __repr__(self) -> str:
        return f"DiscretizedMeasure({self.grid!r}, cells={len(self)}, mass={self.total_mass:.6g})"

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def as_marked(self) -> MarkedMeasure:
        """Cell masses placed at the cell centers."""
        if len(self) == 0:
            return MarkedMeasure.zero(self.grid.d)
        pos, fad = self.grid.centers(self.index)
        keep = self.masses > 0
        return MarkedMeasure(pos[keep], fad[keep], self.masses[keep], kind="grid", grid=self.grid)

    def scaled(self, a: float) -> "DiscretizedMeasure":
        return DiscretizedMeasure(self.grid, self.index, self.masses * a)

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(v) for v in row): float(m) for row, m in zip(self.index, self.masses)}


def _accumulate(grid: TriadicGrid, index: np.ndarray, weights: np.ndarray) -> DiscretizedMeasure:
    if len(weights) == 0:
        return DiscretizedMeasure(grid, np.empty((0, grid.d + 1), dtype=np.int64), np.empty(0))
    cells, inverse = np.unique(index, axis=0, return_inverse=True)
    masses = np.bincount(inverse.ravel(), weights=weights, minlength=len(cells))
    return DiscretizedMeasure(grid, cells, masses)


def pushforward(g: TriadicGrid, nu: MarkedMeasure, model: NetworkModel | None = None) -> DiscretizedMeasure:
    """nu o rho'^-1: every atom/cell representative moved to its cell center."""
    if len(nu) == 0:
        return _accumulate(g, np.empty((0, g.d + 1), dtype=np.int64), np.empty(0))
    return _accumulate(g, g.index_of(nu.positions, nu.fadings, model), nu.weights)


def align(a: DiscretizedMeasure, b: DiscretizedMeasure) -> tuple[np.ndarray, np.ndarray]:
    """Masses of a and b on the union of their cells."""
    if a.grid != b.grid:
        raise GridMismatchError("Die Masse leben auf verschiedenen Gittern.")
    both = np.concatenate([a.index, b.index])
    if len(both) == 0:
        return np.empty(0), np.empty(0)
    cells, inverse = np.unique(both, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    ma = np.bincount(inverse[: len(a)], weights=a.masses, minlength=len(cells))
    mb = np.bincount(inverse[len(a):], weights=b.masses, minlength=len(cells))
    return ma, mb


# --------------------------------------------------------------------------- #
# mu' on the triadic grid                                                      #
# --------------------------------------------------------------------------- #

def discretize_intensity(
    g: TriadicGrid,
    model: NetworkModel,
    kernel: FadingKernel | None = None,
) -> DiscretizedMeasure:
    """
    mu'^{rho'}: spatial cell masses by Gauss-Legendre over each cell (exact for
    a uniform box), fading cell masses from the CDF of zeta (or of the local
    kernel law at the cell center).
    """
    ks = g.spatial_index_range()
    mesh = np.meshgrid(*([ks] * g.d), indexing="ij")
    k_cells = np.column_stack([m.ravel() for m in mesh])
    centers = k_cells * g.h

    half = 0.5 * g.h
    x, wx = gauss_legendre(-half, half, _SUB_ORDER)
    offsets = np.stack(np.meshgrid(*([x] * g.d), indexing="ij"), axis=-1).reshape(-1, g.d)
    sub_w = np.ones(len(offsets))
    for axis_w in np.meshgrid(*([wx] * g.d), indexing="ij"):
        sub_w = sub_w * axis_w.ravel()
    pts = centers[:, None, :] + offsets[None, :, :]
    dens = spatial_density(model, pts.reshape(-1, g.d)).reshape(len(centers), -1)
    space_mass = dens @ sub_w
    keep = space_mass > 0
    k_cells, space_mass = k_cells[keep], space_mass[keep]

    js = g.fading_index_range()
    lo, hi = g.fading_extent(js)
    rows, masses = [], []
    if kernel is None or isinstance(kernel, IidKernel):
        probs = _fading_cell_probabilities(model.fading, g, js, lo, hi)
        for k_row, m in zip(k_cells, space_mass):
            rows.append(np.column_stack([np.repeat(k_row[None, :], len(js), axis=0), js]))
            masses.append(m * probs)
    else:
        for k_row, m in zip(k_cells, space_mass):
            radius = float(np.linalg.norm(k_row * g.h))
            values, probs = local_partition(model, kernel, radius, 64)
            idx = g.index_of(np.repeat((k_row * g.h)[None, :], len(values), axis=0), values)
            rows.append(idx)
            masses.append(m * probs)
    index = np.concatenate(rows)
    weights = np.concatenate(masses)
    positive = weights > 0
    return _accumulate(g, index[positive], weights[positive])


def _fading_cell_probabilities(law, g: TriadicGrid, js, lo, hi) -> np.ndarray:
    if isinstance(law, DiscreteFading) or not is_continuous(law):
        values = np.asarray(law.values) if isinstance(law, DiscreteFading) else np.array([law.low])
        weights = np.asarray(law.weights) if isinstance(law, DiscreteFading) else np.array([1.0])
        idx = g.index_of(np.zeros((len(values), g.d)), values)[:, -1]
        return np.array([weights[idx == j].sum() for j in js])
    return fading_cdf(law, hi) - fading_cdf(law, lo)


def kappa_delta(g: TriadicGrid, mu_prime: DiscretizedMeasure) -> float:
    """Smallest positive cell mass of mu'^{rho'} on the grid g."""
    if mu_prime.grid != g:
        raise GridMismatchError(f"mu' lebt nicht auf dem Gitter delta={g.delta:.6g}.")
    positive = mu_prime.masses[mu_prime.masses > 0]
    if len(positive) == 0:
        raise DegenerateModelError("mu'^{rho'} hat keine Zelle positiver Masse.")
    return float(positive.min())


# --------------------------------------------------------------------------- #
# Sandwich check                                                               #
# --------------------------------------------------------------------------- #

class SandwichResult(NamedTuple):
    delta: float
    holds: bool
    max_violation: float


def sandwich_check(
    model: NetworkModel,
    nu: MarkedMeasure,
    c: float,
    mode: Mode,
    eps: float,
    delta: float,
    base_fading: float | None = None,
) -> SandwichResult:
    """
    Cellwise G((1-eps) nu^rho', c, m) <= G(nu, c, m)^rho' <= G((1+eps) nu^rho', c, m).
    """
    g = TriadicGrid(model, delta)
    coarse = pushforward(g, nu).as_marked()
    middle = pushforward(g, frustration_measure(model, nu, c, mode, base_fading))
    lower = pushforward(g, frustration_measure(model, coarse.scaled(1 - eps), c, mode, base_fading))
    upper = pushforward(g, frustration_measure(model, coarse.scaled(1 + eps), c, mode, base_fading))
    lo_m, mid_l = align(lower, middle)
    mid_u, up_m = align(middle, upper)
    tol = 1e-12 * max(1.0, nu.total_mass)
    violation = max(
        float(np.max(lo_m - mid_l, initial=0.0)),
        float(np.max(mid_u - up_m, initial=0.0)),
    )
    return SandwichResult(g.delta, violation <= tol, violation)


def sandwich_ladder(
    model: NetworkModel,
    nu: MarkedMeasure,
    c: float,
    mode: Mode,
    eps: float,
    deltas: tuple[float, ...] = DEFAULT_LADDER,
    base_fading: float | None = None,
) -> list[SandwichResult]:
    results = [sandwich_check(model, nu, c, mode, eps, d, base_fading) for d in deltas]
    for r in results:
        logger.debug("Sandwich %s eps=%.3g delta=%.3g: %s", mode, eps, r.delta, r.holds)
    return results
