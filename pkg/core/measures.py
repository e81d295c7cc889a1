"""
Finite measures on W x [F_min, F_max].

One container serves both representations: weighted atoms (simulated users)
and grid cells (mu' and discretized measures). A grid measure stores cell
masses at the cell representatives; interference against it is then the
cell-midpoint quadrature.
"""
from typing import Literal

import numpy as np

from core.errors import DomainError, ModelError
from models.network import NetworkModel

_SUPPORT_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    if isinstance(a, np.ndarray) and not a.flags.writeable:
        return a
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class MarkedMeasure:
    """Immutable weighted point set (positions, fadings, weights)."""
    __slots__ = ("positions", "fadings", "weights", "kind", "grid")

    def __init__(
        self,
        positions: np.ndarray,
        fadings: np.ndarray,
        weights: np.ndarray,
        kind: Literal["atoms", "grid"] = "atoms",
        grid: object | None = None,
    ):
        positions = np.asarray(positions, dtype=float)
        if positions.ndim == 1:
            positions = positions[:, None]
        fadings = np.asarray(fadings, dtype=float).ravel()
        weights = np.asarray(weights, dtype=float).ravel()
        if not len(positions) == len(fadings) == len(weights):
            raise DomainError("Positionen, Fadings und Gewichte muessen gleich lang sein.")
        if kind == "atoms" and np.any(weights <= 0):
            raise DomainError("Atomgewichte muessen positiv sein.")
        if kind == "grid" and np.any(weights < 0):
            raise DomainError("Zellmassen duerfen nicht negativ sein.")
        self.positions = _frozen(positions)
        self.fadings = _frozen(fadings)
        self.weights = _frozen(weights)
        self.kind = kind
        self.grid = grid

    @classmethod
    def zero(cls, d: int = 2) -> "MarkedMeasure":
        return cls(np.empty((0, d)), np.empty(0), np.empty(0))

    def __len__(self) -> int:
        return len(self.weights)

    def __repr__(self) -> str:
        return f"MarkedMeasure(kind={self.kind!r}, n={len(self)}, mass={self.total_mass:.6g})"

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def positive(self) -> np.ndarray:
        return self.weights > 0

    def scaled(self, a: float) -> "MarkedMeasure":
        """a * nu."""
        if a < 0:
            raise DomainError("Skalierungsfaktor muss nichtnegativ sein.")
        if a == 0:
            return MarkedMeasure.zero(self.dim)
        return MarkedMeasure(self.positions, self.fadings, self.weights * a, self.kind, self.grid)

    def restricted(self, mask: np.ndarray) -> "MarkedMeasure":
        """nu restricted to the points/cells selected by ``mask``."""
        mask = np.asarray(mask, dtype=bool)
        return MarkedMeasure(
            self.positions[mask], self.fadings[mask], self.weights[mask], self.kind, self.grid,
        )

    def check_support(self, model: NetworkModel) -> None:
        """Raise ModelError if a point lies outside W x [F_min, F_max]."""
        if len(self) == 0:
            return
        tol = _SUPPORT_TOL * max(1.0, model.f_max)
        if np.any(self.fadings < model.f_min - tol) or np.any(self.fadings > model.f_max + tol):
            raise ModelError("Fading ausserhalb von [F_min, F_max].")
        if not np.all(inside_window(model, self.positions)):
            raise ModelError("Position ausserhalb des Fensters.")


def inside_window(model: NetworkModel, positions: np.ndarray) -> np.ndarray:
    """Boolean mask of positions in W (closed, with rounding tolerance)."""
    w = model.window
    positions = np.atleast_2d(positions)
    limit = w.r * (1 + _SUPPORT_TOL)
    if w.shape == "disk":
        return np.linalg.norm(positions, axis=1) <= limit
    return np.all(np.abs(positions) <= limit, axis=1)
