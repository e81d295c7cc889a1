"""
Relative entropy h(nu | mu) = int f log f dmu - nu(W) + mu(W) in its cellwise
and density forms, and the Poisson Cramer rate.

Infinity is returned as float("inf") whenever absolute continuity fails.
Sums use numpy's pairwise summation on a fixed cell order, so results are
reproducible bit for bit.
"""
import math
from typing import NamedTuple

import numpy as np
from scipy.special import rel_entr

from core.discretization import DiscretizedMeasure, align
from core.errors import DomainError, ParameterError
from core.measures import MarkedMeasure


class EntropyValue(NamedTuple):
    value: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self) -> float:
        return self.value


def cellwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """h(a_i | b_i) = a log(a/b) - a + b per cell, 0 log 0 = 0, h(a|0) = inf for a > 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise DomainError("Massen muessen nichtnegativ sein.")
    return rel_entr(a, b) - a + b


def rel_entropy_masses(a: np.ndarray, b: np.ndarray) -> EntropyValue:
    terms = cellwise(a, b)
    if np.any(np.isinf(terms)):
        return EntropyValue(math.inf)
    return EntropyValue(max(float(np.sum(terms)), 0.0))


def rel_entropy_discrete(nu: DiscretizedMeasure, mu: DiscretizedMeasure) -> EntropyValue:
    """Sum over cells of h(nu_cell | mu_cell); both measures on the same grid."""
    a, b = align(nu, mu)
    return rel_entropy_masses(a, b)


def rel_entropy_density(f: np.ndarray, mu_prime: MarkedMeasure) -> EntropyValue:
    """
    h(f mu' | mu') for a density f tabulated on the cells of mu': the cell
    quadrature of int (f log f - f + 1) dmu'.
    """
    f = np.asarray(f, dtype=float).ravel()
    if f.shape != mu_prime.weights.shape:
        raise DomainError(f"Dichte hat {f.size} Werte, mu' hat {len(mu_prime)} Zellen.")
    if np.any(f < 0) or np.any(np.isnan(f)):
        raise DomainError("Dichte muss nichtnegativ sein.")
    w = mu_prime.weights
    return rel_entropy_masses(f * w, w)


def poisson_rate(y: float, m: float) -> float:
    """Cramer rate of a Poisson(m) count: y log(y/m) - y + m."""
    if m <= 0:
        raise ParameterError("Poisson-Mittelwert muss positiv sein.")
    if y < 0:
        raise DomainError("y muss nichtnegativ sein.")
    return float(rel_entr(y, m) - y + m)


# --------------------------------------------------------------------------- #
# Linear perturbation                                                          #
# --------------------------------------------------------------------------- #

def scaled_entropy(a: float, h_nu: float, nu_mass: float, mu_mass: float) -> float:
    """h(a nu | mu) from h(nu | mu): a h + a log(a) nu(W) + (1 - a) mu(W)."""
    if a <= 0:
        raise DomainError("Skalierung muss positiv sein.")
    return a * h_nu + a * math.log(a) * nu_mass + (1.0 - a) * mu_mass


def perturbation_bounds(eps: float, h_nu: float, mu_mass: float) -> tuple[float, float]:
    """
    (lower bound of h((1-eps) nu | mu), upper bound of h((1+eps) nu | mu)) for
    eps in (0, 1/2).
    """
    if not 0 < eps < 0.5:
        raise ParameterError("eps muss in (0, 1/2) liegen.")
    lower = (1.0 - 3.0 * eps) * h_nu - 3.0 * eps * mu_mass
    upper = (1.0 + 3.0 * eps) * h_nu + 3.0 * eps * mu_mass
    return lower, upper
