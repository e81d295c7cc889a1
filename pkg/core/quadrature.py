"""
Gauss-Legendre meshes.

Nodes of numpy's leggauss are mapped from [-1, 1] onto each panel; composite
meshes put panel boundaries on the kinks of the integrand so that every panel
sees a smooth function.
"""
import numpy as np
from numpy.polynomial.legendre import leggauss

_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _reference(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _CACHE:
        _CACHE[n] = leggauss(n)
    return _CACHE[n]


def gauss_legendre(a, b, n: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights on [a, b]. ``a`` and ``b`` may be arrays of equal shape;
    the result then has shape (*a.shape, n). Empty intervals get zero weights.
    """
    x, w = _reference(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_gauss_legendre(
    breaks: np.ndarray | list[float],
    n: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Flat mesh over consecutive panels [breaks[i], breaks[i+1]]."""
    edges = np.unique(np.asarray(breaks, dtype=float))
    if len(edges) < 2:
        return np.empty(0), np.empty(0)
    nodes, weights = gauss_legendre(edges[:-1], edges[1:], n)
    return nodes.ravel(), weights.ravel()


def uniform_panels(a: float, b: float, n_panels: int, extra: list[float] | None = None) -> np.ndarray:
    """Equal panels on [a, b] with additional breakpoints inside (a, b)."""
    edges = list(np.linspace(a, b, n_panels + 1))
    for x in extra or ():
        if a < x < b:
            edges.append(float(x))
    return np.unique(edges)
