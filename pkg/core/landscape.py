"""
Evaluation of the static model ingredients.

Path-loss, QoS map, fading laws, fading kernels and spatial intensities are
plain pydantic data (models.network, models.kernel); this module turns them
into numbers: values, CDFs, inverse CDFs, extremal values, quadrature nodes
and the a-priori measure mu' = mu (x) zeta on a grid.
"""
import hashlib
import json
import logging
import math

import numpy as np
from scipy.integrate import cumulative_trapezoid

from core.errors import DomainError, ModelError, ParameterError
from core.measures import MarkedMeasure, inside_window
from core.quadrature import composite_gauss_legendre, gauss_legendre, uniform_panels
from models.kernel import AreasKernel, ContinuousKernel, FadingKernel, IidKernel
from models.network import (
    ConstantPathLoss,
    DensityFading,
    DiscreteFading,
    FadingLaw,
    GeneralQos,
    GridResolution,
    NetworkModel,
    TabulatedPathLoss,
    TruncatedIdentityQos,
    TruncatedPowerPathLoss,
    UniformFading,
)

logger = logging.getLogger("core.landscape")

_BIN_ORDER = 8          # Gauss-Legendre nodes per fading bin / ring
_RADIAL_PANELS = 64     # panels of the radial reference mesh
_KERNEL_TOL = 1e-8


def _scalar_or_array(value: np.ndarray, like) -> float | np.ndarray:
    return float(value) if np.ndim(like) == 0 else value


# --------------------------------------------------------------------------- #
# Path-loss                                                                    #
# --------------------------------------------------------------------------- #

def eval_path_loss(pl, s):
    """ell(s) for a scalar or array of distances s >= 0."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0) or np.any(np.isnan(s_arr)):
        raise DomainError("Distanz muss nichtnegativ sein.")
    if isinstance(pl, TruncatedPowerPathLoss):
        if pl.exponent == 0:
            out = np.full(s_arr.shape, min(pl.cap, 1.0))
        else:
            with np.errstate(divide="ignore"):
                out = np.minimum(pl.cap, np.power(s_arr, -pl.exponent))
    elif isinstance(pl, ConstantPathLoss):
        out = np.full(s_arr.shape, pl.value)
    elif isinstance(pl, TabulatedPathLoss):
        out = np.interp(s_arr, pl.s, pl.values)
    else:
        raise ModelError(f"Unbekannter Pfadverlust: {pl!r}")
    return _scalar_or_array(out, s)


def path_loss_lipschitz(pl) -> float:
    """Lipschitz constant J2 of ell on [0, inf)."""
    if isinstance(pl, TruncatedPowerPathLoss):
        if pl.exponent == 0:
            return 0.0
        return pl.exponent * pl.cap ** ((pl.exponent + 1.0) / pl.exponent)
    if isinstance(pl, ConstantPathLoss):
        return 0.0
    return pl.lipschitz


def path_loss_breaks(pl, upper: float) -> list[float]:
    """Kinks of ell inside (0, upper)."""
    if isinstance(pl, TruncatedPowerPathLoss) and pl.exponent > 0:
        kink = pl.cap ** (-1.0 / pl.exponent)
        return [kink] if 0 < kink < upper else []
    if isinstance(pl, TabulatedPathLoss):
        return [s for s in pl.s if 0 < s < upper]
    return []


def _extremes_on(pl, upper: float) -> tuple[float, float]:
    candidates = np.array([0.0, upper, *path_loss_breaks(pl, upper)])
    values = eval_path_loss(pl, candidates)
    return float(values.min()), float(values.max())


def extremal_path_loss(pl, w) -> tuple[float, float]:
    """(ell_min, ell_max) over all distances in [0, diam(W)]."""
    return _extremes_on(pl, w.diameter)


def extremal_path_loss_from_origin(pl, w) -> tuple[float, float]:
    """(ell_min, ell_max) over distances between the origin and W."""
    return _extremes_on(pl, w.max_radius)


def is_decreasing(pl, upper: float) -> bool:
    grid = np.unique(np.concatenate([np.linspace(0.0, upper, 257), path_loss_breaks(pl, upper)]))
    return bool(np.all(np.diff(eval_path_loss(pl, grid)) <= 1e-15))


# --------------------------------------------------------------------------- #
# QoS map                                                                      #
# --------------------------------------------------------------------------- #

def eval_qos(qos, x):
    """g(x) for x >= 0 (scalar or array)."""
    x_arr = np.asarray(x, dtype=float)
    if isinstance(qos, TruncatedIdentityQos):
        out = np.minimum(x_arr, qos.cap)
    elif isinstance(qos, GeneralQos):
        out = np.interp(x_arr, qos.x, qos.y)
    else:
        raise ModelError(f"Unbekannte QoS-Funktion: {qos!r}")
    return _scalar_or_array(out, x)


def qos_inverse(qos, c: float) -> float:
    """inf{x : g(x) >= c}; g(x) < c iff x < qos_inverse(c) for c <= c+."""
    if c > qos.c_plus:
        raise DomainError(f"Schwelle c={c} liegt ueber dem Plateau {qos.c_plus}.")
    if isinstance(qos, TruncatedIdentityQos):
        return max(c, 0.0)
    plateau = int(np.argmax(qos.y))
    ys = np.asarray(qos.y[: plateau + 1])
    xs = np.asarray(qos.x[: plateau + 1])
    if c <= ys[0]:
        return 0.0
    return float(np.interp(c, ys, xs))


def qos_lipschitz(qos) -> float:
    if isinstance(qos, TruncatedIdentityQos):
        return 1.0
    return float(np.max(np.abs(np.diff(qos.y) / np.diff(qos.x))))


# --------------------------------------------------------------------------- #
# Fading laws                                                                  #
# --------------------------------------------------------------------------- #

def tabulated_cdf(nodes: np.ndarray, dens: np.ndarray, u) -> np.ndarray:
    """CDF of a piecewise-linear density, exact."""
    u = np.asarray(u, dtype=float)
    cum = cumulative_trapezoid(dens, nodes, initial=0.0)
    i = np.clip(np.searchsorted(nodes, u, side="right") - 1, 0, len(nodes) - 2)
    x = np.clip(u, nodes[0], nodes[-1]) - nodes[i]
    slope = (dens[i + 1] - dens[i]) / (nodes[i + 1] - nodes[i])
    out = cum[i] + dens[i] * x + 0.5 * slope * x * x
    return np.clip(out / cum[-1], 0.0, 1.0)


def tabulated_ppf(nodes: np.ndarray, dens: np.ndarray, p) -> np.ndarray:
    """Inverse of tabulated_cdf by solving the quadratic on each segment."""
    p = np.asarray(p, dtype=float)
    cum = cumulative_trapezoid(dens, nodes, initial=0.0)
    target = p * cum[-1]
    i = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, len(nodes) - 2)
    r = np.maximum(target - cum[i], 0.0)
    f0 = dens[i]
    slope = (dens[i + 1] - dens[i]) / (nodes[i + 1] - nodes[i])
    root = np.sqrt(np.maximum(f0 * f0 + 2.0 * slope * r, 0.0))
    denom = f0 + root
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(denom > 0, 2.0 * r / denom, 0.0)
    return np.clip(nodes[i] + x, nodes[i], nodes[i + 1])


def fading_cdf(law: FadingLaw, u, strict: bool = False):
    """P(F <= u), or P(F < u) when ``strict``."""
    u_arr = np.asarray(u, dtype=float)
    if isinstance(law, UniformFading):
        if law.high == law.low:
            out = (u_arr > law.low) if strict else (u_arr >= law.low)
            out = out.astype(float)
        else:
            out = np.clip((u_arr - law.low) / (law.high - law.low), 0.0, 1.0)
    elif isinstance(law, DiscreteFading):
        values = np.asarray(law.values)
        weights = np.asarray(law.weights)
        hit = values[None, :] < u_arr.reshape(-1, 1) if strict else values[None, :] <= u_arr.reshape(-1, 1)
        out = (hit * weights).sum(axis=1).reshape(u_arr.shape)
    elif isinstance(law, DensityFading):
        out = tabulated_cdf(np.asarray(law.u), np.asarray(law.f), u_arr)
    else:
        raise ModelError(f"Unbekanntes Fading-Gesetz: {law!r}")
    return _scalar_or_array(out, u)


def fading_pdf(law: FadingLaw, u):
    u_arr = np.asarray(u, dtype=float)
    if isinstance(law, UniformFading):
        if law.high == law.low:
            raise DomainError("Punktmass hat keine Dichte.")
        inside = (u_arr >= law.low) & (u_arr <= law.high)
        out = np.where(inside, 1.0 / (law.high - law.low), 0.0)
    elif isinstance(law, DensityFading):
        out = np.interp(u_arr, law.u, law.f, left=0.0, right=0.0)
    else:
        raise DomainError("Diskrete Fading-Verteilung hat keine Dichte.")
    return _scalar_or_array(out, u)


def fading_mean(law: FadingLaw) -> float:
    if isinstance(law, UniformFading):
        return 0.5 * (law.low + law.high)
    if isinstance(law, DiscreteFading):
        return math.fsum(v * w for v, w in zip(law.values, law.weights))
    u, w = composite_gauss_legendre(law.u, _BIN_ORDER)
    return float(np.sum(u * fading_pdf(law, u) * w))


def fading_ppf(law: FadingLaw, p) -> np.ndarray:
    """Inverse CDF, used for exact inverse-transform sampling."""
    p = np.asarray(p, dtype=float)
    if isinstance(law, UniformFading):
        return law.low + (law.high - law.low) * p
    if isinstance(law, DiscreteFading):
        cum = np.cumsum(law.weights)
        idx = np.minimum(np.searchsorted(cum, p, side="right"), len(cum) - 1)
        return np.asarray(law.values)[idx]
    return tabulated_ppf(np.asarray(law.u), np.asarray(law.f), p)


def is_continuous(law: FadingLaw) -> bool:
    if isinstance(law, UniformFading):
        return law.high > law.low
    return isinstance(law, DensityFading)


def fading_partition(law: FadingLaw, n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Cell representatives and masses of zeta. Continuous laws: n_bins equal
    bins on [F_min, F_max], represented by their conditional mean so that
    E[F] is reproduced exactly. Atomic laws: the atoms themselves.
    """
    if n_bins < 1:
        raise ParameterError("Anzahl der Fading-Klassen muss mindestens 1 sein.")
    if isinstance(law, DiscreteFading):
        keep = np.asarray(law.weights) > 0
        return np.asarray(law.values)[keep], np.asarray(law.weights)[keep]
    if not is_continuous(law):
        return np.array([law.low]), np.array([1.0])
    edges = np.linspace(law.f_min, law.f_max, n_bins + 1)
    nodes, weights = gauss_legendre(edges[:-1], edges[1:], _BIN_ORDER)
    dens = fading_pdf(law, nodes) * weights
    masses = np.diff(fading_cdf(law, edges))
    first_moment = np.sum(nodes * dens, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(dens.sum(axis=1) > 0, first_moment / dens.sum(axis=1), 0.5 * (edges[:-1] + edges[1:]))
    return values, masses


def _row_partition(u_nodes: np.ndarray, row: np.ndarray, n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(u_nodes[0], u_nodes[-1], n_bins + 1)
    cdf = tabulated_cdf(u_nodes, row, edges)
    nodes, weights = gauss_legendre(edges[:-1], edges[1:], _BIN_ORDER)
    dens = np.interp(nodes, u_nodes, row) * weights
    mass = dens.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(mass > 0, (nodes * dens).sum(axis=1) / mass, 0.5 * (edges[:-1] + edges[1:]))
    return values, np.diff(cdf)


# --------------------------------------------------------------------------- #
# Fading kernels                                                               #
# --------------------------------------------------------------------------- #

def check_kernel(model: NetworkModel, kernel: FadingKernel | None) -> None:
    """Kernel laws must live in the model's [F_min, F_max]."""
    if kernel is None or isinstance(kernel, IidKernel):
        return
    tol = _KERNEL_TOL * model.f_max
    if kernel.f_min < model.f_min - tol or kernel.f_max > model.f_max + tol:
        raise ModelError(
            f"Kern-Traeger [{kernel.f_min}, {kernel.f_max}] liegt nicht in "
            f"[{model.f_min}, {model.f_max}]."
        )


def kernel_column(kernel: ContinuousKernel, radii: np.ndarray) -> np.ndarray:
    """Index of the nearest tabulated column for each distance."""
    s = np.asarray(kernel.s)
    radii = np.asarray(radii, dtype=float)
    i = np.clip(np.searchsorted(s, radii), 1, len(s) - 1) if len(s) > 1 else np.zeros(radii.shape, int)
    if len(s) == 1:
        return i
    left = s[i - 1]
    right = s[i]
    return np.where(radii - left <= right - radii, i - 1, i)


def area_index(kernel: AreasKernel, radii: np.ndarray) -> np.ndarray:
    return np.searchsorted(np.asarray(kernel.breaks), np.asarray(radii), side="right")


def local_partition(
    model: NetworkModel,
    kernel: FadingKernel | None,
    radius: float,
    n_bins: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Fading representatives and probabilities of p(x, .) at distance ``radius``."""
    if kernel is None or isinstance(kernel, IidKernel):
        return fading_partition(model.fading, n_bins)
    if isinstance(kernel, AreasKernel):
        law = kernel.laws[int(area_index(kernel, np.array([radius]))[0])]
        return fading_partition(law, n_bins)
    col = int(kernel_column(kernel, np.array([radius]))[0])
    return _row_partition(np.asarray(kernel.u), np.asarray(kernel.f[col], dtype=float), n_bins)


def local_mean_fading(model: NetworkModel, kernel: FadingKernel | None, radii: np.ndarray) -> np.ndarray:
    """E[F^x] as a function of |x|."""
    radii = np.asarray(radii, dtype=float)
    if kernel is None or isinstance(kernel, IidKernel):
        return np.full(radii.shape, fading_mean(model.fading))
    if isinstance(kernel, AreasKernel):
        means = np.array([fading_mean(law) for law in kernel.laws])
        return means[area_index(kernel, radii)]
    u = np.asarray(kernel.u)
    table = np.asarray(kernel.f, dtype=float)
    means = np.trapezoid(table * u, u, axis=1)
    return means[kernel_column(kernel, radii)]


def local_cdf(model: NetworkModel, kernel: FadingKernel | None, radii: np.ndarray, t: np.ndarray) -> np.ndarray:
    """P(F^x < t) for matching arrays of distances and thresholds."""
    radii = np.asarray(radii, dtype=float)
    t = np.asarray(t, dtype=float)
    if kernel is None or isinstance(kernel, IidKernel):
        return fading_cdf(model.fading, t, strict=True)
    out = np.empty(t.shape)
    if isinstance(kernel, AreasKernel):
        idx = area_index(kernel, radii)
        for k, law in enumerate(kernel.laws):
            sel = idx == k
            if np.any(sel):
                out[sel] = fading_cdf(law, t[sel], strict=True)
        return out
    cols = kernel_column(kernel, radii)
    u = np.asarray(kernel.u)
    for k in np.unique(cols):
        sel = cols == k
        out[sel] = tabulated_cdf(u, np.asarray(kernel.f[k], dtype=float), t[sel])
    return out


# --------------------------------------------------------------------------- #
# Spatial intensity                                                            #
# --------------------------------------------------------------------------- #

def radial_q(model: NetworkModel, s) -> np.ndarray:
    """Radial density q(s) of mu on the disk (mu(ds) = q(s) ds)."""
    r = model.window.r
    s = np.asarray(s, dtype=float)
    it = model.intensity
    if it.kind == "uniform":
        out = it.mass * 2.0 * s / r ** 2
    elif it.profile == "lebesgue":
        out = 2.0 * math.pi * it.density * s
    else:
        out = np.interp(s, it.s, it.q)
    return np.where((s >= 0) & (s <= r), out, 0.0)


def radial_breaks(model: NetworkModel) -> list[float]:
    it = model.intensity
    breaks = path_loss_breaks(model.path_loss, model.window.r)
    if it.kind == "radial" and it.profile == "tabulated":
        breaks += [s for s in it.s if 0 < s < model.window.r]
    return breaks


def intensity_mass(model: NetworkModel) -> float:
    """mu(W)."""
    it = model.intensity
    if it.kind == "uniform":
        return it.mass
    r = model.window.r
    if it.profile == "lebesgue":
        return math.pi * it.density * r ** 2
    s, w = composite_gauss_legendre([0.0, *radial_breaks(model), r], _BIN_ORDER)
    return float(np.sum(radial_q(model, s) * w))


def spatial_density(model: NetworkModel, x: np.ndarray) -> np.ndarray:
    """Lebesgue density of mu at the points x (zero outside W)."""
    x = np.atleast_2d(x)
    w = model.window
    inside = inside_window(model, x)
    it = model.intensity
    if it.kind == "uniform":
        return np.where(inside, it.mass / w.volume, 0.0)
    s = np.linalg.norm(x, axis=1)
    if it.profile == "lebesgue":
        return np.where(inside, it.density, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = radial_q(model, s) / (2.0 * math.pi * s)
    return np.where(inside & (s > 0), dens, 0.0)


def radial_nodes(model: NetworkModel, order: int = _BIN_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """
    Distances to the origin and their mu-masses, a quadrature for integrals
    of functions of |x| against mu. Disk: composite Gauss-Legendre in s with
    panels broken at the kinks of ell and q. Box: tensor Gauss-Legendre.
    """
    w = model.window
    if w.shape == "disk":
        edges = uniform_panels(0.0, w.r, _RADIAL_PANELS, radial_breaks(model))
        s, ws = composite_gauss_legendre(edges, order)
        return s, radial_q(model, s) * ws
    per_axis = max(16, min(512, int(round(300_000 ** (1.0 / w.d)))))
    panels = max(1, per_axis // order)
    x, wx = composite_gauss_legendre(np.linspace(-w.r, w.r, panels + 1), order)
    grids = np.meshgrid(*([x] * w.d), indexing="ij")
    weights = np.ones_like(grids[0])
    for axis_weights in np.meshgrid(*([wx] * w.d), indexing="ij"):
        weights = weights * axis_weights
    radii = np.sqrt(sum(g * g for g in grids)).ravel()
    return radii, weights.ravel() * model.intensity.mass / w.volume


def interference_at_origin(model: NetworkModel, kernel: FadingKernel | None = None) -> float:
    """I(o) = int ell(|x|) u mu'(dx, du)."""
    s, m = radial_nodes(model)
    return float(np.sum(eval_path_loss(model.path_loss, s) * local_mean_fading(model, kernel, s) * m))


def qos_cap_auto(model: NetworkModel, kernel: FadingKernel | None = None) -> float:
    """ess-sup of the direct uplink SIR under mu': ell_max^o F_max / I(o)."""
    i0 = interference_at_origin(model, kernel)
    if i0 <= 0:
        raise ModelError("Automatisches QoS-Plateau braucht mu(W) > 0.")
    _, l_max = extremal_path_loss_from_origin(model.path_loss, model.window)
    return l_max * model.f_max / i0


def empty_network_threshold(model: NetworkModel) -> float:
    """beta'_0: below this empirical mass every direct QoS is c+."""
    l_min, l_max = extremal_path_loss(model.path_loss, model.window)
    return min(1.0, l_min * model.f_min / (model.qos.rho_plus * l_max * model.f_max))


# --------------------------------------------------------------------------- #
# A-priori measure mu' on a grid                                               #
# --------------------------------------------------------------------------- #

def _check_resolution(res: GridResolution) -> None:
    if min(res.n_space, res.n_angle, res.n_fading) < 1:
        raise ParameterError(f"Aufloesung muss positiv sein: {res!r}")


def product_intensity(
    model: NetworkModel,
    resolution: GridResolution | None = None,
    kernel: FadingKernel | None = None,
) -> MarkedMeasure:
    """
    mu'(dx, du) = mu(dx) p(x, du) as a grid MarkedMeasure.

    Disk: rings x sectors x fading bins, ring masses by Gauss-Legendre and
    ring representative at the mass-weighted mean radius.
    Box: n_space^d equal cells x fading bins.
    """
    res = resolution or GridResolution()
    _check_resolution(res)
    check_kernel(model, kernel)
    w = model.window

    if w.shape == "disk":
        edges = np.linspace(0.0, w.r, res.n_space + 1)
        s, ws = gauss_legendre(edges[:-1], edges[1:], _BIN_ORDER)
        qs = radial_q(model, s) * ws
        ring_mass = qs.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            ring_radius = np.where(ring_mass > 0, (s * qs).sum(axis=1) / ring_mass, 0.5 * (edges[:-1] + edges[1:]))
        theta = (np.arange(res.n_angle) + 0.5) * 2.0 * math.pi / res.n_angle
        rad = np.repeat(ring_radius, res.n_angle)
        ang = np.tile(theta, res.n_space)
        space = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        space_mass = np.repeat(ring_mass / res.n_angle, res.n_angle)
    else:
        h = 2.0 * w.r / res.n_space
        axis = -w.r + h * (np.arange(res.n_space) + 0.5)
        mesh = np.meshgrid(*([axis] * w.d), indexing="ij")
        space = np.column_stack([m.ravel() for m in mesh])
        space_mass = np.full(len(space), model.intensity.mass / res.n_space ** w.d)

    radii = np.linalg.norm(space, axis=1)
    positions, fadings, masses = [], [], []
    if kernel is None or isinstance(kernel, IidKernel):
        values, probs = fading_partition(model.fading, res.n_fading)
        positions = np.repeat(space, len(values), axis=0)
        fadings = np.tile(values, len(space))
        masses = np.outer(space_mass, probs).ravel()
    else:
        for x, m, rr in zip(space, space_mass, radii):
            values, probs = local_partition(model, kernel, rr, res.n_fading)
            positions.append(np.repeat(x[None, :], len(values), axis=0))
            fadings.append(values)
            masses.append(m * probs)
        positions = np.concatenate(positions)
        fadings = np.concatenate(fadings)
        masses = np.concatenate(masses)

    logger.debug("mu' mit %d Zellen, Masse %.6g", len(masses), float(np.sum(masses)))
    return MarkedMeasure(positions, fadings, masses, kind="grid", grid=res)


# --------------------------------------------------------------------------- #
# Misc                                                                         #
# --------------------------------------------------------------------------- #

def scenario_hash(model: NetworkModel, kernel: FadingKernel | None = None) -> str:
    """SHA-256 over the canonical JSON of model and kernel."""
    payload = {
        "model": model.model_dump(mode="json"),
        "kernel": kernel.model_dump(mode="json") if kernel is not None else None,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()
