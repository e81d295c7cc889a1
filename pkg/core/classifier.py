"""
Exponential versus sub-exponential decay of frustration probabilities,
decided from the a-priori measure mu' alone.

The joint event {G(L_lambda, tau_c)(W) > b} decays exponentially iff some
coordinate i has G((1 + eps) mu', tau_{c_i}, m_i)(W) <= b_i for an eps > 0,
or b = 0, G(mu', tau_c)(W) = 0 and c_i < K_i for some i. "eps > 0" is
decided on the ladder 2^-1, ..., 2^-10.

Scaling mu' by (1 + eps) divides every SIR by (1 + eps), so one evaluation
of the effective SIR per mode serves the whole ladder.
"""
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from core.errors import DegenerateModelError, DomainError, ModelError
from core.landscape import eval_qos, fading_cdf, is_continuous, product_intensity
from core.measures import MarkedMeasure
from core.sir import MODES, Mode, mode_sir
from models.kernel import FadingKernel
from models.network import DiscreteFading, GridResolution, NetworkModel, UniformFading
from models.results import CriticalInterval, DecayVerdict, ModeVerdict

logger = logging.getLogger("core.classifier")

EPSILON_LADDER: tuple[float, ...] = tuple(2.0 ** -k for k in range(1, 11))
_MASS_TOL = 1e-12
_K_TOL = 1e-9
_UPLINK: tuple[Mode, ...] = ("up", "up-dir")
_DOWNLINK: tuple[Mode, ...] = ("do", "do-dir")


def _as_vector(values, name: str) -> np.ndarray:
    v = np.asarray(values, dtype=float).ravel()
    if v.size != 4:
        raise DomainError(f"{name} braucht vier Eintraege (up, up-dir, do, do-dir).")
    return v


def _check_vectors(model: NetworkModel, b, c) -> tuple[np.ndarray, np.ndarray]:
    b = _as_vector(b, "b")
    c = _as_vector(c, "c")
    if np.any(b < 0):
        raise DomainError("b muss nichtnegativ sein.")
    if np.any(c <= 0) or np.any(c >= model.qos.c_plus):
        raise DomainError(f"Jedes c_i muss in (0, {model.qos.c_plus}) liegen.")
    return b, c


def _prior(model: NetworkModel, resolution: GridResolution | None, kernel: FadingKernel | None) -> MarkedMeasure:
    mu = product_intensity(model, resolution, kernel)
    if mu.total_mass <= 0:
        raise DegenerateModelError("mu(W) = 0: Klassifikation braucht positive Masse.")
    return mu


def _raw_profiles(model: NetworkModel, mu: MarkedMeasure, modes, base_fading: float | None) -> dict[str, np.ndarray]:
    return {mode: mode_sir(model, mu, mode, base_fading) for mode in modes}


def _mass_below(model: NetworkModel, mu: MarkedMeasure, raw: np.ndarray, c: float, eps: float) -> float:
    """G((1 + eps) mu', tau_c, m)(W) from the effective SIR of mu'."""
    qos = eval_qos(model.qos, raw / (1.0 + eps))
    return float((1.0 + eps) * np.sum(mu.weights[qos < c]))


def _minimal_qos(model: NetworkModel, mu: MarkedMeasure, raw: np.ndarray) -> float:
    return float(eval_qos(model.qos, np.min(raw[mu.positive])))


# --------------------------------------------------------------------------- #
# A-priori quantities                                                          #
# --------------------------------------------------------------------------- #

def a_priori_frustration(
    model: NetworkModel,
    c,
    resolution: GridResolution | None = None,
    kernel: FadingKernel | None = None,
    base_fading: float | None = None,
    eps: float = 0.0,
) -> np.ndarray:
    """G((1 + eps) mu', tau_{c_i}, m_i)(W) for the four modes."""
    c = _as_vector(c, "c")
    if np.any(c < 0) or np.any(c >= model.qos.c_plus):
        raise DomainError(f"Jedes c_i muss in [0, {model.qos.c_plus}) liegen.")
    mu = _prior(model, resolution, kernel)
    raws = _raw_profiles(model, mu, MODES, base_fading)
    return np.array([_mass_below(model, mu, raws[m], ci, eps) for m, ci in zip(MODES, c)])


def grid_minimal_qos(
    model: NetworkModel,
    resolution: GridResolution | None = None,
    kernel: FadingKernel | None = None,
    base_fading: float | None = None,
) -> np.ndarray:
    """Minimal QoS per mode over the positive cells of mu' (the K vector on the grid)."""
    mu = _prior(model, resolution, kernel)
    raws = _raw_profiles(model, mu, MODES, base_fading)
    return np.array([_minimal_qos(model, mu, raws[m]) for m in MODES])


# --------------------------------------------------------------------------- #
# Decision                                                                     #
# --------------------------------------------------------------------------- #

def _mode_verdict(model, mu, raw, mode, b_i, c_i, tol) -> ModeVerdict:
    g0 = _mass_below(model, mu, raw, c_i, 0.0)
    k_i = _minimal_qos(model, mu, raw)
    witness = None
    # G((1+eps) mu') is nondecreasing in eps: failing at the smallest eps fails everywhere
    smallest = _mass_below(model, mu, raw, c_i, EPSILON_LADDER[-1])
    if smallest <= b_i + tol:
        witness = next(e for e in EPSILON_LADDER if _mass_below(model, mu, raw, c_i, e) <= b_i + tol)
    zero_case = b_i <= tol and g0 <= tol and c_i < k_i - _K_TOL
    exponential = witness is not None or zero_case
    boundary = not exponential and (abs(c_i - k_i) <= _K_TOL or 0.0 < smallest - b_i <= 1e3 * tol)
    return ModeVerdict(mode=mode, c=c_i, b=b_i, prior_mass=g0, minimal_qos=k_i,
                       exponential=exponential, epsilon=witness, boundary=boundary)


def _decide(model: NetworkModel, mu: MarkedMeasure, raws: dict[str, np.ndarray], b: np.ndarray, c: np.ndarray) -> DecayVerdict:
    tol = _MASS_TOL * max(1.0, mu.total_mass)
    modes = [_mode_verdict(model, mu, raws[m], m, b[i], c[i], tol) for i, m in enumerate(MODES)]
    g0 = np.array([m.prior_mass for m in modes])
    exponential = any(m.exponential for m in modes)
    equal = np.abs(g0 - b) <= tol
    below = g0 <= b + tol
    if np.all(equal) and np.all(b <= tol):
        case = 5
    elif exponential:
        case = 1 if np.all(below) else 6
    elif np.all(g0 > b + tol):
        case = 2
    elif np.all(equal):
        case = 4
    elif np.all(below):
        case = 3
    else:
        case = 6
    witnesses = [m.epsilon for m in modes if m.epsilon is not None]
    boundary = not exponential and any(m.boundary for m in modes)
    if boundary:
        logger.warning("Grenzfall: Subexponentiell nur innerhalb der Gittertoleranz (Fall %d)", case)
    return DecayVerdict(
        verdict="Exponential" if exponential else "Subexponential",
        case=case,
        epsilon=max(witnesses) if witnesses else None,
        boundary=boundary,
        k=[m.minimal_qos for m in modes],
        modes=modes,
    )


def classify_fixed(
    model: NetworkModel,
    b,
    c,
    resolution: GridResolution | None = None,
    kernel: FadingKernel | None = None,
    base_fading: float | None = None,
) -> DecayVerdict:
    """Decay verdict for a fixed base-station fading F_o."""
    b, c = _check_vectors(model, b, c)
    mu = _prior(model, resolution, kernel)
    verdict = _decide(model, mu, _raw_profiles(model, mu, MODES, base_fading), b, c)
    logger.info("Klassifikation: %s", verdict.record_line())
    return verdict


# --------------------------------------------------------------------------- #
# Random base fading                                                           #
# --------------------------------------------------------------------------- #

def _point_mass(law) -> float | None:
    if isinstance(law, UniformFading) and law.low == law.high:
        return float(law.low)
    if isinstance(law, DiscreteFading):
        support = [v for v, w in zip(law.values, law.weights) if w > 0]
        if len(support) == 1:
            return float(support[0])
    return None


def _base_cells(law, n_u: int) -> tuple[np.ndarray, np.ndarray]:
    """u-grid over the support of F_* and the F_* mass attributed to each grid point."""
    if isinstance(law, DiscreteFading):
        values = np.asarray(law.values)
        weights = np.asarray(law.weights)
        order = np.argsort(values)
        keep = weights[order] > 0
        return values[order][keep], weights[order][keep]
    if not is_continuous(law):
        return np.array([law.low]), np.array([1.0])
    us = np.linspace(law.f_min, law.f_max, n_u)
    mids = 0.5 * (us[:-1] + us[1:])
    edges = np.concatenate([[law.f_min], mids, [law.f_max]])
    return us, np.diff(fading_cdf(law, edges))


def _runs(flags: np.ndarray, us: np.ndarray, masses: np.ndarray, kind: str) -> list[CriticalInterval]:
    out = []
    k = 0
    while k < len(flags):
        if not flags[k]:
            k += 1
            continue
        j = k
        while j + 1 < len(flags) and flags[j + 1]:
            j += 1
        out.append(CriticalInterval(kind=kind, low=float(us[k]), high=float(us[j]), mass=float(masses[k:j + 1].sum())))
        k = j + 1
    return out


def classify_random_base(
    model: NetworkModel,
    b,
    c,
    resolution: GridResolution | None = None,
    kernel: FadingKernel | None = None,
    n_u: int = 33,
    workers: int = 4,
) -> DecayVerdict:
    """
    Verdict for a random base fading F_*: exponential iff F_* puts no mass on
    the set C of base fadings u for which the fixed-u event is not
    exponentially rare. The sets A (direct downlink alone) and B (relayed
    downlink alone) are reported as well.
    """
    if model.base.kind != "random":
        raise ModelError("classify_random_base braucht ein zufaelliges Basis-Fading.")
    law = model.base.law
    point = _point_mass(law)
    if point is not None:
        return classify_fixed(model, b, c, resolution, kernel, base_fading=point)
    b, c = _check_vectors(model, b, c)
    mu = _prior(model, resolution, kernel)
    uplink = _raw_profiles(model, mu, _UPLINK, None)
    us, masses = _base_cells(law, n_u)

    def verdict_at(u: float) -> DecayVerdict:
        raws = {**uplink, **_raw_profiles(model, mu, _DOWNLINK, float(u))}
        return _decide(model, mu, raws, b, c)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        verdicts = list(pool.map(verdict_at, us))

    flag_a = np.array([not v.modes[3].exponential for v in verdicts])
    flag_b = np.array([not v.modes[2].exponential for v in verdicts])
    flag_c = np.array([v.verdict == "Subexponential" for v in verdicts])
    critical = _runs(flag_a, us, masses, "A") + _runs(flag_b, us, masses, "B") + _runs(flag_c, us, masses, "C")
    c_mass = float(masses[flag_c].sum())
    exponential = c_mass <= _MASS_TOL
    # K uses the essential infimum of F_*, the worst case for the downlink
    witness = verdicts[int(np.argmax(flag_c))] if not exponential else verdicts[0]
    witnesses = [v.epsilon for v in verdicts if v.epsilon is not None]
    result = DecayVerdict(
        verdict="Exponential" if exponential else "Subexponential",
        case=witness.case,
        epsilon=min(witnesses) if exponential and witnesses else None,
        boundary=any(v.boundary for v in verdicts),
        k=verdicts[0].k,
        modes=verdicts[0].modes,
        critical=critical,
        critical_mass=c_mass,
    )
    logger.info("Klassifikation mit zufaelligem F_o: %s, Masse auf C=%.4g", result.record_line(), c_mass)
    return result
