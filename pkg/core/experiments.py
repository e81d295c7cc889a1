"""
Experiment harness: a-priori frustration curves, rare-event Monte Carlo on
the empirical measure and the Poisson user-count tail.

Monte Carlo samples are split into fixed blocks; block k draws from stream k
of the root seed and blocks are merged in index order, so a report depends
on (scenario, seed, block size) only and never on the number of workers.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import poisson

from core.errors import DegenerateModelError, DomainError, ParameterError
from core.landscape import (
    check_kernel,
    eval_path_loss,
    eval_qos,
    interference_at_origin,
    intensity_mass,
    local_cdf,
    product_intensity,
    qos_inverse,
    radial_nodes,
    scenario_hash,
)
from core.measures import MarkedMeasure
from core.sampler import RNG_ALGORITHM, PositionSampler, make_rng, sample_batch
from core.sir import MODES, Mode, mode_qos
from models.kernel import FadingKernel
from models.network import GridResolution, NetworkModel
from models.results import ConditionedStats, CurvePoint, ExperimentReport, HitRecord, SeedInfo

logger = logging.getLogger("core.experiments")

WILSON_Z = 1.959964
DEFAULT_BLOCK_SIZE = 10_000

ProgressCallback = Callable[[int, int], None]


def wilson_interval(k: int, n: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for k successes out of n."""
    if n <= 0:
        raise ParameterError("n muss positiv sein.")
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def poisson_tail(mean: float, threshold: float) -> float:
    """P(N > threshold) for N ~ Poisson(mean), summed in log space."""
    if mean <= 0:
        raise ParameterError("Poisson-Mittelwert muss positiv sein.")
    if threshold < 0:
        return 1.0
    k0 = math.floor(threshold) + 1
    upper = k0 + int(mean + 50.0 * math.sqrt(mean) + 100)
    log_terms = poisson.logpmf(np.arange(k0, upper + 1), mean)
    return float(min(1.0, math.exp(logsumexp(log_terms))))


# --------------------------------------------------------------------------- #
# Frustration curve                                                            #
# --------------------------------------------------------------------------- #

def _curve_direct_uplink(model: NetworkModel, kernel: FadingKernel | None, c_grid: np.ndarray) -> np.ndarray:
    """mu'(QoS^o_dir < c) / mu(W) by radial quadrature and the strict fading CDF."""
    s, m = radial_nodes(model)
    total = float(m.sum())
    if total <= 0:
        raise DegenerateModelError("mu(W) = 0: keine Frustrationskurve moeglich.")
    gain = eval_path_loss(model.path_loss, s)
    i0 = interference_at_origin(model, kernel)
    out = np.empty(len(c_grid))
    with np.errstate(divide="ignore"):
        for k, c in enumerate(c_grid):
            t = qos_inverse(model.qos, float(c))
            bound = np.where(gain > 0, t * i0 / gain, np.inf)
            out[k] = float(np.sum(m * local_cdf(model, kernel, s, bound))) / total
    return out


def frustration_curve(
    model: NetworkModel,
    mode: Mode,
    c_grid,
    resolution: GridResolution | None = None,
    kernel: FadingKernel | None = None,
    base_fading: float | None = None,
) -> list[CurvePoint]:
    """
    Points (c, mu'(QoS_m < c) / mu(W)). The direct uplink is evaluated
    semi-analytically; the other modes on the grid of mu'.
    """
    if mode not in MODES:
        raise DomainError(f"Unbekannter Modus: {mode}")
    c_grid = np.asarray(c_grid, dtype=float).ravel()
    c_plus = model.qos.c_plus
    if np.any(c_grid <= 0) or np.any(c_grid > c_plus):
        raise DomainError(f"Schwellen muessen in (0, {c_plus}] liegen.")
    check_kernel(model, kernel)

    if mode == "up-dir":
        values = _curve_direct_uplink(model, kernel, c_grid)
    else:
        mu = product_intensity(model, resolution, kernel)
        total = mu.total_mass
        if total <= 0:
            raise DegenerateModelError("mu(W) = 0: keine Frustrationskurve moeglich.")
        qos = mode_qos(model, mu, mode, base_fading)
        order = np.argsort(qos, kind="stable")
        cum = np.concatenate([[0.0], np.cumsum(mu.weights[order])])
        # searchsorted left: number of cells with qos < c
        values = cum[np.searchsorted(qos[order], c_grid, side="left")] / total

    values = np.clip(values, 0.0, 1.0)
    logger.info("Frustrationskurve %s mit %d Punkten berechnet", mode, len(c_grid))
    return [CurvePoint(c=float(c), p=float(p)) for c, p in zip(c_grid, values)]


# --------------------------------------------------------------------------- #
# Rare-event Monte Carlo                                                       #
# --------------------------------------------------------------------------- #

class BlockTally(NamedTuple):
    index: int
    n: int
    users: int
    hits: list[tuple[int, int, float, float, float]]
    high: int
    high_fading_sum: float
    high_not_hit: int
    high_not_hit_fading_sum: float
    hits_in_high: int


def _frustrated_counts_direct_uplink(model: NetworkModel, draw, lam: float, c: float) -> np.ndarray:
    n = len(draw.counts)
    owner = np.repeat(np.arange(n), draw.counts)
    radii = np.linalg.norm(draw.positions, axis=1)
    gain = eval_path_loss(model.path_loss, radii) * draw.fadings
    i_origin = np.bincount(owner, weights=gain / lam, minlength=n)
    with np.errstate(divide="ignore", invalid="ignore"):
        qos = eval_qos(model.qos, gain / i_origin[owner])
    return np.bincount(owner, weights=(np.asarray(qos) < c).astype(float), minlength=n).astype(int)


def _frustrated_counts(model: NetworkModel, draw, lam: float, c: float, mode: Mode) -> np.ndarray:
    if mode == "up-dir":
        return _frustrated_counts_direct_uplink(model, draw, lam, c)
    n = len(draw.counts)
    out = np.zeros(n, dtype=int)
    for k in range(n):
        lo, hi = draw.offsets[k], draw.offsets[k + 1]
        if hi == lo:
            continue
        nu = MarkedMeasure(draw.positions[lo:hi], draw.fadings[lo:hi], np.full(hi - lo, 1.0 / lam))
        out[k] = int(np.sum(mode_qos(model, nu, mode, float(draw.base_fadings[k])) < c))
    return out


def _run_block(
    model: NetworkModel,
    kernel: FadingKernel | None,
    lam: float,
    c: float,
    b_fraction: float,
    mode: Mode,
    absolute: bool,
    seed: int,
    index: int,
    start: int,
    size: int,
    sampler: PositionSampler,
    count_threshold: int | None,
) -> BlockTally:
    draw = sample_batch(model, kernel, lam, size, make_rng(seed, index), sampler)
    frustrated = _frustrated_counts(model, draw, lam, c, mode)
    counts = draw.counts
    owner = np.repeat(np.arange(size), counts)
    fading_sum = np.bincount(owner, weights=draw.fadings, minlength=size)
    with np.errstate(divide="ignore", invalid="ignore"):
        mean_fading = np.where(counts > 0, fading_sum / np.maximum(counts, 1), np.nan)
    if absolute:
        hit = frustrated / lam > b_fraction
    else:
        hit = (counts > 0) & (frustrated > b_fraction * counts)
    hits = [
        (start + int(k), int(counts[k]), float(mean_fading[k]), float(frustrated[k] / counts[k]), float(frustrated[k] / lam))
        for k in np.flatnonzero(hit)
    ]
    if count_threshold is None:
        return BlockTally(index, size, int(counts.sum()), hits, 0, 0.0, 0, 0.0, 0)
    high = counts > count_threshold
    high_not_hit = high & ~hit
    return BlockTally(
        index=index,
        n=size,
        users=int(counts.sum()),
        hits=hits,
        high=int(high.sum()),
        high_fading_sum=float(mean_fading[high].sum()),
        high_not_hit=int(high_not_hit.sum()),
        high_not_hit_fading_sum=float(mean_fading[high_not_hit].sum()),
        hits_in_high=int((high & hit).sum()),
    )


def rare_event_mc(
    model: NetworkModel,
    lam: float,
    n_samples: int,
    c: float,
    b_fraction: float,
    mode: Mode = "up-dir",
    seed: int = 0,
    kernel: FadingKernel | None = None,
    absolute: bool = False,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1,
    count_threshold: int | None = None,
    progress: ProgressCallback | None = None,
) -> ExperimentReport:
    """
    Frequency of samples in which more than ``b_fraction`` of the users are
    frustrated (or, with ``absolute``, in which G(L_lambda)(W) > b_fraction).
    """
    if lam <= 0:
        raise ParameterError("lambda muss positiv sein.")
    if n_samples < 1 or block_size < 1:
        raise ParameterError("Stichprobenzahl und Blockgroesse muessen positiv sein.")
    if mode not in MODES:
        raise DomainError(f"Unbekannter Modus: {mode}")
    if not 0 <= c <= model.qos.c_plus:
        raise DomainError(f"Schwelle c={c} liegt ausserhalb von [0, {model.qos.c_plus}].")
    if b_fraction < 0 or (not absolute and b_fraction >= 1):
        raise DomainError("b muss in [0, 1) liegen (bzw. >= 0 mit absolute).")
    check_kernel(model, kernel)

    started = time.perf_counter()
    n_blocks = math.ceil(n_samples / block_size)
    sampler = PositionSampler(model)
    specs = [(k, k * block_size, min(block_size, n_samples - k * block_size)) for k in range(n_blocks)]

    def work(spec: tuple[int, int, int]) -> BlockTally:
        index, start, size = spec
        return _run_block(model, kernel, lam, c, b_fraction, mode, absolute, seed,
                          index, start, size, sampler, count_threshold)

    tallies: list[BlockTally] = []
    done = 0
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for tally in pool.map(work, specs):
            tallies.append(tally)
            done += tally.n
            logger.debug("Block %d/%d fertig, %d Treffer", tally.index + 1, n_blocks, len(tally.hits))
            if progress is not None:
                progress(done, n_samples)

    raw_hits = [h for t in tallies for h in t.hits]
    hits = [
        HitRecord(hit_id=i, sample_index=s, n_users=n, mean_fading=f, frustrated_fraction=q, frustrated_mass=m)
        for i, (s, n, f, q, m) in enumerate(raw_hits)
    ]
    hit_count = len(hits)
    lo, hi = wilson_interval(hit_count, n_samples)
    hit_fadings = [h.mean_fading for h in hits]
    hit_users = [h.n_users for h in hits]

    conditioned = None
    if count_threshold is not None:
        n_high = sum(t.high for t in tallies)
        n_not_hit = sum(t.high_not_hit for t in tallies)
        in_high = sum(t.hits_in_high for t in tallies)
        tail = poisson_tail(lam * intensity_mass(model), count_threshold)
        conditioned = ConditionedStats(
            count_threshold=count_threshold,
            n_high=n_high,
            high_frequency=n_high / n_samples,
            high_ci=wilson_interval(n_high, n_samples),
            poisson_tail=tail,
            poisson_expected=tail * n_samples,
            mean_fading_high=sum(t.high_fading_sum for t in tallies) / n_high if n_high else None,
            mean_fading_high_not_hit=sum(t.high_not_hit_fading_sum for t in tallies) / n_not_hit if n_not_hit else None,
            hits_in_high=in_high,
            containment=in_high / hit_count if hit_count else None,
        )

    report = ExperimentReport(
        kind="mc" if count_threshold is None else "conditioned",
        scenario_hash=scenario_hash(model, kernel),
        mode=mode,
        lam=lam,
        c=c,
        b_fraction=b_fraction,
        absolute=absolute,
        seed=SeedInfo(seed=seed, blocks=n_blocks, block_size=block_size, algorithm=RNG_ALGORITHM),
        n_samples=n_samples,
        hit_count=hit_count,
        frequency=hit_count / n_samples,
        ci_low=lo,
        ci_high=hi,
        mean_users=sum(t.users for t in tallies) / n_samples,
        hits=hits,
        hit_mean_fading=float(np.mean(hit_fadings)) if hits else None,
        hit_fading_min=min(hit_fadings) if hits else None,
        hit_fading_max=max(hit_fadings) if hits else None,
        hit_users_min=min(hit_users) if hits else None,
        hit_users_max=max(hit_users) if hits else None,
        conditioned=conditioned,
        wall_clock_s=time.perf_counter() - started,
    )
    logger.info("Monte Carlo %s: %d/%d Treffer (%.3gs)", mode, hit_count, n_samples, report.wall_clock_s)
    return report


def conditioned_stats(
    model: NetworkModel,
    lam: float,
    n_samples: int,
    count_threshold: int,
    c: float,
    b_fraction: float,
    **kwargs,
) -> ExperimentReport:
    """Monte Carlo run with the statistics of the samples holding more than ``count_threshold`` users."""
    if count_threshold < 0:
        raise ParameterError("Schwelle fuer die Nutzerzahl muss nichtnegativ sein.")
    return rare_event_mc(model, lam, n_samples, c, b_fraction, count_threshold=count_threshold, **kwargs)
