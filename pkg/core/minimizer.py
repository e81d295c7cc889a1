"""
Relative-entropy minimizers for frustration constraints on the disk B_r(o).

All minimizers are exponential tilts of mu'(ds, du) = q(s) f(u) ds du:

- direct uplink, b > 0:  h = q f exp(beta ell(s) u + delta 1{ell(s) u < alpha}),
  with interference int ell u h = alpha / t and frustrated mass
  int_{ell u < alpha} h = b, minimized over alpha;
- direct uplink, b = 0:  h = q f exp(gamma ell(s) u) with interference
  ell(r) F_min / t;
- direct downlink without path-loss:  h = q f exp(gamma u + delta) under
  int u h >= F_o / t and int h >= b.

t = g^{-1}(c) is the SIR level below which the QoS drops under c.

The brute-force oracle solves the same constraint systems on a coarse cell
grid through the convex dual, independently of the parametric solvers.
"""
import logging
import math
from typing import Literal, NamedTuple

import numpy as np
from scipy.optimize import bisect, brentq, minimize, minimize_scalar

from core.entropy import rel_entropy_masses
from core.errors import DomainError, InfeasibleError, ModelError, ParameterError, SolverError
from core.landscape import (
    eval_path_loss,
    eval_qos,
    extremal_path_loss_from_origin,
    fading_cdf,
    fading_pdf,
    is_continuous,
    is_decreasing,
    qos_inverse,
    radial_breaks,
    radial_q,
    spatial_density,
)
from core.quadrature import composite_gauss_legendre, gauss_legendre, uniform_panels
from core.sir import resolve_base
from models.network import ConstantPathLoss, NetworkModel
from models.results import MinimizerSummary

logger = logging.getLogger("core.minimizer")

_S_PANELS = 48
_S_ORDER = 8
_U_ORDER = 16
_CELL_ORDER = 4
_ALPHA_GRID = 64
_NEWTON_TOL = 1e-12
_ACCEPT_TOL = 1e-8
_MAX_NEWTON = 100
_MAX_HALVING = 40
_MAX_BRACKET = 60


# --------------------------------------------------------------------------- #
# Problem and mesh                                                             #
# --------------------------------------------------------------------------- #

def check_radial_model(model: NetworkModel) -> None:
    """Disk window, non-increasing path-loss and a fading law with density."""
    if model.window.shape != "disk":
        raise ModelError("Minimierer sind nur fuer die Kreisscheibe definiert.")
    if not is_decreasing(model.path_loss, model.window.r):
        raise ModelError("Pfadverlust muss auf [0, r] monoton fallen.")
    if not is_continuous(model.fading):
        raise ModelError("Minimierer brauchen ein Fading-Gesetz mit Dichte.")


class RadialMesh(NamedTuple):
    """Quadrature nodes of mu' in (s, u) with gain ell(s) u and region flag ell(s) u < alpha."""
    s: np.ndarray
    u: np.ndarray
    weights: np.ndarray
    gain: np.ndarray
    inside: np.ndarray


def _crossing(pl, level: float, r: float) -> float | None:
    """s in (0, r) with ell(s) = level, for non-increasing ell."""
    def gap(s: float) -> float:
        return float(eval_path_loss(pl, s)) - level
    if gap(0.0) <= 0 or gap(r) >= 0:
        return None
    return brentq(gap, 0.0, r, xtol=1e-14)


def radial_mesh(model: NetworkModel, alpha: float | None = None, n_panels: int = _S_PANELS) -> RadialMesh:
    """
    Composite Gauss-Legendre in s, broken at the kinks of ell and q and at the
    radii where alpha / ell(s) leaves [F_min, F_max]. For every s-node the
    u-integral is split at alpha / ell(s), so the region indicator is exact.
    """
    r = model.window.r
    lo, hi = model.f_min, model.f_max
    extra = list(radial_breaks(model))
    if alpha is not None:
        for level in (alpha / lo, alpha / hi):
            cross = _crossing(model.path_loss, level, r)
            if cross is not None:
                extra.append(cross)
    s, ws = composite_gauss_legendre(uniform_panels(0.0, r, n_panels, extra), _S_ORDER)
    ell = eval_path_loss(model.path_loss, s)
    qs = radial_q(model, s) * ws
    lower = np.full(len(s), lo)
    upper = np.full(len(s), hi)
    if alpha is None:
        u, wu = gauss_legendre(lower, upper, 2 * _U_ORDER)
        inside = np.zeros(u.shape, dtype=bool)
    else:
        split = np.clip(alpha / ell, lo, hi)
        u_in, w_in = gauss_legendre(lower, split, _U_ORDER)
        u_out, w_out = gauss_legendre(split, upper, _U_ORDER)
        u = np.concatenate([u_in, u_out], axis=1)
        wu = np.concatenate([w_in, w_out], axis=1)
        inside = np.concatenate([np.ones(u_in.shape, bool), np.zeros(u_out.shape, bool)], axis=1)
    weights = qs[:, None] * wu * fading_pdf(model.fading, u)
    keep = weights > 0
    ss = np.broadcast_to(s[:, None], u.shape)
    gain = ell[:, None] * u
    return RadialMesh(ss[keep], u[keep], weights[keep], gain[keep], inside[keep])


class RadialProblem:
    """Direct-uplink frustration problem on the disk for threshold c and mass b."""
    __slots__ = ("model", "c", "b", "threshold", "i_origin", "mu_mass", "a_min", "a_max", "k_updir", "b_prior")

    def __init__(self, model: NetworkModel, c: float, b: float, threshold: float, i_origin: float,
                 mu_mass: float, a_min: float, a_max: float, k_updir: float, b_prior: float):
        self.model = model
        self.c = c
        self.b = b
        self.threshold = threshold
        self.i_origin = i_origin
        self.mu_mass = mu_mass
        self.a_min = a_min
        self.a_max = a_max
        self.k_updir = k_updir
        self.b_prior = b_prior

    def __repr__(self) -> str:
        return f"RadialProblem(c={self.c}, b={self.b}, K_updir={self.k_updir:.6g}, G0={self.b_prior:.6g})"

    @classmethod
    def from_model(cls, model: NetworkModel, c: float, b: float = 0.0) -> "RadialProblem":
        check_radial_model(model)
        if not 0 < c < model.qos.c_plus:
            raise DomainError(f"c={c} muss in (0, {model.qos.c_plus}) liegen.")
        if b < 0:
            raise DomainError("b muss nichtnegativ sein.")
        threshold = qos_inverse(model.qos, c)
        if threshold <= 0:
            raise DomainError(f"c={c} liegt nicht ueber g(0); niemand ist frustriert.")
        base = radial_mesh(model)
        i_origin = float(np.sum(base.weights * base.gain))
        mu_mass = float(np.sum(base.weights))
        if mu_mass <= 0:
            raise ModelError("mu(W) = 0.")
        l_min, l_max = extremal_path_loss_from_origin(model.path_loss, model.window)
        a_min = l_min * model.f_min
        a_max = l_max * model.f_max
        k_updir = float(eval_qos(model.qos, a_min / i_origin))
        prior = radial_mesh(model, threshold * i_origin)
        b_prior = float(np.sum(prior.weights[prior.inside]))
        return cls(model, c, b, threshold, i_origin, mu_mass, a_min, a_max, k_updir, b_prior)

    def with_b(self, b: float) -> "RadialProblem":
        if b < 0:
            raise DomainError("b muss nichtnegativ sein.")
        return RadialProblem(self.model, self.c, b, self.threshold, self.i_origin, self.mu_mass,
                             self.a_min, self.a_max, self.k_updir, self.b_prior)

    @property
    def unlikely(self) -> bool:
        return self.b > self.b_prior


# --------------------------------------------------------------------------- #
# Exponential-family root finding                                              #
# --------------------------------------------------------------------------- #

def _tilted(stats: np.ndarray, weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        return weights * np.exp(x @ stats)


def tilt_newton(
    stats: np.ndarray,
    weights: np.ndarray,
    targets: np.ndarray,
    x0: np.ndarray | None = None,
    tol: float = _NEWTON_TOL,
    max_iter: int = _MAX_NEWTON,
) -> tuple[np.ndarray, np.ndarray]:
    """
    x with stats @ (weights * exp(x @ stats)) = targets by damped Newton.

    The left-hand side is the gradient of a convex function, its Jacobian the
    (positive definite) second moment matrix; steps are halved until the
    residual norm decreases.
    """
    stats = np.atleast_2d(np.asarray(stats, dtype=float))
    targets = np.asarray(targets, dtype=float)
    x = np.zeros(len(stats)) if x0 is None else np.asarray(x0, dtype=float).copy()
    tilt = _tilted(stats, weights, x)
    res = stats @ tilt - targets
    norm = float(np.linalg.norm(res))
    for it in range(max_iter):
        if norm < tol:
            break
        jac = (stats * tilt) @ stats.T
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise SolverError("Jacobi-Matrix ist singulaer.", tuple(np.abs(res))) from exc
        scale = 1.0
        for _ in range(_MAX_HALVING):
            cand = x + scale * step
            tilt_c = _tilted(stats, weights, cand)
            res_c = stats @ tilt_c - targets
            norm_c = float(np.linalg.norm(res_c))
            if np.isfinite(norm_c) and norm_c < norm:
                break
            scale *= 0.5
        else:
            if norm <= _ACCEPT_TOL:
                break
            raise SolverError("Newton-Schritt verringert das Residuum nicht.", tuple(float(v) for v in np.abs(res)))
        x, tilt, res, norm = cand, tilt_c, res_c, norm_c
        logger.debug("Newton %d: |F| = %.3e", it, norm)
    if not norm <= _ACCEPT_TOL:
        raise SolverError(f"Newton nach {max_iter} Schritten nicht konvergiert.", tuple(float(v) for v in np.abs(res)))
    return x, res


def _bracket(fn, start: float = 1.0) -> tuple[float, float]:
    """[lo, hi] with fn(lo) < 0 < fn(hi) for nondecreasing fn."""
    lo, hi = -start, start
    for _ in range(_MAX_BRACKET):
        f_lo, f_hi = fn(lo), fn(hi)
        if f_lo < 0 < f_hi:
            return lo, hi
        if f_lo >= 0:
            lo *= 2.0
        if f_hi <= 0:
            hi *= 2.0
    raise InfeasibleError("Keine Vorzeichenwechsel-Klammer gefunden.")


def _exp_sum(weights: np.ndarray, exponent: np.ndarray) -> float:
    with np.errstate(over="ignore"):
        return float(np.sum(weights * np.exp(exponent)))


def _nested_bisection(stats: np.ndarray, weights: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Outer bisection on delta, inner on beta. For fixed delta the interference
    is increasing in beta; along beta(delta) the frustrated mass is increasing
    in delta (Schur complement of the second moment matrix).
    """
    gain, inside = stats

    def beta_for(delta: float) -> float:
        with np.errstate(over="ignore"):
            base = weights * np.exp(delta * inside)

        def interference_gap(beta: float) -> float:
            return _exp_sum(gain * base, beta * gain) - targets[0]

        lo, hi = _bracket(interference_gap)
        return bisect(interference_gap, lo, hi, xtol=1e-15, maxiter=500)

    def mass_gap(delta: float) -> float:
        beta = beta_for(delta)
        return _exp_sum(inside * weights, beta * gain + delta * inside) - targets[1]

    lo, hi = _bracket(mass_gap)
    delta = bisect(mass_gap, lo, hi, xtol=1e-14, maxiter=500)
    x = np.array([beta_for(delta), delta])
    return x, stats @ _tilted(stats, weights, x) - targets


# --------------------------------------------------------------------------- #
# Direct uplink, b > 0                                                         #
# --------------------------------------------------------------------------- #

class Multipliers(NamedTuple):
    beta: float
    delta: float
    residuals: tuple[float, float]


def _uplink_system(problem: RadialProblem, alpha: float) -> tuple[RadialMesh, np.ndarray, np.ndarray]:
    if not problem.a_min < alpha <= problem.a_max * (1 + 1e-12):
        raise DomainError(f"alpha={alpha} liegt nicht in ({problem.a_min}, {problem.a_max}].")
    if problem.b <= 0:
        raise DomainError("Der Zwei-Bedingungen-Minimierer braucht b > 0.")
    mesh = radial_mesh(problem.model, alpha)
    stats = np.vstack([mesh.gain, mesh.inside.astype(float)])
    targets = np.array([alpha / problem.threshold, problem.b])
    if not np.any(mesh.inside):
        raise InfeasibleError(f"D_alpha ist fuer alpha={alpha} leer.")
    g_in = mesh.gain[mesh.inside]
    # mass b on D_alpha alone already carries at least b * min gain
    if targets[0] <= problem.b * float(g_in.min()):
        raise InfeasibleError(f"Interferenz alpha/t={targets[0]:.6g} ist mit Masse b={problem.b} nicht erreichbar.")
    if np.all(mesh.inside) and targets[0] >= problem.b * float(g_in.max()):
        raise InfeasibleError(f"Interferenz alpha/t={targets[0]:.6g} ist ohne Aussenbereich nicht erreichbar.")
    return mesh, stats, targets


def solve_multipliers(
    problem: RadialProblem,
    alpha: float,
    method: Literal["newton", "bisection"] = "newton",
) -> Multipliers:
    """(beta_alpha, delta_alpha) solving the interference and frustrated-mass constraints."""
    mesh, stats, targets = _uplink_system(problem, alpha)
    if method == "bisection":
        x, res = _nested_bisection(stats, mesh.weights, targets)
    else:
        try:
            x, res = tilt_newton(stats, mesh.weights, targets)
        except SolverError as exc:
            logger.warning("Newton bei alpha=%.6g gescheitert (%s), weiter mit Bisektion", alpha, exc)
            x, res = _nested_bisection(stats, mesh.weights, targets)
    return Multipliers(float(x[0]), float(x[1]), (float(abs(res[0])), float(abs(res[1]))))


def _cost(weights: np.ndarray, theta: np.ndarray) -> float:
    """int e^theta (theta - 1) dmu' + mu'(W)."""
    with np.errstate(over="ignore", invalid="ignore"):
        value = float(np.sum(weights * np.exp(theta) * (theta - 1.0)) + np.sum(weights))
    return max(value, 0.0)


def entropic_cost(problem: RadialProblem, alpha: float) -> float:
    m = solve_multipliers(problem, alpha)
    mesh = radial_mesh(problem.model, alpha)
    return _cost(mesh.weights, m.beta * mesh.gain + m.delta * mesh.inside)


def _cost_or_inf(problem: RadialProblem, alpha: float) -> float:
    try:
        return entropic_cost(problem, alpha)
    except (InfeasibleError, SolverError, DomainError):
        return math.inf


def _alpha_grid(lo: float, hi: float) -> np.ndarray:
    return lo + (hi - lo) * np.arange(1, _ALPHA_GRID + 1) / _ALPHA_GRID


def _refine_alpha(objective, lo: float, hi: float) -> tuple[float, float]:
    """64-point scan of (lo, hi], then bounded Brent search on the best bracket."""
    alphas = _alpha_grid(lo, hi)
    costs = np.array([objective(a) for a in alphas])
    if not np.any(np.isfinite(costs)):
        raise InfeasibleError("Fuer kein alpha ist das Nebenbedingungssystem loesbar.")
    k = int(np.argmin(costs))
    left = alphas[k - 1] if k > 0 else lo + 1e-9 * (hi - lo)
    right = alphas[k + 1] if k + 1 < len(alphas) else hi
    res = minimize_scalar(objective, bounds=(left, right), method="bounded",
                          options={"xatol": 1e-10 * (hi - lo)})
    if np.isfinite(res.fun) and res.fun <= costs[k]:
        return float(res.x), float(res.fun)
    return float(alphas[k]), float(costs[k])


class MinimizerSolution:
    """Tilted density h(s, u) = q(s) f(u) exp(log_tilt(s, u)) with its constraint report."""
    __slots__ = ("kind", "model", "threshold", "alpha", "multipliers", "entropy", "residuals",
                 "mean_fading", "total_mass", "note")

    def __init__(self, kind: str, model: NetworkModel, threshold: float, alpha: float | None,
                 multipliers: dict[str, float], entropy: float, residuals: tuple[float, ...],
                 mean_fading: float, total_mass: float, note: str | None = None):
        self.kind = kind
        self.model = model
        self.threshold = threshold
        self.alpha = alpha
        self.multipliers = multipliers
        self.entropy = entropy
        self.residuals = residuals
        self.mean_fading = mean_fading
        self.total_mass = total_mass
        self.note = note

    def __repr__(self) -> str:
        mult = ", ".join(f"{k}={v:.6g}" for k, v in self.multipliers.items())
        return f"MinimizerSolution({self.kind}, {mult}, H={self.entropy:.6g})"

    @classmethod
    def prior(cls, kind: str, model: NetworkModel, threshold: float, alpha: float | None, note: str) -> "MinimizerSolution":
        mesh = radial_mesh(model)
        names = ("gamma",) if kind == "b0" else ("gamma", "delta") if kind == "plfree-dodir" else ("beta", "delta")
        mass = float(np.sum(mesh.weights))
        return cls(kind, model, threshold, alpha, {n: 0.0 for n in names}, 0.0, (),
                   float(np.sum(mesh.weights * mesh.u)) / mass, mass, note)

    def log_tilt(self, s, u) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        u = np.asarray(u, dtype=float)
        m = self.multipliers
        if self.kind == "plfree-dodir":
            return m["gamma"] * u + m["delta"]
        gain = eval_path_loss(self.model.path_loss, s) * u
        if self.kind == "b0":
            return m["gamma"] * gain
        return m["beta"] * gain + m["delta"] * (gain < self.alpha)

    def density(self, s, u) -> np.ndarray:
        return radial_q(self.model, s) * fading_pdf(self.model.fading, u) * np.exp(self.log_tilt(s, u))

    def table(self, n_s: int = 41, n_u: int = 21) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(s, u, density) on a tensor grid, for the solution dump."""
        ss, uu = np.meshgrid(
            np.linspace(0.0, self.model.window.r, n_s),
            np.linspace(self.model.f_min, self.model.f_max, n_u),
            indexing="ij",
        )
        return ss.ravel(), uu.ravel(), self.density(ss.ravel(), uu.ravel())

    def summary(self) -> MinimizerSummary:
        return MinimizerSummary(
            kind=self.kind,
            alpha=self.alpha,
            multipliers=dict(self.multipliers),
            entropy=self.entropy,
            residuals=list(self.residuals),
            mean_fading=self.mean_fading,
            total_mass=self.total_mass,
            note=self.note,
        )


def _tilt_moments(mesh: RadialMesh, theta: np.ndarray) -> tuple[float, float]:
    tilt = mesh.weights * np.exp(theta)
    mass = float(np.sum(tilt))
    return float(np.sum(tilt * mesh.u)) / mass, mass


def minimize_direct_uplink(problem: RadialProblem) -> MinimizerSolution:
    """Minimizer of h(nu | mu') under G(nu, tau_c, up-dir)(W) >= b."""
    if problem.b <= 0:
        raise DomainError("b muss positiv sein; fuer b = 0 ist minimize_b0 zustaendig.")
    if not problem.unlikely:
        logger.info("b=%.6g liegt nicht ueber G(mu')=%.6g, Minimierer ist mu'", problem.b, problem.b_prior)
        return MinimizerSolution.prior(
            "updir", problem.model, problem.threshold, problem.threshold * problem.i_origin,
            "Ereignis unter mu' nicht unwahrscheinlich",
        )
    alpha, cost = _refine_alpha(lambda a: _cost_or_inf(problem, a), problem.a_min, problem.a_max)
    m = solve_multipliers(problem, alpha)
    mesh = radial_mesh(problem.model, alpha)
    theta = m.beta * mesh.gain + m.delta * mesh.inside
    mean_fading, mass = _tilt_moments(mesh, theta)
    if max(m.beta, m.delta) < -1e-10:
        logger.warning("Beide Multiplikatoren negativ (beta=%.3g, delta=%.3g)", m.beta, m.delta)
    logger.info("up-dir Minimierer: alpha=%.6g beta=%.6g delta=%.6g H=%.6g", alpha, m.beta, m.delta, cost)
    return MinimizerSolution("updir", problem.model, problem.threshold, alpha,
                             {"beta": m.beta, "delta": m.delta}, _cost(mesh.weights, theta),
                             m.residuals, mean_fading, mass)


# --------------------------------------------------------------------------- #
# Direct uplink, b = 0                                                         #
# --------------------------------------------------------------------------- #

def _interference_tilt(mesh: RadialMesh, level: float) -> float:
    """gamma with int ell u exp(gamma ell u) dmu' = level."""
    def interference_gap(gamma: float) -> float:
        return _exp_sum(mesh.weights * mesh.gain, gamma * mesh.gain) - level

    if abs(interference_gap(0.0)) <= _NEWTON_TOL * max(1.0, level):
        return 0.0
    lo, hi = _bracket(interference_gap)
    return float(brentq(interference_gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def minimize_b0(problem: RadialProblem) -> MinimizerSolution:
    """
    Minimizer of h(nu | mu') under G(nu, tau_c, up-dir)(W) > 0: the SIR has to
    reach t at the outer boundary with fading F_min, i.e. int ell u h =
    ell(r) F_min / t.
    """
    alpha0 = problem.a_min
    if problem.c > problem.k_updir + 1e-12:
        logger.info("c=%.6g > K_updir=%.6g: mu' hat schon frustrierte Masse", problem.c, problem.k_updir)
        return MinimizerSolution.prior("b0", problem.model, problem.threshold, alpha0,
                                       "c ueber K_updir, mu' ist bereits frustriert")
    mesh = radial_mesh(problem.model)
    level = alpha0 / problem.threshold
    gamma = _interference_tilt(mesh, level)
    theta = gamma * mesh.gain
    mean_fading, mass = _tilt_moments(mesh, theta)
    residual = abs(_exp_sum(mesh.weights * mesh.gain, theta) - level)
    logger.info("b=0 Minimierer: gamma0=%.6g", gamma)
    return MinimizerSolution("b0", problem.model, problem.threshold, alpha0, {"gamma": gamma},
                             _cost(mesh.weights, theta), (residual,), mean_fading, mass)


def _anchored_mass(problem: RadialProblem, alpha: float) -> float:
    """Mass on D_alpha of the pure ell u tilt carrying interference alpha / t."""
    mesh = radial_mesh(problem.model, alpha)
    gamma = _interference_tilt(mesh, alpha / problem.threshold)
    return _exp_sum(mesh.weights[mesh.inside], gamma * mesh.gain[mesh.inside])


def anchored_uplink(
    problem: RadialProblem,
    method: Literal["newton", "bisection"] = "newton",
) -> MinimizerSolution:
    """
    Member of the b -> 0 family of the direct uplink: alpha_b is the level at
    which the pure tilt with interference alpha_b / t already puts mass b on
    D_alpha_b, and (beta, delta) solve the two-constraint system there.

    alpha_b decreases to alpha_min with b, beta(b) tends to gamma_0 and
    delta(b) stays at 0, so the densities converge uniformly to the b = 0
    minimizer.
    """
    if problem.b <= 0:
        raise DomainError("b muss positiv sein; fuer b = 0 ist minimize_b0 zustaendig.")
    top = _anchored_mass(problem, problem.a_max)
    if problem.b >= top:
        raise InfeasibleError(f"b={problem.b} liegt nicht unter der Masse {top:.6g} bei alpha_max.")
    alpha = float(brentq(lambda a: _anchored_mass(problem, a) - problem.b, problem.a_min, problem.a_max,
                         xtol=1e-14 * problem.a_max, rtol=4 * np.finfo(float).eps))
    m = solve_multipliers(problem, alpha, method)
    mesh = radial_mesh(problem.model, alpha)
    theta = m.beta * mesh.gain + m.delta * mesh.inside
    mean_fading, mass = _tilt_moments(mesh, theta)
    logger.info("b=%.3g: alpha_b=%.9g beta=%.9g delta=%.3g", problem.b, alpha, m.beta, m.delta)
    return MinimizerSolution("updir", problem.model, problem.threshold, alpha,
                             {"beta": m.beta, "delta": m.delta}, _cost(mesh.weights, theta),
                             m.residuals, mean_fading, mass, "b -> 0 Familie")


def b0_ladder(
    problem: RadialProblem,
    bs=(1e-1, 1e-2, 1e-3),
) -> tuple[MinimizerSolution, list[tuple[float, MinimizerSolution, float]]]:
    """(b = 0 minimizer, [(b, h_b, sup |h_b - h_0|)]) along decreasing b."""
    limit = minimize_b0(problem)
    rungs = []
    for b in sorted(bs, reverse=True):
        solution = anchored_uplink(problem.with_b(b))
        rungs.append((float(b), solution, density_gap(solution, limit)))
    return limit, rungs


def density_gap(a: MinimizerSolution, b: MinimizerSolution, n_s: int = 201, n_u: int = 101) -> float:
    """sup |h_a - h_b| on a tensor grid of W'."""
    s, u, ha = a.table(n_s, n_u)
    _, _, hb = b.table(n_s, n_u)
    return float(np.max(np.abs(ha - hb)))


# --------------------------------------------------------------------------- #
# Direct downlink without path-loss                                            #
# --------------------------------------------------------------------------- #

def _stable_moments(w: np.ndarray, u: np.ndarray, gamma: float) -> tuple[float, float, float]:
    """(log shift, sum w e^{gamma u - shift}, sum w u e^{gamma u - shift})."""
    shift = gamma * (u.max() if gamma > 0 else u.min())
    e = w * np.exp(gamma * u - shift)
    return shift, float(np.sum(e)), float(np.sum(e * u))


def minimize_pathloss_free_downlink(
    model: NetworkModel,
    c: float,
    b: float,
    base_fading: float | None = None,
) -> MinimizerSolution:
    """
    With ell == K every user sees SIR F_o / int u dnu, so either all or no
    users are frustrated. The minimizer solves int u h >= F_o / t and
    int h >= b; the KKT cases are tried in order: mu' feasible, interference
    active only, mass active only, both active.
    """
    if not isinstance(model.path_loss, ConstantPathLoss):
        raise ModelError("Der pfadverlustfreie Minimierer braucht konstanten Pfadverlust.")
    check_radial_model(model)
    if not 0 < c < model.qos.c_plus:
        raise DomainError(f"c={c} muss in (0, {model.qos.c_plus}) liegen.")
    if b < 0:
        raise DomainError("b muss nichtnegativ sein.")
    f_o = resolve_base(model, base_fading)
    threshold = qos_inverse(model.qos, c)
    if threshold <= 0:
        raise DomainError(f"c={c} liegt nicht ueber g(0).")
    level = f_o / threshold
    mesh = radial_mesh(model)
    w, u = mesh.weights, mesh.u
    m0 = float(np.sum(w))
    j0 = float(np.sum(w * u))
    tol = 1e-12 * max(1.0, level, b)

    def solution(gamma: float, delta: float, note: str | None = None) -> MinimizerSolution:
        theta = gamma * u + delta
        tilt = w * np.exp(theta)
        mass = float(np.sum(tilt))
        moment = float(np.sum(tilt * u))
        residuals = []
        if gamma > 0:
            residuals.append(abs(moment - level))
        if delta > 0:
            residuals.append(abs(mass - b))
        logger.info("do-dir Minimierer ohne Pfadverlust: gamma=%.6g delta=%.6g", gamma, delta)
        return MinimizerSolution("plfree-dodir", model, threshold, None, {"gamma": gamma, "delta": delta},
                                 _cost(w, theta), tuple(residuals), moment / mass, mass, note)

    if j0 >= level - tol and m0 >= b - tol:
        return MinimizerSolution.prior("plfree-dodir", model, threshold, None,
                                       "mu' erfuellt beide Nebenbedingungen")

    if j0 < level:
        def moment_gap(gamma: float) -> float:
            shift, _, s1 = _stable_moments(w, u, gamma)
            return math.log(s1) + shift - math.log(level)

        lo, hi = _bracket(moment_gap)
        gamma = brentq(moment_gap, max(lo, 0.0), hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        if _exp_sum(w, gamma * u) >= b - tol:
            return solution(float(gamma), 0.0)

    if m0 < b:
        delta = math.log(b / m0)
        if math.exp(delta) * j0 >= level - tol:
            return solution(0.0, float(delta))

    ratio = level / b
    if not model.f_min < ratio < model.f_max:
        raise InfeasibleError(f"Mittleres Fading {ratio:.6g} liegt nicht in ({model.f_min}, {model.f_max}).")

    def mean_gap(gamma: float) -> float:
        _, s0, s1 = _stable_moments(w, u, gamma)
        return s1 / s0 - ratio

    lo, hi = _bracket(mean_gap)
    gamma = brentq(mean_gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    shift, s0, _ = _stable_moments(w, u, gamma)
    delta = math.log(b) - math.log(s0) - shift
    return solution(float(gamma), float(delta))


# --------------------------------------------------------------------------- #
# Brute-force oracle                                                           #
# --------------------------------------------------------------------------- #

class OracleGrid:
    """Cells (or cell pieces split at ell u = alpha) of mu' with their constraint coefficients."""
    __slots__ = ("layout", "alpha", "s", "u", "positions", "masses", "gain", "inside", "prior_density")

    def __init__(self, layout, alpha, s, u, positions, masses, gain, inside, prior_density):
        self.layout = layout
        self.alpha = alpha
        self.s = s
        self.u = u
        self.positions = positions
        self.masses = masses
        self.gain = gain
        self.inside = inside
        self.prior_density = prior_density

    def __len__(self) -> int:
        return len(self.masses)

    def __repr__(self) -> str:
        return f"OracleGrid({self.layout}, cells={len(self)}, alpha={self.alpha})"


def _ring_edges(model: NetworkModel, n_s: int) -> np.ndarray:
    """Ring edges equidistant in the mix of s/r and the path-loss drop, so steep parts get more rings."""
    r = model.window.r
    s = np.linspace(0.0, r, 4097)
    ell = eval_path_loss(model.path_loss, s)
    drop = ell[0] - ell
    tau = 0.5 * s / r + (0.5 * drop / drop[-1] if drop[-1] > 0 else 0.5 * s / r)
    return np.interp(np.linspace(0.0, 1.0, n_s + 1), tau, s)


def oracle_grid(
    model: NetworkModel,
    n_s: int = 40,
    n_u: int = 20,
    alpha: float | None = None,
    layout: Literal["radial", "cartesian"] = "radial",
) -> OracleGrid:
    """
    Radial: n_s rings x n_u fading bins, each cell split into the pieces with
    ell u < alpha and ell u >= alpha; masses and cell-averaged gains by
    Gauss-Legendre. Cartesian: n_s x n_s squares x n_u bins with coefficients
    at the square centers, for checking rotational symmetry.
    """
    check_radial_model(model)
    if min(n_s, n_u) < 1:
        raise ParameterError("Oracle-Gitter braucht positive Aufloesung.")
    law = model.fading
    edges_u = np.linspace(model.f_min, model.f_max, n_u + 1)
    if layout == "cartesian":
        return _cartesian_grid(model, n_s, edges_u, alpha)

    edges_s = _ring_edges(model, n_s)
    s, ws = gauss_legendre(edges_s[:-1], edges_s[1:], _CELL_ORDER)          # (n_s, k)
    qs = radial_q(model, s) * ws
    ell = eval_path_loss(model.path_loss, s)
    shape = (n_s, _CELL_ORDER, n_u)
    u_lo = np.broadcast_to(edges_u[:-1], shape)
    u_hi = np.broadcast_to(edges_u[1:], shape)
    if alpha is None:
        parts = [(u_lo, u_hi, False)]
    else:
        split = np.clip(alpha / ell[:, :, None], u_lo, u_hi)
        parts = [(u_lo, split, True), (split, u_hi, False)]

    cols = {"mass": [], "gain": [], "s": [], "u": [], "inside": []}
    for a, b, flag in parts:
        uu, wu = gauss_legendre(a, b, _CELL_ORDER)                          # (n_s, k, n_u, k)
        dens = qs[:, :, None, None] * wu * fading_pdf(law, uu)
        mass = dens.sum(axis=(1, 3))
        with np.errstate(invalid="ignore", divide="ignore"):
            cols["gain"].append((dens * ell[:, :, None, None] * uu).sum(axis=(1, 3)) / mass)
            cols["s"].append((dens * s[:, :, None, None]).sum(axis=(1, 3)) / mass)
            cols["u"].append((dens * uu).sum(axis=(1, 3)) / mass)
        cols["mass"].append(mass)
        cols["inside"].append(np.full(mass.shape, flag))
    flat = {k: np.concatenate([v.ravel() for v in vals]) for k, vals in cols.items()}
    keep = flat["mass"] > 0
    s_rep, u_rep = flat["s"][keep], flat["u"][keep]
    return OracleGrid(
        "radial", alpha, s_rep, u_rep, None, flat["mass"][keep], flat["gain"][keep],
        flat["inside"][keep], radial_q(model, s_rep) * fading_pdf(law, u_rep),
    )


def _cartesian_grid(model: NetworkModel, n: int, edges_u: np.ndarray, alpha: float | None) -> OracleGrid:
    r = model.window.r
    law = model.fading
    h = 2.0 * r / n
    axis = -r + h * (np.arange(n) + 0.5)
    cx, cy = np.meshgrid(axis, axis, indexing="ij")
    centers = np.column_stack([cx.ravel(), cy.ravel()])
    x, wx = gauss_legendre(-0.5 * h, 0.5 * h, _CELL_ORDER)
    ox, oy = np.meshgrid(x, x, indexing="ij")
    sub_w = np.outer(wx, wx).ravel()
    offsets = np.column_stack([ox.ravel(), oy.ravel()])
    pts = (centers[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
    space_mass = spatial_density(model, pts).reshape(len(centers), -1) @ sub_w

    uu, wu = gauss_legendre(edges_u[:-1], edges_u[1:], _CELL_ORDER)
    pu = fading_pdf(law, uu) * wu
    prob = np.diff(fading_cdf(law, edges_u))
    with np.errstate(invalid="ignore", divide="ignore"):
        u_mean = np.where(pu.sum(axis=1) > 0, (pu * uu).sum(axis=1) / pu.sum(axis=1), 0.5 * (edges_u[:-1] + edges_u[1:]))
    radius = np.linalg.norm(centers, axis=1)
    gain = np.outer(eval_path_loss(model.path_loss, radius), u_mean)
    masses = np.outer(space_mass, prob)
    inside = gain < alpha if alpha is not None else np.zeros(gain.shape, dtype=bool)
    keep = (masses > 0).ravel()
    s_rep = np.repeat(radius, len(u_mean))[keep]
    u_rep = np.tile(u_mean, len(radius))[keep]
    positions = np.repeat(centers, len(u_mean), axis=0)[keep]
    return OracleGrid(
        "cartesian", alpha, s_rep, u_rep, positions, masses.ravel()[keep], gain.ravel()[keep],
        inside.ravel()[keep], spatial_density(model, positions) * fading_pdf(law, u_rep),
    )


class LinearConstraint(NamedTuple):
    name: str
    coefficients: np.ndarray
    target: float
    sense: Literal["eq", "ge"] = "eq"


def interference_constraint(grid: OracleGrid, level: float, sense: Literal["eq", "ge"] = "eq") -> LinearConstraint:
    return LinearConstraint("interference", grid.gain, level, sense)


def frustrated_mass_constraint(grid: OracleGrid, b: float, sense: Literal["eq", "ge"] = "eq") -> LinearConstraint:
    if grid.alpha is None:
        raise ParameterError("Frustrationsmasse braucht ein Gitter mit alpha.")
    return LinearConstraint("frustrated_mass", grid.inside.astype(float), b, sense)


def total_mass_constraint(grid: OracleGrid, b: float, sense: Literal["eq", "ge"] = "ge") -> LinearConstraint:
    return LinearConstraint("total_mass", np.ones(len(grid)), b, sense)


def fading_moment_constraint(grid: OracleGrid, level: float, sense: Literal["eq", "ge"] = "ge") -> LinearConstraint:
    return LinearConstraint("fading_moment", grid.u, level, sense)


class OracleResult(NamedTuple):
    entropy: float
    masses: np.ndarray
    multipliers: dict[str, float]
    residuals: tuple[float, ...]
    converged: bool
    grid: OracleGrid

    @property
    def ratio(self) -> np.ndarray:
        """nu_cell / mu'_cell."""
        return self.masses / self.grid.masses

    def table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.grid.s, self.grid.u, self.ratio * self.grid.prior_density

    def summary(self) -> MinimizerSummary:
        return MinimizerSummary(
            kind="oracle",
            alpha=self.grid.alpha,
            multipliers=dict(self.multipliers),
            entropy=self.entropy,
            residuals=list(self.residuals),
            mean_fading=float(np.sum(self.masses * self.grid.u) / np.sum(self.masses)),
            total_mass=float(np.sum(self.masses)),
            converged=self.converged,
        )


def brute_force_oracle(
    grid: OracleGrid,
    constraints: list[LinearConstraint],
    tol: float = 1e-6,
    max_iter: int = 5000,
) -> OracleResult:
    """
    min sum_i h(nu_i | m_i) subject to linear constraints. The minimizer is
    nu_i = m_i exp(lambda . a_i); lambda minimizes the convex dual
    sum m_i (e^{lambda . a_i} - 1) - lambda . t, with lambda_k >= 0 for ">="
    constraints (L-BFGS-B), followed by a Newton polish on the active set.
    Non-convergence is reported, not raised.
    """
    m = grid.masses
    if not constraints:
        return OracleResult(0.0, m.copy(), {}, (), True, grid)
    a = np.vstack([c.coefficients for c in constraints])
    t = np.array([c.target for c in constraints], dtype=float)
    bounds = [(0.0, None) if c.sense == "ge" else (None, None) for c in constraints]
    total = float(np.sum(m))

    def dual(lam: np.ndarray) -> tuple[float, np.ndarray]:
        e = _tilted(a, m, lam)
        return float(np.sum(e) - total - lam @ t), a @ e - t

    res = minimize(dual, np.zeros(len(constraints)), jac=True, method="L-BFGS-B", bounds=bounds,
                   options={"maxiter": max_iter, "gtol": 1e-12, "ftol": 1e-15})
    lam = np.asarray(res.x, dtype=float)
    active = np.array([c.sense == "eq" or lam[k] > 1e-10 for k, c in enumerate(constraints)])
    lam = np.where(active, lam, 0.0)
    if np.any(active):
        try:
            polished, _ = tilt_newton(a[active], m, t[active], x0=lam[active])
            active_idx = np.flatnonzero(active)
            if all(polished[j] >= -1e-12 for j, k in enumerate(active_idx) if constraints[k].sense == "ge"):
                lam[active] = polished
        except SolverError as exc:
            logger.warning("Newton-Politur des Orakels gescheitert: %s", exc)

    nu = _tilted(a, m, lam)
    achieved = a @ nu
    residuals = tuple(
        float(abs(achieved[k] - c.target)) if c.sense == "eq" else float(max(0.0, c.target - achieved[k]))
        for k, c in enumerate(constraints)
    )
    converged = bool(np.all(np.isfinite(nu))) and max(residuals) < tol
    if not converged:
        logger.warning("Orakel nicht konvergiert, Residuen %s", residuals)
    entropy = rel_entropy_masses(nu, m).value if np.all(np.isfinite(nu)) else math.inf
    return OracleResult(entropy, nu, {c.name: float(v) for c, v in zip(constraints, lam)}, residuals, converged, grid)


def oracle_direct_uplink(
    problem: RadialProblem,
    n_s: int = 40,
    n_u: int = 20,
    layout: Literal["radial", "cartesian"] = "radial",
) -> OracleResult:
    """Grid counterpart of minimize_direct_uplink, with its own alpha search."""
    if not problem.unlikely:
        grid = oracle_grid(problem.model, n_s, n_u, problem.threshold * problem.i_origin, layout)
        return brute_force_oracle(grid, [])

    def solve(alpha: float) -> OracleResult:
        grid = oracle_grid(problem.model, n_s, n_u, alpha, layout)
        return brute_force_oracle(grid, [
            interference_constraint(grid, alpha / problem.threshold),
            frustrated_mass_constraint(grid, problem.b),
        ])

    def objective(alpha: float) -> float:
        result = solve(alpha)
        return result.entropy if result.converged else math.inf

    alpha, _ = _refine_alpha(objective, problem.a_min, problem.a_max)
    return solve(alpha)


def oracle_b0(problem: RadialProblem, n_s: int = 40, n_u: int = 20) -> OracleResult:
    """Interference-only grid problem matching minimize_b0."""
    grid = oracle_grid(problem.model, n_s, n_u)
    return brute_force_oracle(grid, [interference_constraint(grid, problem.a_min / problem.threshold)])


def oracle_pathloss_free_downlink(
    model: NetworkModel,
    c: float,
    b: float,
    base_fading: float | None = None,
    n_s: int = 40,
    n_u: int = 20,
) -> OracleResult:
    if not isinstance(model.path_loss, ConstantPathLoss):
        raise ModelError("Der pfadverlustfreie Fall braucht konstanten Pfadverlust.")
    threshold = qos_inverse(model.qos, c)
    if threshold <= 0:
        raise DomainError(f"c={c} liegt nicht ueber g(0).")
    grid = oracle_grid(model, n_s, n_u)
    return brute_force_oracle(grid, [
        fading_moment_constraint(grid, resolve_base(model, base_fading) / threshold),
        total_mass_constraint(grid, b),
    ])


# --------------------------------------------------------------------------- #
# Dispatch                                                                     #
# --------------------------------------------------------------------------- #

MinimizerKind = Literal["updir", "b0", "plfree-dodir", "oracle"]


def solve_kind(
    model: NetworkModel,
    kind: MinimizerKind,
    c: float,
    b: float,
    base_fading: float | None = None,
    n_s: int = 40,
    n_u: int = 20,
    layout: Literal["radial", "cartesian"] = "radial",
) -> tuple[MinimizerSummary, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """
    Summary and (s, u, density) table of one minimizer. ``oracle`` picks the
    grid problem matching the model: path-loss free downlink for a constant
    path-loss, the b = 0 problem for b = 0, the direct uplink otherwise.
    """
    if kind == "plfree-dodir":
        solution = minimize_pathloss_free_downlink(model, c, b, base_fading)
        return solution.summary(), solution.table()
    if kind == "oracle" and isinstance(model.path_loss, ConstantPathLoss):
        result = oracle_pathloss_free_downlink(model, c, b, base_fading, n_s, n_u)
        return result.summary(), result.table()
    problem = RadialProblem.from_model(model, c, b)
    if kind == "updir":
        solution = minimize_direct_uplink(problem)
    elif kind == "b0":
        solution = minimize_b0(problem)
    elif kind == "oracle":
        result = oracle_b0(problem, n_s, n_u) if b == 0 else oracle_direct_uplink(problem, n_s, n_u, layout)
        return result.summary(), result.table()
    else:
        raise ParameterError(f"Unbekannter Minimierer: {kind}")
    return solution.summary(), solution.table()
