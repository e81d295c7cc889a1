"""
SIR, QoS and frustration for the four communication modes.

The base station sits at the origin. A transmitter is a (position, fading)
pair; the receiver's fading never enters the SIR. The interference includes
the transmitter's own signal, so the lambda-normalized SIR of a user against
its empirical measure lies in (0, 1].

Relayed QoS uses the nu-essential supremum over relays, realised as the
maximum over positive-mass atoms/cells, the transmitter itself included.
Because g is nondecreasing it commutes with max and min; the mode-wise
engine therefore works on the "effective SIR" max{SIR_D, max_relay min(SIR_1,
SIR_2)} and applies g once at the end.
"""
import logging
from typing import Literal, NamedTuple

import numpy as np

from core.errors import DegenerateModelError, DomainError, EmptyMeasureError, ModelError
from core.landscape import (
    eval_path_loss,
    eval_qos,
    extremal_path_loss,
    extremal_path_loss_from_origin,
    interference_at_origin,
    path_loss_lipschitz,
    product_intensity,
    qos_lipschitz,
)
from core.measures import MarkedMeasure
from models.kernel import FadingKernel
from models.network import GridResolution, NetworkModel

logger = logging.getLogger("core.sir")

Mode = Literal["up", "up-dir", "do", "do-dir"]
MODES: tuple[Mode, ...] = ("up", "up-dir", "do", "do-dir")

# matrix entries per block when evaluating all pairs
_PAIR_BLOCK = 2_000_000


class Transmitter(NamedTuple):
    position: np.ndarray
    fading: float


def _as_point(x, d: int) -> np.ndarray:
    p = np.asarray(x, dtype=float).ravel()
    if p.size != d:
        raise DomainError(f"Punkt hat Dimension {p.size}, erwartet {d}.")
    return p


def _distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances, shape (len(a), len(b))."""
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _row_blocks(n_rows: int, n_cols: int):
    step = max(1, _PAIR_BLOCK // max(n_cols, 1))
    for start in range(0, n_rows, step):
        yield slice(start, min(start + step, n_rows))


# --------------------------------------------------------------------------- #
# Interference and SIR                                                         #
# --------------------------------------------------------------------------- #

def interference_many(model: NetworkModel, nu: MarkedMeasure, receivers: np.ndarray) -> np.ndarray:
    """int ell(|x - eta|) u nu(dx, du) for every receiver eta."""
    receivers = np.atleast_2d(np.asarray(receivers, dtype=float))
    out = np.zeros(len(receivers))
    if len(nu) == 0:
        return out
    power = nu.fadings * nu.weights
    for rows in _row_blocks(len(receivers), len(nu)):
        gains = eval_path_loss(model.path_loss, _distances(receivers[rows], nu.positions))
        out[rows] = gains @ power
    return out


def interference(model: NetworkModel, nu: MarkedMeasure, receiver) -> float:
    """Interference of nu at one receiver position."""
    rx = _as_point(receiver, nu.dim if len(nu) else model.window.d)
    return float(interference_many(model, nu, rx[None, :])[0])


def sir(model: NetworkModel, tx: Transmitter, rx, nu: MarkedMeasure) -> float:
    """ell(|tx - rx|) F_tx / I(rx); raises EmptyMeasureError for nu = 0."""
    if nu.total_mass <= 0:
        raise EmptyMeasureError()
    rx = _as_point(rx, nu.dim)
    tx_pos = _as_point(tx.position, nu.dim)
    total = interference(model, nu, rx)
    if not np.isfinite(total):
        return 0.0
    signal = eval_path_loss(model.path_loss, float(np.linalg.norm(tx_pos - rx))) * tx.fading
    return float(signal / total)


def qos_direct(model: NetworkModel, tx: Transmitter, rx, nu: MarkedMeasure) -> float:
    """D = g(SIR); c+ against the zero measure."""
    try:
        return float(eval_qos(model.qos, sir(model, tx, rx, nu)))
    except EmptyMeasureError:
        return model.qos.c_plus


def qos_relay(model: NetworkModel, tx: Transmitter, relay: Transmitter, rx, nu: MarkedMeasure) -> float:
    """Gamma = min of the two hop QoS values; the relay transmits with its own fading."""
    first = qos_direct(model, tx, relay.position, nu)
    second = qos_direct(model, relay, rx, nu)
    return min(first, second)


def qos_best(model: NetworkModel, tx: Transmitter, rx, nu: MarkedMeasure) -> float:
    """
    R = max{D, max over positive-mass relays of Gamma}. The direction is
    carried by the arguments: uplink passes (user, o), downlink ((o, F_o), user).
    """
    direct = qos_direct(model, tx, rx, nu)
    if nu.total_mass <= 0:
        return direct
    rx = _as_point(rx, nu.dim)
    tx_pos = _as_point(tx.position, nu.dim)
    pos = nu.positive
    relays = nu.positions[pos]
    relay_fadings = nu.fadings[pos]
    i_relays = interference_many(model, nu, relays)
    i_rx = interference(model, nu, rx)
    gl = model.path_loss
    first = eval_path_loss(gl, np.linalg.norm(relays - tx_pos, axis=1)) * tx.fading / i_relays
    second = eval_path_loss(gl, np.linalg.norm(relays - rx, axis=1)) * relay_fadings / i_rx
    best_relay = float(np.max(np.minimum(first, second))) if len(relays) else 0.0
    return max(direct, float(eval_qos(model.qos, best_relay)))


# --------------------------------------------------------------------------- #
# Mode-wise evaluation over a whole measure                                    #
# --------------------------------------------------------------------------- #

def resolve_base(model: NetworkModel, base_fading: float | None) -> float:
    if base_fading is not None:
        if not model.f_min <= base_fading <= model.f_max:
            raise DomainError("F_o muss in [F_min, F_max] liegen.")
        return float(base_fading)
    value = model.base_value
    if value is None:
        raise ModelError("Basis-Fading ist zufaellig; fuer Downlink-Modi muss ein Wert angegeben werden.")
    return value


def mode_sir(
    model: NetworkModel,
    nu: MarkedMeasure,
    mode: Mode,
    base_fading: float | None = None,
) -> np.ndarray:
    """
    Effective SIR of every atom/cell of nu for the given mode; g of it is the
    mode QoS. Uplink: the atom transmits to o. Downlink: the atom receives
    from (o, F_o). Returns +inf everywhere against the zero measure.
    """
    if mode not in MODES:
        raise DomainError(f"Unbekannter Modus: {mode}")
    n = len(nu)
    if nu.total_mass <= 0:
        return np.full(n, np.inf)
    gl = model.path_loss
    radii = np.linalg.norm(nu.positions, axis=1)
    gain_o = eval_path_loss(gl, radii)

    if mode == "up-dir":
        i_origin = float(np.sum(gain_o * nu.fadings * nu.weights))
        return gain_o * nu.fadings / i_origin

    i_users = interference_many(model, nu, nu.positions)
    if mode == "do-dir":
        return gain_o * resolve_base(model, base_fading) / i_users

    pos = nu.positive
    relay_pos = nu.positions[pos]
    relay_fad = nu.fadings[pos]
    relay_i = i_users[pos]
    out = np.empty(n)

    if mode == "up":
        i_origin = float(np.sum(gain_o * nu.fadings * nu.weights))
        direct = gain_o * nu.fadings / i_origin
        hop_two = gain_o[pos] * relay_fad / i_origin           # relay -> o
        for rows in _row_blocks(n, len(relay_pos)):
            hop_one = (
                eval_path_loss(gl, _distances(nu.positions[rows], relay_pos))
                * nu.fadings[rows, None] / relay_i[None, :]
            )
            best = np.max(np.minimum(hop_one, hop_two[None, :]), axis=1)
            out[rows] = np.maximum(direct[rows], best)
        return out

    f_o = resolve_base(model, base_fading)
    direct = gain_o * f_o / i_users
    hop_one = gain_o[pos] * f_o / relay_i                       # o -> relay
    for rows in _row_blocks(n, len(relay_pos)):
        hop_two = (
            eval_path_loss(gl, _distances(nu.positions[rows], relay_pos))
            * relay_fad[None, :] / i_users[rows, None]
        )
        best = np.max(np.minimum(hop_one[None, :], hop_two), axis=1)
        out[rows] = np.maximum(direct[rows], best)
    return out


def mode_qos(
    model: NetworkModel,
    nu: MarkedMeasure,
    mode: Mode,
    base_fading: float | None = None,
) -> np.ndarray:
    """QoS of every atom/cell of nu for ``mode``; c+ against the zero measure."""
    raw = mode_sir(model, nu, mode, base_fading)
    return np.asarray(eval_qos(model.qos, np.where(np.isinf(raw), np.finfo(float).max, raw)))


def check_threshold(model: NetworkModel, c: float) -> None:
    if not 0 <= c <= model.qos.c_plus:
        raise DomainError(f"Schwelle c={c} liegt ausserhalb von [0, {model.qos.c_plus}].")


def frustration_measure(
    model: NetworkModel,
    nu: MarkedMeasure,
    c: float,
    mode: Mode,
    base_fading: float | None = None,
) -> MarkedMeasure:
    """G(nu, tau_c, mode): nu restricted to the points with mode QoS < c."""
    check_threshold(model, c)
    if len(nu) == 0 or c == 0:
        return nu.restricted(np.zeros(len(nu), dtype=bool))
    return nu.restricted(mode_qos(model, nu, mode, base_fading) < c)


# --------------------------------------------------------------------------- #
# Minimal SIR vector                                                           #
# --------------------------------------------------------------------------- #

class MinimalSir(NamedTuple):
    up: float
    up_dir: float
    do: float
    do_dir: float

    def as_list(self) -> list[float]:
        return [self.up, self.up_dir, self.do, self.do_dir]


def _nested_gamma_min(model: NetworkModel, mu: MarkedMeasure, mode: Mode, f_o: float) -> float:
    """min over cells x of max over cells y of Gamma (uplink x->y->o, downlink o->y->x)."""
    gl = model.path_loss
    pos = mu.positive
    cells = mu.positions[pos]
    fad = mu.fadings[pos]
    gain_o = eval_path_loss(gl, np.linalg.norm(cells, axis=1))
    i_cells = interference_many(model, mu, cells)
    worst = np.inf
    if mode == "up":
        i_origin = float(np.sum(gain_o * fad * mu.weights[pos]))
        hop_two = gain_o * fad / i_origin
        for rows in _row_blocks(len(cells), len(cells)):
            hop_one = eval_path_loss(gl, _distances(cells[rows], cells)) * fad[rows, None] / i_cells[None, :]
            worst = min(worst, float(np.min(np.max(np.minimum(hop_one, hop_two[None, :]), axis=1))))
    else:
        hop_one = gain_o * f_o / i_cells
        for rows in _row_blocks(len(cells), len(cells)):
            hop_two = eval_path_loss(gl, _distances(cells[rows], cells)) * fad[None, :] / i_cells[rows, None]
            worst = min(worst, float(np.min(np.max(np.minimum(hop_one[None, :], hop_two), axis=1))))
    return float(eval_qos(model.qos, worst))


def minimal_sir_vector(
    model: NetworkModel,
    resolution: GridResolution | None = None,
    kernel: FadingKernel | None = None,
    base_fading: float | None = None,
) -> MinimalSir:
    """
    K = (K_up, K_updir, K_do, K_dodir).

    K_updir = g(ell_min^o F_min / I(o)) with ell_min^o the smallest path-loss
    between o and W. K_dodir is the infimum of the direct downlink QoS over
    the receivers of the grid and the boundary of W. The relayed entries are
    the nested inf/sup of Gamma over the grid of mu'.
    """
    mu = product_intensity(model, resolution, kernel)
    if mu.total_mass <= 0:
        raise DegenerateModelError("mu(W) = 0: jede QoS ist c+, K ist nicht definiert.")
    f_o = resolve_base(model, base_fading)
    l_min_o, _ = extremal_path_loss_from_origin(model.path_loss, model.window)
    k_updir = float(eval_qos(model.qos, l_min_o * model.f_min / interference_at_origin(model, kernel)))

    receivers = np.concatenate([mu.positions[mu.positive], _window_boundary(model)])
    gain = eval_path_loss(model.path_loss, np.linalg.norm(receivers, axis=1))
    k_dodir = float(eval_qos(model.qos, np.min(gain * f_o / interference_many(model, mu, receivers))))

    k_up = _nested_gamma_min(model, mu, "up", f_o)
    k_do = _nested_gamma_min(model, mu, "do", f_o)
    logger.debug("K = (%.6g, %.6g, %.6g, %.6g)", k_up, k_updir, k_do, k_dodir)
    return MinimalSir(k_up, k_updir, k_do, k_dodir)


def _window_boundary(model: NetworkModel, n: int = 64) -> np.ndarray:
    w = model.window
    if w.shape == "disk":
        theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return w.r * np.column_stack([np.cos(theta), np.sin(theta)])
    corners = np.array(np.meshgrid(*([[-w.r, w.r]] * w.d), indexing="ij")).reshape(w.d, -1).T
    return corners


# --------------------------------------------------------------------------- #
# Derived constants                                                            #
# --------------------------------------------------------------------------- #

def qos_lipschitz_constant(model: NetworkModel, nu: MarkedMeasure) -> float:
    """
    C with |D((x,u),rx,nu) - D((x',u'),rx,nu)| <= C (|x-x'| + |u-u'|) for all
    receivers in W. Every such receiver sees at least ell_min * int u dnu.
    """
    if nu.total_mass <= 0:
        return 0.0
    l_min, l_max = extremal_path_loss(model.path_loss, model.window)
    floor = l_min * float(np.sum(nu.fadings * nu.weights))
    j2 = path_loss_lipschitz(model.path_loss)
    return qos_lipschitz(model.qos) * max(j2 * model.f_max, l_max) / floor
