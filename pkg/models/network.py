"""
Pydantic models for the static network ingredients.

Window, path-loss, fading law, QoS map, spatial intensity and base-station
fading. All models are frozen so they can be shared between threads; the
numerical evaluation lives in core.landscape.
"""
import math
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

_NORMALIZATION_TOL = 1e-10


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# --------------------------------------------------------------------------- #
# Window                                                                       #
# --------------------------------------------------------------------------- #

class Window(_Frozen):
    """Box [-r,r]^d or the disk B_r(o) in the plane."""
    shape: Literal["box", "disk"] = Field("disk", description="'box' = [-r,r]^d, 'disk' = B_r(o)")
    r: float = Field(..., gt=0, description="Half-width (box) or radius (disk)")
    d: int = Field(2, ge=1, description="Spatial dimension")

    @model_validator(mode="after")
    def disk_is_planar(self) -> "Window":
        if self.shape == "disk" and self.d != 2:
            raise ValueError("Ein Kreisfenster ist nur in zwei Dimensionen erlaubt.")
        return self

    @property
    def diameter(self) -> float:
        if self.shape == "disk":
            return 2.0 * self.r
        return 2.0 * self.r * math.sqrt(self.d)

    @property
    def max_radius(self) -> float:
        """Largest distance from the base station at the origin."""
        if self.shape == "disk":
            return self.r
        return self.r * math.sqrt(self.d)

    @property
    def volume(self) -> float:
        if self.shape == "disk":
            return math.pi * self.r ** 2
        return (2.0 * self.r) ** self.d


# --------------------------------------------------------------------------- #
# Path-loss                                                                    #
# --------------------------------------------------------------------------- #

class TruncatedPowerPathLoss(_Frozen):
    """ell(s) = min{cap, s^-exponent}, ell(0) = cap."""
    kind: Literal["truncated_power"] = "truncated_power"
    cap: float = Field(..., gt=0)
    exponent: float = Field(..., ge=0)


class ConstantPathLoss(_Frozen):
    kind: Literal["constant"] = "constant"
    value: float = Field(..., gt=0)


class TabulatedPathLoss(_Frozen):
    """Linear interpolation between samples, constant beyond the last sample."""
    kind: Literal["tabulated"] = "tabulated"
    s: tuple[float, ...]
    values: tuple[float, ...]
    lipschitz: float = Field(..., ge=0, description="Lipschitz constant J2")

    @model_validator(mode="after")
    def check_table(self) -> "TabulatedPathLoss":
        if len(self.s) != len(self.values) or len(self.s) < 2:
            raise ValueError("Tabelle braucht mindestens zwei Stuetzstellen gleicher Laenge.")
        s = np.asarray(self.s)
        v = np.asarray(self.values)
        if s[0] != 0.0 or np.any(np.diff(s) <= 0):
            raise ValueError("Stuetzstellen muessen bei 0 beginnen und streng wachsen.")
        if np.any(v <= 0):
            raise ValueError("Pfadverlust muss strikt positiv sein.")
        slopes = np.abs(np.diff(v) / np.diff(s))
        if np.any(slopes > self.lipschitz * (1 + 1e-12)):
            raise ValueError("Angegebene Lipschitz-Konstante ist zu klein.")
        return self


PathLoss = Annotated[
    Union[TruncatedPowerPathLoss, ConstantPathLoss, TabulatedPathLoss],
    Field(discriminator="kind"),
]


# --------------------------------------------------------------------------- #
# Fading laws                                                                  #
# --------------------------------------------------------------------------- #

class UniformFading(_Frozen):
    """Uniform on [low, high]; low == high is the point mass."""
    kind: Literal["uniform"] = "uniform"
    low: float = Field(..., gt=0)
    high: float = Field(..., gt=0)

    @model_validator(mode="after")
    def ordered(self) -> "UniformFading":
        if self.high < self.low:
            raise ValueError("Es muss low <= high gelten.")
        return self

    @property
    def f_min(self) -> float:
        return self.low

    @property
    def f_max(self) -> float:
        return self.high


class DiscreteFading(_Frozen):
    kind: Literal["discrete"] = "discrete"
    values: tuple[float, ...]
    weights: tuple[float, ...]

    @model_validator(mode="after")
    def check_atoms(self) -> "DiscreteFading":
        if len(self.values) != len(self.weights) or not self.values:
            raise ValueError("Atome und Gewichte muessen gleich lang und nicht leer sein.")
        if min(self.values) <= 0:
            raise ValueError("Fading-Werte muessen positiv sein.")
        if min(self.weights) < 0:
            raise ValueError("Gewichte duerfen nicht negativ sein.")
        if abs(math.fsum(self.weights) - 1.0) > _NORMALIZATION_TOL:
            raise ValueError("Gewichte muessen sich zu 1 summieren.")
        return self

    @property
    def f_min(self) -> float:
        return min(v for v, w in zip(self.values, self.weights) if w > 0)

    @property
    def f_max(self) -> float:
        return max(v for v, w in zip(self.values, self.weights) if w > 0)


class DensityFading(_Frozen):
    """Tabulated density on [u[0], u[-1]], piecewise linear."""
    kind: Literal["density"] = "density"
    u: tuple[float, ...]
    f: tuple[float, ...]

    @model_validator(mode="after")
    def check_density(self) -> "DensityFading":
        u = np.asarray(self.u)
        f = np.asarray(self.f)
        if len(u) != len(f) or len(u) < 2:
            raise ValueError("Dichte braucht mindestens zwei Stuetzstellen.")
        if u[0] <= 0 or np.any(np.diff(u) <= 0):
            raise ValueError("Stuetzstellen muessen positiv und streng wachsend sein.")
        if np.any(f < 0):
            raise ValueError("Dichte darf nicht negativ sein.")
        # the trapezoid rule is exact for a piecewise-linear density
        if abs(float(np.trapezoid(f, u)) - 1.0) > _NORMALIZATION_TOL:
            raise ValueError("Dichte muss auf 1 normiert sein.")
        return self

    @property
    def f_min(self) -> float:
        return self.u[0]

    @property
    def f_max(self) -> float:
        return self.u[-1]


FadingLaw = Annotated[
    Union[UniformFading, DiscreteFading, DensityFading],
    Field(discriminator="kind"),
]


# --------------------------------------------------------------------------- #
# QoS map                                                                      #
# --------------------------------------------------------------------------- #

class TruncatedIdentityQos(_Frozen):
    """g(x) = min(x, cap)."""
    kind: Literal["truncated_identity"] = "truncated_identity"
    cap: float = Field(..., gt=0)

    @property
    def rho_plus(self) -> float:
        return self.cap

    @property
    def c_plus(self) -> float:
        return self.cap


class GeneralQos(_Frozen):
    """Nondecreasing samples, strictly increasing up to the plateau."""
    kind: Literal["general"] = "general"
    x: tuple[float, ...]
    y: tuple[float, ...]

    @model_validator(mode="after")
    def check_shape(self) -> "GeneralQos":
        x = np.asarray(self.x)
        y = np.asarray(self.y)
        if len(x) != len(y) or len(x) < 2:
            raise ValueError("QoS-Tabelle braucht mindestens zwei Stuetzstellen.")
        if x[0] != 0.0 or np.any(np.diff(x) <= 0):
            raise ValueError("x-Stuetzstellen muessen bei 0 beginnen und streng wachsen.")
        if y[0] < 0:
            raise ValueError("QoS darf nicht negativ sein.")
        plateau = int(np.argmax(y))
        if np.any(np.diff(y[: plateau + 1]) <= 0):
            raise ValueError("QoS muss unterhalb des Plateaus streng wachsen.")
        if np.any(y[plateau:] != y[plateau]):
            raise ValueError("QoS muss ab dem Plateau konstant sein.")
        return self

    @property
    def rho_plus(self) -> float:
        return self.x[int(np.argmax(self.y))]

    @property
    def c_plus(self) -> float:
        return max(self.y)


QosFunction = Annotated[
    Union[TruncatedIdentityQos, GeneralQos],
    Field(discriminator="kind"),
]


# --------------------------------------------------------------------------- #
# Spatial intensity                                                            #
# --------------------------------------------------------------------------- #

class UniformIntensity(_Frozen):
    """Lebesgue measure on the window, normalized to ``mass``."""
    kind: Literal["uniform"] = "uniform"
    mass: float = Field(..., ge=0)


class RadialIntensity(_Frozen):
    """mu(ds) = q(s) ds on the disk, q analytic ('lebesgue') or tabulated."""
    kind: Literal["radial"] = "radial"
    profile: Literal["lebesgue", "tabulated"] = "lebesgue"
    density: float = Field(1.0, ge=0, description="lebesgue: q(s) = 2*pi*density*s")
    s: tuple[float, ...] = ()
    q: tuple[float, ...] = ()

    @model_validator(mode="after")
    def check_profile(self) -> "RadialIntensity":
        if self.profile == "tabulated":
            s = np.asarray(self.s)
            q = np.asarray(self.q)
            if len(s) != len(q) or len(s) < 2:
                raise ValueError("Radiale Dichte braucht mindestens zwei Stuetzstellen.")
            if s[0] != 0.0 or np.any(np.diff(s) <= 0) or np.any(q < 0):
                raise ValueError("Radiale Dichte: s ab 0 streng wachsend, q >= 0.")
        return self


SpatialIntensity = Annotated[
    Union[UniformIntensity, RadialIntensity],
    Field(discriminator="kind"),
]


# --------------------------------------------------------------------------- #
# Base-station fading                                                          #
# --------------------------------------------------------------------------- #

class FixedBase(_Frozen):
    kind: Literal["fixed"] = "fixed"
    value: float | None = Field(None, description="None = (F_min + F_max) / 2")


class RandomBase(_Frozen):
    """F_o drawn from its own law, independent of the users."""
    kind: Literal["random"] = "random"
    law: FadingLaw


BaseFading = Annotated[Union[FixedBase, RandomBase], Field(discriminator="kind")]


# --------------------------------------------------------------------------- #
# Network model                                                                #
# --------------------------------------------------------------------------- #

class NetworkModel(_Frozen):
    window: Window
    path_loss: PathLoss
    fading: FadingLaw
    qos: QosFunction
    intensity: SpatialIntensity
    base: BaseFading = FixedBase()

    @model_validator(mode="after")
    def check_consistency(self) -> "NetworkModel":
        if self.intensity.kind == "radial" and self.window.shape != "disk":
            raise ValueError("Radiale Intensitaet ist nur auf dem Kreisfenster erlaubt.")
        if self.intensity.kind == "radial" and self.intensity.profile == "tabulated":
            if self.intensity.s[-1] < self.window.r * (1 - 1e-12):
                raise ValueError("Radiale Dichte muss das ganze Fenster abdecken.")
        lo, hi = self.fading.f_min, self.fading.f_max
        if self.base.kind == "fixed" and self.base.value is not None:
            if not lo <= self.base.value <= hi:
                raise ValueError("F_o muss in [F_min, F_max] liegen.")
        if self.base.kind == "random":
            if self.base.law.f_min < lo or self.base.law.f_max > hi:
                raise ValueError("Die Verteilung von F_o muss in [F_min, F_max] liegen.")
        return self

    @property
    def f_min(self) -> float:
        return self.fading.f_min

    @property
    def f_max(self) -> float:
        return self.fading.f_max

    @property
    def base_value(self) -> float | None:
        """Fixed F_o, or None for a random base-station fading."""
        if self.base.kind == "random":
            return None
        if self.base.value is None:
            return 0.5 * (self.f_min + self.f_max)
        return self.base.value

    def with_base(self, value: float) -> "NetworkModel":
        """Copy with the base-station fading fixed to ``value``."""
        return NetworkModel(
            window=self.window,
            path_loss=self.path_loss,
            fading=self.fading,
            qos=self.qos,
            intensity=self.intensity,
            base=FixedBase(value=value),
        )


class GridResolution(_Frozen):
    """Resolution of the radial x angular x fading (or box x fading) grid of mu'."""
    n_space: int = Field(24, description="Rings (disk) or cells per axis (box)")
    n_angle: int = Field(24, description="Angular sectors (disk only)")
    n_fading: int = Field(10, description="Fading bins for continuous laws")
