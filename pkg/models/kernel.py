"""
Pydantic models for space-dependent fading kernels p(x, du).

Regions and kernel columns are indexed by the distance |x| to the base station.
"""
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.network import FadingLaw

_KERNEL_NORMALIZATION_TOL = 1e-8


class IidKernel(BaseModel):
    """Every user draws from the model's fading law."""
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["iid"] = "iid"


class AreasKernel(BaseModel):
    """
    Countably many areas: radial bands [breaks[i-1], breaks[i]) around the base
    station, band i using laws[i]. The last band is unbounded.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["areas"] = "areas"
    breaks: tuple[float, ...]
    laws: tuple[FadingLaw, ...]

    @model_validator(mode="after")
    def check_partition(self) -> "AreasKernel":
        if len(self.laws) != len(self.breaks) + 1:
            raise ValueError("Es braucht genau ein Gesetz mehr als Bandgrenzen.")
        if any(b <= 0 for b in self.breaks) or list(self.breaks) != sorted(set(self.breaks)):
            raise ValueError("Bandgrenzen muessen positiv und streng wachsend sein.")
        return self

    @property
    def f_min(self) -> float:
        return min(law.f_min for law in self.laws)

    @property
    def f_max(self) -> float:
        return max(law.f_max for law in self.laws)


class ContinuousKernel(BaseModel):
    """f(|x|, u) tabulated: row i is the fading density at distance s[i]."""
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["continuous"] = "continuous"
    s: tuple[float, ...]
    u: tuple[float, ...]
    f: tuple[tuple[float, ...], ...]

    @model_validator(mode="after")
    def check_table(self) -> "ContinuousKernel":
        s = np.asarray(self.s)
        u = np.asarray(self.u)
        table = np.asarray(self.f, dtype=float)
        if table.shape != (len(s), len(u)) or len(u) < 2:
            raise ValueError("Kern-Tabelle hat die falsche Form.")
        if np.any(np.diff(s) <= 0) or np.any(np.diff(u) <= 0) or u[0] <= 0:
            raise ValueError("Stuetzstellen muessen streng wachsen, u positiv.")
        if np.any(table < 0):
            raise ValueError("Kern-Dichte darf nicht negativ sein.")
        norms = np.trapezoid(table, u, axis=1)
        if np.any(np.abs(norms - 1.0) > _KERNEL_NORMALIZATION_TOL):
            raise ValueError("Jede Kern-Spalte muss auf 1 normiert sein.")
        return self

    @property
    def f_min(self) -> float:
        return self.u[0]

    @property
    def f_max(self) -> float:
        return self.u[-1]

    @classmethod
    def from_scaling(
        cls,
        base_u: np.ndarray,
        base_f: np.ndarray,
        s: np.ndarray,
        k: np.ndarray,
        n_u: int = 201,
    ) -> "ContinuousKernel":
        """
        Kernel of F^x = k(|x|) * F0 where F0 has the tabulated density
        (base_u, base_f). Rows are renormalized on the common u-grid.
        """
        base_u = np.asarray(base_u, dtype=float)
        base_f = np.asarray(base_f, dtype=float)
        s = np.asarray(s, dtype=float)
        k = np.asarray(k, dtype=float)
        if np.any(k <= 0):
            raise ValueError("Skalierung k muss positiv sein.")
        u = np.linspace(base_u[0] * k.min(), base_u[-1] * k.max(), n_u)
        rows = []
        for ki in k:
            row = np.interp(u / ki, base_u, base_f, left=0.0, right=0.0) / ki
            rows.append(row / np.trapezoid(row, u))
        return cls(
            s=tuple(float(v) for v in s),
            u=tuple(float(v) for v in u),
            f=tuple(tuple(float(v) for v in row) for row in rows),
        )


FadingKernel = Annotated[
    Union[IidKernel, AreasKernel, ContinuousKernel],
    Field(discriminator="kind"),
]
