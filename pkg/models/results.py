"""
Pydantic models for experiment results: frustration curves, Monte Carlo
reports, decay verdicts and minimizer summaries.
"""
import math
from typing import Literal

from pydantic import BaseModel, Field, model_validator

Verdict = Literal["Exponential", "Subexponential"]
RunKind = Literal["mc", "conditioned"]


# --------------------------------------------------------------------------- #
# Frustration curve                                                            #
# --------------------------------------------------------------------------- #

class CurvePoint(BaseModel):
    c: float
    p: float = Field(..., ge=0.0)


# --------------------------------------------------------------------------- #
# Monte Carlo                                                                  #
# --------------------------------------------------------------------------- #

class SeedInfo(BaseModel):
    """Root seed; block k of ``block_size`` samples uses stream k."""
    seed: int = Field(..., ge=0)
    blocks: int = Field(..., ge=0)
    block_size: int = Field(..., ge=1)
    algorithm: str = "PCG64"


class HitRecord(BaseModel):
    hit_id: int
    sample_index: int
    n_users: int
    mean_fading: float
    frustrated_fraction: float
    frustrated_mass: float


class ConditionedStats(BaseModel):
    """Statistics over the samples with more than ``count_threshold`` users."""
    count_threshold: int
    n_high: int = Field(..., ge=0)
    high_frequency: float
    high_ci: tuple[float, float]
    poisson_tail: float
    poisson_expected: float
    mean_fading_high: float | None = None
    mean_fading_high_not_hit: float | None = None
    hits_in_high: int = 0
    containment: float | None = None


class ExperimentReport(BaseModel):
    kind: RunKind = "mc"
    scenario_hash: str
    mode: str
    lam: float
    c: float
    b_fraction: float
    absolute: bool = False
    seed: SeedInfo
    n_samples: int = Field(..., ge=1)
    hit_count: int = Field(..., ge=0)
    frequency: float
    ci_low: float
    ci_high: float
    mean_users: float
    hits: list[HitRecord] = []
    hit_mean_fading: float | None = None
    hit_fading_min: float | None = None
    hit_fading_max: float | None = None
    hit_users_min: int | None = None
    hit_users_max: int | None = None
    conditioned: ConditionedStats | None = None
    wall_clock_s: float = 0.0

    @model_validator(mode="after")
    def check_counts(self) -> "ExperimentReport":
        if self.hit_count > self.n_samples:
            raise ValueError("Mehr Treffer als Stichproben.")
        if len(self.hits) != self.hit_count:
            raise ValueError("Trefferliste passt nicht zur Trefferzahl.")
        if (self.hit_mean_fading is None) != (self.hit_count == 0):
            raise ValueError("Trefferstatistik genau dann, wenn es Treffer gibt.")
        return self

    def stat_rows(self) -> list[tuple[str, object]]:
        """Flat (stat, value) pairs for the report CSV."""
        rows: list[tuple[str, object]] = [
            ("kind", self.kind),
            ("scenario_hash", self.scenario_hash),
            ("mode", self.mode),
            ("lambda", self.lam),
            ("c", self.c),
            ("b_fraction", self.b_fraction),
            ("absolute", self.absolute),
            ("n_samples", self.n_samples),
            ("hit_count", self.hit_count),
            ("frequency", self.frequency),
            ("ci_low", self.ci_low),
            ("ci_high", self.ci_high),
            ("mean_users", self.mean_users),
            ("hit_mean_fading", self.hit_mean_fading),
            ("hit_fading_min", self.hit_fading_min),
            ("hit_fading_max", self.hit_fading_max),
            ("hit_users_min", self.hit_users_min),
            ("hit_users_max", self.hit_users_max),
            ("wall_clock_s", self.wall_clock_s),
        ]
        if self.conditioned is not None:
            for key, value in self.conditioned.model_dump().items():
                rows.append((f"conditioned.{key}", value))
        return rows


# --------------------------------------------------------------------------- #
# Classifier                                                                   #
# --------------------------------------------------------------------------- #

class ModeVerdict(BaseModel):
    mode: str
    c: float
    b: float
    prior_mass: float
    minimal_qos: float
    exponential: bool
    epsilon: float | None = None
    boundary: bool = False


class CriticalInterval(BaseModel):
    """u-interval of the base fading on which downlink frustration is not exponentially rare."""
    kind: Literal["A", "B", "C"]
    low: float
    high: float
    mass: float = Field(..., ge=0.0)


class DecayVerdict(BaseModel):
    verdict: Verdict
    case: int = Field(..., ge=1, le=6)
    epsilon: float | None = None
    boundary: bool = False
    k: list[float]
    modes: list[ModeVerdict] = []
    critical: list[CriticalInterval] = []
    critical_mass: float | None = None

    def record_line(self) -> str:
        eps = "-" if self.epsilon is None else f"{self.epsilon:.6g}"
        k = ",".join("inf" if math.isinf(x) else f"{x:.6g}" for x in self.k)
        return f"verdict={self.verdict} case={self.case} epsilon={eps} K={k}"


# --------------------------------------------------------------------------- #
# Minimizer                                                                    #
# --------------------------------------------------------------------------- #

class MinimizerSummary(BaseModel):
    kind: Literal["updir", "b0", "plfree-dodir", "oracle"]
    alpha: float | None = None
    multipliers: dict[str, float]
    entropy: float = Field(..., ge=0.0)
    residuals: list[float] = []
    mean_fading: float | None = None
    total_mass: float | None = None
    converged: bool = True
    note: str | None = None
