"""
Pydantic request/response bodies of the HTTP service.
"""
from typing import Literal

from pydantic import BaseModel, Field

from core.minimizer import MinimizerKind
from core.sir import Mode
from models.network import GridResolution
from models.results import CurvePoint, DecayVerdict, MinimizerSummary

RunStatusValue = Literal["running", "completed", "failed"]


# --------------------------------------------------------------------------- #
# Requests                                                                     #
# --------------------------------------------------------------------------- #

class ScenarioPayload(BaseModel):
    """Scenario file content sent inline."""
    text: str = Field(..., min_length=1, max_length=200_000)
    format: Literal["ini", "yaml"] = "ini"


class CurveRequest(BaseModel):
    scenario: ScenarioPayload
    mode: Mode = "up-dir"
    c_min: float = Field(..., gt=0)
    c_max: float = Field(..., gt=0)
    points: int = Field(50, ge=2, le=2001)
    base_fading: float | None = None
    resolution: GridResolution | None = None


class ClassifyRequest(BaseModel):
    scenario: ScenarioPayload
    b: list[float] = Field(..., min_length=4, max_length=4)
    c: list[float] = Field(..., min_length=4, max_length=4)
    base_fading: float | None = None
    resolution: GridResolution | None = None
    n_u: int = Field(33, ge=2, le=513)


class MinimizeRequest(BaseModel):
    scenario: ScenarioPayload
    kind: MinimizerKind = "updir"
    c: float = Field(..., gt=0)
    b: float = Field(0.0, ge=0)
    base_fading: float | None = None
    n_s: int = Field(40, ge=2, le=400)
    n_u: int = Field(20, ge=2, le=200)
    layout: Literal["radial", "cartesian"] = "radial"


class MonteCarloRequest(BaseModel):
    scenario: ScenarioPayload
    lam: float = Field(..., gt=0)
    n_samples: int = Field(..., ge=1, le=2_000_000)
    c: float = Field(..., ge=0)
    b_fraction: float = Field(..., ge=0)
    mode: Mode = "up-dir"
    seed: int = Field(0, ge=0)
    absolute: bool = False
    count_threshold: int | None = Field(None, ge=0)


# --------------------------------------------------------------------------- #
# Responses                                                                    #
# --------------------------------------------------------------------------- #

class CurveResponse(BaseModel):
    scenario_hash: str
    mode: Mode
    points: list[CurvePoint]


class ClassifyResponse(BaseModel):
    scenario_hash: str
    verdict: DecayVerdict
    record: str             # 'verdict=... case=... epsilon=... K=...'


class MinimizeResponse(BaseModel):
    scenario_hash: str
    summary: MinimizerSummary


class RunStatus(BaseModel):
    run_id: str
    kind: Literal["mc", "conditioned"]
    scenario_hash: str
    status: RunStatusValue
    n_samples: int
    processed: int
    hit_count: int | None = None
    error: str | None = None
    created_at: str         # ISO-8601


class HitRow(BaseModel):
    hit_id: int
    sample_index: int
    n_users: int
    mean_fading: float
    frustrated_fraction: float
