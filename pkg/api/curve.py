"""
API route for the a-priori frustration curve.

Endpoints:
  POST /curve/  -- points (c, p(c)) of one mode on an equidistant c-grid
"""
import asyncio

import numpy as np
from fastapi import APIRouter, Depends

from api.common import http_error, load_payload
from core.errors import FrustrationError
from core.experiments import frustration_curve
from models.api import CurveRequest, CurveResponse
from utils.rate_limit import check_compute_rate_limit

router = APIRouter()


@router.post("/", dependencies=[Depends(check_compute_rate_limit)])
async def compute_curve(body: CurveRequest) -> CurveResponse:
    scenario = load_payload(body.scenario)
    c_grid = np.linspace(body.c_min, body.c_max, body.points)
    try:
        points = await asyncio.to_thread(
            frustration_curve, scenario.model, body.mode, c_grid, body.resolution, scenario.kernel, body.base_fading,
        )
    except FrustrationError as exc:
        raise http_error(exc) from exc
    return CurveResponse(scenario_hash=scenario.hash, mode=body.mode, points=points)
