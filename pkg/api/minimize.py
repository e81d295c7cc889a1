"""
API route for the relative-entropy minimizers.

Endpoints:
  POST /minimize/  -- multipliers, entropy and residuals of one minimizer
"""
import asyncio

from fastapi import APIRouter, Depends

from api.common import http_error, load_payload
from core.errors import FrustrationError
from core.minimizer import solve_kind
from models.api import MinimizeRequest, MinimizeResponse
from utils.rate_limit import check_compute_rate_limit

router = APIRouter()


@router.post("/", dependencies=[Depends(check_compute_rate_limit)])
async def minimize(body: MinimizeRequest) -> MinimizeResponse:
    scenario = load_payload(body.scenario)
    try:
        summary, _ = await asyncio.to_thread(
            solve_kind, scenario.model, body.kind, body.c, body.b, body.base_fading, body.n_s, body.n_u, body.layout,
        )
    except FrustrationError as exc:
        raise http_error(exc) from exc
    return MinimizeResponse(scenario_hash=scenario.hash, summary=summary)
