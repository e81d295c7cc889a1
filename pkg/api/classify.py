"""
API route for the decay classifier.

Endpoints:
  POST /classify/  -- Exponential / Subexponential verdict for (b, c)
"""
import asyncio

from fastapi import APIRouter, Depends

from api.common import http_error, load_payload
from core.classifier import classify_fixed, classify_random_base
from core.errors import FrustrationError
from models.api import ClassifyRequest, ClassifyResponse
from utils.rate_limit import check_compute_rate_limit
from utils.settings import get_settings

router = APIRouter()


@router.post("/", dependencies=[Depends(check_compute_rate_limit)])
async def classify(body: ClassifyRequest) -> ClassifyResponse:
    """A random base fading is classified over its whole law unless a value is fixed."""
    scenario = load_payload(body.scenario)
    model = scenario.model
    try:
        if model.base.kind == "random" and body.base_fading is None:
            verdict = await asyncio.to_thread(
                classify_random_base, model, body.b, body.c, body.resolution, scenario.kernel,
                body.n_u, get_settings().workers,
            )
        else:
            verdict = await asyncio.to_thread(
                classify_fixed, model, body.b, body.c, body.resolution, scenario.kernel, body.base_fading,
            )
    except FrustrationError as exc:
        raise http_error(exc) from exc
    return ClassifyResponse(scenario_hash=scenario.hash, verdict=verdict, record=verdict.record_line())
