"""
Shared helpers of the routers: scenario parsing and error translation.
"""
import logging

from fastapi import HTTPException

from core.errors import FrustrationError
from models.api import ScenarioPayload
from utils.scenario_file import Scenario, parse_scenario

logger = logging.getLogger("api.common")

_STATUS_BY_CODE = {
    "INFEASIBLE": 422,
    "SOLVER": 500,
}


def http_error(exc: FrustrationError) -> HTTPException:
    """FrustrationError -> HTTPException: 422 infeasible, 500 solver, 400 otherwise."""
    status = _STATUS_BY_CODE.get(exc.code, 400)
    if status == 500:
        logger.error("Solver-Fehler: %s", exc)
    return HTTPException(status_code=status, detail=f"[{exc.code}] {exc}")


def load_payload(payload: ScenarioPayload) -> Scenario:
    try:
        return parse_scenario(payload.text, payload.format, "<request>")
    except FrustrationError as exc:
        raise http_error(exc) from exc
