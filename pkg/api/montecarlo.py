"""
API routes for rare-event Monte Carlo runs.

Endpoints:
  POST /mc/start              -- validate scenario, create run, start in background
  GET  /mc/{run_id}/status    -- polling endpoint for progress
  GET  /mc/{run_id}/report    -- ExperimentReport of a completed run
  GET  /mc/{run_id}/hits      -- per-hit records
  GET  /mc/                   -- most recent runs
"""
import asyncio
import logging

from fastapi import APIRouter, BackgroundTasks, Depends, HTTPException, Query

from api.common import http_error, load_payload
from core.errors import FrustrationError
from core.experiments import rare_event_mc
from models.api import HitRow, MonteCarloRequest, RunStatus
from models.results import ExperimentReport
from utils import db
from utils.rate_limit import check_mc_rate_limit
from utils.scenario_file import Scenario
from utils.settings import get_settings

logger = logging.getLogger("api.montecarlo")

router = APIRouter()

_MAX_CONCURRENT_RUNS = 2

# run_id -> samples processed, written from the worker thread
_progress: dict[str, int] = {}


async def _drain(pending: list) -> None:
    """Wait for the progress writes still queued on the loop."""
    results = await asyncio.gather(*(asyncio.wrap_future(f) for f in pending), return_exceptions=True)
    for res in results:
        if isinstance(res, Exception):
            logger.warning("Fortschritt konnte nicht gespeichert werden: %s", res)


async def _execute(run_id: str, body: MonteCarloRequest, scenario: Scenario) -> None:
    settings = get_settings()
    loop = asyncio.get_running_loop()
    pending: list = []

    # called from the worker thread once per finished block
    def progress(done: int, total: int) -> None:
        _progress[run_id] = done
        pending.append(asyncio.run_coroutine_threadsafe(db.update_progress(run_id, done), loop))

    try:
        report = await asyncio.to_thread(
            rare_event_mc,
            scenario.model,
            body.lam,
            body.n_samples,
            body.c,
            body.b_fraction,
            mode=body.mode,
            seed=body.seed,
            kernel=scenario.kernel,
            absolute=body.absolute,
            block_size=settings.block_size,
            workers=settings.workers,
            count_threshold=body.count_threshold,
            progress=progress,
        )
    except FrustrationError as exc:
        await _drain(pending)
        logger.warning("Lauf %s fehlgeschlagen: %s", run_id, exc)
        await db.fail_run(run_id, f"[{exc.code}] {exc}")
    except Exception as exc:
        await _drain(pending)
        logger.exception("Lauf %s abgebrochen", run_id)
        await db.fail_run(run_id, str(exc))
    else:
        await _drain(pending)
        await db.finish_run(run_id, report)
        logger.info("Lauf %s abgeschlossen: %d Treffer", run_id, report.hit_count)
    finally:
        _progress.pop(run_id, None)


def _status(row: dict) -> RunStatus:
    return RunStatus(
        run_id=row["run_id"],
        kind=row["kind"],
        scenario_hash=row["scenario_hash"],
        status=row["status"],
        n_samples=row["n_samples"],
        processed=max(row["processed"], _progress.get(row["run_id"], 0)),
        hit_count=row["hit_count"],
        error=row.get("error"),
        created_at=row["created_at"],
    )


async def _require(run_id: str) -> dict:
    row = await db.get_run(run_id)
    if row is None:
        raise HTTPException(status_code=404, detail=f"Lauf nicht gefunden: {run_id}")
    return row


# --------------------------------------------------------------------------- #
# Start run                                                                    #
# --------------------------------------------------------------------------- #

@router.post("/start", dependencies=[Depends(check_mc_rate_limit)])
async def start_run(body: MonteCarloRequest, background_tasks: BackgroundTasks) -> RunStatus:
    """
    Validate the scenario, create the run record, launch the simulation.
    Returns the run status immediately so the client can start polling.
    """
    scenario = load_payload(body.scenario)
    c_plus = scenario.model.qos.c_plus
    if body.c > c_plus:
        raise HTTPException(status_code=400, detail=f"c={body.c} liegt ueber c+={c_plus:.6g}.")
    if not body.absolute and body.b_fraction >= 1:
        raise HTTPException(status_code=400, detail="b_fraction muss kleiner als 1 sein.")

    if await db.count_running() >= _MAX_CONCURRENT_RUNS:
        raise HTTPException(
            status_code=429,
            detail=(
                f"Zu viele gleichzeitige Laeufe (max. {_MAX_CONCURRENT_RUNS}). "
                "Bitte warte, bis ein laufender Lauf abgeschlossen ist."
            ),
        )

    kind = "mc" if body.count_threshold is None else "conditioned"
    run_id = await db.create_run(kind, scenario.hash, body.n_samples)
    background_tasks.add_task(_execute, run_id, body, scenario)
    return _status(await _require(run_id))


# --------------------------------------------------------------------------- #
# Poll / fetch                                                                 #
# --------------------------------------------------------------------------- #

@router.get("/")
async def recent_runs(limit: int = Query(20, ge=1, le=200)) -> list[RunStatus]:
    return [_status(row) for row in await db.list_runs(limit)]


@router.get("/{run_id}/status")
async def run_status(run_id: str) -> RunStatus:
    return _status(await _require(run_id))


@router.get("/{run_id}/report")
async def run_report(run_id: str) -> ExperimentReport:
    row = await _require(run_id)
    if row["status"] != "completed":
        raise HTTPException(status_code=409, detail=f"Lauf ist nicht abgeschlossen (Status: {row['status']}).")
    return ExperimentReport.model_validate(row["report"])


@router.get("/{run_id}/hits")
async def run_hits(run_id: str) -> list[HitRow]:
    await _require(run_id)
    return [HitRow(**row) for row in await db.get_hits(run_id)]
