"""
Frustration Analyzer – FastAPI entry point.
Start: uvicorn main:app --reload --port 8000
"""
import logging
from contextlib import asynccontextmanager

from dotenv import load_dotenv
from fastapi import FastAPI, Request

# Load .env (FRUSTRATION_*) before anything reads the settings
load_dotenv()

from api import classify, curve, minimize, montecarlo  # noqa: E402
from utils.db import cleanup_old_runs, init_db  # noqa: E402
from utils.settings import get_settings  # noqa: E402

logger = logging.getLogger("main")


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Startup: initialise DB schema and remove runs older than the retention period."""
    await init_db()
    removed = await cleanup_old_runs(days=get_settings().run_retention_days)
    if removed:
        logger.info("%d alte Laeufe entfernt", removed)
    yield


app = FastAPI(title="Frustration Analyzer", version="0.1.0", lifespan=lifespan)


# --------------------------------------------------------------------------- #
# Security Headers Middleware                                                  #
# --------------------------------------------------------------------------- #

@app.middleware("http")
async def security_headers(request: Request, call_next):
    """Add security headers to every response."""
    response = await call_next(request)
    response.headers["X-Frame-Options"] = "DENY"
    response.headers["X-Content-Type-Options"] = "nosniff"
    response.headers["Referrer-Policy"] = "strict-origin-when-cross-origin"
    response.headers["Content-Security-Policy"] = "default-src 'none'"
    return response


# Register all routers
app.include_router(curve.router, prefix="/curve", tags=["curve"])
app.include_router(classify.router, prefix="/classify", tags=["classify"])
app.include_router(minimize.router, prefix="/minimize", tags=["minimize"])
app.include_router(montecarlo.router, prefix="/mc", tags=["mc"])
