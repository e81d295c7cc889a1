"""
Run store for Monte Carlo runs started over HTTP.
Uses aiosqlite with WAL mode so status polls never block a writer.

Schema overview:
  runs      – one row per run (mc | conditioned), status and the final
              report as JSON
  run_hits  – per-hit records of a finished run
"""
import json
import uuid
from datetime import datetime, timedelta, timezone
from pathlib import Path

import aiosqlite

from models.results import ExperimentReport
from utils.settings import get_settings


def db_path() -> Path:
    return get_settings().db_path


async def _connect() -> aiosqlite.Connection:
    db = await aiosqlite.connect(db_path())
    db.row_factory = aiosqlite.Row
    await db.execute("PRAGMA journal_mode=WAL")
    await db.execute("PRAGMA foreign_keys=ON")
    return db


async def init_db() -> None:
    """Create all tables on first startup (idempotent – uses IF NOT EXISTS)."""
    path = db_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    async with aiosqlite.connect(path) as db:
        await db.execute("PRAGMA journal_mode=WAL")
        await db.execute("PRAGMA foreign_keys=ON")

        await db.execute("""
            CREATE TABLE IF NOT EXISTS runs (
                id            INTEGER PRIMARY KEY AUTOINCREMENT,
                run_id        TEXT    NOT NULL UNIQUE,   -- UUID v4
                kind          TEXT    NOT NULL,          -- 'mc' | 'conditioned'
                scenario_hash TEXT    NOT NULL,
                status        TEXT    NOT NULL DEFAULT 'running',
                                      -- 'running' | 'completed' | 'failed'
                n_samples     INTEGER NOT NULL,
                processed     INTEGER NOT NULL DEFAULT 0,
                hit_count     INTEGER,
                error         TEXT,
                report        TEXT,                      -- ExperimentReport JSON
                created_at    TEXT    NOT NULL           -- ISO-8601
            )
        """)

        await db.execute("""
            CREATE TABLE IF NOT EXISTS run_hits (
                id                  INTEGER PRIMARY KEY AUTOINCREMENT,
                run_id              TEXT    NOT NULL REFERENCES runs(run_id)
                                             ON DELETE CASCADE,
                hit_id              INTEGER NOT NULL,
                sample_index        INTEGER NOT NULL,
                n_users             INTEGER NOT NULL,
                mean_fading         REAL    NOT NULL,
                frustrated_fraction REAL    NOT NULL
            )
        """)

        await db.execute("""
            CREATE INDEX IF NOT EXISTS idx_run_hits_run_id
                ON run_hits(run_id)
        """)

        await db.execute("""
            CREATE INDEX IF NOT EXISTS idx_runs_status
                ON runs(status)
        """)

        await db.commit()


async def create_run(kind: str, scenario_hash: str, n_samples: int) -> str:
    run_id = str(uuid.uuid4())
    db = await _connect()
    try:
        await db.execute(
            "INSERT INTO runs (run_id, kind, scenario_hash, n_samples, created_at) VALUES (?, ?, ?, ?, ?)",
            (run_id, kind, scenario_hash, n_samples, datetime.now(tz=timezone.utc).isoformat()),
        )
        await db.commit()
    finally:
        await db.close()
    return run_id


async def update_progress(run_id: str, processed: int) -> None:
    """Persist the processed sample count of a running run; never moves backwards."""
    db = await _connect()
    try:
        await db.execute(
            "UPDATE runs SET processed = MAX(processed, ?) WHERE run_id = ? AND status = 'running'",
            (processed, run_id),
        )
        await db.commit()
    finally:
        await db.close()


async def finish_run(run_id: str, report: ExperimentReport) -> None:
    """Store the report and its hits in one transaction."""
    db = await _connect()
    try:
        await db.execute(
            "UPDATE runs SET status = 'completed', processed = ?, hit_count = ?, report = ? WHERE run_id = ?",
            (report.n_samples, report.hit_count, report.model_dump_json(), run_id),
        )
        await db.executemany(
            "INSERT INTO run_hits (run_id, hit_id, sample_index, n_users, mean_fading, frustrated_fraction)"
            " VALUES (?, ?, ?, ?, ?, ?)",
            [(run_id, h.hit_id, h.sample_index, h.n_users, h.mean_fading, h.frustrated_fraction)
             for h in report.hits],
        )
        await db.commit()
    finally:
        await db.close()


async def fail_run(run_id: str, error: str) -> None:
    db = await _connect()
    try:
        await db.execute("UPDATE runs SET status = 'failed', error = ? WHERE run_id = ?", (error, run_id))
        await db.commit()
    finally:
        await db.close()


async def get_run(run_id: str) -> dict | None:
    db = await _connect()
    try:
        cursor = await db.execute("SELECT * FROM runs WHERE run_id = ?", (run_id,))
        row = await cursor.fetchone()
    finally:
        await db.close()
    if row is None:
        return None
    out = dict(row)
    out["report"] = json.loads(out["report"]) if out["report"] else None
    return out


async def list_runs(limit: int = 20) -> list[dict]:
    db = await _connect()
    try:
        cursor = await db.execute(
            "SELECT run_id, kind, scenario_hash, status, n_samples, processed, hit_count, created_at"
            " FROM runs ORDER BY id DESC LIMIT ?",
            (limit,),
        )
        rows = await cursor.fetchall()
    finally:
        await db.close()
    return [dict(r) for r in rows]


async def count_running() -> int:
    db = await _connect()
    try:
        cursor = await db.execute("SELECT COUNT(*) FROM runs WHERE status = 'running'")
        row = await cursor.fetchone()
    finally:
        await db.close()
    return int(row[0])


async def get_hits(run_id: str) -> list[dict]:
    db = await _connect()
    try:
        cursor = await db.execute(
            "SELECT hit_id, sample_index, n_users, mean_fading, frustrated_fraction"
            " FROM run_hits WHERE run_id = ? ORDER BY hit_id",
            (run_id,),
        )
        rows = await cursor.fetchall()
    finally:
        await db.close()
    return [dict(r) for r in rows]


async def cleanup_old_runs(days: int = 30) -> int:
    """
    Delete runs (and their hits via CASCADE) older than `days` days.
    Called once on startup. Returns the number of deleted runs.
    """
    cutoff = (datetime.now(tz=timezone.utc) - timedelta(days=days)).isoformat()
    async with aiosqlite.connect(db_path()) as db:
        await db.execute("PRAGMA journal_mode=WAL")
        await db.execute("PRAGMA foreign_keys=ON")
        cursor = await db.execute(
            "DELETE FROM runs WHERE created_at < ?",
            (cutoff,),
        )
        await db.commit()
        return cursor.rowcount
