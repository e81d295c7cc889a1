"""
Runtime settings read from the environment (after load_dotenv()).

  FRUSTRATION_DB_PATH             run store (default data/frustration.db)
  FRUSTRATION_WORKERS             Monte Carlo worker threads
  FRUSTRATION_BLOCK_SIZE          samples per seeded block
  FRUSTRATION_LOG_LEVEL           logging level for the CLI
  FRUSTRATION_RUN_RETENTION_DAYS  runs older than this are deleted on startup
"""
import os
from pathlib import Path

from pydantic import BaseModel, Field

from core.experiments import DEFAULT_BLOCK_SIZE


class RuntimeSettings(BaseModel):
    db_path: Path = Path("data/frustration.db")
    workers: int = Field(4, ge=1)
    block_size: int = Field(DEFAULT_BLOCK_SIZE, ge=1)
    log_level: str = "INFO"
    run_retention_days: int = Field(30, ge=1)

    @classmethod
    def from_env(cls) -> "RuntimeSettings":
        values = {
            "db_path": os.getenv("FRUSTRATION_DB_PATH"),
            "workers": os.getenv("FRUSTRATION_WORKERS"),
            "block_size": os.getenv("FRUSTRATION_BLOCK_SIZE"),
            "log_level": os.getenv("FRUSTRATION_LOG_LEVEL"),
            "run_retention_days": os.getenv("FRUSTRATION_RUN_RETENTION_DAYS"),
        }
        return cls(**{k: v for k, v in values.items() if v})


def get_settings() -> RuntimeSettings:
    """Fresh settings on every call so tests can patch the environment."""
    return RuntimeSettings.from_env()
