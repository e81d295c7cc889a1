"""
CSV emission for the CLI. Schemas are fixed:

  users.csv   x0,...,x{d-1},fading
  curve.csv   c,p
  report.csv  stat,value   then a blank line and   hit_id,n_users,mean_fading
  sol.csv     s,u,density

Run metadata (seed, lambda, scenario hash, multipliers) goes into leading
'# key=value, ...' comment lines.
"""
import csv
import logging
import math
from pathlib import Path
from typing import Iterable

import numpy as np

from core.sampler import Sample
from models.results import CurvePoint, ExperimentReport, MinimizerSummary

logger = logging.getLogger("utils.csv_io")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    return str(value)


def _meta_line(meta: dict) -> str:
    return "# " + ", ".join(f"{k}={_fmt(v)}" for k, v in meta.items())


def _open(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open("w", newline="", encoding="utf-8")


def read_meta(path: str | Path) -> dict[str, str]:
    """key=value pairs from the leading comment lines."""
    meta: dict[str, str] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            for item in line[1:].split(","):
                key, _, value = item.strip().partition("=")
                if key:
                    meta[key] = value
    return meta


def write_sample(path: str | Path, sample: Sample) -> Path:
    path = Path(path)
    users = sample.users
    with _open(path) as fh:
        fh.write(_meta_line({
            "lambda": sample.lam,
            "seed": sample.seed.seed,
            "stream": sample.seed.stream,
            "algorithm": sample.seed.algorithm,
            "base_fading": sample.base_fading_draw,
        }) + "\n")
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(users.dim)] + ["fading"])
        for x, f in zip(users.positions, users.fadings):
            writer.writerow([_fmt(float(v)) for v in x] + [_fmt(float(f))])
    logger.info("%d Nutzer nach %s geschrieben", sample.n_users, path)
    return path


def write_curve(path: str | Path, points: Iterable[CurvePoint], meta: dict) -> Path:
    path = Path(path)
    with _open(path) as fh:
        fh.write(_meta_line(meta) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["c", "p"])
        for pt in points:
            writer.writerow([_fmt(pt.c), _fmt(pt.p)])
    return path


def write_report(path: str | Path, report: ExperimentReport) -> Path:
    path = Path(path)
    with _open(path) as fh:
        fh.write(_meta_line({
            "scenario_hash": report.scenario_hash,
            "seed": report.seed.seed,
            "blocks": report.seed.blocks,
            "block_size": report.seed.block_size,
            "algorithm": report.seed.algorithm,
        }) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["stat", "value"])
        for stat, value in report.stat_rows():
            writer.writerow([stat, _fmt(value)])
        writer.writerow([])
        writer.writerow(["hit_id", "n_users", "mean_fading"])
        for hit in report.hits:
            writer.writerow([hit.hit_id, hit.n_users, _fmt(hit.mean_fading)])
    logger.info("Bericht nach %s geschrieben (%d Treffer)", path, report.hit_count)
    return path


def write_solution(
    path: str | Path,
    summary: MinimizerSummary,
    table: tuple[np.ndarray, np.ndarray, np.ndarray],
    scenario_hash: str,
) -> Path:
    path = Path(path)
    meta = {"kind": summary.kind, "alpha_min": summary.alpha, **summary.multipliers,
            "entropy": summary.entropy, "converged": summary.converged, "scenario_hash": scenario_hash}
    s, u, density = table
    with _open(path) as fh:
        fh.write(_meta_line(meta) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["s", "u", "density"])
        for row in zip(s, u, density):
            writer.writerow([_fmt(float(v)) for v in row])
    return path
