"""Run artifacts on disk: one directory per run with record.csv + summary.json."""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ConfigurationError
from .harness import CSV_HEADER, RunRecord


def write_run_artifacts(record: RunRecord, run_dir: str | Path) -> Path:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "record.csv").write_text(record.csv_text(), encoding="utf-8")
    summary = json.dumps(record.summary(), indent=2, sort_keys=True) + "\n"
    (run_dir / "summary.json").write_text(summary, encoding="utf-8")
    return run_dir


def read_record_csv(run_dir: str | Path) -> tuple[list[str], list[list[str]]]:
    """Header fields and raw string rows of a run's record.csv."""
    path = Path(run_dir) / "record.csv"
    if not path.is_file():
        raise ConfigurationError(f"{path} not found; not a run directory?")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigurationError(f"{path} does not carry the expected header")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:] if line]
    return header, rows


def read_summary(run_dir: str | Path) -> dict:
    path = Path(run_dir) / "summary.json"
    if not path.is_file():
        raise ConfigurationError(f"{path} not found; not a run directory?")
    return json.loads(path.read_text(encoding="utf-8"))
