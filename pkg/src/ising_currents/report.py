"""JSON reports for verification suites and CSV tables for sweeps."""
from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from . import __version__
from .errors import PreconditionError
from .graph import graph_to_dict
from .suites import Record, SuiteConfig, run_records

OUTPUT_ENV = "ISING_RC_OUTPUT_DIR"
TABLE_COLUMNS = ("beta", "h", "observable", "value", "stderr", "method")


def output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "reports"))


@dataclass
class Report:
    suite: str
    records: list[Record]
    environment: dict
    wall_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def summary(self) -> dict:
        failed = [r for r in self.records if not r.passed]
        return {
            "pass": self.passed,
            "records": len(self.records),
            "failed": len(failed),
            "max_gap": max((r.gap for r in self.records), default=0.0),
        }

    def content(self) -> dict:
        """Everything except timing; identical across runs with the same config and seed."""
        out = {
            "suite": self.suite,
            "summary": self.summary(),
            "environment": self.environment,
            "records": [r.as_dict() for r in self.records],
        }
        out.update(self.extra)
        return out

    def to_dict(self) -> dict:
        return {**self.content(), "timing": {"wall_seconds": self.wall_seconds}}

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path


def run_suite(cfg: SuiteConfig) -> Report:
    start = time.perf_counter()
    records = run_records(cfg)
    env = {
        "version": __version__,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "tolerance": cfg.tol,
        "tolerance_overridden": cfg.tolerance is not None,
        "betas": list(cfg.betas),
        "hs": list(cfg.hs),
        "graph": graph_to_dict(cfg.graph) if cfg.graph is not None else None,
    }
    return Report(cfg.suite, records, env, time.perf_counter() - start)


def emit_table(rows: Iterable[Mapping], path: str | Path) -> Path:
    """Write rows as CSV with the fixed column order; floats use ``repr`` for exact round trips."""
    rows = list(rows)
    if not rows:
        raise PreconditionError("no results to write")
    lines = []
    for row in rows:
        missing = [c for c in TABLE_COLUMNS if c not in row]
        if missing:
            raise PreconditionError(f"row lacks columns {missing}")
        lines.append([repr(row[c]) if isinstance(row[c], float) else row[c] for c in TABLE_COLUMNS])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_COLUMNS)
        writer.writerows(lines)
    return path
