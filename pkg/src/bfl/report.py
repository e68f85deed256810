"""Run reports: CSV time series and JSON mirrors with the full config.

CSV: comma separated, '.' decimal, one header row, LF line endings, floats
in shortest round-trip form, so identical (config, seed) runs produce
byte-identical files. The column schema is versioned and echoed in the JSON
report.
"""

from __future__ import annotations

import json
from pathlib import Path

from .config import ExperimentConfig, serialize_config
from .probe import DiagnosticsRecord

CSV_SCHEMA = "bfl-run-csv-1"
JSON_SCHEMA = "bfl-run-json-1"

EXIT_OK = 0
EXIT_DIVERGED = 2
EXIT_THRESHOLD = 3
EXIT_CONFIG = 4

_BASE_COLUMNS = ("t", "unit_drift", "energy", "grad_norm", "rhs_norm",
                 "rhs_dual_norm", "delta_norm")


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def columns_for(records: list[DiagnosticsRecord]) -> list[str]:
    cols = list(_BASE_COLUMNS)
    if records and records[0].bound_margins:
        cols += [f"margin_{k}" for k in sorted(records[0].bound_margins)]
    cols.append("oracle_error")
    return cols


def csv_rows(records: list[DiagnosticsRecord]) -> list[dict]:
    rows = []
    for r in records:
        row = {
            "t": r.t,
            "unit_drift": r.unit_drift,
            "energy": r.energy,
            "grad_norm": r.grad_norm,
            "rhs_norm": r.rhs_norm,
            "rhs_dual_norm": r.rhs_dual_norm,
            "delta_norm": r.delta_norm,
            "oracle_error": r.oracle_error,
        }
        for k, v in r.bound_margins.items():
            row[f"margin_{k}"] = v
        rows.append(row)
    return rows


def render_csv(records: list[DiagnosticsRecord]) -> str:
    cols = columns_for(records)
    lines = [",".join(cols)]
    for row in csv_rows(records):
        lines.append(",".join(_fmt(row.get(c)) for c in cols))
    return "\n".join(lines) + "\n"


def write_csv(path, records: list[DiagnosticsRecord]) -> None:
    Path(path).write_text(render_csv(records), newline="\n")


def build_report(cfg: ExperimentConfig, records: list[DiagnosticsRecord],
                 status: str, exit_code: int, extras: dict | None = None) -> dict:
    report = {
        "schema": JSON_SCHEMA,
        "csv_schema": CSV_SCHEMA,
        "config": serialize_config(cfg),
        "status": status,
        "exit_code": exit_code,
        "columns": columns_for(records),
        "rows": csv_rows(records),
    }
    if extras:
        report.update(extras)
    return report


def write_json(path, report: dict) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                          newline="\n")
