"""Sweep output writers.

Produces:
- sweep CSV: one row per grid point (scenario,lambda,epsilon,t,infidelity)
- sweep JSON: the full SweepResult including fits

Floats are written with ``repr`` and JSON keys are sorted so identical
results give identical bytes.
"""

import csv
import io
import json
from pathlib import Path
from typing import TextIO

from apps.dq_core.harness import SweepResult

CSV_COLUMNS = ["scenario", "lambda", "epsilon", "t", "infidelity"]


def _write_csv(result: SweepResult, f: TextIO) -> None:
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for p in result.points:
        # Failed points keep their row with an empty infidelity.
        infidelity = "" if p.infidelity is None else repr(p.infidelity)
        writer.writerow([result.scenario, repr(p.lam), repr(p.epsilon), repr(p.t), infidelity])


def sweep_csv_text(result: SweepResult) -> str:
    buffer = io.StringIO()
    _write_csv(result, buffer)
    return buffer.getvalue()


def sweep_json_text(result: SweepResult) -> str:
    return json.dumps(result.to_dict(), indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def write_sweep_csv(result: SweepResult, output_path: Path) -> None:
    """Write the sweep points as CSV.

    Args:
        result: Sweep to write.
        output_path: Path to write the CSV.
    """
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8", newline="") as f:
        _write_csv(result, f)


def write_sweep_json(result: SweepResult, output_path: Path) -> None:
    """Write the sweep, fits included, as JSON.

    Args:
        result: Sweep to write.
        output_path: Path to write the JSON.
    """
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        f.write(sweep_json_text(result))


def render_sweep(result: SweepResult, fmt: str) -> str:
    """Sweep text in ``fmt`` ("csv" or "json")."""
    if fmt == "json":
        return sweep_json_text(result)
    return sweep_csv_text(result)


def write_sweep(result: SweepResult, output_path: Path, fmt: str) -> None:
    if fmt == "json":
        write_sweep_json(result, output_path)
    else:
        write_sweep_csv(result, output_path)
