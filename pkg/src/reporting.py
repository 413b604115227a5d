"""Result payload serialization and file output."""

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable

from src.engine.simulation import SimulationResult
from src.errors import SaveError
from src.models.perimeter import ScheduleRealization

RESULT_CSV_COLUMNS = [
    "estimate", "ci", "replications", "seed", "generator", "strategy", "lambda", "t", "p",
]
REALIZATION_CSV_COLUMNS = ["dispatch_time", "direction", "tag"]


def to_json(payload: Any) -> str:
    """Stable JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def result_to_row(result: SimulationResult) -> dict:
    return {
        "estimate": repr(result.estimate),
        "ci": repr(result.ci_half_width),
        "replications": result.replications,
        "seed": result.seed,
        "generator": result.generator,
        "strategy": result.strategy,
        "lambda": repr(result.lam),
        "t": repr(result.t),
        "p": repr(result.p),
    }


def results_to_csv(results: Iterable[SimulationResult]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=RESULT_CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for result in results:
        writer.writerow(result_to_row(result))
    return buffer.getvalue()


def realization_to_csv(realization: ScheduleRealization) -> str:
    """Dispatch log of a realization: one row per patroller."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REALIZATION_CSV_COLUMNS)
    for event in realization.events:
        writer.writerow([repr(event.dispatch_time), event.direction.value, event.tag.label])
    return buffer.getvalue()


def save_payload(content: str, output_path: Path) -> None:
    """Write a payload to disk, removing any partial file on failure.

    Raises:
        SaveError: If writing to disk fails.
    """
    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(content, encoding="utf-8")
    except OSError as e:
        if output_path.is_file():
            output_path.unlink()
        raise SaveError(f"Failed to save results to {output_path}: {e}") from e
