"""Experiment records and their CSV / JSON serialization.

Floats are written with ``repr`` so a row round-trips exactly and two runs
with the same seed produce identical bytes.  ``wall_ms`` is always the last
column, which makes it easy to drop before comparing files.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Sequence


@dataclass
class ExperimentRecord:
    run_id: str
    subcommand: str
    m: int
    r: int
    t: str
    dim: int
    gap: float
    mode: str
    max_err: float
    mean_err: float
    residual_ancilla: float
    calls_u: int
    calls_cu: int
    calls_uinv: int
    calls_cuinv: int
    seed: int
    wall_ms: int

    def __post_init__(self):
        for name in ("calls_u", "calls_cu", "calls_uinv", "calls_cuinv"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


FIELDS: tuple[str, ...] = tuple(f.name for f in fields(ExperimentRecord))


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_table(header: Sequence[str], rows: Iterable[Sequence], stream) -> None:
    """Comma separated, header first, LF line endings."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    write_table(FIELDS, ([getattr(r, f) for f in FIELDS] for r in records), buf)
    return buf.getvalue()


def records_to_json(records: Iterable[ExperimentRecord]) -> str:
    return json.dumps([asdict(r) for r in records], indent=1) + "\n"


def table_to_json(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    return json.dumps([dict(zip(header, row)) for row in rows], indent=1) + "\n"


def strip_wall_ms(csv_text: str) -> str:
    """Drop the final column from every line (used for determinism checks)."""
    return "\n".join(line.rsplit(",", 1)[0] for line in csv_text.splitlines()) + "\n"
