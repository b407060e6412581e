"""CSV and JSON emission helpers.

CSV bodies are deterministic: floats are written with shortest round-trip
repr and no timestamps appear anywhere in them.  Wall-clock and other
run-specific metadata live only in the JSON summary.
"""

from __future__ import annotations

import csv
import json
import numbers
from pathlib import Path


def _fmt(cell):
    if isinstance(cell, bool):
        return "true" if cell else "false"
    if isinstance(cell, numbers.Integral):
        return str(int(cell))
    if isinstance(cell, numbers.Real):
        return repr(float(cell))
    return str(cell)


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(c) for c in row])


def write_summary(path: Path, summary: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
