"""Report emission: one JSON document, one CSV table, stable bytes.

Everything in the JSON payload is deterministic for a fixed config and
seed except the single top-level "generated_at" line, so two runs may be
compared byte for byte after dropping that line.  Non-finite floats are
serialized as strings ("inf", "-inf", "nan") because JSON has no spelling
for them.
"""

from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path

__all__ = ["CSV_COLUMNS", "sanitize", "render_json", "write_reports"]

CSV_COLUMNS = ("point_id", "norm_x", "iso_residual", "dist", "sqrt_phi",
               "h_orth", "subseq_len", "pass")


def sanitize(value):
    """Recursively make a payload JSON-safe and deterministic."""
    if isinstance(value, dict):
        return {str(k): sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [sanitize(v) for v in value]
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, (int, str)) or value is None:
        return value
    if hasattr(value, "item"):  # numpy scalar
        return sanitize(value.item())
    return str(value)


def render_json(payload: dict, timestamp: str | None = None) -> str:
    """Serialize with "generated_at" first and everything else stable."""
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat()
    document = {"generated_at": timestamp}
    document.update(sanitize(payload))
    return json.dumps(document, indent=2, allow_nan=False) + "\n"


def _csv_cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return value


def write_reports(payload: dict, rows, out_dir, fmt: str,
                  timestamp: str | None = None) -> dict:
    """Write report.json and/or points.csv; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    if fmt in ("json", "both"):
        path = out / "report.json"
        path.write_text(render_json(payload, timestamp), encoding="utf-8")
        written["json"] = str(path)
    if fmt in ("csv", "both"):
        path = out / "points.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow([_csv_cell(row[col]) for col in CSV_COLUMNS])
        written["csv"] = str(path)
    return written
