"""CSV/JSON serialization of datasets and reports.

CSV: UTF-8, one header row, floats in scientific notation with 17 significant
digits so values round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from chiral_kerr.figures import Dataset

FORMATS = ("csv", "json")


def format_float(value: float) -> str:
    return f"{value:.16e}"


def dataset_to_csv(ds: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ds.columns)
    for row in ds.rows:
        writer.writerow([format_float(v) for v in row])
    return buf.getvalue()


def _json_number(value: float):
    # JSON has no NaN/Inf; keep the file valid
    return value if math.isfinite(value) else None


def dataset_to_json(ds: Dataset) -> str:
    payload = {
        "name": ds.name,
        "columns": list(ds.columns),
        "rows": [[_json_number(float(v)) for v in row] for row in ds.rows],
    }
    return json.dumps(payload, indent=1) + "\n"


def render(ds: Dataset, fmt: str) -> str:
    if fmt == "csv":
        return dataset_to_csv(ds)
    if fmt == "json":
        return dataset_to_json(ds)
    raise ValueError(f"unknown format {fmt!r}")


def write_dataset(ds: Dataset, path, fmt: str = "csv") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(ds, fmt), encoding="utf-8")
    return path


def read_csv(path) -> tuple[list[str], list[list[float]]]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return header, rows


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
