"""CSV and JSON emission for sweep tables and single-point reports."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from pathlib import Path
from typing import Optional, Union

import numpy as np

from lrsinr.estimators import SinrLossReport
from lrsinr.experiments import SweepResult

REPORT_COLUMNS = ["theta_deg", "c", "K", "trials", "rho_hat", "rho_lr", "rho_hat_lr",
                  "pred_fullrank", "pred_lr_spiked", "pred_lr_corrected", "pred_gifo"]


def fmt(value) -> str:
    """Render one cell; floats get 12 significant digits."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    return str(value)


def as_table(result: Union[SweepResult, SinrLossReport]) -> SweepResult:
    """View a report as a one-row table so both share the writers."""
    if isinstance(result, SweepResult):
        return result
    row = {k: getattr(result, k) for k in REPORT_COLUMNS}
    if result.flag:
        row["flag"] = result.flag
    return SweepResult("theta_deg", list(REPORT_COLUMNS), [row])


def _columns(table: SweepResult) -> list:
    cols = list(table.columns)
    if any(row.get("flag") for row in table.rows):
        cols.append("flag")
    return cols


def csv_text(result) -> str:
    table = as_table(result)
    cols = _columns(table)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in table.rows:
        w.writerow([fmt(row.get(c)) if c != "flag" else row.get("flag", "") for c in cols])
    return buf.getvalue()


def meta_csv_text(meta: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for key, value in meta.items():
        w.writerow([key, fmt(value)])
    return buf.getvalue()


def meta_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.meta.csv")


def write_csv(result, path: Union[str, Path]) -> Optional[Path]:
    """Write the table to ``path`` (UTF-8). Scalar annotations, if any, go to
    ``<stem>.meta.csv`` next to it; that path is returned."""
    path = Path(path)
    path.write_text(csv_text(result), encoding="utf-8")
    table = as_table(result)
    if table.meta:
        side = meta_path(path)
        side.write_text(meta_csv_text(table.meta), encoding="utf-8")
        return side
    return None


def _jsonable(value):
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


def json_text(result) -> str:
    if isinstance(result, SinrLossReport):
        doc = {k: _jsonable(v) for k, v in dataclasses.asdict(result).items()}
    else:
        doc = {
            "axis_name": result.axis_name,
            "columns": _columns(result),
            "rows": [{k: _jsonable(v) for k, v in row.items()} for row in result.rows],
            "meta": {k: _jsonable(v) for k, v in result.meta.items()},
        }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_json(result, path: Union[str, Path]) -> None:
    """Non-finite floats are written as ``null``."""
    Path(path).write_text(json_text(result), encoding="utf-8")


def read_csv(path: Union[str, Path]) -> list:
    """Rows of a CSV written by :func:`write_csv` as dicts of strings."""
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
