"""CSV / manifest emission and parsing.

Floats are written with 17 significant digits so every value round-trips
exactly.  Files are UTF-8 with LF line endings.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .protocol import ConcurrenceSeries

SERIES_COLUMNS = (
    "gamma_t",
    "c_sys_mean",
    "c_sys_stderr",
    "c_env_mean",
    "c_env_stderr",
    "p010_sys",
    "p010_env",
    "mitigated",
)
ANALYTIC_COLUMNS = ("gamma_t", "c_sys", "c_env")
DIAGNOSTIC_COLUMNS = ("lambda_over_pi", "p0")


class CSVFormatError(ValueError):
    pass


def fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".16e")


def _write(path: Path, header: Sequence[str], rows: list[list[str]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")


def series_rows(series: ConcurrenceSeries) -> list[list[str]]:
    rows = []
    sys_, env = series.system, series.environment
    for i, gt in enumerate(series.gamma_t):
        rows.append(
            [
                fmt(gt),
                fmt(sys_.mean[i]) if sys_ else "",
                fmt(sys_.stderr[i]) if sys_ else "",
                fmt(env.mean[i]) if env else "",
                fmt(env.stderr[i]) if env else "",
                fmt(sys_.p010[i]) if sys_ else "",
                fmt(env.p010[i]) if env else "",
                "1" if series.mitigated else "0",
            ]
        )
    return rows


def write_series_csv(path: str | Path, series: ConcurrenceSeries) -> None:
    _write(Path(path), SERIES_COLUMNS, series_rows(series))


def write_analytic_csv(path: str | Path, grid: Sequence[float], c_sys: Sequence[float], c_env: Sequence[float]) -> None:
    _write(Path(path), ANALYTIC_COLUMNS, [[fmt(g), fmt(a), fmt(b)] for g, a, b in zip(grid, c_sys, c_env)])


def write_diagnostic_csv(path: str | Path, rows: Sequence[tuple[float, float]]) -> None:
    _write(Path(path), DIAGNOSTIC_COLUMNS, [[fmt(a), fmt(b)] for a, b in rows])


def read_csv(path: str | Path, expected: Sequence[str] | None = None) -> dict[str, np.ndarray]:
    """Columns as float arrays (empty cells -> NaN)."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CSVFormatError(f"{path}: empty file") from None
    if expected is not None and tuple(header) != tuple(expected):
        raise CSVFormatError(f"{path}: unexpected header {header}")
    cols: dict[str, list[float]] = {h: [] for h in header}
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise CSVFormatError(f"{path}:{lineno}: expected {len(header)} fields")
        for h, cell in zip(header, row):
            try:
                cols[h].append(float(cell) if cell != "" else math.nan)
            except ValueError:
                raise CSVFormatError(f"{path}:{lineno}: bad number {cell!r} in {h}") from None
    return {h: np.array(v) for h, v in cols.items()}


def write_json(path: str | Path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="")
