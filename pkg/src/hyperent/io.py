"""Deterministic text serialisation of fields, curves, profiles and summaries.

Numbers are written with 17 significant digits, which round-trips every
double exactly, so residuals recomputed from a CSV equal those in the
summary.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .analysis import CrossSection
from .errors import DomainError
from .gaussian import ContourField
from .holo import ExtremalCurve
from .hyperfine import EdgeProfile

FIELD_HEADER = ("x", "y", "orbital_summed", "kind", "n", "k", "value")
CURVE_HEADER = ("param", "x", "t", "z", "cumlen")
EDGE_HEADER = ("m", "kx", "k", "value_normalized")
CROSS_HEADER = ("distance_from_boundary", "value", "log_value")


def fmt(v: Optional[float]) -> str:
    """17 significant digits; empty for ``None``."""
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def _opt(v) -> str:
    return "" if v is None else fmt(v)


def _write_rows(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def field_csv(field: ContourField) -> str:
    """One row per cell, orbitals summed, sorted by ``(y, x)``."""
    cells, values, multi = field.cell_values()
    k = "" if field.k is None else str(int(field.k))
    rows = (
        (str(x), "" if y is None else str(y), "1" if multi else "0", field.kind, _opt(field.n), k, fmt(v))
        for (x, y), v in zip(cells, values.tolist())
    )
    return _write_rows(FIELD_HEADER, rows)


def field_total(field: ContourField) -> float:
    """Sum of the cell values exactly as they appear in the CSV."""
    _, values, _ = field.cell_values()
    return math.fsum(float(fmt(v)) for v in values.tolist())


def curve_csv(curve: ExtremalCurve) -> str:
    rows = zip(*(map(fmt, a.tolist()) for a in (curve.param, curve.x, curve.t, curve.z, curve.cumlen)))
    return _write_rows(CURVE_HEADER, rows)


def edge_csv(profiles: Sequence[EdgeProfile]) -> str:
    rows = []
    for p in profiles:
        for k in sorted(p.normalized):
            for m, v in zip(p.m_values.tolist(), p.normalized[k].tolist()):
                rows.append((fmt(m), fmt(p.k_x), str(k), fmt(v)))
    return _write_rows(EDGE_HEADER, rows)


def cross_section_csv(cs: CrossSection) -> str:
    rows = zip(map(fmt, cs.distance.tolist()), map(fmt, cs.value.tolist()), map(fmt, cs.log_value.tolist()))
    return _write_rows(CROSS_HEADER, rows)


@dataclass(frozen=True)
class FieldTable:
    """A FieldCSV read back from disk."""

    x: np.ndarray
    y: Optional[np.ndarray]
    kind: str
    n: Optional[float]
    k: Optional[int]
    value: np.ndarray

    def total(self) -> float:
        return math.fsum(self.value.tolist())

    def row(self, y: int) -> CrossSection:
        if self.y is None:
            raise DomainError("cross-sections need a two-dimensional field")
        mask = self.y == y
        if not mask.any():
            raise DomainError(f"row {y} is not part of the field")
        xs, vals = self.x[mask], self.value[mask]
        order = np.argsort(xs)
        xs, vals = xs[order], vals[order]
        return CrossSection(row=y, distance=xs - xs[0] + 0.5, value=vals, width=int(xs.size))


def read_field_csv(path: Path) -> FieldTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != FIELD_HEADER:
            raise DomainError(f"{path}: not a field CSV")
        rows = list(reader)
    if not rows:
        raise DomainError(f"{path}: field CSV has no rows")
    x = np.array([int(r[0]) for r in rows], dtype=float)
    has_y = rows[0][1] != ""
    y = np.array([int(r[1]) for r in rows]) if has_y else None
    n = float(rows[0][4]) if rows[0][4] else None
    k = int(rows[0][5]) if rows[0][5] else None
    return FieldTable(x=x, y=y, kind=rows[0][3], n=n, k=k, value=np.array([float(r[6]) for r in rows]))


def plot_table(table: FieldTable) -> str:
    """Whitespace-separated ``x y value`` (or ``x value``) table with blank lines between rows."""
    lines = []
    if table.y is None:
        lines.append("# x value")
        lines.extend(f"{fmt(x)} {fmt(v)}" for x, v in zip(table.x.tolist(), table.value.tolist()))
    else:
        lines.append("# x y value")
        prev = None
        for x, y, v in zip(table.x.tolist(), table.y.tolist(), table.value.tolist()):
            if prev is not None and y != prev:
                lines.append("")
            lines.append(f"{fmt(x)} {y} {fmt(v)}")
            prev = y
    return "\n".join(lines) + "\n"


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def summary_json(summary: dict) -> str:
    """Sorted keys and shortest round-trip floats; no timestamps."""
    return json.dumps(_jsonable(summary), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_artifacts(out_dir: Path, artifacts: dict[str, str]) -> list[Path]:
    """Write each artifact once, in sorted name order."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in sorted(artifacts):
        p = out_dir / name
        p.write_text(artifacts[name])
        paths.append(p)
    return paths
