"""Cross-section extraction and decay fits for two-dimensional fields."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .gaussian import ContourField


@dataclass(frozen=True)
class LinearFit:
    """Least-squares line ``y = slope x + intercept`` with its coefficient of determination."""

    slope: float
    intercept: float
    r2: float
    n_points: int

    def as_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2, "n_points": self.n_points}


def linear_fit(x, y) -> LinearFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 3:
        raise DomainError("a fit needs at least three matching points")
    if not np.all(np.isfinite(y)):
        raise DomainError("fit data contain non-finite values")
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([slope, intercept])
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(float(slope), float(intercept), r2, int(x.size))


@dataclass(frozen=True)
class CrossSection:
    """Values along one row of a field, measured from the left edge of the region.

    ``distance`` is ``i + 1/2`` for the ``i``-th cell of the row, so the
    boundary sits at zero.  ``width`` is the number of cells in the row.
    """

    row: int
    distance: np.ndarray
    value: np.ndarray
    width: int

    @property
    def log_value(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.value > 0, np.log(np.abs(self.value)), np.nan)

    def half(self) -> "CrossSection":
        """Cells in the left half, nearest to the left boundary."""
        keep = self.distance < self.width / 2
        return CrossSection(self.row, self.distance[keep], self.value[keep], self.width)


def cross_section(field: ContourField, row: int) -> CrossSection:
    """Orbital-summed values on row ``y = row`` of a two-dimensional field."""
    cells, values, _ = field.cell_values()
    xs = [c[0] for c, _v in zip(cells, values) if c[1] == row]
    if not xs:
        raise DomainError(f"row {row} is not part of the field")
    vals = np.array([v for c, v in zip(cells, values) if c[1] == row])
    xs_arr = np.array(xs, dtype=float)
    order = np.argsort(xs_arr)
    xs_arr, vals = xs_arr[order], vals[order]
    if np.any(np.diff(xs_arr) != 1):
        raise DomainError("row is not contiguous")
    return CrossSection(row=row, distance=xs_arr - xs_arr[0] + 0.5, value=vals, width=int(xs_arr.size))


@dataclass(frozen=True)
class DecayFits:
    """Exponential and power-law fits of a cross-section.

    ``exponential`` regresses ``ln h`` on the distance ``d``;
    ``power_law`` regresses ``ln h`` on ``ln(d (W - d) / W)``, the chord
    distance of a strip of width ``W``.  Its slope is minus the exponent.
    """

    exponential: LinearFit
    power_law: LinearFit
    skipped: int

    @property
    def power_exponent(self) -> float:
        return -self.power_law.slope

    def as_dict(self) -> dict:
        return {
            "exponential": self.exponential.as_dict(),
            "power_law": self.power_law.as_dict(),
            "power_exponent": self.power_exponent,
            "skipped_boundary_cells": self.skipped,
        }


def decay_fits(cs: CrossSection, skip: int = 1, width: Optional[float] = None) -> DecayFits:
    """Fit the left half of ``cs`` after dropping ``skip`` cells at the boundary.

    The boundary cell carries a lattice-scale transient and is excluded by
    default.
    """
    h = cs.half()
    d = h.distance[skip:]
    v = h.value[skip:]
    if np.any(v <= 0):
        raise DomainError("decay fits need strictly positive values")
    W = float(cs.width if width is None else width)
    logv = np.log(v)
    return DecayFits(
        exponential=linear_fit(d, logv),
        power_law=linear_fit(np.log(d * (W - d) / W), logv),
        skipped=skip,
    )


def sign_pattern(values: np.ndarray, tol: float = 0.0) -> str:
    """String of ``+``, ``-`` and ``0`` per entry; useful for reporting alternating fields."""
    out = []
    for v in np.asarray(values, dtype=float):
        out.append("0" if abs(v) <= tol else ("+" if v > 0 else "-"))
    return "".join(out)


def monotone(values, decreasing: bool = True, strict: bool = True) -> bool:
    d = np.diff(np.asarray(values, dtype=float))
    if decreasing:
        d = -d
    return bool(np.all(d > 0) if strict else np.all(d >= 0))


def relative_deviation(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference) if reference else math.inf
