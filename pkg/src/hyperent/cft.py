"""Continuum (1+1)D comparators for a single interval ``(-R, R)``.

For a CFT with central charge ``c`` and a U(1) charge with prefactor ``g``
(``g = 1`` for free fermions), the leading hyperfine density and the
number-variance density are

.. math::

    h_{n;2}(x) = \\frac{c}{12}\\Big(1 + \\frac1n\\Big)
                 \\Big(\\frac{1}{R-x} + \\frac{1}{R+x}\\Big), \\qquad
    C_2(x) = \\frac{g}{2\\pi^2}\\Big(\\frac{1}{R-x} + \\frac{1}{R+x}\\Big),

so their ratio ``pi^2 c (1 + 1/n) / (6 g)`` is constant across the
interval.  Integrating ``h_{n;2}`` with a cutoff ``epsilon`` at both ends
gives ``S_n = (c/6)(1 + 1/n) ln(2R/epsilon)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .gaussian import ContourField


@dataclass(frozen=True)
class ContinuumParams:
    """Central charge ``c``, charge prefactor ``g``, half-width ``R``, cutoff ``epsilon`` and order ``n``."""

    R: float
    epsilon: float = 1.0
    n: float = 1.0
    c: float = 1.0
    g: float = 1.0

    def __post_init__(self) -> None:
        if not self.R > self.epsilon > 0:
            raise DomainError("require R > epsilon > 0")
        if self.c <= 0 or self.g <= 0 or self.n <= 0:
            raise DomainError("c, g and n must be positive")


def _pole_sum(x, R: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= R):
        raise DomainError("x must lie strictly inside (-R, R)")
    return 1.0 / (R - x) + 1.0 / (R + x)


def h_n2_closed(x, p: ContinuumParams):
    """Leading hyperfine density ``(c/12)(1 + 1/n)(1/(R-x) + 1/(R+x))``; independent of ``epsilon``."""
    out = p.c / 12.0 * (1.0 + 1.0 / p.n) * _pole_sum(x, p.R)
    return float(out) if np.ndim(out) == 0 else out


def c2_density_closed(x, p: ContinuumParams):
    """Number-variance density ``(g / 2 pi^2)(1/(R-x) + 1/(R+x))``."""
    out = p.g / (2 * math.pi**2) * _pole_sum(x, p.R)
    return float(out) if np.ndim(out) == 0 else out


def hyperfine_ratio(p: ContinuumParams) -> float:
    """``h_{n;2}(x) / C_2(x) = pi^2 c (1 + 1/n) / (6 g)``."""
    return math.pi**2 * p.c * (1 + 1 / p.n) / (6 * p.g)


def sn_interval(p: ContinuumParams, refined: bool = False) -> float:
    """``S_n = (c/6)(1 + 1/n) ln(2R/epsilon)``; refined ``S~_n = (c/3n) ln(2R/epsilon)``."""
    log = math.log(2 * p.R / p.epsilon)
    if refined:
        return p.c / (3 * p.n) * log
    return p.c / 6 * (1 + 1 / p.n) * log


@dataclass(frozen=True)
class FitReport:
    """Comparison of a lattice field with a closed form on the middle of an interval."""

    max_relative: float
    mean_relative: float
    n_points: int
    x: np.ndarray
    lattice: np.ndarray
    continuum: np.ndarray

    def as_dict(self) -> dict:
        return {
            "max_relative_deviation": self.max_relative,
            "mean_relative_deviation": self.mean_relative,
            "n_points": self.n_points,
        }


def lattice_coordinates(field: ContourField) -> tuple[np.ndarray, float]:
    """Map chain sites to ``x = j - center`` and return ``(x, R)`` with ``R = N/2``."""
    xs = np.array([s.x for s in field.sites], dtype=float)
    order = np.argsort(xs)
    xs = xs[order]
    if np.any(np.diff(xs) != 1):
        raise DomainError("field must live on a contiguous interval")
    center = 0.5 * (xs[0] + xs[-1])
    return xs - center, 0.5 * xs.size


def middle_mask(n_sites: int, fraction: float = 0.6) -> np.ndarray:
    """Boolean mask of the central ``fraction`` of ``n_sites`` sites."""
    lo = int(math.floor(n_sites * (1 - fraction) / 2))
    mask = np.zeros(n_sites, dtype=bool)
    mask[lo : n_sites - lo] = True
    return mask


def lattice_vs_cft(
    field: ContourField, p: Optional[ContinuumParams] = None, fraction: float = 0.6
) -> FitReport:
    """Relative deviation of a chain field from its continuum closed form.

    Renyi contours (``renyi`` or ``vonNeumann`` kinds) are compared with
    ``h_{n;2}``; ``cumulant`` fields with ``k = 2`` are compared with
    ``C_2``.  Sites are mapped to ``x = j - center`` with ``R = N/2`` and
    only the central ``fraction`` of the interval enters the statistics.
    """
    x, R = lattice_coordinates(field)
    order = np.argsort([s.x for s in field.sites])
    values = field.values[order]
    if p is None:
        p = ContinuumParams(R=R, epsilon=min(1.0, R / 2), n=field.n or 1.0)
    elif abs(p.R - R) > 1e-12:
        raise DomainError(f"continuum half-width {p.R} does not match the field ({R})")
    if field.kind in ("renyi", "vonNeumann"):
        ref = h_n2_closed(x, ContinuumParams(R=R, epsilon=p.epsilon, n=field.n, c=p.c, g=p.g))
    elif field.kind == "cumulant" and field.k == 2:
        ref = c2_density_closed(x, p)
    else:
        raise DomainError(f"no closed form for kind {field.kind!r} (k={field.k})")
    mask = middle_mask(x.size, fraction)
    rel = np.abs(values[mask] - ref[mask]) / np.abs(ref[mask])
    return FitReport(
        max_relative=float(rel.max()),
        mean_relative=float(rel.mean()),
        n_points=int(mask.sum()),
        x=x[mask],
        lattice=values[mask],
        continuum=ref[mask],
    )


def ratio_spread(numerator: ContourField, denominator: ContourField, fraction: float = 0.6) -> float:
    """``(max - min) / mean`` of the pointwise ratio over the central sites."""
    if numerator.sites != denominator.sites:
        raise DomainError("fields must share a site set")
    order = np.argsort([s.x for s in numerator.sites])
    ratio = numerator.values[order] / denominator.values[order]
    r = ratio[middle_mask(ratio.size, fraction)]
    return float((r.max() - r.min()) / r.mean())
