"""AdS3 geometry of refined Renyi entropies for a boundary interval.

Poincare AdS3 with metric ``ds^2 = (dx^2 + dz^2 - dt^2) / z^2`` is written
in the null coordinates ``u = (x + t)/2``, ``v = (x - t)/2`` and
``r = 2/z^2``.  For an interval of widths ``l_u = l_v = R`` and Renyi
order ``n`` the two null hypersurfaces

.. math::

    r_\\pm = \\frac{-2n^2}{l_u^2(n^2-2) + 4n^2uv
             \\pm 2 l_u \\sqrt{l_u^2(1-n^2) - 4n^2uv + n^4(u+v)^2}}

meet where the square root vanishes.  That locus is the extremal curve
``C^(n)``; at ``n = 1`` it is the Ryu-Takayanagi semicircle.

Solving the intersection explicitly gives, for ``theta in (0, pi)``,

.. math::

    x = \\frac{R}{n^2}\\cos\\theta, \\quad
    z = \\frac{R}{n}\\sin\\theta, \\quad
    t^2 = \\frac{n^2-1}{n^2}\\Big(R^2 - n^2 x^2\\Big),

so for ``n > 1`` the curve is anchored at ``x = +-R/n^2``,
``t = +-(n^2-1)R/n^2``, on the null boundary of the causal diamond of the
interval, rather than at the interval endpoints.

The module also integrates the bulk and boundary modular flows and slices
a curve according to a boundary contour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp

from .errors import ComputationError, DomainError
from .gaussian import ContourField

#: Relative and absolute tolerance of the adaptive Runge-Kutta integrations.
FLOW_RTOL = 1e-12
FLOW_ATOL = 1e-13


@dataclass(frozen=True)
class HoloChart:
    """Interval widths ``l_u = l_v`` and Renyi order ``n >= 1``."""

    l_u: float
    l_v: float
    n: float = 1.0

    def __post_init__(self) -> None:
        if self.l_u <= 0 or self.l_v <= 0:
            raise DomainError("interval widths must be positive")
        if self.n < 1:
            raise DomainError("Renyi order must be >= 1")

    @classmethod
    def symmetric(cls, R: float, n: float = 1.0) -> "HoloChart":
        return cls(l_u=R, l_v=R, n=n)

    @property
    def R(self) -> float:
        return 0.5 * (self.l_u + self.l_v)

    @property
    def rho_h(self) -> float:
        return 1.0 / self.n

    def require_symmetric(self) -> None:
        if abs(self.l_u - self.l_v) > 1e-14 * max(self.l_u, self.l_v):
            raise DomainError("only symmetric intervals l_u = l_v are supported")


def to_null(x, t, z):
    """``(x, t, z) -> (u, v, r)``."""
    x, t, z = (np.asarray(a, dtype=float) for a in (x, t, z))
    return (x + t) / 2, (x - t) / 2, 2 / z**2


def from_null(u, v, r):
    """``(u, v, r) -> (x, t, z)``."""
    u, v, r = (np.asarray(a, dtype=float) for a in (u, v, r))
    return u + v, u - v, np.sqrt(2 / r)


def conic(u, v, chart: HoloChart):
    """Square-root argument ``l_u^2(1-n^2) - 4n^2uv + n^4(u+v)^2``."""
    n, l = chart.n, chart.l_u
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    return l * l * (1 - n * n) - 4 * n * n * u * v + n**4 * (u + v) ** 2


def null_surface_r(u: float, v: float, chart: HoloChart, branch: int = 1) -> Optional[float]:
    """``r`` on the null hypersurface of the given branch, or ``None`` where it does not exist."""
    chart.require_symmetric()
    if branch not in (1, -1):
        raise DomainError("branch must be +1 or -1")
    q = float(conic(u, v, chart))
    if q < 0:
        return None
    n, l = chart.n, chart.l_u
    den = l * l * (n * n - 2) + 4 * n * n * u * v + branch * 2 * l * math.sqrt(q)
    if den == 0:
        return None
    r = -2 * n * n / den
    return r if r > 0 else None


def conic_r(u, v, chart: HoloChart):
    """``r = -2n^2 / (l_u^2(n^2-2) + 4n^2uv)`` on the branch intersection."""
    n, l = chart.n, chart.l_u
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    return -2 * n * n / (l * l * (n * n - 2) + 4 * n * n * u * v)


@dataclass(frozen=True)
class ExtremalCurve:
    """Samples of ``C^(n)`` with cumulative proper length ``cumlen``."""

    param: np.ndarray
    x: np.ndarray
    t: np.ndarray
    z: np.ndarray
    cumlen: np.ndarray
    chart: HoloChart
    cutoff: float

    @property
    def length(self) -> float:
        return float(self.cumlen[-1])

    def endpoints(self) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
        return (
            (float(self.x[0]), float(self.t[0]), float(self.z[0])),
            (float(self.x[-1]), float(self.t[-1]), float(self.z[-1])),
        )

    def anchor_points(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Boundary anchors ``(x, t)`` of the exact curve (``z = 0``)."""
        R, n = self.chart.R, self.chart.n
        tb = math.copysign((n * n - 1) * R / (n * n), self.t[len(self.t) // 2] or 1.0)
        return ((R / (n * n), tb), (-R / (n * n), tb))


def extremal_curve(
    chart: HoloChart, samples: int = 400, cutoff: float = 1e-3, branch: int = 1
) -> ExtremalCurve:
    """Sample the extremal curve ``C^(n)`` between the cutoff surfaces ``z = cutoff``.

    Points are generated from the branch intersection: ``x`` is sampled,
    ``t`` solves the conic (sign fixed by ``branch``) and ``z = sqrt(2/r)``
    with ``r`` from :func:`conic_r`.  The parameter ``sigma = ln tan(theta/2)``
    with ``x = (R/n^2) cos theta`` is sampled uniformly, which makes the
    proper-length density smooth; at ``n = 1`` it equals the proper length.

    Raises
    ------
    ComputationError
        If the cutoff leaves no curve.
    """
    chart.require_symmetric()
    if samples < 200:
        raise DomainError("at least 200 samples are required")
    n, R = chart.n, chart.R
    sin_min = n * cutoff / R
    if not 0 < sin_min < 1:
        raise ComputationError("cutoff removes the whole extremal curve")
    theta_min = math.asin(sin_min)
    sig_max = -math.log(math.tan(theta_min / 2))
    sigma = np.linspace(sig_max, -sig_max, samples)
    theta = 2 * np.arctan(np.exp(sigma))
    x = R / (n * n) * np.cos(theta)
    t2 = np.clip((n * n - 1) * (R * R - n * n * x * x) / (n * n), 0.0, None)
    t = branch * np.sqrt(t2)
    u, v = (x + t) / 2, (x - t) / 2
    r = conic_r(u, v, chart)
    if np.any(r <= 0):
        raise ComputationError("empty extremal locus for this chart")
    z = np.sqrt(2 / r)
    c2 = np.cos(theta) ** 2
    s2 = 1 - c2
    speed = np.sqrt((s2 + (n * n - 1) * c2) / (n * n - c2))  # ds/dsigma
    cumlen = cumulative_trapezoid(speed, sigma[0] - sigma, initial=0.0)
    return ExtremalCurve(
        param=sigma[0] - sigma, x=x, t=t, z=z, cumlen=cumlen, chart=chart, cutoff=cutoff
    )


def sampled_proper_length(x: np.ndarray, t: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Cumulative proper length from sampled points (midpoint-``z`` chords)."""
    dx, dt, dz = np.diff(x), np.diff(t), np.diff(z)
    zm = 0.5 * (z[1:] + z[:-1])
    ds2 = (dx * dx + dz * dz - dt * dt) / (zm * zm)
    if np.any(ds2 < -1e-14):
        raise ComputationError("curve has timelike segments")
    return np.concatenate([[0.0], np.cumsum(np.sqrt(np.clip(ds2, 0.0, None)))])


def wedge_excess(x, t, z, R: float) -> np.ndarray:
    """``sqrt(x^2 + z^2) + |t| - R``; positive outside the entanglement wedge of ``(-R, R)``."""
    x, t, z = (np.asarray(a, dtype=float) for a in (x, t, z))
    return np.sqrt(x * x + z * z) + np.abs(t) - R


def disk_excess(x, z, R: float) -> np.ndarray:
    """``x^2 + z^2 - R^2``; positive outside the ``t = 0`` slice of the wedge."""
    x, z = np.asarray(x, dtype=float), np.asarray(z, dtype=float)
    return x * x + z * z - R * R


# Modular flows -------------------------------------------------------------


@dataclass(frozen=True)
class FlowTrajectory:
    """Trajectory ``(u, v, r)`` of the bulk modular flow.

    ``truncated`` is set when ``r`` approached zero or diverged before the
    end of the requested span.
    """

    s: np.ndarray
    u: np.ndarray
    v: np.ndarray
    r: np.ndarray
    n: float
    truncated: bool = False


def bulk_flow_rhs(chart: HoloChart):
    n, lu, lv = chart.n, chart.l_u, chart.l_v
    pi = math.pi

    def rhs(_s, y):
        u, v, r = y
        return [
            n * (2 * pi * u * u / lu - pi * lu / 2 + pi / (lv * r)),
            0.5 * n * pi * (-2 / (lu * r) - 4 * v * v / lv + lv),
            4 * n * pi * r * (v / lv - u / lu),
        ]

    return rhs


def modular_flow_bulk(
    state: Sequence[float],
    chart: HoloChart,
    s_span: tuple[float, float],
    s_eval: Optional[np.ndarray] = None,
    rtol: float = FLOW_RTOL,
    atol: float = FLOW_ATOL,
) -> FlowTrajectory:
    """Integrate the bulk modular flow from ``state = (u, v, r)``.

    Uses an adaptive 8th-order Runge-Kutta scheme.  The flow of order ``n``
    is the ``n = 1`` flow with time rescaled, ``flow_n(s) = flow_1(n s)``.
    """
    u0, v0, r0 = (float(a) for a in state)
    if r0 <= 0:
        raise DomainError("bulk points need r > 0")

    def collapse(_s, y):
        return y[2] - 1e-12

    def blowup(_s, y):
        return 1e12 - y[2]

    collapse.terminal = True
    blowup.terminal = True
    if s_eval is None:
        s_eval = np.linspace(s_span[0], s_span[1], 201)
    if s_span[0] == s_span[1]:
        return FlowTrajectory(
            s=np.array([s_span[0]]), u=np.array([u0]), v=np.array([v0]), r=np.array([r0]), n=chart.n
        )
    sol = solve_ivp(
        bulk_flow_rhs(chart),
        s_span,
        [u0, v0, r0],
        method="DOP853",
        t_eval=s_eval,
        rtol=rtol,
        atol=atol,
        events=(collapse, blowup),
    )
    if sol.status < 0:
        raise ComputationError(f"bulk flow integration failed: {sol.message}")
    return FlowTrajectory(
        s=sol.t, u=sol.y[0], v=sol.y[1], r=sol.y[2], n=chart.n, truncated=sol.status == 1
    )


@dataclass(frozen=True)
class BoundaryFlow:
    """Closed-form boundary modular flow with its integration constants."""

    s: np.ndarray
    u: np.ndarray
    v: np.ndarray
    k_u: float
    k_v: float
    fixed_point: bool = False


def modular_flow_boundary(u0: float, v0: float, chart: HoloChart, s) -> BoundaryFlow:
    """``u(s) = -(l_u/2) tanh(n pi s - 2 l_u k_u)``, ``v(s) = (l_v/2) tanh(n pi s + 2 l_v k_v)``.

    The constants are fixed by ``(u(0), v(0)) = (u0, v0)``.  A start on the
    null boundary of the causal diamond is a fixed point of that
    coordinate and is flagged.
    """
    lu, lv, n = chart.l_u, chart.l_v, chart.n
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if abs(u0) > lu / 2 or abs(v0) > lv / 2:
        raise DomainError("start point lies outside the causal diamond")
    fixed = False
    if abs(u0) == lu / 2:
        u, k_u, fixed = np.full_like(s, u0), math.copysign(math.inf, u0), True
    else:
        k_u = math.atanh(2 * u0 / lu) / (2 * lu)
        u = -(lu / 2) * np.tanh(n * math.pi * s - 2 * lu * k_u)
    if abs(v0) == lv / 2:
        v, k_v, fixed = np.full_like(s, v0), math.copysign(math.inf, v0), True
    else:
        k_v = math.atanh(2 * v0 / lv) / (2 * lv)
        v = (lv / 2) * np.tanh(n * math.pi * s + 2 * lv * k_v)
    return BoundaryFlow(s=s, u=u, v=v, k_u=k_u, k_v=k_v, fixed_point=fixed)


def boundary_flow_rk(
    u0: float, v0: float, chart: HoloChart, s_eval: np.ndarray, rtol: float = FLOW_RTOL, atol: float = FLOW_ATOL
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate ``du/ds = n(2 pi u^2/l_u - pi l_u/2)``, ``dv/ds = (n pi/2)(l_v - 4v^2/l_v)`` numerically.

    ``s_eval`` may contain negative times; both directions are integrated
    from ``s = 0``.
    """
    n, lu, lv = chart.n, chart.l_u, chart.l_v
    pi = math.pi

    def rhs(_s, y):
        return [n * (2 * pi * y[0] ** 2 / lu - pi * lu / 2), 0.5 * n * pi * (lv - 4 * y[1] ** 2 / lv)]

    s_eval = np.asarray(s_eval, dtype=float)
    u = np.full_like(s_eval, u0)
    v = np.full_like(s_eval, v0)
    for sign in (1.0, -1.0):
        mask = sign * s_eval > 0
        if not mask.any():
            continue
        pts = s_eval[mask]
        order = np.argsort(sign * pts)
        sol = solve_ivp(
            rhs, (0.0, float(pts[order[-1]])), [u0, v0], method="DOP853",
            t_eval=pts[order], rtol=rtol, atol=atol,
        )
        if sol.status < 0:
            raise ComputationError(f"boundary flow integration failed: {sol.message}")
        idx = np.flatnonzero(mask)[order]
        u[idx], v[idx] = sol.y[0], sol.y[1]
    return u, v


# Contour slicing -----------------------------------------------------------


@dataclass(frozen=True)
class SliceResult:
    """Segment boundaries of a curve partitioned by a boundary contour.

    ``fractions`` are cumulative contour fractions at the interior site
    boundaries; ``params`` and ``points`` locate the matching points on
    the curve and ``segment_lengths`` are the proper lengths per site.
    """

    fractions: np.ndarray
    params: np.ndarray
    points: np.ndarray
    segment_lengths: np.ndarray


def slice_by_contour(curve: ExtremalCurve, contour: Union[ContourField, Sequence[float]]) -> SliceResult:
    """Cut ``curve`` so that each site owns the share of proper length equal to its contour share.

    Sites are taken in increasing ``x`` and assigned from the ``x = -R`` end
    of the curve.
    """
    if isinstance(contour, ContourField):
        order = np.argsort([s.x for s in contour.sites])
        values = np.asarray(contour.values, dtype=float)[order]
    else:
        values = np.asarray(contour, dtype=float)
    total = math.fsum(values.tolist())
    if values.size == 0 or total == 0:
        raise DomainError("contour has zero total")
    frac = np.cumsum(values)[:-1] / total
    # walk the curve from the x = -R end
    rev = np.argsort(curve.x)
    length = curve.cumlen
    if curve.x[0] > curve.x[-1]:
        s_from_left = length[-1] - length
    else:
        s_from_left = length.copy()
    s_sorted = s_from_left[rev]
    target = frac * length[-1]
    p_sorted = curve.param[rev]
    params = np.interp(target, s_sorted, p_sorted)
    xs = np.interp(target, s_sorted, curve.x[rev])
    ts = np.interp(target, s_sorted, curve.t[rev])
    zs = np.interp(target, s_sorted, curve.z[rev])
    bounds = np.concatenate([[0.0], target, [length[-1]]])
    return SliceResult(
        fractions=frac, params=params, points=np.column_stack([xs, ts, zs]), segment_lengths=np.diff(bounds)
    )


def modular_plane_foot(x_b, R: float):
    """Point ``x`` on the RT semicircle reached from boundary point ``x_b`` along the orthogonal geodesic.

    ``x = 2 R^2 x_b / (x_b^2 + R^2)``.
    """
    x_b = np.asarray(x_b, dtype=float)
    return 2 * R * R * x_b / (x_b * x_b + R * R)


def matched_cutoff(total_entropy: float, R: float, c: float = 1.0) -> float:
    """Cutoff ``epsilon`` for which ``(c/3) ln(2R/epsilon)`` equals ``total_entropy``.

    With this cutoff the regulated curve length matches the lattice
    entropy, so contour fractions and length fractions share a normalisation.
    """
    eps = 2 * R * math.exp(-3 * total_entropy / c)
    if not 0 < eps < R:
        raise DomainError(f"matched cutoff {eps:.3e} is outside (0, R)")
    return eps
