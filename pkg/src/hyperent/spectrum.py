"""Many-body entanglement spectrum from Renyi traces.

The moments ``T_n = tr rho_A^n`` of a ``D``-dimensional density matrix are
power sums of its eigenvalues.  Newton's identities turn them into the
elementary symmetric polynomials ``e_n = det U_n / n!``, where ``U_n`` is
the leading ``n x n`` block of

.. code-block:: text

    U = | T_1   1                     |
        | T_2   T_1   2               |
        | T_3   T_2   T_1   3         |
        |  .                 .        |
        | T_D   ...   T_2   T_1       |

The eigenvalues are then the roots of
``P(x) = sum_n (-1)^n e_n x^{D-n}``.

Recovering ``D`` values from ``D`` power sums is Vandermonde-conditioned:
with double-precision traces the smallest eigenvalues of a ``D = 16``
spectrum are only determined to about ``1e-4``.  Traces, minors and roots
are therefore carried in ``mpmath`` extended precision (``WORK_DPS``
digits); traces generated from a single-particle spectrum are exact to that
precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath
import numpy as np

from .errors import ConditioningError, DomainError, SizeCapError
from .gaussian import SpectralData

#: Largest number of modes for which all ``2^N`` traces are generated.
MAX_MODES = 12
#: Largest spectrum dimension accepted by the root finder.
MAX_DIMENSION = 16
#: Roots closer than this are reported as one degenerate eigenvalue.
CLUSTER_TOL = 1e-5
#: Decimal digits carried through traces, minors and root finding.
WORK_DPS = 80


@dataclass(frozen=True)
class TraceSequence:
    """Moments ``T_1 = 1, T_2, ..., T_D`` of a density matrix.

    Values are stored as ``mpmath.mpf`` so that extended-precision traces
    survive; plain floats are accepted.
    """

    values: tuple

    def __post_init__(self) -> None:
        with mpmath.workdps(WORK_DPS):
            vals = tuple(mpmath.mpf(v) for v in self.values)
            if not vals:
                raise DomainError("a trace sequence needs at least T_1")
            if abs(vals[0] - 1) > 1e-12:
                raise DomainError("T_1 must equal 1")
        object.__setattr__(self, "values", (mpmath.mpf(1),) + vals[1:])

    @property
    def D(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int):
        """``T_n`` with 1-based ``n``."""
        return self.values[n - 1]

    def as_floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    @classmethod
    def from_eigenvalues(cls, p: Sequence[float]) -> "TraceSequence":
        """Power sums of ``p`` evaluated in extended precision."""
        with mpmath.workdps(WORK_DPS):
            q = [mpmath.mpf(float(x)) for x in p]
            total = mpmath.fsum(q)
            vals = [mpmath.fsum(x**n for x in q) / total**n for n in range(1, len(q) + 1)]
        return cls(tuple(vals))


def traces_from_spectrum(sd: SpectralData, D_max: Optional[int] = None) -> TraceSequence:
    """``T_n = prod_l (xi_l^n + (1 - xi_l)^n)`` for ``n = 1..D`` with ``D = 2^{N_A}``."""
    if sd.size > MAX_MODES:
        raise SizeCapError(f"at most {MAX_MODES} modes are supported, got {sd.size}")
    D = 2**sd.size if D_max is None else min(D_max, 2**sd.size)
    with mpmath.workdps(WORK_DPS):
        xi = [mpmath.mpf(float(x)) for x in sd.xi]
        vals = [mpmath.fprod(x**n + (1 - x) ** n for x in xi) for n in range(1, D + 1)]
    return TraceSequence(tuple(vals))


def _det(A) -> "mpmath.mpf":
    """Determinant by Gaussian elimination with partial pivoting; exact zero for singular input."""
    A = A.copy()
    n = A.rows
    det = mpmath.mpf(1)
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(A[r, c]))
        if A[p, c] == 0:
            return mpmath.mpf(0)
        if p != c:
            for j in range(n):
                A[c, j], A[p, j] = A[p, j], A[c, j]
            det = -det
        det *= A[c, c]
        for r in range(c + 1, n):
            f = A[r, c] / A[c, c]
            if f:
                for j in range(c, n):
                    A[r, j] -= f * A[c, j]
    return det


def newton_matrix(T: TraceSequence) -> tuple[np.ndarray, list]:
    """Matrix ``U`` (as floats) and leading minors ``det U_n``, ``n = 0..D``.

    Minors are evaluated in extended precision and returned as ``mpf``.
    """
    D = T.D
    with mpmath.workdps(WORK_DPS):
        U = mpmath.zeros(D, D)
        for i in range(D):
            for j in range(i + 1):
                U[i, j] = T[i - j + 1]
            if i + 1 < D:
                U[i, i + 1] = i + 1
        dets = [mpmath.mpf(1)] + [_det(U[:n, :n]) for n in range(1, D + 1)]
        U_float = np.array([[float(U[i, j]) for j in range(D)] for i in range(D)])
    return U_float, dets


def elementary_symmetric(T: TraceSequence) -> tuple[list, list]:
    """``e_0 .. e_D`` by Newton's recursion, with a rounding-noise bound for each.

    Expanding ``det U_n`` along its last column gives
    ``n e_n = sum_i (-1)^(i-1) e_(n-i) T_i``, so this equals the minor route
    at ``O(D^2)`` cost.
    """
    eps = mpmath.mpf(10) ** (-(WORK_DPS - 2))
    with mpmath.workdps(WORK_DPS):
        e = [mpmath.mpf(1)]
        noise = [mpmath.mpf(0)]
        for n in range(1, T.D + 1):
            terms = [(-1) ** (i - 1) * e[n - i] * T[i] for i in range(1, n + 1)]
            e.append(mpmath.fsum(terms) / n)
            scale = mpmath.fsum(abs(t) for t in terms) / n
            carried = mpmath.fsum(noise[n - i] * T[i] for i in range(1, n + 1)) / n
            noise.append(16 * n * eps * scale + carried)
    return e, noise


def char_poly(T: TraceSequence) -> list:
    """Coefficients of ``P(x)``, highest power first, as ``mpf`` (monic)."""
    e, _ = elementary_symmetric(T)
    return [(-1) ** n * e[n] for n in range(T.D + 1)]


@dataclass(frozen=True)
class SpectrumResult:
    """Recovered eigenvalues (descending) with multiplicities.

    ``eigenvalues`` lists every root with its multiplicity.  ``distinct``
    and ``multiplicities`` merge values closer than the clustering
    tolerance and are meant for reporting degeneracies.

    ``trace_residual`` is the largest relative mismatch between the traces
    of the recovered spectrum and the input traces.
    """

    eigenvalues: np.ndarray
    distinct: np.ndarray
    multiplicities: np.ndarray
    trace_residual: float


def _roots(coeffs: list) -> list:
    deg = len(coeffs) - 1
    if deg == 0:
        return []
    if deg == 1:
        return [-coeffs[1] / coeffs[0]]
    comp = mpmath.zeros(deg, deg)
    for j in range(deg):
        comp[0, j] = -coeffs[j + 1] / coeffs[0]
    for i in range(1, deg):
        comp[i, i - 1] = 1
    return list(mpmath.eig(comp, left=False, right=False))


def _groups(roots: list, width: float) -> list[list]:
    ordered = sorted(roots, key=lambda r: mpmath.re(r))
    groups: list[list] = []
    for r in ordered:
        if groups and abs(r - mpmath.fsum(groups[-1]) / len(groups[-1])) < width:
            groups[-1].append(r)
        else:
            groups.append([r])
    return groups


def _trace_misfit(values: list, mult: list[int], T: TraceSequence):
    return max(
        abs(mpmath.fsum(m * v**n for v, m in zip(values, mult)) - T[n]) / T[n] for n in range(1, T.D + 1)
    )


def _poly_derivative(coeffs: list, times: int) -> list:
    c = list(coeffs)
    for _ in range(times):
        deg = len(c) - 1
        c = [a * (deg - i) for i, a in enumerate(c[:-1])]
    return c


def _horner(coeffs: list, x):
    acc = coeffs[0]
    for a in coeffs[1:]:
        acc = acc * x + a
    return acc


def _polish(coeffs: list, x0, mult: int, steps: int = 60):
    """Newton on ``P^(mult-1)``, where a root of multiplicity ``mult`` is simple."""
    f = _poly_derivative(coeffs, mult - 1)
    df = _poly_derivative(f, 1)
    x = mpmath.mpf(x0)
    tiny = mpmath.mpf(10) ** (-(WORK_DPS - 5))
    for _ in range(steps):
        d = _horner(df, x)
        if d == 0:
            return None
        step = _horner(f, x) / d
        x -= step
        if abs(step) <= tiny * max(1, abs(x)):
            return x
    return None


_FAST_WIDTHS = (1e-7, 1e-5, 1e-4, 1e-3, 1e-2, 5e-2, 0.2, 0.5)
#: Relative trace misfit accepted from the polished double-precision roots.
#: A single eigenvalue error ``e`` shifts ``T_1`` by ``e``, so this also
#: bounds the eigenvalue error well below the reconstruction tolerance.
FAST_FIT_TOL = 1e-9
#: Double-precision roots below this are taken as zeros on the fast path.
FAST_ZERO = 1e-12


def _linkage_groups(roots: np.ndarray, width: float) -> list[np.ndarray]:
    """Index sets of single-linkage clusters of roots closer than ``width`` times their modulus."""
    mod = np.abs(roots)
    close = np.abs(roots[:, None] - roots[None, :]) < width * np.maximum(mod[:, None], mod[None, :])
    label = np.arange(roots.size)
    for i, j in zip(*np.nonzero(close)):
        a, b = label[i], label[j]
        if a != b:
            label[label == b] = a
    return [np.nonzero(label == g)[0] for g in np.unique(label)]


def _fast_roots(coeffs: list, D: int, rank: int, T: TraceSequence, fit_tol=FAST_FIT_TOL):
    """Cluster double-precision roots, then polish each cluster in extended precision.

    A root of multiplicity ``m`` splits into a ring of radius about
    ``eps^(1/m)`` of its size, so clusters are formed at increasing relative
    widths.  Returns ``(values, multiplicities)`` only when the polished
    spectrum reproduces every input trace to ``fit_tol``; otherwise ``None``.
    """
    approx = np.roots([float(c) for c in coeffs])
    # double precision cannot place roots this small; they enter as zeros
    tiny = np.abs(approx) < FAST_ZERO
    n_tiny = int(tiny.sum())
    approx = approx[~tiny]
    tried = set()
    for width in _FAST_WIDTHS:
        groups = _linkage_groups(approx, width)
        key = tuple(tuple(g) for g in groups)
        if key in tried:
            continue
        tried.add(key)
        vals, mult = ([mpmath.mpf(0)], [n_tiny]) if n_tiny else ([], [])
        for g in groups:
            x = _polish(coeffs, float(np.mean(approx[g]).real), g.size)
            if x is None:
                break
            vals.append(x)
            mult.append(int(g.size))
        else:
            if _trace_misfit(vals + [mpmath.mpf(0)], mult + [D - rank], T) <= fit_tol:
                return vals, mult
    return None


_WIDTHS = (1e-30, 1e-20, 1e-12, 1e-8, 1e-6, 1e-5, 1e-4, 1e-3)


def reconstruct_spectrum(T: TraceSequence, tol: float = 1e-6, cluster_tol: float = CLUSTER_TOL) -> SpectrumResult:
    """Eigenvalues of ``rho_A`` from its traces, sorted descending.

    The characteristic polynomial is built from the Newton minors.  Trailing
    coefficients at the working-precision noise floor are treated as exact
    zeros, which deflates the zero eigenvalues of rank-deficient ``rho_A``.

    Double-precision roots are clustered first, and a cluster of size ``m``
    is polished by Newton's method on ``P^(m-1)``, where it is a simple
    root.  This is accepted when the traces match to ``FAST_FIT_TOL``.
    Otherwise the roots are taken as eigenvalues of the companion matrix in
    extended precision, as follows.

    A root of multiplicity ``m`` splits into ``m`` roots spread by about
    ``eps^{1/m}`` while their centroid stays accurate.  Roots are grouped
    at increasing widths and each group replaced by its centroid; the
    coarsest grouping whose traces still match the input is kept.  Values
    closer than ``cluster_tol`` are finally reported as one eigenvalue with
    its multiplicity.

    Raises
    ------
    ConditioningError
        If a recovered eigenvalue keeps an imaginary part above ``tol`` or
        leaves ``[-tol, 1 + tol]``.
    """
    D = T.D
    if D > MAX_DIMENSION:
        raise SizeCapError(f"spectrum dimension {D} exceeds {MAX_DIMENSION}")
    with mpmath.workdps(WORK_DPS):
        e, noise = elementary_symmetric(T)
        coeffs = [(-1) ** n * e[n] for n in range(D + 1)]
        rank = D
        while rank > 0 and abs(coeffs[rank]) <= noise[rank]:
            rank -= 1
        fit_tol = mpmath.mpf(10) ** (-(WORK_DPS // 2))
        chosen = _fast_roots(coeffs[: rank + 1], D, rank, T) if rank > 1 else None
        if chosen is None:
            roots = _roots(coeffs[: rank + 1])
            for width in _WIDTHS:
                groups = _groups(roots, width)
                centers = [mpmath.fsum(g) / len(g) for g in groups]
                mult = [len(g) for g in groups]
                vals = [mpmath.re(c) for c in centers]
                if max((abs(mpmath.im(c)) for c in centers), default=0) > tol:
                    continue
                if _trace_misfit(vals + [mpmath.mpf(0)], mult + [D - rank], T) <= fit_tol or chosen is None:
                    chosen = (centers, mult)
            if chosen is None:
                worst = max(abs(mpmath.im(r)) for r in roots)
                raise ConditioningError(f"characteristic polynomial has complex roots (max |Im| = {float(worst):.3e})")
        centers, mult = chosen
        imag = max((abs(mpmath.im(c)) for c in centers), default=mpmath.mpf(0))
        vals = [mpmath.re(c) for c in centers]
        misfit = float(_trace_misfit(vals + [mpmath.mpf(0)], mult + [D - rank], T))
    if imag > tol:
        raise ConditioningError(
            f"characteristic polynomial has complex roots (max |Im| = {float(imag):.3e}, "
            f"trace misfit = {misfit:.3e})"
        )
    pairs = sorted(((float(v), m) for v, m in zip(vals, mult)), reverse=True)
    if D - rank:
        pairs.append((0.0, D - rank))
    if any(v < -tol or v > 1 + tol for v, _ in pairs):
        raise ConditioningError(f"recovered eigenvalues leave [0, 1]: {[v for v, _ in pairs]}")
    eigenvalues = np.repeat([v for v, _ in pairs], [m for _, m in pairs])
    distinct: list[float] = []
    counts: list[int] = []
    for v, m in pairs:
        if distinct and abs(distinct[-1] - v) < cluster_tol:
            tot = counts[-1] + m
            distinct[-1] = (distinct[-1] * counts[-1] + v * m) / tot
            counts[-1] = tot
        else:
            distinct.append(v)
            counts.append(m)
    return SpectrumResult(
        eigenvalues=eigenvalues,
        distinct=np.array(distinct),
        multiplicities=np.array(counts, dtype=int),
        trace_residual=misfit,
    )


def many_body_spectrum(sd: SpectralData) -> np.ndarray:
    """All ``2^N`` products ``prod_l (xi_l or 1 - xi_l)``, descending."""
    if sd.size > MAX_MODES:
        raise SizeCapError(f"at most {MAX_MODES} modes are supported, got {sd.size}")
    p = np.array([1.0])
    for x in sd.xi:
        p = np.concatenate([p * x, p * (1 - x)])
    return np.sort(p)[::-1]
