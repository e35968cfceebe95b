"""Hyperfine decomposition of Renyi entanglement contours.

The Renyi contour of a Gaussian state splits into particle-number cumulant
densities,

.. math::

    s_n(j) = \\sum_{k\\ \\mathrm{even}} h_{n;k}(j), \\qquad
    h_{n;k}(j) = \\beta_k(n)\\, C_k(j),

with

.. math::

    \\beta_k(n) = \\frac{2}{n-1}\\frac{1}{k!}\\Big(\\frac{2\\pi i}{n}\\Big)^k
                 \\zeta\\Big(-k, \\frac{n+1}{2}\\Big),
    \\qquad \\beta_k(1) = -\\frac{(2\\pi i)^k B_k}{k!},

and ``C_k(j) = sum_l |psi_l(j)|^2 kappa_k(xi_l)``, where ``kappa_k`` is
the ``k``-th cumulant of a Bernoulli variable with mean ``xi``.

For ``n >= 2`` the series over ``k`` converges for every single-mode
occupation.  At ``n = 1`` it is only asymptotic: the coefficients stay of
order one while ``kappa_k`` grows factorially, so truncations must be
chosen with care.

Hurwitz zeta values at negative integers are evaluated exactly through
Bernoulli polynomials held as rational coefficients.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DomainError
from .gaussian import ContourField, SpectralData, entropy, spectral_decompose
from .lattice import (
    ChernParams,
    CorrelationMatrix,
    Region,
    build_chern_cylinder_correlation,
    chern_number,
    LatticeSpec,
    restrict,
)

__all__ = [
    "BernoulliPoly",
    "CumulantCoefficient",
    "KappaPolynomial",
    "ReconstructionSystem",
    "MutualInformation",
    "EdgeProfile",
    "bernoulli_number",
    "bernoulli_poly",
    "hurwitz_zeta_negint",
    "beta_coefficient",
    "kappa_polynomial",
    "cumulant_density_field",
    "hyperfine_field",
    "hyperfine_series",
    "beta_matrix",
    "forward_contours",
    "reconstruct_cumulants",
    "mutual_information_pair",
    "chern_number",
    "edge_scaling_profile",
]

#: Condition number above which a reconstruction is flagged as ill-conditioned.
CONDITION_WARN = 1e8

Number = Union[int, float, Fraction]


@lru_cache(maxsize=None)
def bernoulli_number(m: int) -> Fraction:
    """Bernoulli number ``B_m`` with the convention ``B_1 = -1/2``."""
    if m < 0:
        raise DomainError("Bernoulli index must be non-negative")
    if m == 0:
        return Fraction(1)
    # sum_{j=0}^{m} C(m+1, j) B_j = 0
    acc = sum(math.comb(m + 1, j) * bernoulli_number(j) for j in range(m))
    return -acc / (m + 1)


@dataclass(frozen=True)
class BernoulliPoly:
    """Bernoulli polynomial ``B_m(x)`` with exact rational coefficients.

    ``coeffs[p]`` multiplies ``x**p``.
    """

    degree: int
    coeffs: tuple[Fraction, ...]

    def __call__(self, x: Number) -> Union[Fraction, float]:
        exact = isinstance(x, (int, Fraction))
        xr = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * xr + c
        return acc if exact else float(acc)


@lru_cache(maxsize=None)
def bernoulli_poly(m: int) -> BernoulliPoly:
    """``B_m(x) = sum_p C(m, p) B_{m-p} x^p``.

    Examples
    --------
    >>> bernoulli_poly(3)(Fraction(3, 2))
    Fraction(3, 4)
    """
    if m < 0:
        raise DomainError("degree must be non-negative")
    coeffs = tuple(math.comb(m, p) * bernoulli_number(m - p) for p in range(m + 1))
    return BernoulliPoly(degree=m, coeffs=coeffs)


def hurwitz_zeta_negint(k: int, a: Number) -> Union[Fraction, float]:
    """``zeta(-k, a) = -B_{k+1}(a) / (k+1)``; exact when ``a`` is rational."""
    if k < 1:
        raise DomainError("k must be >= 1")
    return -bernoulli_poly(k + 1)(a) / (k + 1)


@dataclass(frozen=True)
class CumulantCoefficient:
    """Coefficient ``beta_k(n)``; ``odd`` marks the identically vanishing odd orders."""

    k: int
    n: float
    value: float
    odd: bool = False


@lru_cache(maxsize=4096)
def _beta_value(k: int, n: float) -> float:
    sign = -1 if (k // 2) % 2 else 1  # i^k for even k
    if n == 1:
        return float(-sign * (2 * math.pi) ** k * bernoulli_number(k) / math.factorial(k))
    a = (Fraction(n) + 1) / 2
    zeta = hurwitz_zeta_negint(k, a)
    return float(2 / (n - 1) / math.factorial(k) * (2 * math.pi / n) ** k * sign * float(zeta))


def beta_coefficient(k: int, n: float) -> CumulantCoefficient:
    """Hyperfine coefficient ``beta_k(n)``.

    Odd ``k`` returns an exact zero with ``odd=True``.  At ``n = 1`` the
    closed-form limit ``-(2 pi i)^k B_k / k!`` is used.

    Examples
    --------
    >>> abs(beta_coefficient(2, 2).value - math.pi**2 / 4) < 1e-15
    True
    """
    if k < 1:
        raise DomainError("k must be a positive integer")
    if n <= 0:
        raise DomainError("Renyi order must be positive")
    if k % 2:
        return CumulantCoefficient(k=k, n=float(n), value=0.0, odd=True)
    return CumulantCoefficient(k=k, n=float(n), value=_beta_value(k, float(n)))


@dataclass(frozen=True)
class KappaPolynomial:
    """Cumulant ``kappa_k(xi)`` of a Bernoulli variable, exact rational coefficients."""

    order: int
    coeffs: tuple[Fraction, ...]

    def __call__(self, xi: Union[float, np.ndarray]) -> np.ndarray:
        """Evaluate on ``[0, 1]`` using ``kappa_k(1 - xi) = (-1)^k kappa_k(xi)``."""
        xi = np.asarray(xi, dtype=float)
        if self.order == 1:
            return xi.copy()
        flip = xi > 0.5
        x = np.where(flip, 1.0 - xi, xi)
        acc = np.zeros_like(x)
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        if self.order % 2:
            acc = np.where(flip, -acc, acc)
        return acc

    def exact(self, xi: Number) -> Fraction:
        xr = Fraction(xi)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * xr + c
        return acc


@lru_cache(maxsize=None)
def kappa_polynomial(k: int) -> KappaPolynomial:
    """``kappa_1 = xi``, ``kappa_{k+1} = xi (1 - xi) d kappa_k / d xi``."""
    if k < 1:
        raise DomainError("k must be >= 1")
    if k == 1:
        return KappaPolynomial(order=1, coeffs=(Fraction(0), Fraction(1)))
    prev = kappa_polynomial(k - 1).coeffs
    deriv = [p * prev[p] for p in range(1, len(prev))]
    # multiply by xi - xi^2
    out = [Fraction(0)] * (len(deriv) + 2)
    for p, c in enumerate(deriv):
        out[p + 1] += c
        out[p + 2] -= c
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return KappaPolynomial(order=k, coeffs=tuple(out))


def cumulant_density_field(sd: SpectralData, k: int) -> ContourField:
    """Cumulant density ``C_k(j) = sum_l |psi_l(j)|^2 kappa_k(xi_l)``.

    The region total ``C_k`` is ``field.total()``.
    """
    values = sd.mode_density(kappa_polynomial(k)(sd.xi))
    return ContourField(values=values, sites=sd.sites, kind="cumulant", k=k)


def hyperfine_field(sd: SpectralData, n: float, k: int) -> ContourField:
    """``h_{n;k}(j) = beta_k(n) C_k(j)`` for even ``k``."""
    if k % 2:
        raise DomainError("hyperfine fields are defined for even k")
    beta = beta_coefficient(k, n).value
    c = cumulant_density_field(sd, k)
    return ContourField(values=beta * c.values, sites=sd.sites, kind="hyperfine", n=float(n), k=k)


def hyperfine_series(sd: SpectralData, n: float, K: int) -> np.ndarray:
    """Partial sum ``sum_{k=2,4,..,K} h_{n;k}(j)``."""
    total = np.zeros(sd.size)
    for k in range(2, K + 1, 2):
        total = total + hyperfine_field(sd, n, k).values
    return total


# Reconstruction ------------------------------------------------------------


def beta_matrix(n_orders: int) -> np.ndarray:
    """``B[n-1, i] = beta_{2(i+1)}(n)`` for ``n = 1..N`` and ``k = 2..2N``."""
    return np.array(
        [[beta_coefficient(2 * (i + 1), n).value for i in range(n_orders)] for n in range(1, n_orders + 1)]
    )


@dataclass(frozen=True)
class ReconstructionSystem:
    """Least-squares solution of ``B C(j) = s(j)`` for every site ``j``.

    ``solution[i, j]`` estimates ``C_{2(i+1)}(j)``.
    """

    B: np.ndarray
    rhs: np.ndarray
    solution: np.ndarray
    residual: float
    condition: float
    ill_conditioned: bool
    sites: tuple = field(default=(), repr=False)

    def cumulant(self, k: int) -> np.ndarray:
        if k % 2 or not 2 <= k <= 2 * self.B.shape[1]:
            raise DomainError(f"order {k} is not part of this system")
        return self.solution[k // 2 - 1]


def forward_contours(cumulants: Sequence[np.ndarray], n_orders: int) -> np.ndarray:
    """``s_n(j) = sum_i B[n-1, i] C_{2(i+1)}(j)``; the inverse of the reconstruction."""
    C = np.vstack([np.asarray(c, dtype=float) for c in cumulants])
    return beta_matrix(n_orders)[:, : C.shape[0]] @ C


def reconstruct_cumulants(contours: Sequence[ContourField]) -> ReconstructionSystem:
    """Recover ``C_2(j) .. C_{2N}(j)`` from Renyi contours ``n = 1..N``.

    Parameters
    ----------
    contours : sequence of ContourField
        Fields ordered by Renyi order ``n = 1, 2, ..., N`` on a common site set.

    Notes
    -----
    ``B`` is Vandermonde-like and becomes stiff quickly; the condition
    number is reported and a warning is raised above ``CONDITION_WARN``.
    """
    if not contours:
        raise DomainError("at least one contour is required")
    N = len(contours)
    sites = contours[0].sites
    for i, c in enumerate(contours, start=1):
        if c.n != i:
            raise DomainError(f"contour {i} has order {c.n}, expected {i}")
        if c.sites != sites:
            raise DomainError("contours must share one site set")
    B = beta_matrix(N)
    rhs = np.vstack([c.values for c in contours])
    sol, *_ = np.linalg.lstsq(B, rhs, rcond=None)
    residual = float(np.max(np.abs(B @ sol - rhs))) if rhs.size else 0.0
    cond = float(np.linalg.cond(B))
    ill = cond > CONDITION_WARN
    if ill:
        warnings.warn(
            f"cumulant reconstruction is ill-conditioned (cond = {cond:.2e})",
            RuntimeWarning,
            stacklevel=2,
        )
    return ReconstructionSystem(
        B=B, rhs=rhs, solution=sol, residual=residual, condition=cond, ill_conditioned=ill, sites=sites
    )


# Mutual information --------------------------------------------------------


@dataclass(frozen=True)
class MutualInformation:
    exact: float
    hyperfine: float

    @property
    def deviation(self) -> float:
        return self.hyperfine - self.exact

    @property
    def relative_deviation(self) -> float:
        return abs(self.deviation) / abs(self.exact) if self.exact else math.inf


def mutual_information_pair(M: CorrelationMatrix, A1: Region, A2: Region) -> MutualInformation:
    """Exact ``I = S(A1) + S(A2) - S(A1 u A2)`` and its leading hyperfine estimate.

    The estimate is ``2 (S(A1) - sum_{i in A1} h_{1;2}(i))`` with the
    ``h_{1;2}`` field of the union.
    """
    if set(A1.sites) & set(A2.sites):
        raise DomainError("regions must be disjoint")
    s1 = entropy(spectral_decompose(restrict(M, A1))).value
    s2 = entropy(spectral_decompose(restrict(M, A2))).value
    union = A1.union(A2)
    sd = spectral_decompose(restrict(M, union))
    s12 = entropy(sd).value
    h = hyperfine_field(sd, 1, 2)
    approx = 2 * (s1 - h.region_sum(A1.sites))
    return MutualInformation(exact=s1 + s2 - s12, hyperfine=approx)


# Edge-state profiles -------------------------------------------------------


@dataclass(frozen=True)
class EdgeProfile:
    """Boundary hyperfine values across a mass sweep at fixed ``k_x``.

    ``raw[k][i]`` is ``sum_{j in dA} h_{n;k}(j)`` at ``m_values[i]`` and
    ``normalized[k]`` divides by its maximum over the sweep.
    """

    m_values: np.ndarray
    k_x: float
    n: float
    raw: dict[int, np.ndarray]
    normalized: dict[int, np.ndarray]


def edge_scaling_profile(
    m_values: Sequence[float],
    k_x: float,
    n: float,
    ks: Sequence[int],
    Ly: int = 40,
    lam: float = 1.0,
    mu: float = 0.0,
    boundary_width: int = 2,
) -> EdgeProfile:
    """Normalised boundary hyperfine values ``h_{n;k}(m; k_x)`` on a cylinder.

    Region ``A`` is the lower half ``y < Ly/2`` of the cylinder and the
    boundary set is the ``boundary_width`` rows of ``A`` next to the cut,
    both orbitals summed.
    """
    if boundary_width < 1 or boundary_width > Ly // 2:
        raise DomainError("boundary_width must be between 1 and Ly/2")
    spec = LatticeSpec(dimension=1, Lx=Ly, boundary=("open",), n_orbitals=2, mu=mu)
    half = Ly // 2
    raw: dict[int, list[float]] = {k: [] for k in ks}
    for m in m_values:
        M = build_chern_cylinder_correlation(spec, ChernParams(m=float(m), lam=lam, mu=mu), k_x)
        region = Region(tuple(s for s in M.sites if s.y < half))
        sd = spectral_decompose(restrict(M, region))
        edge = [s for s in region.sites if s.y >= half - boundary_width]
        for k in ks:
            raw[k].append(hyperfine_field(sd, n, k).region_sum(edge))
    raw_arr = {k: np.array(v) for k, v in raw.items()}
    norm = {k: v / np.max(v) for k, v in raw_arr.items()}
    return EdgeProfile(
        m_values=np.asarray(m_values, dtype=float), k_x=float(k_x), n=float(n), raw=raw_arr, normalized=norm
    )
