"""Full counting statistics through truncated Taylor jets.

A :class:`Jet` stores the Taylor coefficients ``a_0 .. a_K`` of a function
of the counting field ``lambda`` about ``lambda = 0``.  All generating
functions of this module are built from jets, so cumulants are exact
coefficient extractions rather than numerical derivatives:

* ``ln chi(lambda) = sum_l ln(1 + xi_l (e^{i lambda} - 1))`` and
  ``C_k = (-i)^k k! [lambda^k] ln chi``;
* ``G_j(lambda) = <e^{i lambda N_A} n_j>`` and
  ``C_k(j) = (-i)^{k-1} (k-1)! [lambda^{k-1}] (G_j / chi)``;
* the point-contact identity, which obtains ``G_j`` from the generating
  functions of ``A`` and ``A`` without site ``j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, InternalInconsistencyError
from .gaussian import SpectralData, spectral_decompose
from .lattice import CorrelationMatrix, Region, SiteIndex, restrict

#: Default truncation order of generating-function jets.
DEFAULT_ORDER = 12
#: Largest order-0 coefficient tolerated before dividing out a pole.
POLE_TOL = 1e-12


class Jet:
    """Truncated power series ``sum_{p<=K} a_p lambda^p`` with complex coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[complex]):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise DomainError("a jet needs at least one coefficient")
        c.setflags(write=False)
        self.coeffs = c

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __getitem__(self, p: int) -> complex:
        return complex(self.coeffs[p])

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, a0={self.coeffs[0]:.6g})"

    @classmethod
    def constant(cls, value: complex, order: int) -> "Jet":
        c = np.zeros(order + 1, dtype=complex)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, order: int) -> "Jet":
        """The jet of ``lambda`` itself."""
        c = np.zeros(order + 1, dtype=complex)
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def exp_i(cls, order: int) -> "Jet":
        """Jet of ``e^{i lambda}``."""
        p = np.arange(order + 1)
        return cls(np.array([1j**q / math.factorial(q) for q in p]))

    @classmethod
    def expm1_i(cls, order: int) -> "Jet":
        """Jet of ``e^{i lambda} - 1``; its constant term is exactly zero."""
        c = cls.exp_i(order).coeffs.copy()
        c[0] = 0.0
        return cls(c)

    def _coerce(self, other: Union["Jet", complex]) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                raise DomainError("jets of different orders cannot be combined")
            return other
        return Jet.constant(complex(other), self.order)

    def __add__(self, other):
        return Jet(self.coeffs + self._coerce(other).coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs)

    def __sub__(self, other):
        return Jet(self.coeffs - self._coerce(other).coeffs)

    def __rsub__(self, other):
        return Jet(self._coerce(other).coeffs - self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * complex(other))
        o = self._coerce(other)
        return Jet(np.convolve(self.coeffs, o.coeffs)[: self.order + 1])

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a = self.coeffs
        if abs(a[0]) == 0:
            raise DomainError("cannot invert a jet with zero constant term")
        b = np.zeros_like(a)
        b[0] = 1 / a[0]
        for p in range(1, a.size):
            b[p] = -np.dot(a[1 : p + 1], b[p - 1 :: -1][:p]) / a[0]
        return Jet(b)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs / complex(other))
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def derivative(self) -> "Jet":
        """``d/d lambda``; the top coefficient is lost, so the order drops by one."""
        p = np.arange(1, self.coeffs.size)
        if p.size == 0:
            return Jet([0.0])
        return Jet(self.coeffs[1:] * p)

    def log(self) -> "Jet":
        """``ln f`` with the principal branch at ``lambda = 0``."""
        a = self.coeffs
        if abs(a[0]) == 0:
            raise DomainError("log of a jet with zero constant term")
        # f * (ln f)' = f'
        K = self.order
        g = np.zeros_like(a)
        g[0] = np.log(a[0])
        for p in range(1, K + 1):
            s = p * a[p] - sum(q * g[q] * a[p - q] for q in range(1, p))
            g[p] = s / (p * a[0])
        return Jet(g)

    def exp(self) -> "Jet":
        """``exp f`` via ``(e^f)' = f' e^f``."""
        a = self.coeffs
        K = self.order
        e = np.zeros_like(a)
        e[0] = np.exp(a[0])
        for p in range(1, K + 1):
            e[p] = sum(q * a[q] * e[p - q] for q in range(1, p + 1)) / p
        return Jet(e)

    def shift_down(self) -> "Jet":
        """Divide by ``lambda``; the constant term must vanish."""
        if abs(self.coeffs[0]) > POLE_TOL:
            raise InternalInconsistencyError(
                f"cannot divide by lambda: constant term {abs(self.coeffs[0]):.3e} exceeds {POLE_TOL}"
            )
        return Jet(self.coeffs[1:])

    def truncate(self, order: int) -> "Jet":
        return Jet(self.coeffs[: order + 1])


def _mode_log(xi: float, order: int) -> Jet:
    """``ln(1 + xi (e^{i lambda} - 1))``."""
    return (1 + Jet.expm1_i(order) * xi).log()


def log_chi_jet(sd: Union[SpectralData, Sequence[float]], order: int = DEFAULT_ORDER) -> Jet:
    """Jet of ``ln chi(lambda) = sum_l ln(1 + xi_l (e^{i lambda} - 1))``."""
    xi = sd.xi if isinstance(sd, SpectralData) else np.asarray(sd, dtype=float)
    total = Jet.constant(0.0, order)
    for x in xi:
        total = total + _mode_log(float(x), order)
    return total


def chi_jet(sd: Union[SpectralData, Sequence[float]], order: int = DEFAULT_ORDER) -> Jet:
    """Generating function ``chi(lambda) = <e^{i lambda N_A}>``."""
    if order < 2:
        raise DomainError("order must be at least 2")
    return log_chi_jet(sd, order).exp()


def cumulants_from_log(log_chi: Jet) -> np.ndarray:
    """``C_k = (-i)^k k! [lambda^k] ln chi`` for ``k = 0..K`` (real parts)."""
    g = log_chi.coeffs
    k = np.arange(g.size)
    c = ((-1j) ** k) * np.array([math.factorial(int(q)) for q in k], dtype=float) * g
    return c.real


def cumulants(sd: Union[SpectralData, Sequence[float]], order: int = DEFAULT_ORDER) -> np.ndarray:
    """Region cumulants ``C_0 .. C_order`` from the per-mode logarithms.

    Summing mode logarithms avoids the ``exp``/``log`` round trip of
    :func:`cumulants_from_chi`, whose Taylor coefficients grow like
    ``N_A^k / k!`` and cost accuracy at high order.
    """
    return cumulants_from_log(log_chi_jet(sd, order))


def cumulants_from_chi(chi: Jet) -> np.ndarray:
    """``C_k = (-i)^k k! [lambda^k] ln chi`` for ``k = 0..K`` (real parts)."""
    g = chi.log().coeffs
    k = np.arange(g.size)
    c = ((-1j) ** k) * np.array([math.factorial(int(q)) for q in k], dtype=float) * g
    return c.real


def g_jet(sd: SpectralData, j: SiteIndex, order: int = DEFAULT_ORDER) -> Jet:
    """``G_j(lambda) = <e^{i lambda N_A} n_j>``.

    ``G_j = chi sum_l |psi_l(j)|^2 xi_l e^{i lambda} / (1 + xi_l (e^{i lambda} - 1))``.
    """
    try:
        row = sd.sites.index(j)
    except ValueError:
        raise DomainError(f"site {j} is not in the region") from None
    w = np.abs(sd.vectors[row]) ** 2
    e = Jet.exp_i(order)
    em1 = Jet.expm1_i(order)
    ratio = Jet.constant(0.0, order)
    for wl, xl in zip(w, sd.xi):
        if wl == 0.0 or xl == 0.0:
            continue
        ratio = ratio + (e * (wl * xl)) / (1 + em1 * float(xl))
    return chi_jet(sd, order) * ratio


def density_cumulant_from_ratio(ratio: Jet, k: int) -> float:
    """``(-i)^{k-1} (k-1)! [lambda^{k-1}] ratio`` (real part)."""
    if not 1 <= k <= ratio.order + 1:
        raise DomainError(f"order {k} exceeds the jet order")
    val = ((-1j) ** (k - 1)) * math.factorial(k - 1) * ratio[k - 1]
    return float(val.real)


def density_cumulant_g(sd: SpectralData, j: SiteIndex, k: int, order: int = DEFAULT_ORDER) -> float:
    """``C_k(j)`` from the ``G_j / chi`` route."""
    ratio = g_jet(sd, j, order) / chi_jet(sd, order)
    return density_cumulant_from_ratio(ratio, k)


def qpc_ratio_jet(M: CorrelationMatrix, A: Region, l: SiteIndex, order: int = DEFAULT_ORDER) -> Jet:
    """``[chi_A - chi_{A minus l}] / chi_A * e^{i lambda} / (e^{i lambda} - 1)``.

    The simple pole at ``lambda = 0`` is removed at the jet level: the
    numerator's constant term must vanish, after which both numerator and
    ``e^{i lambda} - 1`` are divided by ``lambda``.  The result has order
    ``order``.
    """
    if l not in A:
        raise DomainError(f"site {l} is not in the region")
    K = order + 1
    log_a = log_chi_jet(spectral_decompose(restrict(M, A)), K)
    rest = A.without(l)
    log_b = log_chi_jet(spectral_decompose(restrict(M, rest)), K) if len(rest) else Jet.constant(0.0, K)
    # 1 - chi_b/chi_a written as -expm1 of the log difference avoids cancellation
    d = log_b - log_a
    d0 = d[0]
    if abs(d0) > 1e-12:
        raise InternalInconsistencyError(f"chi_A - chi_(A minus l) is {d0:.3e} at lambda = 0")
    d = Jet([0.0, *d.coeffs[1:]])
    num = -(d.exp() - 1.0)
    num = num.shift_down()
    den = Jet.expm1_i(K).shift_down()
    e = Jet.exp_i(order)
    return num * e / den


def qpc_protocol(M: CorrelationMatrix, A: Region, l: SiteIndex, k: int, order: int = DEFAULT_ORDER) -> float:
    """``C_k(l)`` from the two-partition generating functions.

    Raises
    ------
    InternalInconsistencyError
        If ``chi_A - chi_{A minus l}`` does not vanish at ``lambda = 0``.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    order = max(order, k)
    return density_cumulant_from_ratio(qpc_ratio_jet(M, A, l, order), k)


def project_measure(M: CorrelationMatrix, i: SiteIndex) -> CorrelationMatrix:
    """Correlation matrix ``P_i M P_i`` after a single-particle projection on site ``i``.

    Only the ``(i, i)`` entry survives, so the entropy of any region
    containing ``i`` equals the binary entropy of ``M_ii``.
    """
    idx = M.index_of(i)
    out = np.zeros((M.size, M.size), dtype=complex)
    out[idx, idx] = M.submatrix(np.array([idx]))[0, 0]
    return CorrelationMatrix(out, M.sites, tag=f"{M.tag}|P[{idx}]")
