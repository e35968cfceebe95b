"""Spectral entanglement quantities of Gaussian (free-fermion) states.

Given a restricted correlation matrix ``M_A`` with eigenpairs
``(xi_l, psi_l)``, the Renyi entropies follow from single-mode functions

.. math::

    S_1 = -\\sum_l [\\xi_l \\ln \\xi_l + (1-\\xi_l)\\ln(1-\\xi_l)], \\qquad
    S_n = \\frac{1}{1-n}\\sum_l \\ln[\\xi_l^n + (1-\\xi_l)^n],

and the entanglement contour distributes each mode's contribution over the
sites with weight ``|psi_l(j)|^2``.  The refined Renyi entropy is the von
Neumann entropy of the replica state ``rho_A^n / tr rho_A^n``, whose
single-particle occupations are ``xi^n / (xi^n + (1-xi)^n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, InvalidCorrelationMatrix, SingularSpectrumError
from .lattice import CorrelationMatrix, SiteIndex

#: Eigenvalues may leave [0, 1] by at most this much before being rejected.
CLAMP_TOL = 1e-8

CONTOUR_KINDS = ("vonNeumann", "renyi", "refined", "hyperfine", "cumulant")


@dataclass(frozen=True)
class SpectralData:
    """Eigen-decomposition of a restricted correlation matrix.

    Attributes
    ----------
    xi : ndarray
        Eigenvalues in ascending order, clamped to ``[0, 1]``.
    vectors : ndarray
        Orthonormal eigenvectors as columns, ``vectors[j, l] = psi_l(j)``.
    sites : tuple of SiteIndex
        Site labels of the rows of ``vectors``.
    """

    xi: np.ndarray
    vectors: np.ndarray
    sites: tuple[SiteIndex, ...]

    @property
    def size(self) -> int:
        return len(self.xi)

    @property
    def weights(self) -> np.ndarray:
        """``|psi_l(j)|^2`` with rows indexed by site and columns by mode."""
        return np.abs(self.vectors) ** 2

    def reassemble(self) -> np.ndarray:
        """``O diag(xi) O^dagger``; equals the decomposed matrix."""
        return (self.vectors * self.xi) @ self.vectors.conj().T

    def mode_density(self, values: np.ndarray) -> np.ndarray:
        """Site field ``sum_l |psi_l(j)|^2 values_l``."""
        return self.weights @ np.asarray(values, dtype=float)


@dataclass(frozen=True)
class EntropyReport:
    """Value of ``S_n`` (or the refined ``S~_n``) in nats."""

    n: float
    value: float
    refined: bool = False

    @property
    def trace(self) -> Optional[float]:
        """``T_n = tr rho_A^n = exp((1-n) S_n)``; ``None`` at ``n = 1`` or when refined."""
        if self.n == 1 or self.refined:
            return None
        return math.exp((1 - self.n) * self.value)


@dataclass(frozen=True)
class ContourField:
    """Real field on the sites of a region.

    ``kind`` is one of ``vonNeumann``, ``renyi``, ``refined``,
    ``hyperfine`` or ``cumulant``; ``n`` is the Renyi order (``None`` for
    cumulant densities) and ``k`` the cumulant order (hyperfine and
    cumulant kinds only).
    """

    values: np.ndarray
    sites: tuple[SiteIndex, ...]
    kind: str
    n: Optional[float] = None
    k: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in CONTOUR_KINDS:
            raise DomainError(f"unknown contour kind {self.kind!r}")
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.sites),):
            raise DomainError("one value per site is required")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def total(self) -> float:
        """Exactly rounded sum of all site values."""
        return math.fsum(self.values.tolist())

    def as_dict(self) -> dict[SiteIndex, float]:
        return dict(zip(self.sites, self.values.tolist()))

    def region_sum(self, sites: Sequence[SiteIndex]) -> float:
        lookup = self.as_dict()
        return math.fsum(lookup[s] for s in sites)

    def cell_values(self) -> tuple[list[tuple[int, Optional[int]]], np.ndarray, bool]:
        """Values summed over orbitals per cell, ordered by ``(y, x)``.

        Returns the cell list, the summed values and a flag telling whether
        any cell carried more than one orbital.
        """
        acc: dict[tuple[int, Optional[int]], list[float]] = {}
        for s, v in zip(self.sites, self.values.tolist()):
            acc.setdefault((s.x, s.y), []).append(v)
        cells = sorted(acc, key=lambda c: (c[1] if c[1] is not None else -1, c[0]))
        summed = np.array([math.fsum(acc[c]) for c in cells])
        multi = any(len(v) > 1 for v in acc.values())
        return cells, summed, multi


def _as_matrix(M: Union[CorrelationMatrix, np.ndarray]) -> tuple[np.ndarray, tuple[SiteIndex, ...]]:
    if isinstance(M, CorrelationMatrix):
        return np.asarray(M.matrix), M.sites
    arr = np.asarray(M, dtype=complex)
    return arr, tuple(SiteIndex(y=None, x=i) for i in range(arr.shape[0]))


def spectral_decompose(M_A: Union[CorrelationMatrix, np.ndarray]) -> SpectralData:
    """Diagonalise a restricted correlation matrix.

    Eigenvalues are clamped to ``[0, 1]`` after checking that no excursion
    exceeds ``CLAMP_TOL``.  Each eigenvector is rotated so that its
    largest-magnitude component (first one on ties) is real and positive,
    which makes downstream fields reproducible.

    Raises
    ------
    InvalidCorrelationMatrix
        If the input is not Hermitian or an eigenvalue leaves
        ``[-CLAMP_TOL, 1 + CLAMP_TOL]``.
    """
    m, sites = _as_matrix(M_A)
    if m.size == 0:
        raise DomainError("empty correlation matrix")
    if np.max(np.abs(m - m.conj().T)) > 1e-10:
        raise InvalidCorrelationMatrix("correlation matrix is not Hermitian")
    xi, vecs = np.linalg.eigh(m)
    excursion = max(-float(xi[0]), float(xi[-1]) - 1.0, 0.0)
    if excursion > CLAMP_TOL:
        raise InvalidCorrelationMatrix(
            f"eigenvalue excursion {excursion:.3e} outside [0, 1] exceeds {CLAMP_TOL}"
        )
    xi = np.clip(xi, 0.0, 1.0)
    lead = np.argmax(np.abs(vecs), axis=0)
    pivot = vecs[lead, np.arange(vecs.shape[1])]
    vecs = vecs * (pivot.conj() / np.abs(pivot))
    xi.setflags(write=False)
    vecs.setflags(write=False)
    return SpectralData(xi=xi, vectors=vecs, sites=tuple(sites))


def binary_entropy(xi: np.ndarray) -> np.ndarray:
    """``-xi ln xi - (1-xi) ln(1-xi)`` with ``0 ln 0 = 0``."""
    xi = np.asarray(xi, dtype=float)
    return -xlogy(xi, xi) - xlogy(1 - xi, 1 - xi)


def renyi_mode(xi: np.ndarray, n: float) -> np.ndarray:
    """Per-mode Renyi entropy ``ln(xi^n + (1-xi)^n) / (1-n)``; von Neumann at ``n = 1``."""
    if n <= 0:
        raise DomainError("Renyi order must be positive")
    if n == 1:
        return binary_entropy(xi)
    xi = np.asarray(xi, dtype=float)
    return np.log(xi**n + (1 - xi) ** n) / (1 - n)


def replica_occupations(xi: np.ndarray, n: float) -> np.ndarray:
    """Occupations ``xi^n / (xi^n + (1-xi)^n)`` of the replica state."""
    if n <= 0:
        raise DomainError("Renyi order must be positive")
    xi = np.asarray(xi, dtype=float)
    a, b = xi**n, (1 - xi) ** n
    return a / (a + b)


def _mode_function(xi: np.ndarray, n: float, refined: bool) -> np.ndarray:
    if refined:
        return binary_entropy(replica_occupations(xi, n))
    return renyi_mode(xi, n)


def entropy(sd: SpectralData, n: float = 1.0, refined: bool = False) -> EntropyReport:
    """Renyi entropy ``S_n`` or, with ``refined=True``, the refined ``S~_n``.

    Examples
    --------
    >>> sd = spectral_decompose(np.array([[0.5]]))
    >>> round(entropy(sd, 2).value, 12) == round(math.log(2), 12)
    True
    """
    if n <= 0:
        raise DomainError("Renyi order must be positive")
    f = _mode_function(sd.xi, n, refined)
    return EntropyReport(n=float(n), value=math.fsum(f.tolist()), refined=refined)


def contour(sd: SpectralData, n: float = 1.0, refined: bool = False) -> ContourField:
    """Entanglement contour ``s_n(j) = sum_l |psi_l(j)|^2 f_n(xi_l)``.

    The refined contour uses the replica occupations with the von Neumann
    mode function and the original eigenvectors.
    """
    if n <= 0:
        raise DomainError("Renyi order must be positive")
    f = _mode_function(sd.xi, n, refined)
    kind = "refined" if refined else ("vonNeumann" if n == 1 else "renyi")
    return ContourField(values=sd.mode_density(f), sites=sd.sites, kind=kind, n=float(n))


def refined_entropy_fd(sd: SpectralData, n: float, step: float = 1e-4) -> float:
    """``n^2 d/dn [(n-1) S_n / n]`` by central differences (cross-check only)."""

    def g(m: float) -> float:
        return (m - 1) * entropy(sd, m).value / m

    return n * n * (g(n + step) - g(n - step)) / (2 * step)


@dataclass(frozen=True)
class EntanglementHamiltonian:
    """Single-particle entanglement (modular) Hamiltonian ``H^A``."""

    matrix: np.ndarray
    tag: str = ""

    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def correlation(self, scale: float = 1.0) -> np.ndarray:
        """Occupations of ``exp(-scale H)`` as a correlation matrix ``(1 + e^{scale H})^{-1}``."""
        eps, vecs = np.linalg.eigh(self.matrix)
        occ = 0.5 * (1 - np.tanh(0.5 * scale * eps))
        return (vecs * occ) @ vecs.conj().T


def peschel_hamiltonian(sd: SpectralData, delta: float = 1e-12) -> EntanglementHamiltonian:
    """``H^A = O diag(ln((1-xi)/xi)) O^dagger``.

    Raises
    ------
    SingularSpectrumError
        If some ``xi_l`` lies outside ``(delta, 1 - delta)``.
    """
    bad = np.flatnonzero((sd.xi <= delta) | (sd.xi >= 1 - delta))
    if bad.size:
        l = int(bad[0])
        raise SingularSpectrumError(
            f"mode {l} has xi = {sd.xi[l]!r}, outside ({delta}, {1 - delta})"
        )
    eps = np.log((1 - sd.xi) / sd.xi)
    h = (sd.vectors * eps) @ sd.vectors.conj().T
    return EntanglementHamiltonian(matrix=h, tag="peschel")


def analytic_tridiagonal_K(n_sites: int, q_f: float) -> EntanglementHamiltonian:
    """Tridiagonal model of the interval entanglement Hamiltonian.

    Hopping ``t_i = (i/N)(1 - i/N)`` for ``i = 1..N-1`` and onsite
    ``d_i = -2 cos(q_F) ((2i-1)/2N)(1 - (2i-1)/2N)`` for ``i = 1..N``.
    """
    if n_sites < 2:
        raise DomainError("tridiagonal model needs at least two sites")
    N = n_sites
    i = np.arange(1, N)
    t = (i / N) * (1 - i / N)
    j = np.arange(1, N + 1)
    w = (2 * j - 1) / (2 * N)
    d = -2 * math.cos(q_f) * w * (1 - w)
    if abs(math.cos(q_f)) < 1e-15:
        d = np.zeros(N)
    k = np.diag(d) + np.diag(t, 1) + np.diag(t, -1)
    return EntanglementHamiltonian(matrix=k.astype(complex), tag=f"tridiagonal(N={N}, q_F={q_f!r})")


def gibbs_correlation(K: EntanglementHamiltonian, temperature: float) -> CorrelationMatrix:
    """Correlation matrix ``(1 + e^{K/T})^{-1}`` of the Gibbs state of ``K``."""
    if temperature <= 0:
        raise DomainError("temperature must be positive")
    m = K.correlation(1.0 / temperature)
    sites = tuple(SiteIndex(y=None, x=i) for i in range(m.shape[0]))
    return CorrelationMatrix(m, sites, tag=f"gibbs({K.tag}, T={temperature!r})")

