"""Lattice models and ground-state correlation matrices.

Two families of free-fermion systems are provided:

* the nearest-neighbour tight-binding chain with hopping amplitude ``-1/2``
  (dispersion ``E(k) = -cos k``), with open, periodic or infinite
  boundaries;
* the two-band Chern insulator

  .. math::

     H(k) = (m + \\cos k_x + \\cos k_y)\\sigma_z
            + \\lambda(\\sin k_x \\sigma_x + \\sin k_y \\sigma_y) - \\mu,

  on a torus (built in momentum space) or a cylinder at fixed ``k_x``.

The ground state of a quadratic Hamiltonian is fully characterised by the
correlation matrix ``M_ij = <c_i^dagger c_j>``.  Sites are ordered
row-major with ``x`` fastest and the orbital index innermost.

A brute-force Fock-space oracle (:func:`fock_oracle`) diagonalises tiny
systems in the many-body basis and serves as an independent reference for
the Gaussian formulas.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Optional, Sequence

import numpy as np

from .errors import DegeneracyError, DomainError, GaplessError, SizeCapError

Boundary = Literal["open", "periodic", "infinite"]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

#: Single-particle levels closer than this to the Fermi level count as degenerate.
FERMI_TOL = 1e-10
#: Largest number of modes accepted by the Fock-space oracle.
FOCK_MAX_SITES = 8


@dataclass(frozen=True, order=True)
class SiteIndex:
    """Label of a single-particle orbital.

    Ordering of instances follows the storage convention: ``y`` first,
    then ``x``, then ``orbital``.
    """

    y: Optional[int]
    x: int
    orbital: int = 0

    @property
    def cell(self) -> tuple[int, Optional[int]]:
        return (self.x, self.y)


def site(x: int, y: Optional[int] = None, orbital: int = 0) -> SiteIndex:
    """Convenience constructor with ``(x, y, orbital)`` argument order."""
    return SiteIndex(y=y, x=x, orbital=orbital)


@dataclass(frozen=True)
class ChernParams:
    """Parameters of the two-band Chern model."""

    m: float
    lam: float = 1.0
    mu: float = 0.0

    def __post_init__(self) -> None:
        for name in ("m", "lam", "mu"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"ChernParams.{name} must be finite")


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry and filling of a lattice.

    Parameters
    ----------
    dimension : int
        1 for chains, 2 for the Chern model.
    Lx, Ly : int
        Extents; ``Ly`` is ignored in 1D.  For an ``infinite`` chain ``Lx``
        is the number of sites of the materialised window.
    boundary : tuple of str
        One entry per axis, each ``open``, ``periodic`` or (chain only)
        ``infinite``.
    n_orbitals : int
        Orbitals per cell (1 for the chain, 2 for the Chern model).
    filling : float, optional
        Fraction of single-particle levels occupied.
    mu : float, optional
        Chemical potential.  Exactly one of ``filling`` and ``mu`` is set.
    """

    dimension: int
    Lx: int
    Ly: int = 1
    boundary: tuple[str, ...] = ("open",)
    n_orbitals: int = 1
    filling: Optional[float] = None
    mu: Optional[float] = None

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise DomainError("dimension must be 1 or 2")
        if self.Lx < 2 or (self.dimension == 2 and self.Ly < 2):
            raise DomainError("lattice extents must be >= 2")
        if len(self.boundary) != self.dimension:
            raise DomainError("one boundary condition per axis is required")
        for b in self.boundary:
            if b not in ("open", "periodic", "infinite"):
                raise DomainError(f"unknown boundary condition {b!r}")
        if self.dimension == 2 and "infinite" in self.boundary:
            raise DomainError("infinite boundaries are only available for chains")
        if (self.filling is None) == (self.mu is None):
            raise DomainError("exactly one of filling and mu must be given")
        if self.filling is not None and not 0.0 <= self.filling <= 1.0:
            raise DomainError("filling must lie in [0, 1]")

    @classmethod
    def chain(
        cls,
        L: int,
        boundary: Boundary = "open",
        filling: Optional[float] = 0.5,
        mu: Optional[float] = None,
    ) -> "LatticeSpec":
        if mu is not None:
            filling = None
        return cls(dimension=1, Lx=L, boundary=(boundary,), filling=filling, mu=mu)

    @classmethod
    def square(
        cls, Lx: int, Ly: int, boundary: tuple[str, str] = ("periodic", "periodic")
    ) -> "LatticeSpec":
        """Two-orbital square lattice; occupation is driven by ``ChernParams.mu``."""
        return cls(dimension=2, Lx=Lx, Ly=Ly, boundary=boundary, n_orbitals=2, mu=0.0)

    @property
    def n_sites(self) -> int:
        return self.Lx * (self.Ly if self.dimension == 2 else 1) * self.n_orbitals

    def sites(self) -> tuple[SiteIndex, ...]:
        if self.dimension == 1:
            return tuple(
                SiteIndex(y=None, x=x, orbital=o)
                for x in range(self.Lx)
                for o in range(self.n_orbitals)
            )
        return tuple(
            SiteIndex(y=y, x=x, orbital=o)
            for y in range(self.Ly)
            for x in range(self.Lx)
            for o in range(self.n_orbitals)
        )


@dataclass(frozen=True)
class Region:
    """Ordered set of sites forming a subsystem ``A``."""

    sites: tuple[SiteIndex, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sites", tuple(self.sites))
        members = frozenset(self.sites)
        if len(members) != len(self.sites):
            raise DomainError("region contains duplicate sites")
        object.__setattr__(self, "_members", members)

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, item: object) -> bool:
        return item in self._members

    @property
    def size(self) -> int:
        return len(self.sites)

    @classmethod
    def interval(cls, start: int, stop: int) -> "Region":
        """Chain sites ``start <= x < stop``."""
        return cls(tuple(SiteIndex(y=None, x=x) for x in range(start, stop)))

    @classmethod
    def rectangle(
        cls, x0: int, x1: int, y0: int, y1: int, n_orbitals: int = 2
    ) -> "Region":
        """Cells ``x0 <= x < x1``, ``y0 <= y < y1`` with all orbitals."""
        return cls(
            tuple(
                SiteIndex(y=y, x=x, orbital=o)
                for y in range(y0, y1)
                for x in range(x0, x1)
                for o in range(n_orbitals)
            )
        )

    def union(self, other: "Region") -> "Region":
        return Region(self.sites + other.sites)

    def without(self, s: SiteIndex) -> "Region":
        return Region(tuple(t for t in self.sites if t != s))


class CorrelationMatrix:
    """Hermitian correlation matrix with a site index map.

    Instances are immutable.  Subclasses may generate entries on demand
    (see :class:`TorusCorrelation`); :meth:`submatrix` is the only access
    path the rest of the toolkit relies on.
    """

    def __init__(self, matrix: np.ndarray, sites: Sequence[SiteIndex], tag: str = ""):
        matrix = np.array(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DomainError("correlation matrix must be square")
        if matrix.shape[0] != len(sites):
            raise DomainError("index map length does not match matrix size")
        matrix.setflags(write=False)
        self._matrix = matrix
        self.sites = tuple(sites)
        self.tag = tag
        self._index = {s: i for i, s in enumerate(self.sites)}

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def size(self) -> int:
        return len(self.sites)

    def index_of(self, s: SiteIndex) -> int:
        try:
            return self._index[s]
        except KeyError:
            raise DomainError(f"site {s} is not part of this lattice") from None

    def indices(self, sites: Iterable[SiteIndex]) -> np.ndarray:
        return np.array([self.index_of(s) for s in sites], dtype=int)

    def submatrix(self, idx: np.ndarray) -> np.ndarray:
        return self.matrix[np.ix_(idx, idx)]

    def particle_number(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(size={self.size}, tag={self.tag!r})"


class TorusCorrelation(CorrelationMatrix):
    """Translation-invariant correlation matrix on a torus.

    Only the kernel ``G[dy, dx, a, b] = <c^dagger_{r,a} c_{r-d,b}>`` is
    stored; blocks are assembled on request, so 60x60 tori never allocate
    the full real-space matrix unless :attr:`matrix` is accessed.
    """

    def __init__(self, kernel: np.ndarray, spec: LatticeSpec, tag: str = ""):
        kernel = np.array(kernel, dtype=complex)
        kernel.setflags(write=False)
        self.kernel = kernel
        self.spec = spec
        self.sites = spec.sites()
        self.tag = tag
        self._index = {s: i for i, s in enumerate(self.sites)}
        self._dense: Optional[np.ndarray] = None

    def submatrix(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx, dtype=int)
        norb = self.spec.n_orbitals
        cell = idx // norb
        orb = idx % norb
        x = cell % self.spec.Lx
        y = cell // self.spec.Lx
        dx = (x[:, None] - x[None, :]) % self.spec.Lx
        dy = (y[:, None] - y[None, :]) % self.spec.Ly
        return self.kernel[dy, dx, orb[:, None], orb[None, :]]

    @property
    def matrix(self) -> np.ndarray:
        if self._dense is None:
            dense = self.submatrix(np.arange(self.size))
            dense.setflags(write=False)
            self._dense = dense
        return self._dense

    def particle_number(self) -> float:
        per_cell = float(np.real(np.trace(self.kernel[0, 0])))
        return per_cell * self.spec.Lx * self.spec.Ly


def _fill_levels(
    h: np.ndarray, filling: Optional[float], mu: Optional[float]
) -> np.ndarray:
    """Correlation matrix of the Slater determinant filling levels of ``h``."""
    energies, vecs = np.linalg.eigh(h)
    n = h.shape[0]
    if filling is not None:
        n_occ = int(math.floor(filling * n + 1e-9))
        if 0 < n_occ < n and energies[n_occ] - energies[n_occ - 1] < FERMI_TOL:
            raise DegeneracyError(
                f"Fermi level degenerate at filling {filling}: levels "
                f"{energies[n_occ - 1]:.3e} and {energies[n_occ]:.3e} coincide; "
                "specify a chemical potential instead"
            )
        occ = np.arange(n) < n_occ
    else:
        occ = energies < mu - FERMI_TOL
    u = vecs[:, occ]
    # <c_i^dagger c_j> = sum_occ conj(u_i) u_j
    return u.conj() @ u.T


def chain_hamiltonian(L: int, boundary: str) -> np.ndarray:
    """Single-particle hopping matrix of the chain, hopping ``-1/2``."""
    h = np.zeros((L, L))
    for i in range(L - 1):
        h[i, i + 1] += -0.5
        h[i + 1, i] += -0.5
    if boundary == "periodic":
        h[L - 1, 0] += -0.5
        h[0, L - 1] += -0.5
    return h


def infinite_chain_correlation(L: int, k_f: float) -> np.ndarray:
    """Window of ``L`` sites of the infinite chain with Fermi momentum ``k_f``.

    ``M_ij = sin(k_f (i-j)) / (pi (i-j))`` and ``M_ii = k_f / pi``.
    """
    d = np.arange(L)[:, None] - np.arange(L)[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        m = np.where(d == 0, k_f / np.pi, np.sin(k_f * d) / (np.pi * d))
    return m.astype(complex)


def build_chain_correlation(spec: LatticeSpec) -> CorrelationMatrix:
    """Ground-state correlation matrix of the hopping ``-1/2`` chain.

    ``open`` and ``periodic`` chains fill the lowest ``floor(f L)`` levels
    (or all levels below ``mu``) and raise :class:`DegeneracyError` when the
    Fermi level is degenerate.  ``infinite`` returns a window of the
    thermodynamic Fermi sea with ``k_F = pi f`` (or ``arccos(-mu)``).

    Examples
    --------
    >>> M = build_chain_correlation(LatticeSpec.chain(2, "open", 0.5))
    >>> np.round(M.matrix.real, 12)
    array([[0.5, 0.5],
           [0.5, 0.5]])
    """
    if spec.dimension != 1:
        raise DomainError("build_chain_correlation requires a 1D spec")
    boundary = spec.boundary[0]
    L = spec.Lx
    if boundary == "infinite":
        if spec.filling is not None:
            k_f = np.pi * spec.filling
        else:
            k_f = float(np.arccos(np.clip(-spec.mu, -1.0, 1.0)))
        m = infinite_chain_correlation(L, k_f)
        tag = f"chain(L={L}, infinite, k_F={k_f!r})"
    else:
        m = _fill_levels(chain_hamiltonian(L, boundary), spec.filling, spec.mu)
        occ = f"filling={spec.filling!r}" if spec.filling is not None else f"mu={spec.mu!r}"
        tag = f"chain(L={L}, {boundary}, {occ})"
    return CorrelationMatrix(m, spec.sites(), tag=tag)


def bloch_hamiltonian(kx: np.ndarray, ky: np.ndarray, params: ChernParams) -> np.ndarray:
    """``H(k)`` on arrays of momenta; returns shape ``kx.shape + (2, 2)``."""
    kx, ky = np.broadcast_arrays(np.asarray(kx, float), np.asarray(ky, float))
    dz = params.m + np.cos(kx) + np.cos(ky)
    dx = params.lam * np.sin(kx)
    dy = params.lam * np.sin(ky)
    return (
        dz[..., None, None] * SIGMA_Z
        + dx[..., None, None] * SIGMA_X
        + dy[..., None, None] * SIGMA_Y
        - params.mu * np.eye(2)
    )


def build_chern_torus_correlation(spec: LatticeSpec, params: ChernParams) -> TorusCorrelation:
    """Chern-model ground state on a periodic ``Lx x Ly`` torus.

    The projector onto levels below ``mu`` is formed at every allowed
    momentum and Fourier transformed to a real-space kernel.  Levels within
    ``FERMI_TOL`` of ``mu`` are left empty.
    """
    if spec.dimension != 2 or tuple(spec.boundary) != ("periodic", "periodic"):
        raise DomainError("torus build requires a 2D spec periodic on both axes")
    kx = 2 * np.pi * np.arange(spec.Lx) / spec.Lx
    ky = 2 * np.pi * np.arange(spec.Ly) / spec.Ly
    KX, KY = np.meshgrid(kx, ky, indexing="xy")  # arrays indexed [y, x]
    energies, vecs = np.linalg.eigh(bloch_hamiltonian(KX, KY, params))
    occ = (energies < -FERMI_TOL).astype(float)  # mu is already inside H(k)
    proj = np.einsum("yxan,yxn,yxbn->yxab", vecs, occ, vecs.conj())
    # G(d)_{ab} = (1/N) sum_k exp(-i k.d) P(k)_{ba}
    kernel = np.fft.fft2(np.swapaxes(proj, -1, -2), axes=(0, 1)) / (spec.Lx * spec.Ly)
    tag = f"chern_torus(Lx={spec.Lx}, Ly={spec.Ly}, m={params.m!r}, lam={params.lam!r}, mu={params.mu!r})"
    return TorusCorrelation(kernel, spec, tag=tag)


def chern_real_space_hamiltonian(spec: LatticeSpec, params: ChernParams) -> np.ndarray:
    """Real-space single-particle Hamiltonian of the Chern model.

    Supports open or periodic boundaries on each axis.  Intended for small
    systems and cross-checks of the momentum-space builders.
    """
    Lx, Ly = spec.Lx, spec.Ly
    n = Lx * Ly * 2
    h = np.zeros((n, n), dtype=complex)
    onsite = params.m * SIGMA_Z - params.mu * np.eye(2)
    tx = SIGMA_Z / 2 + params.lam * SIGMA_X / 2j
    ty = SIGMA_Z / 2 + params.lam * SIGMA_Y / 2j

    def cell(x: int, y: int) -> slice:
        i = 2 * (y * Lx + x)
        return slice(i, i + 2)

    for y in range(Ly):
        for x in range(Lx):
            h[cell(x, y), cell(x, y)] += onsite
            for (dx, dy, t, axis) in ((1, 0, tx, 0), (0, 1, ty, 1)):
                x2, y2 = x + dx, y + dy
                ext = Lx if axis == 0 else Ly
                coord = x2 if axis == 0 else y2
                if coord >= ext:
                    if spec.boundary[axis] != "periodic":
                        continue
                    x2, y2 = x2 % Lx, y2 % Ly
                # c_r^dagger T c_{r+d} + h.c.
                h[cell(x, y), cell(x2, y2)] += t
                h[cell(x2, y2), cell(x, y)] += t.conj().T
    return h


def cylinder_hamiltonian(Ly: int, params: ChernParams, k_x: float) -> np.ndarray:
    """Chain in ``y`` obtained by Fourier transforming the Chern model along ``x``."""
    onsite = (
        (params.m + np.cos(k_x)) * SIGMA_Z
        + params.lam * np.sin(k_x) * SIGMA_X
        - params.mu * np.eye(2)
    )
    t = SIGMA_Z / 2 + params.lam * SIGMA_Y / 2j
    h = np.zeros((2 * Ly, 2 * Ly), dtype=complex)
    for y in range(Ly):
        h[2 * y : 2 * y + 2, 2 * y : 2 * y + 2] = onsite
        if y + 1 < Ly:
            h[2 * y : 2 * y + 2, 2 * y + 2 : 2 * y + 4] = t
            h[2 * y + 2 : 2 * y + 4, 2 * y : 2 * y + 2] = t.conj().T
    return h


def build_chern_cylinder_correlation(
    spec: LatticeSpec, params: ChernParams, k_x: float
) -> CorrelationMatrix:
    """Ground state of the cylinder (open in ``y``) at fixed momentum ``k_x``.

    Sites are labelled ``SiteIndex(x=0, y, orbital)``; levels with
    ``E < mu`` are filled, levels within ``FERMI_TOL`` of ``mu`` are empty.
    """
    if not 0.0 <= k_x < 2 * np.pi:
        raise DomainError("k_x must lie in [0, 2 pi)")
    Ly = spec.Ly if spec.dimension == 2 else spec.Lx
    h = cylinder_hamiltonian(Ly, params, k_x)
    m = _fill_levels(h, None, 0.0)  # mu already inside h
    sites = tuple(SiteIndex(y=y, x=0, orbital=o) for y in range(Ly) for o in range(2))
    tag = f"chern_cylinder(Ly={Ly}, k_x={k_x!r}, m={params.m!r}, lam={params.lam!r}, mu={params.mu!r})"
    return CorrelationMatrix(m, sites, tag=tag)


def restrict(M: CorrelationMatrix, A: Region) -> CorrelationMatrix:
    """Principal submatrix of ``M`` on region ``A`` with the index map of ``A``."""
    if len(A) == 0:
        raise DomainError("cannot restrict to an empty region")
    sub = M.submatrix(M.indices(A.sites))
    return CorrelationMatrix(sub, A.sites, tag=f"{M.tag}|A[{len(A)}]")


# Fock-space oracle ---------------------------------------------------------


@dataclass(frozen=True)
class FockResult:
    """Many-body reference values for a region."""

    entropies: dict[float, float]
    spectrum: np.ndarray = field(repr=False)


def _many_body_hamiltonian(h: np.ndarray, n_particles: int) -> tuple[np.ndarray, list[int]]:
    L = h.shape[0]
    basis = [
        sum(1 << i for i in occ) for occ in itertools.combinations(range(L), n_particles)
    ]
    pos = {b: i for i, b in enumerate(basis)}
    H = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, state in enumerate(basis):
        for j in range(L):
            if not state >> j & 1:
                continue
            sign_j = (-1) ** bin(state & ((1 << j) - 1)).count("1")
            s1 = state ^ (1 << j)
            for i in range(L):
                if h[i, j] == 0 or s1 >> i & 1:
                    continue
                sign_i = (-1) ** bin(s1 & ((1 << i) - 1)).count("1")
                H[pos[s1 | (1 << i)], col] += sign_i * sign_j * h[i, j]
    return H, basis


def fock_oracle_hamiltonian(
    h: np.ndarray, n_particles: int, region: Sequence[int], orders: Sequence[float] = (2, 3, 4)
) -> FockResult:
    """Exact many-body entropies of the ground state of ``h`` with ``n_particles``.

    Parameters
    ----------
    h : ndarray
        Single-particle Hamiltonian, at most ``FOCK_MAX_SITES`` modes.
    n_particles : int
        Particle-number sector of the ground state.
    region : sequence of int
        Mode indices forming ``A``.
    orders : sequence of float
        Renyi orders computed in addition to von Neumann (key ``1``).
    """
    L = h.shape[0]
    if L > FOCK_MAX_SITES:
        raise SizeCapError(
            f"Fock oracle handles at most {FOCK_MAX_SITES} modes, got {L}"
        )
    region = list(region)
    rest = [i for i in range(L) if i not in region]
    perm = region + rest
    hp = np.asarray(h, dtype=complex)[np.ix_(perm, perm)]
    H, basis = _many_body_hamiltonian(hp, n_particles)
    energies, vecs = np.linalg.eigh(H)
    if len(energies) > 1 and energies[1] - energies[0] < FERMI_TOL:
        raise DegeneracyError("many-body ground state is degenerate")
    psi = np.zeros((1 << len(region), 1 << len(rest)), dtype=complex)
    na = len(region)
    for amp, state in zip(vecs[:, 0], basis):
        psi[state & ((1 << na) - 1), state >> na] = amp
    rho = psi @ psi.conj().T
    p = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    pos = p[p > 0]
    ent = {1.0: float(-np.sum(pos * np.log(pos)))}
    for n in orders:
        ent[float(n)] = float(np.log(np.sum(pos**n)) / (1 - n))
    return FockResult(entropies=ent, spectrum=np.sort(p)[::-1])


def fock_oracle(spec: LatticeSpec, A: Region, orders: Sequence[float] = (2, 3, 4)) -> FockResult:
    """Brute-force ``S_1``, ``S_n`` and the spectrum of ``rho_A`` for a tiny chain."""
    if spec.dimension != 1 or spec.boundary[0] == "infinite":
        raise DomainError("Fock oracle supports finite chains only")
    if spec.n_sites > FOCK_MAX_SITES:
        raise SizeCapError(
            f"Fock oracle handles at most {FOCK_MAX_SITES} sites, got {spec.n_sites}"
        )
    h = chain_hamiltonian(spec.Lx, spec.boundary[0])
    if spec.filling is not None:
        n_part = int(math.floor(spec.filling * spec.Lx + 1e-9))
    else:
        n_part = int(np.sum(np.linalg.eigvalsh(h) < spec.mu - FERMI_TOL))
    sites = spec.sites()
    idx = [sites.index(s) for s in A.sites]
    return fock_oracle_hamiltonian(h, n_part, idx, orders)


def chern_number(params: ChernParams, grid: int = 40, gap_tol: float = 1e-9) -> int:
    """Lattice Chern number of the occupied band by plaquette Berry fluxes.

    Uses gauge-invariant link variables on a ``grid x grid`` Brillouin-zone
    mesh.  The state must be an insulator with one filled band at every
    momentum; otherwise :class:`GaplessError` is raised.
    """
    if grid < 20:
        raise DomainError("grid must be at least 20")
    # Gap check on a refined mesh that contains the high-symmetry points.
    fine = 4 * grid
    k = 2 * np.pi * np.arange(fine) / fine
    KX, KY = np.meshgrid(k, k, indexing="xy")
    dz = params.m + np.cos(KX) + np.cos(KY)
    dnorm = np.sqrt(dz**2 + params.lam**2 * (np.sin(KX) ** 2 + np.sin(KY) ** 2))
    margin = float(np.min(dnorm) - abs(params.mu))
    if margin <= gap_tol:
        raise GaplessError(
            f"chemical potential {params.mu} is not inside a gap (margin {margin:.3e})"
        )
    k = 2 * np.pi * np.arange(grid) / grid
    KX, KY = np.meshgrid(k, k, indexing="xy")
    _, vecs = np.linalg.eigh(bloch_hamiltonian(KX, KY, params))
    u = vecs[..., 0]  # lower band, indexed [y, x, component]

    def link(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        z = np.sum(a.conj() * b, axis=-1)
        return z / np.abs(z)

    ux = link(u, np.roll(u, -1, axis=1))
    uy = link(u, np.roll(u, -1, axis=0))
    flux = np.angle(ux * np.roll(uy, -1, axis=1) * np.roll(ux, -1, axis=0).conj() * uy.conj())
    c = float(np.sum(flux) / (2 * np.pi))
    return int(round(c))
