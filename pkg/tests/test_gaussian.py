import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperent.acceptance import random_correlation, random_unitary
from hyperent.errors import InvalidCorrelationMatrix, SingularSpectrumError
from hyperent.gaussian import (
    ContourField,
    analytic_tridiagonal_K,
    binary_entropy,
    contour,
    entropy,
    gibbs_correlation,
    peschel_hamiltonian,
    refined_entropy_fd,
    replica_occupations,
    spectral_decompose,
)
from hyperent.lattice import CorrelationMatrix, LatticeSpec, Region, build_chain_correlation, restrict


def _density_matrix_entropies(xi):
    """Brute-force Renyi entropies from the product many-body spectrum."""
    p = np.array([1.0])
    for x in xi:
        p = np.concatenate([p * x, p * (1 - x)])
    p = p[p > 0]
    return {1.0: float(-np.sum(p * np.log(p))), 2.0: float(-np.log(np.sum(p**2))), 3.0: float(-np.log(np.sum(p**3)) / 2)}


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_entropies_match_product_spectrum(n_modes, seed):
    rng = np.random.default_rng(seed)
    xi = rng.uniform(0, 1, n_modes)
    sd = spectral_decompose(np.diag(xi))
    ref = _density_matrix_entropies(xi)
    for n, v in ref.items():
        assert abs(entropy(sd, n).value - v) < 1e-10


@given(st.integers(2, 30), st.integers(0, 2**32 - 1), st.sampled_from([1.0, 2.0, 3.0, 1.5, 0.5]))
def test_contour_sum_rule(size, seed, n):
    sd = spectral_decompose(random_correlation(np.random.default_rng(seed), size))
    assert abs(contour(sd, n).total() - entropy(sd, n).value) < 1e-10


@given(st.integers(2, 20), st.integers(0, 2**32 - 1))
def test_contour_is_nonnegative_and_upper_bounded_by_site_entropy(size, seed):
    # Jensen: s_1(i) <= H(M_ii) since H is concave and |psi_l(i)|^2 sums to one
    M = random_correlation(np.random.default_rng(seed), size)
    s = contour(spectral_decompose(M), 1).values
    diag = np.clip(np.real(np.diag(M.matrix)), 0, 1)
    assert np.all(s >= -1e-14)
    assert np.all(s <= binary_entropy(diag) + 1e-10)


def test_renyi_monotone_in_order(rng):
    sd = spectral_decompose(random_correlation(rng, 12, pure=False))
    values = [entropy(sd, n).value for n in (0.5, 1, 2, 3, 4)]
    assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))


def test_region_sum_invariant_under_block_unitary(rng):
    M = random_correlation(rng, 10)
    X = np.arange(3, 7)
    U = np.eye(10, dtype=complex)
    U[np.ix_(X, X)] = random_unitary(rng, X.size)
    M2 = CorrelationMatrix(U @ M.matrix @ U.conj().T, M.sites)
    a = contour(spectral_decompose(M), 2).values[X].sum()
    b = contour(spectral_decompose(M2), 2).values[X].sum()
    assert abs(a - b) < 1e-10


def test_exchange_symmetric_two_site_region():
    M = np.array([[0.4, 0.2], [0.2, 0.4]], dtype=complex)
    s = contour(spectral_decompose(M), 1).values
    assert abs(s[0] - s[1]) < 1e-14


def test_half_filled_single_site_is_log2():
    sd = spectral_decompose(np.array([[0.5]]))
    assert math.isclose(entropy(sd, 1).value, math.log(2))
    assert math.isclose(entropy(sd, 2).value, math.log(2))


def test_non_hermitian_rejected():
    with pytest.raises(InvalidCorrelationMatrix):
        spectral_decompose(np.array([[0.5, 0.1], [0.0, 0.5]]))


def test_eigenvalue_excursion_rejected():
    with pytest.raises(InvalidCorrelationMatrix):
        spectral_decompose(np.diag([1.1, 0.2]))


def test_refined_entropy_matches_derivative_definition(rng):
    sd = spectral_decompose(random_correlation(rng, 8, pure=False))
    for n in (2.0, 3.0):
        assert abs(entropy(sd, n, refined=True).value - refined_entropy_fd(sd, n)) < 1e-6


def test_refined_at_n1_is_von_neumann(rng):
    sd = spectral_decompose(random_correlation(rng, 8, pure=False))
    assert abs(entropy(sd, 1, refined=True).value - entropy(sd, 1).value) < 1e-14


def test_replica_occupations_sharpen():
    xi = np.array([0.2, 0.5, 0.9])
    r = replica_occupations(xi, 3)
    assert r[1] == 0.5
    assert r[0] < 0.2 and r[2] > 0.9


def test_peschel_round_trip(rng):
    M = build_chain_correlation(LatticeSpec.chain(40, "open", filling=0.5))
    sd = spectral_decompose(restrict(M, Region.interval(0, 6)))
    H = peschel_hamiltonian(sd)
    assert np.allclose(H.correlation(), sd.reassemble(), atol=1e-10)


def test_peschel_singular_spectrum_raises():
    with pytest.raises(SingularSpectrumError):
        peschel_hamiltonian(spectral_decompose(np.diag([1.0, 0.3])))


def test_tridiagonal_K_structure_and_symmetric_spectrum():
    K = analytic_tridiagonal_K(50, math.pi / 2)
    m = K.matrix.real
    assert np.allclose(np.diag(m), 0.0)
    assert np.allclose(m, np.triu(np.tril(m, 1), -1))
    assert math.isclose(m[0, 1], (1 / 50) * (49 / 50))
    e = K.spectrum()
    s = np.sort(e)
    assert np.max(np.abs(s + s[::-1])) < 1e-12


def test_gibbs_correlation_is_valid():
    M = gibbs_correlation(analytic_tridiagonal_K(20, 1.0), 0.1)
    xi = np.linalg.eigvalsh(M.matrix)
    assert xi.min() >= 0 and xi.max() <= 1


def test_contour_field_cell_values_orders_by_row():
    from hyperent.lattice import SiteIndex

    sites = (SiteIndex(y=1, x=0), SiteIndex(y=0, x=1), SiteIndex(y=0, x=0, orbital=0), SiteIndex(y=0, x=0, orbital=1))
    f = ContourField(values=np.array([1.0, 2.0, 3.0, 4.0]), sites=sites, kind="renyi", n=2.0)
    cells, values, multi = f.cell_values()
    assert cells == [(0, 0), (1, 0), (0, 1)]
    assert values.tolist() == [7.0, 2.0, 1.0]
    assert multi
