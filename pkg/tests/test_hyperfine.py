import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from hyperent.acceptance import random_correlation
from hyperent.counting import cumulants
from hyperent.errors import DomainError
from hyperent.gaussian import contour, spectral_decompose
from hyperent.hyperfine import (
    bernoulli_number,
    bernoulli_poly,
    beta_coefficient,
    beta_matrix,
    cumulant_density_field,
    edge_scaling_profile,
    forward_contours,
    hurwitz_zeta_negint,
    hyperfine_field,
    hyperfine_series,
    kappa_polynomial,
    mutual_information_pair,
    reconstruct_cumulants,
)
from hyperent.lattice import (
    ChernParams,
    LatticeSpec,
    Region,
    build_chain_correlation,
    build_chern_torus_correlation,
    restrict,
)


@pytest.mark.parametrize("m", range(0, 13))
def test_bernoulli_numbers_match_sympy(m):
    assert bernoulli_number(m) == Fraction(str(sp.bernoulli(m) if m != 1 else sp.Rational(-1, 2)))


@pytest.mark.parametrize("k,a", [(1, Fraction(3, 2)), (3, Fraction(2)), (5, Fraction(7, 4))])
def test_hurwitz_zeta_matches_mpmath(k, a):
    import mpmath

    assert abs(float(hurwitz_zeta_negint(k, a)) - float(mpmath.zeta(-k, float(a)))) < 1e-12


def test_bernoulli_poly_values():
    B2 = bernoulli_poly(2)
    assert B2(Fraction(0)) == Fraction(1, 6)
    assert B2(Fraction(1, 2)) == Fraction(-1, 12)


def test_beta_printed_values():
    assert abs(beta_coefficient(2, 2).value - math.pi**2 / 4) < 1e-14
    assert abs(beta_coefficient(4, 2).value + math.pi**4 / 192) < 1e-14


def test_beta_n1_closed_form_and_limit():
    b = beta_coefficient(2, 1).value
    assert abs(b - math.pi**2 / 3) < 1e-14
    lim = 0.5 * (beta_coefficient(2, 1 + 1e-6).value + beta_coefficient(2, 1 - 1e-6).value)
    assert abs(lim - b) < 1e-6


def test_beta_odd_is_flagged_zero():
    c = beta_coefficient(3, 2)
    assert c.odd and c.value == 0.0


def test_beta_matches_sympy_oracle():
    x = sp.symbols("x")
    for n in (2, 3, sp.Rational(3, 2)):
        for k in (2, 4, 6):
            a = (n + 1) / sp.Integer(2)
            zeta = -sp.bernoulli(k + 1, x).subs(x, a) / (k + 1)
            ref = sp.re(sp.N(2 / (n - 1) / sp.factorial(k) * (2 * sp.pi * sp.I / n) ** k * zeta, 30))
            assert abs(beta_coefficient(k, float(n)).value - float(ref)) < 1e-13 * max(1.0, abs(float(ref)))


def test_kappa_low_orders():
    assert kappa_polynomial(2).exact(Fraction(1, 3)) == Fraction(2, 9)
    x = Fraction(1, 5)
    assert kappa_polynomial(3).exact(x) == x * (1 - x) * (1 - 2 * x)
    for k in (3, 5, 7):
        assert kappa_polynomial(k).exact(Fraction(1, 2)) == 0


@given(st.floats(0.0, 1.0), st.integers(1, 10))
def test_kappa_matches_jet_taylor_oracle(xi, k):
    ref = cumulants([xi], 10)[k]
    assert abs(float(kappa_polynomial(k)(np.array([xi]))[0]) - ref) < 1e-9


@given(st.floats(0.0, 1.0), st.integers(2, 12))
def test_kappa_reflection_symmetry(xi, k):
    p = kappa_polynomial(k)
    a = float(p(np.array([xi]))[0])
    b = float(p(np.array([1 - xi]))[0])
    assert abs(a - (-1) ** k * b) < 1e-12 * max(1.0, abs(a))


def test_c1_is_local_density(rng):
    M = random_correlation(rng, 9)
    c1 = cumulant_density_field(spectral_decompose(M), 1).values
    assert np.allclose(c1, np.real(np.diag(M.matrix)), atol=1e-12)


def test_c2_single_symmetric_mode():
    M = np.array([[0.25, 0.25], [0.25, 0.25]])  # one mode, xi = 1/2, spread evenly
    f = cumulant_density_field(spectral_decompose(M), 2)
    assert np.allclose(f.values, [0.125, 0.125])


def test_c2_density_matches_wick_double_sum(rng):
    M = random_correlation(rng, 10).matrix
    # <n_i n_j> - <n_i><n_j> = delta_ij M_jj - |M_ij|^2 summed over i in A
    ref = np.real(np.diag(M)) - np.sum(np.abs(M) ** 2, axis=0)
    f = cumulant_density_field(spectral_decompose(M), 2).values
    assert np.allclose(f, ref, atol=1e-12)


def test_chain_c2_total_matches_counting_statistics():
    M = build_chain_correlation(LatticeSpec.chain(200, "open", filling=0.5))
    sd = spectral_decompose(restrict(M, Region.interval(0, 40)))
    assert abs(cumulant_density_field(sd, 2).total() - cumulants(sd, 4)[2]) < 1e-8


@given(st.integers(2, 20), st.integers(0, 2**32 - 1), st.sampled_from([1.0, 2.0, 3.0]), st.sampled_from([2, 4, 6, 8]))
def test_hyperfine_normalization(size, seed, n, k):
    sd = spectral_decompose(random_correlation(np.random.default_rng(seed), size))
    h = hyperfine_field(sd, n, k)
    assert abs(h.total() / beta_coefficient(k, n).value - cumulants(sd, 8)[k]) < 1e-8


def test_hyperfine_requires_even_k(rng):
    with pytest.raises(DomainError):
        hyperfine_field(spectral_decompose(random_correlation(rng, 3)), 2, 3)


def test_hyperfine_can_be_negative():
    M = build_chain_correlation(LatticeSpec.chain(60, "open", filling=0.5))
    sd = spectral_decompose(restrict(M, Region.interval(0, 20)))
    assert np.any(hyperfine_field(sd, 2, 4).values < 0)


def test_hyperfine_series_gapped_chern_k12():
    M = build_chern_torus_correlation(LatticeSpec.square(20, 20), ChernParams(m=3.0))
    sd = spectral_decompose(restrict(M, Region.rectangle(5, 15, 5, 15)))
    err = np.max(np.abs(hyperfine_series(sd, 2, 12) - contour(sd, 2).values))
    assert err < 1e-6


@pytest.mark.parametrize("n", [2.0, 3.0])
def test_hyperfine_series_sup_error_decreases_geometrically(n):
    xi = np.linspace(0.05, 0.95, 19)
    sd = spectral_decompose(np.diag(xi))
    s = contour(sd, n).values
    errs = [np.max(np.abs(hyperfine_series(sd, n, K) - s)) for K in range(4, 30, 2)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_hyperfine_series_pointwise_error_is_not_monotone():
    # partial sums oscillate mode by mode; only the sup over the spectrum decays monotonically
    sd = spectral_decompose(np.diag([0.2]))
    s = contour(sd, 3).values[0]
    errs = [abs(hyperfine_series(sd, 3, K)[0] - s) for K in range(4, 30, 2)]
    assert any(b > a for a, b in zip(errs, errs[1:]))


def test_reconstruction_synthetic_round_trip(rng):
    C = [rng.uniform(0.1, 0.3, 5), rng.uniform(-0.05, 0.05, 5)]
    s = forward_contours(C, 2)
    from hyperent.gaussian import ContourField
    from hyperent.lattice import SiteIndex

    sites = tuple(SiteIndex(y=None, x=i) for i in range(5))
    fields = [ContourField(values=s[i], sites=sites, kind="renyi", n=float(i + 1)) for i in range(2)]
    rs = reconstruct_cumulants(fields)
    assert np.allclose(rs.cumulant(2), C[0], atol=1e-8)
    assert np.allclose(rs.cumulant(4), C[1], atol=1e-8)


def test_reconstruction_single_order():
    sd = spectral_decompose(np.array([[0.3]]))
    rs = reconstruct_cumulants([contour(sd, 1)])
    assert np.allclose(beta_matrix(1), [[beta_coefficient(2, 1).value]])
    assert np.isclose(rs.cumulant(2)[0], contour(sd, 1).values[0] / beta_coefficient(2, 1).value)


def test_reconstruction_chain_four_sites():
    M = build_chain_correlation(LatticeSpec.chain(40, "open", filling=0.5))
    sd = spectral_decompose(restrict(M, Region.interval(0, 4)))
    rs = reconstruct_cumulants([contour(sd, n) for n in (1, 2, 3, 4)])
    assert np.max(np.abs(rs.cumulant(2) - cumulant_density_field(sd, 2).values)) <= 1e-4


def test_reconstruction_rejects_wrong_order():
    sd = spectral_decompose(np.array([[0.3]]))
    with pytest.raises(DomainError):
        reconstruct_cumulants([contour(sd, 2)])


def test_mutual_information_improves_with_block_size():
    devs = []
    for blk in (20, 100):
        M = build_chain_correlation(LatticeSpec.chain(2 * blk, "infinite", filling=0.5))
        devs.append(mutual_information_pair(M, Region.interval(0, blk), Region.interval(blk, 2 * blk)).relative_deviation)
    assert devs[1] < devs[0]


def test_mutual_information_overlapping_regions_rejected():
    M = build_chain_correlation(LatticeSpec.chain(10, "open", filling=0.5))
    with pytest.raises(DomainError):
        mutual_information_pair(M, Region.interval(0, 3), Region.interval(0, 3))


def test_mutual_information_vanishes_for_distant_gapped_blocks():
    M = build_chern_torus_correlation(LatticeSpec.square(24, 24), ChernParams(m=3.0))
    A1 = Region.rectangle(0, 3, 0, 3)
    A2 = Region.rectangle(12, 15, 12, 15)
    mi = mutual_information_pair(M, A1, A2)
    assert abs(mi.exact) < 1e-8


def test_edge_profile_normalised_to_one():
    m = np.round(np.arange(-1.5, -0.45, 0.5), 10)
    p = edge_scaling_profile(m, 0.0, 2.0, (2, 4), Ly=12)
    for k in (2, 4):
        assert np.isclose(np.max(p.normalized[k]), 1.0)
