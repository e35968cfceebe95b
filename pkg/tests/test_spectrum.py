import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperent.errors import ConditioningError, DomainError, SizeCapError
from hyperent.gaussian import spectral_decompose
from hyperent.lattice import LatticeSpec, Region, build_chain_correlation, fock_oracle, restrict
from hyperent.spectrum import (
    MAX_DIMENSION,
    TraceSequence,
    char_poly,
    elementary_symmetric,
    many_body_spectrum,
    newton_matrix,
    reconstruct_spectrum,
    traces_from_spectrum,
)


def _esym(p, n):
    return math.fsum(math.prod(c) for c in itertools.combinations(p, n))


def test_minors_are_elementary_symmetric_polynomials(rng):
    p = rng.dirichlet(np.ones(6))
    T = TraceSequence.from_eigenvalues(p)
    _, dets = newton_matrix(T)
    for n in range(1, 7):
        assert abs(float(dets[n]) / math.factorial(n) - _esym(p, n)) < 1e-14


def test_recursion_matches_minors(rng):
    T = TraceSequence.from_eigenvalues(rng.dirichlet(np.ones(9)))
    e, _ = elementary_symmetric(T)
    _, dets = newton_matrix(T)
    with mpmath.workdps(60):
        for n in range(10):
            assert abs(e[n] - dets[n] / mpmath.factorial(n)) < mpmath.mpf(10) ** -50


def test_char_poly_matches_numpy_poly(rng):
    p = rng.dirichlet(np.ones(5))
    coeffs = [float(c) for c in char_poly(TraceSequence.from_eigenvalues(p))]
    assert np.allclose(coeffs, np.poly(p), atol=1e-15)


def test_newton_matrix_layout():
    U, _ = newton_matrix(TraceSequence((1.0, 0.5, 0.25)))
    assert np.allclose(U, [[1.0, 1.0, 0.0], [0.5, 1.0, 2.0], [0.25, 0.5, 1.0]])


def test_trace_sequence_requires_unit_first_trace():
    with pytest.raises(DomainError):
        TraceSequence((0.9, 0.5))


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.integers(2, MAX_DIMENSION))
def test_round_trip_random_spectra(seed, D):
    rng = np.random.default_rng(seed)
    p = 1e-3 + rng.random(D)
    p /= p.sum()
    res = reconstruct_spectrum(TraceSequence.from_eigenvalues(p))
    assert np.max(np.abs(res.eigenvalues - np.sort(p)[::-1])) < 1e-6


def test_degenerate_spectrum_reports_multiplicities():
    p = np.array([0.4, 0.2, 0.2, 0.1, 0.1])
    res = reconstruct_spectrum(TraceSequence.from_eigenvalues(p))
    assert np.allclose(res.distinct, [0.4, 0.2, 0.1])
    assert res.multiplicities.tolist() == [1, 2, 2]


def test_rank_deficient_spectrum_recovers_zeros():
    p = np.array([0.7, 0.3, 0.0, 0.0])
    res = reconstruct_spectrum(TraceSequence.from_eigenvalues(p))
    assert np.allclose(res.eigenvalues, p, atol=1e-12)


def test_matches_fock_density_matrix():
    spec = LatticeSpec.chain(7, "open", filling=3 / 7)
    A = Region.interval(1, 5)
    res = reconstruct_spectrum(traces_from_spectrum(spectral_decompose(restrict(build_chain_correlation(spec), A))))
    assert np.max(np.abs(res.eigenvalues - fock_oracle(spec, A).spectrum)) < 1e-6


def test_many_body_spectrum_is_normalized(rng):
    sd = spectral_decompose(restrict(build_chain_correlation(LatticeSpec.chain(12, "open", filling=0.5)), Region.interval(0, 5)))
    mb = many_body_spectrum(sd)
    assert mb.size == 32 and abs(mb.sum() - 1) < 1e-12


def test_traces_of_gaussian_state_match_products():
    sd = spectral_decompose(restrict(build_chain_correlation(LatticeSpec.chain(10, "open", filling=0.5)), Region.interval(0, 3)))
    T = traces_from_spectrum(sd)
    mb = many_body_spectrum(sd)
    assert np.allclose(T.as_floats(), [np.sum(mb**n) for n in range(1, 9)])


def test_dimension_cap():
    with pytest.raises(SizeCapError):
        reconstruct_spectrum(TraceSequence.from_eigenvalues(np.full(MAX_DIMENSION + 1, 1 / (MAX_DIMENSION + 1))))


def test_inconsistent_traces_raise():
    # T_2 > 1 is impossible for a density matrix
    with pytest.raises(ConditioningError):
        reconstruct_spectrum(TraceSequence((1.0, 1.5, 0.2)))


def test_companion_route_agrees_with_fast_route(monkeypatch):
    import hyperent.spectrum as spectrum

    p = np.array([0.4, 0.2, 0.2, 0.1, 0.05, 0.05])
    fast = reconstruct_spectrum(TraceSequence.from_eigenvalues(p))
    monkeypatch.setattr(spectrum, "_fast_roots", lambda *a, **k: None)
    slow = reconstruct_spectrum(TraceSequence.from_eigenvalues(p))
    assert np.allclose(fast.eigenvalues, slow.eigenvalues, atol=1e-12)
    assert slow.multiplicities.tolist() == [1, 2, 1, 2]


def test_sixteenfold_degenerate_spectrum():
    res = reconstruct_spectrum(TraceSequence.from_eigenvalues(np.full(16, 1 / 16)))
    assert res.multiplicities.tolist() == [16]
    assert np.max(np.abs(res.eigenvalues - 1 / 16)) < 1e-12
