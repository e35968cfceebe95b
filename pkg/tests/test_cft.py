import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from hyperent.cft import (
    ContinuumParams,
    c2_density_closed,
    h_n2_closed,
    hyperfine_ratio,
    lattice_coordinates,
    lattice_vs_cft,
    middle_mask,
    ratio_spread,
    sn_interval,
)
from hyperent.errors import DomainError
from hyperent.gaussian import contour, spectral_decompose
from hyperent.hyperfine import cumulant_density_field, hyperfine_field
from hyperent.lattice import LatticeSpec, Region, build_chain_correlation, restrict


@pytest.fixture(scope="module")
def interval_state():
    M = build_chain_correlation(LatticeSpec.chain(400, "infinite", filling=0.5))
    return spectral_decompose(restrict(M, Region.interval(150, 250)))


@given(st.floats(1.0, 3.0), st.floats(-0.9, 0.9))
def test_ratio_is_position_independent(n, frac):
    p = ContinuumParams(R=10.0, n=n)
    x = frac * p.R
    assert math.isclose(h_n2_closed(x, p) / c2_density_closed(x, p), hyperfine_ratio(p), rel_tol=1e-12)


def test_ratio_constant_value_at_n_one():
    assert math.isclose(hyperfine_ratio(ContinuumParams(R=5.0)), math.pi**2 / 3)


def test_integrated_density_gives_interval_entropy():
    p = ContinuumParams(R=20.0, epsilon=0.5, n=2.0)
    half, _ = quad(lambda x: h_n2_closed(x, p), -p.R + p.epsilon, 0.0)
    # integrating up to a distance epsilon from each end
    assert math.isclose(2 * half, p.c / 6 * (1 + 1 / p.n) * math.log((2 * p.R - p.epsilon) / p.epsilon), rel_tol=1e-10)
    assert math.isclose(sn_interval(p), p.c / 6 * 1.5 * math.log(80.0))


def test_refined_interval_entropy_scales_as_inverse_n():
    p1, p3 = ContinuumParams(R=8.0, n=1.0), ContinuumParams(R=8.0, n=3.0)
    assert math.isclose(3 * sn_interval(p3, refined=True), sn_interval(p1, refined=True))
    assert math.isclose(sn_interval(p1, refined=True), sn_interval(p1))


def test_closed_forms_reject_points_outside():
    with pytest.raises(DomainError):
        h_n2_closed(5.0, ContinuumParams(R=5.0))


def test_parameter_validation():
    with pytest.raises(DomainError):
        ContinuumParams(R=0.5, epsilon=1.0)
    with pytest.raises(DomainError):
        ContinuumParams(R=5.0, c=-1.0)


def test_middle_mask_is_centered():
    m = middle_mask(10, 0.6)
    assert m.tolist() == [False, False, True, True, True, True, True, True, False, False]


def test_lattice_coordinates(interval_state):
    x, R = lattice_coordinates(contour(interval_state, 1))
    assert R == 50.0 and x[0] == -49.5 and x[-1] == 49.5


def test_second_renyi_contour_follows_closed_form(interval_state):
    rep = lattice_vs_cft(contour(interval_state, 2), ContinuumParams(R=50.0, n=2.0))
    assert rep.mean_relative < 0.05


def test_number_variance_density_follows_closed_form(interval_state):
    rep = lattice_vs_cft(cumulant_density_field(interval_state, 2))
    assert rep.mean_relative < 0.05


def test_leading_hyperfine_field_tracks_renyi_contour(interval_state):
    h = hyperfine_field(interval_state, 2.0, 2)
    assert ratio_spread(contour(interval_state, 2), h) < 0.05


def test_no_closed_form_for_higher_cumulants(interval_state):
    with pytest.raises(DomainError):
        lattice_vs_cft(cumulant_density_field(interval_state, 4))


def test_half_width_mismatch(interval_state):
    with pytest.raises(DomainError):
        lattice_vs_cft(contour(interval_state, 1), ContinuumParams(R=40.0))


def test_non_contiguous_region():
    M = build_chain_correlation(LatticeSpec.chain(20, "open", filling=0.5))
    sd = spectral_decompose(restrict(M, Region.interval(0, 3).union(Region.interval(5, 8))))
    with pytest.raises(DomainError):
        lattice_coordinates(contour(sd, 1))
