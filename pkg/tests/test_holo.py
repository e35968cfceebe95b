import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperent.errors import ComputationError, DomainError
from hyperent.gaussian import contour, entropy, spectral_decompose
from hyperent.holo import (
    HoloChart,
    boundary_flow_rk,
    conic,
    conic_r,
    disk_excess,
    extremal_curve,
    from_null,
    matched_cutoff,
    modular_flow_boundary,
    modular_flow_bulk,
    modular_plane_foot,
    null_surface_r,
    sampled_proper_length,
    slice_by_contour,
    to_null,
    wedge_excess,
)
from hyperent.lattice import LatticeSpec, Region, build_chain_correlation, restrict

R = 2.0


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 5))
def test_null_coordinates_round_trip(x, t, z):
    back = from_null(*to_null(x, t, z))
    assert np.allclose(back, (x, t, z))


def test_rt_curve_is_semicircle():
    c = extremal_curve(HoloChart.symmetric(R, 1))
    assert np.max(np.abs(np.hypot(c.x, c.z) - R)) < 1e-8
    assert np.max(np.abs(c.t)) < 1e-8


def test_rt_length_matches_geodesic_formula():
    eps = 1e-3
    c = extremal_curve(HoloChart.symmetric(R, 1), samples=2000, cutoff=eps)
    theta = math.asin(eps / R)
    assert abs(c.length - 2 * math.log(1 / math.tan(theta / 2))) < 1e-9
    assert abs(c.length - 2 * math.log(2 * R / eps)) < 1e-5


@pytest.mark.parametrize("n", [1.0, 2.0, 3.0])
def test_cumulative_length_matches_sampled_chords(n):
    c = extremal_curve(HoloChart.symmetric(R, n), samples=4000, cutoff=1e-2)
    chords = sampled_proper_length(c.x, c.t, c.z)
    assert abs(chords[-1] - c.length) / c.length < 1e-4


@pytest.mark.parametrize("n", [2.0, 3.0])
def test_curve_lies_where_null_branches_meet(n):
    # the two branches coincide where the conic discriminant vanishes
    chart = HoloChart.symmetric(R, n)
    c = extremal_curve(chart)
    u, v, r = to_null(c.x, c.t, c.z)
    assert np.max(np.abs(conic(u, v, chart))) < 1e-12
    assert np.max(np.abs(r / conic_r(u, v, chart) - 1)) < 1e-12


def test_null_branches_meet_on_curve_interior():
    chart = HoloChart.symmetric(R, 2)
    # just outside the curve both branches exist and are distinct
    x, t = 0.2, math.sqrt(3 * (R * R - 4 * 0.04) / 4) * 1.01
    u, v = (x + t) / 2, (x - t) / 2
    r_plus, r_minus = (null_surface_r(u, v, chart, b) for b in (1, -1))
    assert r_plus is not None and r_minus is not None and r_plus != r_minus
    with pytest.raises(DomainError):
        null_surface_r(u, v, chart, 0)


@pytest.mark.parametrize("n", [2.0, 3.0])
def test_curve_anchors(n):
    c = extremal_curve(HoloChart.symmetric(R, n), cutoff=1e-6)
    ends = sorted((x, t) for x, t, _ in c.endpoints())
    anchors = sorted(c.anchor_points())
    for (x, t), (ax, at) in zip(ends, anchors):
        assert abs(x - ax) < 1e-5 and abs(t - at) < 1e-2
        assert math.isclose(abs(ax), R / (n * n))
        assert math.isclose(abs(at), (n * n - 1) * R / (n * n))


def test_second_curve_exits_wedge_but_not_disk():
    c = extremal_curve(HoloChart.symmetric(R, 2))
    assert np.max(wedge_excess(c.x, c.t, c.z, R)) > 0
    assert np.max(disk_excess(c.x, c.z, R)) <= 0
    c1 = extremal_curve(HoloChart.symmetric(R, 1))
    assert np.max(wedge_excess(c1.x, c1.t, c1.z, R)) <= 1e-12


def test_curve_argument_checks():
    with pytest.raises(DomainError):
        extremal_curve(HoloChart.symmetric(R, 1), samples=50)
    with pytest.raises(ComputationError):
        extremal_curve(HoloChart.symmetric(R, 1), cutoff=5.0)
    with pytest.raises(DomainError):
        HoloChart.symmetric(R, 0.5)
    with pytest.raises(DomainError):
        extremal_curve(HoloChart(l_u=1.0, l_v=2.0))


@pytest.mark.parametrize("n", [2.0, 3.0])
def test_bulk_flow_reparameterization(n):
    start = (0.1, -0.2, 2.0)
    s = np.linspace(0.0, 0.25, 11)
    fn = modular_flow_bulk(start, HoloChart.symmetric(R, n), (0.0, 0.25), s)
    f1 = modular_flow_bulk(start, HoloChart.symmetric(R, 1), (0.0, n * 0.25), n * s)
    for a, b in ((fn.u, f1.u), (fn.v, f1.v), (fn.r, f1.r)):
        assert np.max(np.abs(a - b)) <= 1e-8


def test_bulk_flow_fixes_rt_points():
    chart = HoloChart.symmetric(R, 1)
    c = extremal_curve(chart)
    for i in (50, 200, 350):
        u, v, r = to_null(c.x[i], c.t[i], c.z[i])
        f = modular_flow_bulk((u, v, r), chart, (0.0, 1.0))
        assert np.max(np.abs(f.u - u)) < 1e-6 and np.max(np.abs(f.r / r - 1)) < 1e-6


def test_bulk_flow_zero_span_is_identity():
    f = modular_flow_bulk((0.1, 0.2, 3.0), HoloChart.symmetric(R, 2), (0.0, 0.0))
    assert (f.u[0], f.v[0], f.r[0]) == (0.1, 0.2, 3.0)


def test_bulk_flow_rejects_boundary_points():
    with pytest.raises(DomainError):
        modular_flow_bulk((0.1, 0.2, 0.0), HoloChart.symmetric(R, 2), (0.0, 1.0))


@given(st.floats(-0.95, 0.95), st.floats(-0.95, 0.95))
def test_boundary_flow_identity_at_zero(a, b):
    f = modular_flow_boundary(a * R / 2, b * R / 2, HoloChart.symmetric(R, 2), np.array([0.0]))
    assert abs(f.u[0] - a * R / 2) < 1e-12 and abs(f.v[0] - b * R / 2) < 1e-12


def test_boundary_flow_saturates_at_diamond_edges():
    f = modular_flow_boundary(0.3, -0.4, HoloChart.symmetric(R, 1), np.array([-20.0, 20.0]))
    assert np.allclose(np.abs(f.u), R / 2) and np.allclose(np.abs(f.v), R / 2)


def test_boundary_flow_constant_vanishes_at_origin():
    f = modular_flow_boundary(0.0, 0.0, HoloChart.symmetric(R, 1), np.array([0.0]))
    assert f.k_u == 0.0 and f.k_v == 0.0


def test_boundary_flow_time_scaling():
    s = np.linspace(-0.5, 0.5, 9)
    f2 = modular_flow_boundary(0.3, -0.4, HoloChart.symmetric(R, 2), s)
    f1 = modular_flow_boundary(0.3, -0.4, HoloChart.symmetric(R, 1), 2 * s)
    assert np.allclose(f2.u, f1.u, atol=1e-14) and np.allclose(f2.v, f1.v, atol=1e-14)


@pytest.mark.parametrize("n", [1.0, 2.0])
def test_boundary_closed_form_matches_runge_kutta(n):
    s = np.linspace(-1.0, 1.0, 41)
    chart = HoloChart.symmetric(R, n)
    closed = modular_flow_boundary(0.3, -0.4, chart, s)
    u, v = boundary_flow_rk(0.3, -0.4, chart, s)
    assert np.max(np.abs(closed.u - u)) <= 1e-8 and np.max(np.abs(closed.v - v)) <= 1e-8


def test_boundary_fixed_point_flag():
    f = modular_flow_boundary(R / 2, 0.1, HoloChart.symmetric(R, 1), np.linspace(0, 1, 5))
    assert f.fixed_point
    assert np.allclose(f.u, R / 2)


def test_uniform_slicing_quarters():
    c = extremal_curve(HoloChart.symmetric(R, 1))
    sl = slice_by_contour(c, [1.0, 1.0, 1.0, 1.0])
    assert np.allclose(sl.fractions, [0.25, 0.5, 0.75])
    assert np.allclose(sl.segment_lengths, c.length / 4)
    assert math.isclose(sl.segment_lengths.sum(), c.length)
    assert abs(sl.points[1, 0]) < 1e-9


def test_zero_contour_cannot_slice():
    with pytest.raises(DomainError):
        slice_by_contour(extremal_curve(HoloChart.symmetric(R, 1)), [0.0, 0.0])


def test_lattice_contour_slices_along_normal_geodesics():
    N = 80
    M = build_chain_correlation(LatticeSpec.chain(400, "infinite", filling=0.5))
    sd = spectral_decompose(restrict(M, Region.interval(160, 160 + N)))
    Rl = N / 2
    eps = matched_cutoff(entropy(sd, 1).value, Rl)
    c = extremal_curve(HoloChart.symmetric(Rl, 1), samples=4000, cutoff=eps)
    sl = slice_by_contour(c, contour(sd, 1))
    x_b = np.arange(1, N) - Rl
    inner = np.abs(x_b) < 0.5 * Rl
    assert np.max(np.abs(sl.points[inner, 0] - modular_plane_foot(x_b[inner], Rl))) < 0.02 * Rl


def test_matched_cutoff_domain():
    assert math.isclose((1 / 3) * math.log(2 * R / matched_cutoff(1.0, R)), 1.0)
    with pytest.raises(DomainError):
        matched_cutoff(0.1, R)
