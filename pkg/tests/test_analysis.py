import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import linregress

from hyperent.analysis import (
    CrossSection,
    cross_section,
    decay_fits,
    linear_fit,
    monotone,
    relative_deviation,
    sign_pattern,
)
from hyperent.errors import DomainError
from hyperent.gaussian import ContourField
from hyperent.lattice import SiteIndex


def _grid_field(W, H, fn, orbitals=1):
    sites, vals = [], []
    for y in range(H):
        for x in range(W):
            for o in range(orbitals):
                sites.append(SiteIndex(y=y, x=x, orbital=o))
                vals.append(fn(x, y) / orbitals)
    return ContourField(values=np.array(vals), sites=tuple(sites), kind="hyperfine", n=2.0, k=2)


@given(st.integers(0, 2**32 - 1))
def test_linear_fit_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=12)
    y = 1.5 * x + rng.normal(size=12)
    ours, ref = linear_fit(x, y), linregress(x, y)
    assert math.isclose(ours.slope, ref.slope, rel_tol=1e-9, abs_tol=1e-12)
    assert math.isclose(ours.intercept, ref.intercept, rel_tol=1e-9, abs_tol=1e-12)
    assert math.isclose(ours.r2, ref.rvalue**2, rel_tol=1e-9, abs_tol=1e-12)


def test_linear_fit_rejects_bad_input():
    with pytest.raises(DomainError):
        linear_fit([1, 2], [1, 2])
    with pytest.raises(DomainError):
        linear_fit([1, 2, 3], [1, np.nan, 3])


def test_cross_section_sums_orbitals_and_measures_from_edge():
    f = _grid_field(6, 3, lambda x, y: 10 * y + x, orbitals=2)
    cs = cross_section(f, 1)
    assert cs.distance.tolist() == [0.5, 1.5, 2.5, 3.5, 4.5, 5.5]
    assert np.allclose(cs.value, [10, 11, 12, 13, 14, 15])
    assert cs.width == 6
    assert cs.half().distance.tolist() == [0.5, 1.5, 2.5]


def test_cross_section_missing_row():
    with pytest.raises(DomainError):
        cross_section(_grid_field(4, 2, lambda x, y: 1.0), 5)


def test_exponential_profile_is_recognised():
    W = 20
    cs = CrossSection(row=0, distance=np.arange(W) + 0.5, value=np.exp(-0.7 * (np.arange(W) + 0.5)), width=W)
    fits = decay_fits(cs)
    assert math.isclose(fits.exponential.slope, -0.7, rel_tol=1e-12)
    assert fits.exponential.r2 > 1 - 1e-12
    assert fits.power_law.r2 < fits.exponential.r2


def test_chord_power_law_is_recognised():
    W = 20
    d = np.arange(W) + 0.5
    cs = CrossSection(row=0, distance=d, value=(d * (W - d) / W) ** -2.0, width=W)
    fits = decay_fits(cs)
    assert math.isclose(fits.power_exponent, 2.0, rel_tol=1e-12)
    assert fits.power_law.r2 > fits.exponential.r2
    assert fits.skipped == 1
    assert fits.as_dict()["power_exponent"] == fits.power_exponent


def test_decay_fit_needs_positive_values():
    cs = CrossSection(row=0, distance=np.arange(10) + 0.5, value=np.array([1.0, 0.5, -0.1, 0.2, 0.1, 1, 1, 1, 1, 1]), width=10)
    with pytest.raises(DomainError):
        decay_fits(cs, skip=0)


def test_log_value_is_nan_for_non_positive():
    cs = CrossSection(row=0, distance=np.array([0.5, 1.5]), value=np.array([math.e, -1.0]), width=2)
    assert cs.log_value[0] == pytest.approx(1.0) and math.isnan(cs.log_value[1])


def test_small_helpers():
    assert sign_pattern([1.0, -2.0, 0.0, 1e-20], tol=1e-15) == "+-00"
    assert monotone([3, 2, 1]) and not monotone([3, 3, 1]) and monotone([3, 3, 1], strict=False)
    assert monotone([1, 2, 3], decreasing=False)
    assert relative_deviation(1.1, 1.0) == pytest.approx(0.1)
    assert relative_deviation(1.0, 0.0) == math.inf
