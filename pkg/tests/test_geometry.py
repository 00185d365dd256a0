import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wgse.geometry import (BelowCutoffError, TransverseMode,
                           WaveguideGeometry, cutoff_frequency,
                           density_factor, dispersion, enumerate_tm_modes,
                           tm_mode, wavenumber_from_frequency)

GEOM = WaveguideGeometry(1.0, 0.5)


def test_cutoff_formula():
    w = cutoff_frequency(GEOM, 1, 1)
    assert w == pytest.approx(math.pi * math.sqrt(5.0), rel=1e-15)
    assert cutoff_frequency(GEOM, 2, 3) == pytest.approx(
        math.pi * math.sqrt(4.0 + 36.0), rel=1e-15)


def test_cutoff_rejects_te_indices():
    with pytest.raises(ValueError):
        cutoff_frequency(GEOM, 0, 1)
    with pytest.raises(ValueError):
        TransverseMode(1, 0, 1.0)


def test_geometry_validation():
    with pytest.raises(ValueError):
        WaveguideGeometry(0.0, 1.0)
    with pytest.raises(ValueError):
        WaveguideGeometry(1.0, -2.0)
    assert WaveguideGeometry(2.0, 0.25).area == 0.5


@given(st.floats(min_value=-50.0, max_value=50.0,
                 allow_nan=False, allow_infinity=False))
@settings(max_examples=200, deadline=None)
def test_dispersion_round_trip(k):
    mode = tm_mode(GEOM, 1, 1)
    w = dispersion(mode, k)
    assert w >= mode.cutoff
    # near k = 0 the round trip loses half the digits (omega ~ cutoff)
    assert wavenumber_from_frequency(mode, float(w)) == pytest.approx(
        abs(k), abs=2e-7)


def test_dispersion_even_and_minimal_at_zero():
    mode = tm_mode(GEOM, 2, 1)
    ks = np.linspace(-5.0, 5.0, 101)
    w = dispersion(mode, ks)
    assert np.allclose(w, w[::-1])
    assert w.min() == pytest.approx(mode.cutoff)


def test_below_cutoff_raises():
    mode = tm_mode(GEOM, 1, 1)
    with pytest.raises(BelowCutoffError):
        wavenumber_from_frequency(mode, 0.5 * mode.cutoff)
    with pytest.raises(BelowCutoffError):
        density_factor(mode, mode.cutoff)


def test_density_factor_matches_derivative():
    mode = tm_mode(GEOM, 1, 1)
    w = 1.7 * mode.cutoff
    h = 1e-6
    dk_dw = (wavenumber_from_frequency(mode, w + h)
             - wavenumber_from_frequency(mode, w - h)) / (2 * h)
    assert density_factor(mode, w) == pytest.approx(dk_dw, rel=1e-8)


def test_density_factor_diverges_toward_cutoff():
    mode = tm_mode(GEOM, 1, 1)
    vals = [density_factor(mode, mode.cutoff * (1 + eps))
            for eps in (1e-2, 1e-4, 1e-6)]
    assert vals[0] < vals[1] < vals[2]
    # 1/sqrt scaling: 100x closer -> 10x larger
    assert vals[1] / vals[0] == pytest.approx(10.0, rel=0.01)


@given(st.floats(min_value=1.0, max_value=40.0),
       st.floats(min_value=0.2, max_value=3.0),
       st.floats(min_value=0.2, max_value=3.0))
@settings(max_examples=50, deadline=None)
def test_enumeration_matches_brute_force(omega_max, a, b):
    geom = WaveguideGeometry(a, b)
    got = {(m.m, m.n) for m in enumerate_tm_modes(geom, omega_max)}
    brute = {(m, n) for m in range(1, 200) for n in range(1, 200)
             if cutoff_frequency(geom, m, n) <= omega_max}
    assert got == brute


def test_enumeration_sorted_with_lexicographic_ties():
    geom = WaveguideGeometry(1.0, 1.0)
    modes = enumerate_tm_modes(geom, 12.0)
    cutoffs = [m.cutoff for m in modes]
    assert cutoffs == sorted(cutoffs)
    # square guide: (1,2) and (2,1) are degenerate, (1,2) must come first
    pairs = [(m.m, m.n) for m in modes]
    assert pairs.index((1, 2)) + 1 == pairs.index((2, 1))


def test_enumeration_empty_below_first_cutoff():
    assert enumerate_tm_modes(GEOM, 0.9 * cutoff_frequency(GEOM, 1, 1)) == []
