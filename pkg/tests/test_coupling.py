import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wgse.coupling import (AtomParams, PROFILE_ZERO_THRESHOLD, coupled_modes,
                           coupling_sq_k, coupling_sq_omega,
                           transverse_profile)
from wgse.geometry import WaveguideGeometry, tm_mode

GEOM = WaveguideGeometry(1.0, 0.5)
CENTERED = AtomParams(omega_A=10.0, rest_energy=1000.0, dipole=0.1,
                      x0=0.5, y0=0.25)


def test_atom_validation():
    with pytest.raises(ValueError):
        AtomParams(omega_A=0.0, rest_energy=1.0, dipole=0.1, x0=0.5, y0=0.25)
    with pytest.raises(ValueError):
        AtomParams(omega_A=1.0, rest_energy=-1.0, dipole=0.1, x0=0.5, y0=0.25)
    with pytest.raises(ValueError):
        AtomParams(omega_A=1.0, rest_energy=1.0, dipole=-0.1, x0=0.5, y0=0.25)


def test_position_validation():
    bad = AtomParams(omega_A=1.0, rest_energy=1.0, dipole=0.1, x0=1.5, y0=0.25)
    with pytest.raises(ValueError):
        bad.validate_position(GEOM)
    CENTERED.validate_position(GEOM)


def test_trusted_gate():
    assert CENTERED.trusted
    fast = AtomParams(omega_A=10.0, rest_energy=1000.0, dipole=0.1,
                      x0=0.5, y0=0.25, p_z=500.0)
    assert not fast.trusted
    heavy_transition = AtomParams(omega_A=200.0, rest_energy=1000.0,
                                  dipole=0.1, x0=0.5, y0=0.25)
    assert not heavy_transition.trusted


def test_profile_value():
    mode = tm_mode(GEOM, 1, 1)
    assert transverse_profile(CENTERED, mode, GEOM) == pytest.approx(
        math.sin(math.pi * 0.5) ** 2, rel=1e-15)
    mode31 = tm_mode(GEOM, 3, 1)
    assert transverse_profile(CENTERED, mode31, GEOM) == pytest.approx(
        math.sin(1.5 * math.pi), rel=1e-12)


@given(st.integers(min_value=1, max_value=6),
       st.integers(min_value=1, max_value=6))
@settings(max_examples=36, deadline=None)
def test_centered_atom_decouples_even_indices(m, n):
    mode = tm_mode(GEOM, m, n)
    prof = transverse_profile(CENTERED, mode, GEOM)
    if m % 2 == 0 or n % 2 == 0:
        assert abs(prof) <= PROFILE_ZERO_THRESHOLD
    else:
        assert abs(prof) > PROFILE_ZERO_THRESHOLD


def test_coupling_formula():
    mode = tm_mode(GEOM, 1, 1)
    omega = 12.0
    prof = transverse_profile(CENTERED, mode, GEOM)
    expected = (0.1 ** 2 * mode.cutoff ** 2 * prof ** 2
                / (math.pi * GEOM.area * omega))
    assert coupling_sq_omega(CENTERED, mode, GEOM, omega) == pytest.approx(
        expected, rel=1e-14)


def test_coupling_k_matches_dispersion():
    mode = tm_mode(GEOM, 1, 1)
    k = 3.7
    omega = math.sqrt(k * k + mode.cutoff ** 2)
    assert coupling_sq_k(CENTERED, mode, GEOM, k) == pytest.approx(
        coupling_sq_omega(CENTERED, mode, GEOM, omega), rel=1e-14)
    assert coupling_sq_k(CENTERED, mode, GEOM, -k) == pytest.approx(
        coupling_sq_k(CENTERED, mode, GEOM, k), rel=1e-14)


def test_coupling_rejects_nonpositive_frequency():
    mode = tm_mode(GEOM, 1, 1)
    with pytest.raises(ValueError):
        coupling_sq_omega(CENTERED, mode, GEOM, 0.0)


def test_coupled_modes_filters_nodal_lines():
    modes = coupled_modes(CENTERED, GEOM, 25.0)
    assert all(m.m % 2 == 1 and m.n % 2 == 1 for m in modes)
    assert (1, 1) in {(m.m, m.n) for m in modes}
    off = AtomParams(omega_A=10.0, rest_energy=1000.0, dipole=0.1,
                     x0=0.3, y0=0.2)
    assert len(coupled_modes(off, GEOM, 25.0)) > len(modes)
