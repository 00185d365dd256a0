"""Two-level-system parameters and the atom-mode coupling strength.

The dipole is oriented along the guide axis, so only TM modes couple; the
squared coupling to channel (m, n) at photon frequency omega is

    |g|^2 = d^2 * cutoff^2 * profile^2 / (pi * A * omega)

with profile = sin(m pi x0 / a) sin(n pi y0 / b).  Only |g|^2 enters any
observable, so the phase is dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (TransverseMode, WaveguideGeometry, dispersion,
                       enumerate_tm_modes)

__all__ = [
    "AtomParams",
    "PROFILE_ZERO_THRESHOLD",
    "transverse_profile",
    "coupling_sq_omega",
    "coupling_sq_k",
    "coupled_modes",
]

# Floating-point sin at nodal positions is ~1e-16, not 0; anything below
# this threshold is treated as an exactly decoupled mode.
PROFILE_ZERO_THRESHOLD = 1e-12


@dataclass(frozen=True)
class AtomParams:
    """TLS internal and center-of-mass parameters (natural units).

    omega_A: transition frequency; rest_energy: M c^2; dipole: transition
    dipole magnitude (real, >= 0); (x0, y0): transverse position inside the
    guide; p_z: initial axial momentum.
    """

    omega_A: float
    rest_energy: float
    dipole: float
    x0: float
    y0: float
    p_z: float = 0.0

    def __post_init__(self):
        if not self.omega_A > 0:
            raise ValueError("omega_A must be positive")
        if not self.rest_energy > 0:
            raise ValueError("rest_energy must be positive")
        if self.dipole < 0:
            raise ValueError("dipole must be nonnegative")

    def validate_position(self, geometry: WaveguideGeometry) -> None:
        if not (0 < self.x0 < geometry.a and 0 < self.y0 < geometry.b):
            raise ValueError(
                f"atom position ({self.x0}, {self.y0}) outside the guide "
                f"cross section (0,{geometry.a}) x (0,{geometry.b})")

    @property
    def trusted(self) -> bool:
        """Nonrelativistic validity: |p_z| and omega_A both below 10% of
        the rest energy."""
        return (abs(self.p_z) < 0.1 * self.rest_energy
                and self.omega_A < 0.1 * self.rest_energy)


def transverse_profile(atom: AtomParams, mode: TransverseMode,
                       geometry: WaveguideGeometry) -> float:
    """Mode amplitude sin(m pi x0/a) sin(n pi y0/b) at the atom position."""
    return (math.sin(mode.m * math.pi * atom.x0 / geometry.a)
            * math.sin(mode.n * math.pi * atom.y0 / geometry.b))


def coupling_sq_omega(atom: AtomParams, mode: TransverseMode,
                      geometry: WaveguideGeometry, omega) -> float:
    """Squared coupling |g|^2 as a function of photon frequency."""
    if np.any(np.asarray(omega) <= 0):
        raise ValueError("coupling requires omega > 0")
    prof = transverse_profile(atom, mode, geometry)
    return (atom.dipole ** 2 * mode.cutoff ** 2 * prof ** 2
            / (math.pi * geometry.area * omega))


def coupling_sq_k(atom: AtomParams, mode: TransverseMode,
                  geometry: WaveguideGeometry, k) -> float:
    """Squared coupling as a function of axial wavenumber; even in k."""
    return coupling_sq_omega(atom, mode, geometry, dispersion(mode, k))


def coupled_modes(atom: AtomParams, geometry: WaveguideGeometry,
                  omega_max: float) -> list[TransverseMode]:
    """TM modes up to omega_max that the atom actually couples to
    (positions on a nodal line are filtered out)."""
    atom.validate_position(geometry)
    return [mode for mode in enumerate_tm_modes(geometry, omega_max)
            if abs(transverse_profile(atom, mode, geometry))
            > PROFILE_ZERO_THRESHOLD]
