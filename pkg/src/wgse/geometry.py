"""Rectangular-waveguide geometry, TM-mode lattice and dispersion.

Natural units throughout: hbar = c = epsilon_0 = 1.  Lengths are measured in
an arbitrary reference length L and frequencies/wavenumbers in 1/L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "UnitSystem",
    "NATURAL_UNITS",
    "WaveguideGeometry",
    "TransverseMode",
    "BelowCutoffError",
    "cutoff_frequency",
    "tm_mode",
    "dispersion",
    "wavenumber_from_frequency",
    "enumerate_tm_modes",
    "density_factor",
]


class BelowCutoffError(ValueError):
    """A frequency below the mode cutoff was used where a propagating
    (on-shell) frequency is required."""


@dataclass(frozen=True)
class UnitSystem:
    """Marker for the unit convention.  Everything downstream assumes the
    natural system; the fields exist so the convention is explicit."""

    hbar: float = 1.0
    c: float = 1.0
    epsilon_0: float = 1.0


NATURAL_UNITS = UnitSystem()


@dataclass(frozen=True)
class WaveguideGeometry:
    """Perfectly conducting rectangular guide with cross section a x b."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"transverse dimensions must be positive, "
                             f"got a={self.a}, b={self.b}")

    @property
    def area(self) -> float:
        return self.a * self.b


@dataclass(frozen=True)
class TransverseMode:
    """A TM_mn channel label with its cutoff frequency."""

    m: int
    n: int
    cutoff: float

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"TM modes require m >= 1 and n >= 1, "
                             f"got ({self.m}, {self.n})")
        if not self.cutoff > 0:
            raise ValueError("cutoff must be positive")


def cutoff_frequency(geometry: WaveguideGeometry, m: int, n: int) -> float:
    """Cutoff pi * sqrt(m^2/a^2 + n^2/b^2) of the TM_mn channel (c = 1)."""
    if m < 1 or n < 1:
        raise ValueError(f"TM modes require m >= 1 and n >= 1, got ({m}, {n})")
    return math.pi * math.hypot(m / geometry.a, n / geometry.b)


def tm_mode(geometry: WaveguideGeometry, m: int, n: int) -> TransverseMode:
    """Construct the TM_mn mode of a geometry with its consistent cutoff."""
    return TransverseMode(m, n, cutoff_frequency(geometry, m, n))


def dispersion(mode: TransverseMode, k):
    """Guided frequency sqrt(k^2 + cutoff^2); even in k, minimal at k = 0."""
    return np.sqrt(np.square(k) + mode.cutoff ** 2)


def wavenumber_from_frequency(mode: TransverseMode, omega: float) -> float:
    """Axial wavenumber sqrt(omega^2 - cutoff^2) of a propagating photon.

    Raises BelowCutoffError for omega < cutoff (evanescent).
    """
    if omega < mode.cutoff:
        raise BelowCutoffError(
            f"omega={omega} is below the ({mode.m},{mode.n}) cutoff "
            f"{mode.cutoff}")
    return math.sqrt(max(omega * omega - mode.cutoff ** 2, 0.0))


def enumerate_tm_modes(geometry: WaveguideGeometry,
                       omega_max: float) -> list[TransverseMode]:
    """All TM modes with cutoff <= omega_max, ascending in cutoff.

    Degenerate cutoffs are ordered lexicographically in (m, n).  The lattice
    scan bound m <= ceil(omega_max * a / pi), n <= ceil(omega_max * b / pi)
    is exact because the cutoff grows monotonically in each index.
    """
    if not omega_max > 0:
        raise ValueError("omega_max must be positive")
    m_max = math.ceil(omega_max * geometry.a / math.pi)
    n_max = math.ceil(omega_max * geometry.b / math.pi)
    modes = []
    for m in range(1, m_max + 1):
        for n in range(1, n_max + 1):
            w = cutoff_frequency(geometry, m, n)
            if w <= omega_max:
                modes.append(TransverseMode(m, n, w))
    modes.sort(key=lambda md: (md.cutoff, md.m, md.n))
    return modes


def density_factor(mode: TransverseMode, omega):
    """One-dimensional density-of-states Jacobian |dk/domega| =
    omega / sqrt(omega^2 - cutoff^2); diverges at the cutoff."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= mode.cutoff):
        raise BelowCutoffError(
            f"density factor requires omega strictly above the cutoff "
            f"{mode.cutoff}")
    out = omega / np.sqrt(np.square(omega) - mode.cutoff ** 2)
    return float(out) if out.ndim == 0 else out
