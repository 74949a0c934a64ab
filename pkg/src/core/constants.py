"""
Physical constants
==================

CODATA values shared by every computation in the package. Frequencies are
angular (rad/s) inside the library; the helpers below convert at the edges.
"""

import math

from scipy import constants as _codata


class PhysConstants:
    """Planck, reduced Planck and Boltzmann constants (SI)."""

    h: float = _codata.h
    hbar: float = _codata.hbar
    kB: float = _codata.k


PHYS = PhysConstants()

TWO_PI = 2.0 * math.pi


def ghz_to_rad(freq_ghz: float) -> float:
    return TWO_PI * freq_ghz * 1e9


def rad_to_ghz(omega):
    return omega / (TWO_PI * 1e9)


def zeeman_argument(omega, temperature):
    """hbar*omega / (2 kB T), vectorised over either argument."""
    return PHYS.hbar * omega / (2.0 * PHYS.kB * temperature)
