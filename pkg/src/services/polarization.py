"""
Polarization and spin temperature
=================================

Closed-form relations between a spin-1/2 polarization and its (signed) spin
temperature, and the cross-effect pair formula.
"""

import math

from src.core.constants import PHYS
from src.core.errors import IndeterminateInputError, InfiniteTemperatureError, InvalidArgumentError, OutOfRangeError
from src.models.line import NucleusSpec


def zeeman_temperature_scale(nucleus: NucleusSpec) -> float:
    """hbar omega_n / 2 kB in kelvin."""
    return PHYS.hbar * nucleus.omega / (2.0 * PHYS.kB)


def spin_temperature_from_polarization(P_n: float, nucleus: NucleusSpec) -> float:
    """T_s = hbar omega_n / (2 kB artanh P_n); negative for inverted polarization."""
    if not abs(P_n) < 1.0:
        raise OutOfRangeError(f"|P_n| must be below 1, got {P_n}", P_n=P_n)
    if P_n == 0.0:
        raise InfiniteTemperatureError("Zero polarization corresponds to an infinite spin temperature")
    return zeeman_temperature_scale(nucleus) / math.atanh(P_n)


def polarization_from_spin_temperature(T_s: float, nucleus: NucleusSpec) -> float:
    """P = tanh(hbar omega_n / 2 kB T_s).

    For |hbar omega_n / 2 kB T_s| < 0.1 this agrees with the linear form
    hbar omega_n / 2 kB T_s to better than one percent.
    """
    if T_s == 0.0:
        raise InvalidArgumentError("Spin temperature must be nonzero")
    return math.tanh(zeeman_temperature_scale(nucleus) / T_s)


def ce_pair_polarization(P_e1: float, P_e2: float) -> float:
    """Nuclear polarization reached through a cross-effect electron pair."""
    if abs(P_e1) > 1.0 or abs(P_e2) > 1.0:
        raise InvalidArgumentError("Electron polarizations must lie in [-1, 1]")
    denominator = 1.0 - P_e1 * P_e2
    if denominator == 0.0:
        raise IndeterminateInputError(f"Pair ({P_e1}, {P_e2}) is fully polarized in the same direction")
    return (P_e1 - P_e2) / denominator
