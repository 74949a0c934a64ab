"""
Thermal-mixing model
====================

- ``nuclear_polarization``: the pair-imbalance integral over an electron
  profile, with the nuclear shift realised as an index offset.
- ``profile_homogeneous`` / ``profile_inhomogeneous`` / ``profile_holeburn``:
  the three canonical shapes of an irradiated line.
- ``borghini_steady_state``: the spin temperature that makes the first moment
  of the irradiated line stationary, found by bracketed root search.
"""

import logging
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from src.core.constants import PHYS
from src.core.errors import InfiniteTemperatureError, InvalidArgumentError, NoRootError, ResolutionError
from src.models.line import ElectronProfile, EprLine, NucleusSpec
from src.models.tm_state import TmState
from src.services.line_service import electron_polarization, thermal_electron_profile

logger = logging.getLogger(__name__)

BETA_MAX_FACTOR = 1e3
STATIONARITY_TOL = 1e-10


def shift_steps(line: EprLine, nucleus: NucleusSpec) -> int:
    """Number of grid steps spanned by the nuclear Larmor frequency."""
    spacing = line.spacing
    if spacing > nucleus.omega:
        raise ResolutionError(
            f"Grid spacing {spacing:.6g} rad/s exceeds omega_n of {nucleus.name} ({nucleus.omega:.6g} rad/s)"
        )
    ratio = nucleus.omega / spacing
    steps = int(round(ratio))
    if abs(ratio - steps) > 1e-6 * steps:
        logger.debug("omega_n/spacing = %.9g is not an integer; using %d steps", ratio, steps)
    return steps


def nuclear_polarization(profile: ElectronProfile, nucleus: NucleusSpec) -> float:
    """Nuclear polarization sustained by an electron profile.

    P_n = sum w_i (P_i - P_{i+k}) / sum w_i (1 - P_i P_{i+k}) with k the Larmor
    shift in grid steps. Only pairs whose both members lie on the line
    contribute, weighted by the joint density g_i g_{i+k}; a line narrower than
    omega_n has no pairs and yields 0.
    """
    k = shift_steps(profile.line, nucleus)
    p = profile.values
    g = profile.line.weights
    if k >= p.size:
        logger.debug("omega_n exceeds the line support; no electron pairs")
        return 0.0
    lower, upper = p[:-k], p[k:]
    w = g[:-k] * g[k:]
    denominator = float(np.sum(w * (1.0 - lower * upper)))
    if denominator <= 0.0:
        return 0.0
    return float(np.sum(w * (lower - upper)) / denominator)


def profile_homogeneous(line: EprLine, T: float, saturation: float) -> ElectronProfile:
    """Thermal profile uniformly scaled by (1 - s)."""
    if not 0.0 <= saturation <= 1.0:
        raise InvalidArgumentError(f"saturation must lie in [0, 1], got {saturation}")
    thermal = thermal_electron_profile(line, T)
    return thermal.scaled(1.0 - saturation)


def profile_inhomogeneous(line: EprLine, tm: TmState) -> ElectronProfile:
    """TM profile -tanh(hbar (omega - omega_mw) / 2 kB T_s), reversing sign at omega_mw."""
    if tm.T_s == 0:
        raise InvalidArgumentError("Spin temperature must be nonzero")
    return ElectronProfile(line=line, values=electron_polarization(line.grid - tm.omega_mw, tm.T_s))


def lorentzian(offsets: np.ndarray, hwhm: float) -> np.ndarray:
    """Unit-peak Lorentzian."""
    return 1.0 / (1.0 + (np.asarray(offsets) / hwhm) ** 2)


def profile_holeburn(
    line: EprLine, T: float, omega_mw: float, hole_width: float, hole_depth: float
) -> ElectronProfile:
    """Thermal profile with a Lorentzian hole of full width ``hole_width`` burnt at omega_mw."""
    if not hole_width > 0:
        raise InvalidArgumentError(f"hole_width must be positive, got {hole_width}")
    if not 0.0 <= hole_depth <= 1.0:
        raise InvalidArgumentError(f"hole_depth must lie in [0, 1], got {hole_depth}")
    thermal = thermal_electron_profile(line, T)
    shape = lorentzian(line.grid - omega_mw, 0.5 * hole_width)
    return ElectronProfile(line=line, values=thermal.values * (1.0 - hole_depth * shape))


def _zeeman_temperature(line: EprLine, values: np.ndarray, omega_mw: float) -> Optional[float]:
    mean = float(np.sum(line.weights * values) * line.spacing)
    if mean == 0.0 or abs(mean) >= 1.0:
        return None
    return PHYS.hbar * omega_mw / (2.0 * PHYS.kB * np.arctanh(-mean))


def borghini_steady_state(
    line: EprLine,
    omega_mw: float,
    T: float,
    reference: Optional[ElectronProfile] = None,
) -> TmState:
    """Spin temperature of the saturated line irradiated at omega_mw.

    Solves sum_i g_i u_i [P0_i + tanh(hbar u_i beta / 2 kB)] = 0 for beta = 1/T_s,
    u_i = omega_i - omega_mw, over |beta| <= 1e3 * 2 kB / (hbar * width). P0 is
    the thermal profile at T unless a ``reference`` profile is given.
    A vanishing root (1/T_s = 0) raises InfiniteTemperatureError carrying the
    partial state.
    """
    if not T > 0:
        raise InvalidArgumentError(f"Temperature must be positive, got {T}")
    if not line.contains(omega_mw):
        raise InvalidArgumentError("omega_mw lies outside the line support")
    p0 = (reference if reference is not None else thermal_electron_profile(line, T)).values
    u = line.grid - omega_mw
    g = line.weights
    norm = float(np.sum(g * np.abs(u)) * max(np.max(np.abs(p0)), 1e-300))
    width = line.grid[-1] - line.grid[0]
    beta_max = BETA_MAX_FACTOR * 2.0 * PHYS.kB / (PHYS.hbar * width)
    scale = PHYS.hbar / (2.0 * PHYS.kB)
    drive = float(np.sum(g * u * p0))

    def moment(beta: float) -> float:
        return (drive + float(np.sum(g * u * np.tanh(scale * u * beta)))) / norm

    if abs(drive) / norm <= STATIONARITY_TOL:
        state = TmState.model_construct(T_s=float("inf"), T_Z=None, omega_mw=omega_mw)
        raise InfiniteTemperatureError("Irradiation at the line's first-moment center leaves 1/T_s = 0", state=state)

    low, high = -beta_max, beta_max
    f_low, f_high = moment(low), moment(high)
    if np.sign(f_low) == np.sign(f_high):
        raise NoRootError(
            "Stationarity condition does not change sign over the beta bracket",
            f_low=f_low,
            f_high=f_high,
        )
    beta = brentq(moment, low, high, xtol=1e-15 * beta_max, rtol=4 * np.finfo(float).eps, maxiter=500)
    residual = abs(moment(beta))
    if residual > STATIONARITY_TOL:
        logger.warning("Borghini residual %.3g exceeds %.1g", residual, STATIONARITY_TOL)
    if beta == 0.0:
        raise InfiniteTemperatureError("Root at 1/T_s = 0")
    T_s = 1.0 / beta
    values = electron_polarization(u, T_s)
    logger.debug("Borghini state: T_s = %.6g K at omega_mw = %.9g rad/s", T_s, omega_mw)
    return TmState(T_s=T_s, T_Z=_zeeman_temperature(line, values, omega_mw), omega_mw=omega_mw)
