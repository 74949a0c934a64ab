"""
EPR line construction
=====================

Parametric electron lines on a uniform rad/s grid and the thermal
(unirradiated) electron polarization on them.

Electron polarizations carry the electron's sign: a line in equilibrium at
T > 0 holds P_e(omega) = -tanh(hbar omega / 2 kB T). With it the pair sum of
``tm_model.nuclear_polarization`` maps an electron spin temperature onto the
same nuclear spin temperature.
"""

import logging
import math
from typing import Optional

import numpy as np

from src.core.constants import zeeman_argument
from src.core.errors import InvalidArgumentError
from src.models.line import ElectronProfile, EprLine

logger = logging.getLogger(__name__)

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
GAUSSIAN_SPAN_SIGMAS = 3.0


def line_shape_density(shape: str, offsets: np.ndarray, width: float) -> np.ndarray:
    """Unnormalised spectral density at offsets from the line center.

    ``width`` is the full width for a rectangular line and the FWHM for a
    gaussian one.
    """
    offsets = np.asarray(offsets, dtype=float)
    if shape == "rectangular":
        return np.where(np.abs(offsets) <= 0.5 * width * (1 + 1e-12), 1.0, 0.0)
    if shape == "gaussian":
        sigma = width * FWHM_TO_SIGMA
        return np.exp(-0.5 * (offsets / sigma) ** 2)
    raise InvalidArgumentError(f"Unknown line shape {shape!r}")


def make_epr_line(
    shape: str,
    center: float,
    width: float,
    n_points: int = 201,
    snap_to: Optional[float] = None,
) -> EprLine:
    """Build a normalised rectangular or gaussian line.

    With ``snap_to`` (a nuclear Larmor frequency in rad/s) the grid spacing is
    adjusted so that it divides that frequency exactly; the rectangular width
    or the gaussian window change accordingly.
    """
    if not width > 0:
        raise InvalidArgumentError(f"Line width must be positive, got {width}")
    if n_points < 3 or n_points % 2 == 0:
        raise InvalidArgumentError(f"n_points must be odd and >= 3, got {n_points}")
    if shape not in ("rectangular", "gaussian"):
        raise InvalidArgumentError(f"Unknown line shape {shape!r}")

    span = width if shape == "rectangular" else 2.0 * GAUSSIAN_SPAN_SIGMAS * width * FWHM_TO_SIGMA
    spacing = span / (n_points - 1)
    if snap_to is not None:
        if not snap_to > 0:
            raise InvalidArgumentError("snap_to must be a positive frequency")
        steps = max(1, int(round(snap_to / spacing)))
        spacing = snap_to / steps
        logger.debug("Snapped line spacing to %s rad/s (%d steps per Larmor period)", spacing, steps)

    offsets = (np.arange(n_points) - (n_points - 1) / 2) * spacing
    # snapping stretches a rectangular line to the grid it ends up on
    effective_width = offsets[-1] - offsets[0] if shape == "rectangular" else width
    density = line_shape_density(shape, offsets, effective_width)
    weights = density / (density.sum() * spacing)
    return EprLine(grid=center + offsets, weights=weights, shape_tag=shape)


def electron_polarization(omega, temperature):
    """-tanh(hbar omega / 2 kB T), vectorised; ``omega`` may be an offset from omega_mw."""
    return -np.tanh(zeeman_argument(omega, temperature))


def thermal_electron_profile(line: EprLine, T: float) -> ElectronProfile:
    """Equilibrium electron polarization at each absolute grid frequency."""
    if not T > 0:
        raise InvalidArgumentError(f"Temperature must be positive, got {T}")
    return ElectronProfile(line=line, values=electron_polarization(line.grid, T))
