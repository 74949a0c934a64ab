"""
Simulation runs assembled from a RunConfig.

The CLI and the HTTP routers both go through these helpers, so a request
and a command with the same settings produce the same numbers.
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.core.config import RunConfig
from src.core.constants import ghz_to_rad, rad_to_ghz
from src.core.errors import InfiniteTemperatureError, InvalidArgumentError, NoDataError
from src.models.line import ElectronProfile, EprLine, NucleusSpec, nucleus_from_table
from src.models.packet import LatticeConfig, RegimeThresholds
from src.models.phase import PhaseCell, PhaseGrid, PhaseOptimum
from src.models.tm_state import RegimeProfileParams, TmState
from src.services import packet_sim, phase_map
from src.services.line_service import make_epr_line, thermal_electron_profile
from src.services.tm_model import (
    borghini_steady_state,
    nuclear_polarization,
    profile_holeburn,
    profile_homogeneous,
    profile_inhomogeneous,
)

logger = logging.getLogger(__name__)

REGIMES = ("homo", "inhomo", "hole")
LINE_SHAPES = {"rect": "rectangular", "rectangular": "rectangular", "gauss": "gaussian", "gaussian": "gaussian"}


def nucleus_from_config(cfg: RunConfig, name: Optional[str] = None) -> NucleusSpec:
    return nucleus_from_table(name or cfg.nucleus, cfg.nuclei)


def parse_line_spec(spec: str) -> Tuple[str, float]:
    """``rect:0.6`` -> ("rectangular", 0.6 GHz)."""
    try:
        shape, width = spec.split(":")
        return LINE_SHAPES[shape.strip().lower()], float(width)
    except (KeyError, ValueError):
        raise InvalidArgumentError(f"Bad line specification {spec!r}; expected rect:WIDTH_GHZ or gauss:FWHM_GHZ")


def line_from_config(
    cfg: RunConfig, nucleus: NucleusSpec, shape: Optional[str] = None, width_ghz: Optional[float] = None
) -> EprLine:
    """EPR line of the config, its spacing snapped to divide the nuclear Larmor frequency."""
    return make_epr_line(
        shape or cfg.line.shape,
        ghz_to_rad(cfg.line.center_ghz),
        ghz_to_rad(width_ghz if width_ghz is not None else cfg.line.width_ghz),
        cfg.line.n_points,
        snap_to=nucleus.omega,
    )


def lattice_from_config(cfg: RunConfig, c: float, T: float, mw_ghz: Optional[float] = None) -> LatticeConfig:
    lat = cfg.lattice
    return LatticeConfig(
        T=T,
        c=c,
        t1_ref=lat.t1_ref_s,
        T_ref=lat.T_ref_k,
        t1_exponent=lat.t1_exponent,
        gamma_ref=lat.gamma_ref_per_s,
        c_ref=lat.c_ref_mm,
        gamma_exponent=lat.gamma_exponent,
        w_mw=lat.w_mw_per_s,
        mw_width=ghz_to_rad(lat.mw_width_ghz) if lat.mw_width_ghz is not None else None,
        omega_mw=ghz_to_rad(mw_ghz if mw_ghz is not None else lat.mw_ghz),
    )


def thresholds_from_config(cfg: RunConfig) -> RegimeThresholds:
    return RegimeThresholds(**cfg.thresholds.model_dump())


def simulate_regime(
    cfg: RunConfig,
    regime: str,
    nucleus: NucleusSpec,
    params: RegimeProfileParams,
    mw_offset_ghz: float,
    T: float,
    line: Optional[EprLine] = None,
) -> Tuple[ElectronProfile, ElectronProfile, Dict[str, Any]]:
    """Thermal and irradiated profiles of one canonical regime and the resulting P_n.

    Without an explicit ``params.T_s`` the inhomogeneous profile takes the
    Borghini spin temperature of the line irradiated at the given offset.
    """
    if regime not in REGIMES:
        raise InvalidArgumentError(f"Unknown regime {regime!r}; choose one of {REGIMES}")
    line = line or line_from_config(cfg, nucleus)
    omega_mw = line.center + ghz_to_rad(mw_offset_ghz)
    if not line.contains(omega_mw):
        raise InvalidArgumentError(f"Microwave offset {mw_offset_ghz} GHz lies outside the line")
    thermal = thermal_electron_profile(line, T)
    report: Dict[str, Any] = {"regime": regime, "T_K": T, "mw_offset_ghz": mw_offset_ghz, "nucleus": nucleus.name}

    if regime == "homo":
        irradiated = profile_homogeneous(line, T, params.saturation)
        report["saturation"] = params.saturation
    elif regime == "hole":
        hole_width = params.hole_width if params.hole_width is not None else 2.0 * line.spacing
        irradiated = profile_holeburn(line, T, omega_mw, hole_width, params.hole_depth)
        report.update(hole_width_ghz=rad_to_ghz(hole_width), hole_depth=params.hole_depth)
    else:
        T_s = params.T_s
        T_Z = None
        if T_s is None:
            try:
                state = borghini_steady_state(line, omega_mw, T)
                T_s, T_Z = state.T_s, state.T_Z
            except InfiniteTemperatureError:
                logger.info("Irradiation at the line center: infinite spin temperature")
        if T_s is None:
            irradiated = ElectronProfile(line=line, values=np.zeros(line.n_points))
        else:
            irradiated = profile_inhomogeneous(line, TmState(T_s=T_s, T_Z=T_Z, omega_mw=omega_mw))
        report.update(T_s_K=T_s, T_Z_K=T_Z)

    report["P_n"] = nuclear_polarization(irradiated, nucleus)
    report["P_n_thermal"] = nuclear_polarization(thermal, nucleus)
    return thermal, irradiated, report


def steady_cell(cfg: RunConfig, c: float, T: float, nucleus: NucleusSpec) -> PhaseCell:
    """One phase-diagram cell evaluated directly."""
    line = line_from_config(cfg, nucleus)
    return phase_map.evaluate_cell(
        line, lattice_from_config(cfg, c, T), c, T, nucleus, thresholds_from_config(cfg)
    )


def simulated_sweep(
    cfg: RunConfig,
    c: float,
    T: float,
    nucleus: NucleusSpec,
    lo_ghz: float,
    hi_ghz: float,
    n: int,
) -> List[Tuple[float, float]]:
    """Steady-state P_n against microwave frequency, as (mw_ghz, signal) pairs."""
    if n < 2 or not hi_ghz > lo_ghz:
        raise InvalidArgumentError("Sweep needs n >= 2 and hi > lo")
    line = line_from_config(cfg, nucleus)
    points = []
    for mw_ghz in np.linspace(lo_ghz, hi_ghz, n):
        model = packet_sim.build_model(line, lattice_from_config(cfg, c, T, float(mw_ghz)))
        ss = packet_sim.steady_state(model)
        points.append((float(mw_ghz), nuclear_polarization(ElectronProfile(line=line, values=ss.P), nucleus)))
    return points


def phase_diagram(
    cfg: RunConfig,
    c_grid: List[float],
    T_grid: List[float],
    nucleus: NucleusSpec,
    workers: int = 1,
) -> Tuple[PhaseGrid, Optional[PhaseOptimum]]:
    line = line_from_config(cfg, nucleus)
    base = lattice_from_config(cfg, cfg.lattice.c_ref_mm, cfg.lattice.T_ref_k)
    grid = phase_map.sweep(line, base, c_grid, T_grid, nucleus, thresholds_from_config(cfg), workers)
    try:
        optimum = phase_map.find_optimum(grid)
    except NoDataError:
        logger.warning("No successful cell; no optimum")
        optimum = None
    return grid, optimum
