"""
Simulation API Routes
=====================

Endpoints:
- POST /api/simulation/regimes: canonical irradiated profile and its P_n
- POST /api/simulation/borghini: spin temperature of a saturated line
- POST /api/simulation/steady: one (c, T) packet steady state
- POST /api/simulation/phase: concentration x temperature phase diagram

Every endpoint runs on the bundled preset; request fields override it.
"""

import logging
from typing import Any, Dict, List, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from src.core.config import get_settings, load_run_config
from src.core.constants import ghz_to_rad, rad_to_ghz
from src.core.errors import InfiniteTemperatureError, TmdnpError
from src.models.phase import PhaseCell, PhaseOptimum
from src.models.tm_state import RegimeProfileParams
from src.services import phase_map, simulation_service
from src.services.tm_model import borghini_steady_state

logger = logging.getLogger(__name__)

simulationRouter = APIRouter(prefix="/api/simulation", tags=["simulation"])


# ============================================================
# REQUEST/RESPONSE MODELS
# ============================================================

class RegimeRequest(BaseModel):
    regime: str = Field(..., description="homo, inhomo or hole")
    nucleus: Optional[str] = None
    mw_offset_ghz: Optional[float] = Field(None, description="Offset from the line center; preset default when omitted")
    temperature_k: Optional[float] = Field(None, gt=0)
    saturation: Optional[float] = Field(None, ge=0, le=1)
    hole_width_ghz: Optional[float] = Field(None, gt=0)
    hole_depth: Optional[float] = Field(None, ge=0, le=1)
    T_s: Optional[float] = Field(None, description="Spin temperature for the inhomogeneous profile (K)")


class RegimeResponse(BaseModel):
    report: Dict[str, Any]
    omega_ghz: List[float]
    p_thermal: List[float]
    p_irradiated: List[float]


class BorghiniRequest(BaseModel):
    mw_ghz: float
    temperature_k: float = Field(..., gt=0)


class BorghiniResponse(BaseModel):
    T_s: Optional[float] = Field(None, description="None when 1/T_s = 0")
    T_Z: Optional[float] = None
    mw_ghz: float


class SteadyRequest(BaseModel):
    c: float = Field(..., gt=0, description="Radical concentration (mM)")
    T: float = Field(..., gt=0, description="Lattice temperature (K)")
    nucleus: Optional[str] = None


class PhaseRequest(BaseModel):
    c_grid: Optional[str] = Field(None, description="LO:HI:N in mM; preset default when omitted")
    t_grid: Optional[str] = Field(None, description="LO:HI:N in K; preset default when omitted")
    nucleus: Optional[str] = None


class PhaseResponse(BaseModel):
    c_values: List[float]
    T_values: List[float]
    cells: List[PhaseCell]
    optimum: Optional[PhaseOptimum] = None


def _http_error(e: TmdnpError) -> HTTPException:
    return HTTPException(status_code=e.http_status, detail=e.to_dict())


# ============================================================
# ENDPOINTS
# ============================================================

@simulationRouter.post("/regimes", response_model=RegimeResponse)
def simulate_regime(request: RegimeRequest):
    try:
        cfg = load_run_config()
        nucleus = simulation_service.nucleus_from_config(cfg, request.nucleus)
        hole_width = request.hole_width_ghz if request.hole_width_ghz is not None else cfg.regimes.hole_width_ghz
        params = RegimeProfileParams(
            saturation=request.saturation if request.saturation is not None else cfg.regimes.saturation,
            hole_width=ghz_to_rad(hole_width) if hole_width is not None else None,
            hole_depth=request.hole_depth if request.hole_depth is not None else cfg.regimes.hole_depth,
            T_s=request.T_s,
        )
        offset = (
            request.mw_offset_ghz
            if request.mw_offset_ghz is not None
            else cfg.lattice.mw_ghz - cfg.line.center_ghz
        )
        thermal, irradiated, report = simulation_service.simulate_regime(
            cfg,
            request.regime,
            nucleus,
            params,
            offset,
            request.temperature_k or cfg.regimes.temperature_k,
        )
    except TmdnpError as e:
        raise _http_error(e)
    return RegimeResponse(
        report=report,
        omega_ghz=rad_to_ghz(thermal.line.grid).tolist(),
        p_thermal=thermal.values.tolist(),
        p_irradiated=irradiated.values.tolist(),
    )


@simulationRouter.post("/borghini", response_model=BorghiniResponse)
def borghini(request: BorghiniRequest):
    try:
        cfg = load_run_config()
        line = simulation_service.line_from_config(cfg, simulation_service.nucleus_from_config(cfg))
        state = borghini_steady_state(line, ghz_to_rad(request.mw_ghz), request.temperature_k)
    except InfiniteTemperatureError:
        return BorghiniResponse(T_s=None, T_Z=None, mw_ghz=request.mw_ghz)
    except TmdnpError as e:
        raise _http_error(e)
    return BorghiniResponse(T_s=state.T_s, T_Z=state.T_Z, mw_ghz=request.mw_ghz)


@simulationRouter.post("/steady", response_model=PhaseCell)
def steady(request: SteadyRequest):
    try:
        cfg = load_run_config()
        nucleus = simulation_service.nucleus_from_config(cfg, request.nucleus)
        cell = simulation_service.steady_cell(cfg, request.c, request.T, nucleus)
    except TmdnpError as e:
        raise _http_error(e)
    if cell.failed:
        raise HTTPException(status_code=422, detail=cell.error)
    return cell


@simulationRouter.post("/phase", response_model=PhaseResponse)
def phase(request: PhaseRequest):
    try:
        cfg = load_run_config()
        nucleus = simulation_service.nucleus_from_config(cfg, request.nucleus)
        c_grid = phase_map.parse_grid(request.c_grid or cfg.sweep.c_grid)
        t_grid = phase_map.parse_grid(request.t_grid or cfg.sweep.t_grid)
        grid, optimum = simulation_service.phase_diagram(cfg, c_grid, t_grid, nucleus, get_settings().workers)
    except TmdnpError as e:
        raise _http_error(e)
    logger.info("Phase diagram of %d cells served", len(c_grid) * len(t_grid))
    return PhaseResponse(
        c_values=grid.c_values,
        T_values=grid.T_values,
        cells=[cell for _, _, cell in grid.iter_cells()],
        optimum=optimum,
    )
