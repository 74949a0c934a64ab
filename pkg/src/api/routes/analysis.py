"""
Analysis API Routes
===================

Endpoints:
- POST /api/analysis/buildup: mono-exponential build-up fit of (t, S) points
- POST /api/analysis/spin-temperature: T_s of a signal referenced to thermal equilibrium
- POST /api/analysis/coincidence: do two spin temperatures agree within k sigma
- POST /api/analysis/sweeps/compare: shape comparison of two microwave sweeps
"""

import logging
from typing import List, Optional, Tuple

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from src.core.config import load_run_config
from src.core.errors import TmdnpError
from src.models.analysis import BuildUpResult, Coincidence, SweepComparison, SweepProfile
from src.models.spin_temperature import SpinTempResult
from src.services import analysis, simulation_service

logger = logging.getLogger(__name__)

analysisRouter = APIRouter(prefix="/api/analysis", tags=["analysis"])


# ============================================================
# REQUEST/RESPONSE MODELS
# ============================================================

class BuildUpRequest(BaseModel):
    points: List[Tuple[float, float]] = Field(..., description="(t in s, S) pairs, increasing in t")


class SpinTemperatureRequest(BaseModel):
    S_inf: float
    S_eq: float = Field(..., description="Thermal-equilibrium (off-resonance) signal")
    T_bath: float = Field(..., gt=0)
    nucleus: Optional[str] = None
    rel_err_S_inf: float = Field(0.0, ge=0)
    rel_err_S_eq: float = Field(0.0, ge=0)


class CoincidenceRequest(BaseModel):
    a: SpinTempResult
    b: SpinTempResult
    sigma_a: Optional[float] = Field(None, gt=0)
    sigma_b: Optional[float] = Field(None, gt=0)
    k: Optional[float] = Field(None, gt=0, description="Coverage factor; preset default when omitted")


class CoincidenceResponse(BaseModel):
    verdict: Coincidence


class SweepCompareRequest(BaseModel):
    a: SweepProfile
    b: SweepProfile
    threshold: Optional[float] = Field(None, gt=0)


def _http_error(e: TmdnpError) -> HTTPException:
    return HTTPException(status_code=e.http_status, detail=e.to_dict())


# ============================================================
# ENDPOINTS
# ============================================================

@analysisRouter.post("/buildup", response_model=BuildUpResult)
def fit_buildup(request: BuildUpRequest):
    try:
        return analysis.fit_buildup(request.points)
    except TmdnpError as e:
        raise _http_error(e)


@analysisRouter.post("/spin-temperature", response_model=SpinTempResult)
def spin_temperature(request: SpinTemperatureRequest):
    try:
        cfg = load_run_config()
        nucleus = simulation_service.nucleus_from_config(cfg, request.nucleus)
        return analysis.extract_spin_temperature(
            request.S_inf, request.S_eq, nucleus, request.T_bath, request.rel_err_S_inf, request.rel_err_S_eq
        )
    except TmdnpError as e:
        raise _http_error(e)


@analysisRouter.post("/coincidence", response_model=CoincidenceResponse)
def coincidence(request: CoincidenceRequest):
    k = request.k if request.k is not None else load_run_config().analysis.coincidence_k
    try:
        verdict = analysis.spin_temp_coincidence(request.a, request.b, request.sigma_a, request.sigma_b, k)
    except TmdnpError as e:
        raise _http_error(e)
    return CoincidenceResponse(verdict=verdict)


@analysisRouter.post("/sweeps/compare", response_model=SweepComparison)
def compare_sweeps(request: SweepCompareRequest):
    threshold = request.threshold if request.threshold is not None else load_run_config().analysis.sweep_threshold
    try:
        result = analysis.compare_sweeps(request.a, request.b, threshold)
    except TmdnpError as e:
        raise _http_error(e)
    logger.info("Sweep comparison discrepancy %.4g", result.discrepancy)
    return result
