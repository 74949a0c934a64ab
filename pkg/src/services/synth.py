"""
Synthetic build-up series for end-to-end self-tests.

A series is a train of FIDs acquired every ``repetition_s`` seconds whose
amplitude follows S_inf (1 - exp(-t/tau)). Each FID is a single decaying
complex tone with additive white noise.
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)


class SynthParams(BaseModel):
    S_inf: float = 10.0
    tau_s: float = Field(default=600.0, gt=0)
    noise: float = Field(default=0.01, ge=0, description="Noise standard deviation relative to |S_inf|")
    n_scans: int = Field(default=1081, ge=5)
    repetition_s: float = Field(default=5.0, gt=0)
    n_points: int = Field(default=512, ge=8)
    dwell_us: float = Field(default=20.0, gt=0)
    offset_hz: float = Field(default=2000.0, description="Resonance offset in the rotating frame")
    t2_s: float = Field(default=2e-3, gt=0)
    seed: int = 0
    nucleus: str = "13C"
    larmor_mhz: float = Field(default=71.3, gt=0)
    t_bath_k: float = Field(default=1.5, gt=0)
    radical_mm: Optional[float] = 40.0
    mw_ghz: Optional[float] = 188.0
    flip_deg: float = 5.0


def buildup_curve(params: SynthParams) -> Tuple[np.ndarray, np.ndarray]:
    t = np.arange(params.n_scans) * params.repetition_s
    return t, params.S_inf * (1.0 - np.exp(-t / params.tau_s))


def manifest(params: SynthParams) -> Dict[str, Any]:
    return {
        "nucleus": params.nucleus,
        "larmor_mhz": params.larmor_mhz,
        "t_bath_k": params.t_bath_k,
        "radical_mm": params.radical_mm,
        "mw_ghz": params.mw_ghz,
        "flip_deg": params.flip_deg,
        "repetition_s": params.repetition_s,
        "dwell_us": params.dwell_us,
        "synth": params.model_dump(),
    }


def synthesize_fids(params: SynthParams) -> List[np.ndarray]:
    """One complex FID per scan, amplitude following the build-up curve."""
    rng = np.random.default_rng(params.seed)
    _, amplitudes = buildup_curve(params)
    t = np.arange(params.n_points) * params.dwell_us * 1e-6
    tone = np.exp(2j * np.pi * params.offset_hz * t - t / params.t2_s)
    sd = params.noise * abs(params.S_inf)
    fids = []
    for amplitude in amplitudes:
        noise = sd * (rng.standard_normal(params.n_points) + 1j * rng.standard_normal(params.n_points))
        fids.append(amplitude * tone + noise)
    logger.info("Synthesized %d FIDs of %d points", len(fids), params.n_points)
    return fids


def synthesize_amplitudes(params: SynthParams) -> pd.DataFrame:
    """Pre-reduced series: columns ``t_s`` and ``amplitude``."""
    rng = np.random.default_rng(params.seed)
    t, amplitudes = buildup_curve(params)
    noisy = amplitudes + params.noise * abs(params.S_inf) * rng.standard_normal(t.size)
    return pd.DataFrame({"t_s": t, "amplitude": noisy})
