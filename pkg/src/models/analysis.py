from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.models.line import NucleusSpec


class ScanMeta(BaseModel):
    nucleus: NucleusSpec
    T_bath: float = Field(gt=0, description="Bath temperature (K)")
    radical_mM: Optional[float] = None
    mw_freq: Optional[float] = Field(default=None, description="Microwave frequency (GHz)")
    flip_angle: float = Field(default=5.0, description="Excitation angle (deg)")
    timestamp: float = Field(default=0.0, ge=0, description="Seconds since series start")


class ScanRecord(BaseModel):
    """One acquired FID."""
    samples: np.ndarray = Field(description="Complex time-domain points")
    dwell: float = Field(gt=0, description="Seconds per point")
    meta: ScanMeta

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("samples", mode="before")
    @classmethod
    def _complex(cls, value):
        arr = np.asarray(value, dtype=complex)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("samples must be a nonempty 1-D array")
        arr = arr.copy()
        arr.setflags(write=False)
        return arr


class BuildUpResult(BaseModel):
    S_inf: float
    tau: float = Field(gt=0, description="Build-up time constant (s)")
    S_samples: List[Tuple[float, float]] = Field(description="(t, S) points that were fitted")
    fit_rel_err: Tuple[float, float] = Field(description="Relative standard errors of (S_inf, tau)")
    extrapolation_warning: bool = False
    durbin_watson: Optional[float] = None


class BuildUpComparison(BaseModel):
    """Build-up time ratio of two nuclei measured on the same sample."""
    tau_ratio: float
    sigma_ratio: float
    differ: bool
    coverage_k: float


class Coincidence(str, Enum):
    COINCIDE = "coincide"
    DIFFER = "differ"


class SweepProfile(BaseModel):
    points: List[Tuple[float, float]] = Field(description="(mw_freq GHz, S_inf) pairs, increasing in frequency")
    nucleus: Optional[str] = None
    normalized: bool = False
    zero_crossing: Optional[float] = Field(default=None, description="GHz, after alignment")

    @field_validator("points")
    @classmethod
    def _sorted(cls, value):
        freqs = [p[0] for p in value]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("sweep frequencies must be strictly increasing")
        return value


class SweepComparison(BaseModel):
    discrepancy: float = Field(ge=0)
    tm_verdict: bool = Field(description="True when the normalized profiles agree within the threshold")
    threshold: float
    shift_ghz: float = Field(description="Shift applied to the second profile so the crossings coincide")
    aligned_a: SweepProfile
    aligned_b: SweepProfile
