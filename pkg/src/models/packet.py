from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.models.line import ElectronProfile, EprLine


class LatticeConfig(BaseModel):
    """Lattice temperature, concentration and the calibration of T1(T) and Gamma_ff(c).

    Frequencies are in rad/s, rates in 1/s.
    """
    T: float = Field(gt=0, description="Lattice temperature (K)")
    c: float = Field(gt=0, description="Radical concentration (mM)")
    t1_ref: float = Field(default=1.0, gt=0, description="T1 at T_ref (s)")
    T_ref: float = Field(default=4.0, gt=0)
    t1_exponent: float = 3.0
    gamma_ref: float = Field(ge=0, description="Flip-flop rate at c_ref (1/s)")
    c_ref: float = Field(default=40.0, gt=0)
    gamma_exponent: float = 2.0
    w_mw: float = Field(ge=0, description="On-resonance microwave saturation rate (1/s)")
    mw_width: Optional[float] = Field(default=None, gt=0, description="Excitation HWHM (rad/s); two grid steps when unset")
    omega_mw: float = Field(description="Irradiation frequency (rad/s)")

    model_config = ConfigDict(frozen=True)

    @property
    def t1(self) -> float:
        return self.t1_ref * (self.T_ref / self.T) ** self.t1_exponent

    @property
    def gamma_ff(self) -> float:
        return self.gamma_ref * (self.c / self.c_ref) ** self.gamma_exponent

    @property
    def eta(self) -> float:
        return self.gamma_ff * self.t1


class PacketModel(BaseModel):
    line: EprLine
    config: LatticeConfig
    thermal: ElectronProfile = Field(description="Relaxation target P0")
    rates: np.ndarray = Field(description="Per-packet microwave rates W_i (1/s)")
    t1: float = Field(gt=0)
    gamma_ff: float = Field(ge=0)
    mw_width: float = Field(gt=0, description="Resolved excitation HWHM (rad/s)")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("rates", mode="before")
    @classmethod
    def _as_array(cls, value):
        arr = np.array(value, dtype=float)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check(self):
        if self.rates.shape != self.line.grid.shape or np.any(self.rates < 0):
            raise ValueError("rates must be nonnegative, one per packet")
        return self

    @property
    def eta(self) -> float:
        return self.gamma_ff * self.t1


class PacketState(BaseModel):
    """Per-packet polarization vector at elapsed time t."""
    P: np.ndarray
    t: float = Field(default=0.0, ge=0)

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("P", mode="before")
    @classmethod
    def _as_array(cls, value):
        arr = np.array(value, dtype=float)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _bounded(self):
        if not np.all(np.isfinite(self.P)) or np.any(np.abs(self.P) > 1.0 + 1e-9):
            raise ValueError("packet polarizations must stay within [-1, 1]")
        return self


class Regime(str, Enum):
    HOMOGENEOUS = "HomogeneousTM"
    INHOMOGENEOUS = "InhomogeneousTM"
    BREAKDOWN = "Breakdown"

    @property
    def code(self) -> str:
        return {"HomogeneousTM": "HOMO", "InhomogeneousTM": "INHOMO", "Breakdown": "BREAK"}[self.value]

    @property
    def is_tm(self) -> bool:
        return self is not Regime.BREAKDOWN


class RegimeThresholds(BaseModel):
    localization: float = Field(default=0.8, ge=0, le=1)
    tanh_residual: float = Field(default=0.1, gt=0)
    reversal_contrast: float = Field(default=1.0, gt=0, description="Minimum far-side gradient relative to the mean deficit")

    model_config = ConfigDict(frozen=True)


class RegimeMetrics(BaseModel):
    hole_localization: float = Field(ge=0, le=1)
    reversal_flag: bool
    reversal_contrast: float = Field(ge=0)
    tanh_fit_residual: float = Field(ge=0)


class RegimeVerdict(BaseModel):
    regime: Regime
    eta: float
    metrics: RegimeMetrics
    thresholds: RegimeThresholds
