from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class TmState(BaseModel):
    """Two-temperature description of an irradiated line."""
    T_s: float = Field(description="Non-Zeeman (spin) temperature in K, signed")
    T_Z: Optional[float] = Field(default=None, description="Zeeman temperature in K; None when the line-integrated polarization vanishes")
    omega_mw: float = Field(description="Microwave frequency in rad/s")

    model_config = ConfigDict(frozen=True)


class RegimeProfileParams(BaseModel):
    """Parameters of the three canonical irradiated-line shapes."""
    saturation: float = Field(default=0.0, ge=0, le=1)
    hole_width: Optional[float] = Field(default=None, gt=0, description="rad/s")
    hole_depth: float = Field(default=1.0, ge=0, le=1)
    T_s: Optional[float] = None

    model_config = ConfigDict(frozen=True)
