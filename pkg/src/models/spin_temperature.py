from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SpinTempResult(BaseModel):
    """Signed spin temperature and the nuclear polarization it encodes."""
    T_s: float = Field(description="Spin temperature in K; negative for inverted polarization")
    P_n: float = Field(gt=-1, lt=1, description="Nuclear polarization")
    sigma_T_s: Optional[float] = Field(default=None, ge=0, description="Propagated uncertainty of T_s (K)")
    sigma_P_n: Optional[float] = Field(default=None, ge=0)
    nucleus: Optional[str] = None

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _same_sign(self):
        if self.T_s == 0 or self.P_n == 0 or (self.T_s > 0) != (self.P_n > 0):
            raise ValueError("T_s and P_n must be nonzero and share a sign")
        return self
