from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from src.models.packet import Regime


class PhaseCell(BaseModel):
    """One (c, T) evaluation. Failed cells carry ``error`` and no physics."""
    c: float
    T: float
    regime: Optional[Regime] = None
    eta: Optional[float] = None
    P_n: Optional[float] = Field(default=None, ge=-1, le=1)
    T_s: Optional[float] = None
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


class PhaseGrid(BaseModel):
    c_values: List[float]
    T_values: List[float]
    nucleus: str
    cells: List[List[PhaseCell]] = Field(description="cells[i][j] holds (c_values[i], T_values[j])")

    @model_validator(mode="after")
    def _check(self):
        for values, name in ((self.c_values, "c_values"), (self.T_values, "T_values")):
            if not values or any(b <= a for a, b in zip(values, values[1:])):
                raise ValueError(f"{name} must be nonempty and strictly increasing")
        if len(self.cells) != len(self.c_values) or any(len(row) != len(self.T_values) for row in self.cells):
            raise ValueError("cells must cover the full grid")
        return self

    def iter_cells(self):
        for i, row in enumerate(self.cells):
            for j, cell in enumerate(row):
                yield i, j, cell


class PhaseOptimum(BaseModel):
    c: float
    T: float
    P_n: float
    boundary_distance_cells: Optional[int] = Field(
        default=None, description="Chebyshev distance to the nearest Breakdown/TM boundary cell; None without a boundary"
    )
