from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.errors import InvalidArgumentError


def _frozen_array(value) -> np.ndarray:
    arr = np.array(value, dtype=float)
    arr.setflags(write=False)
    return arr


class NucleusSpec(BaseModel):
    """A nuclear species and its Larmor frequency (Hz)."""
    name: str = Field(description="Label such as '1H' or '13C'")
    larmor_freq: float = Field(gt=0, description="Larmor frequency nu_n in Hz")

    model_config = ConfigDict(frozen=True)

    @property
    def omega(self) -> float:
        return 2.0 * np.pi * self.larmor_freq

    @classmethod
    def from_mhz(cls, name: str, mhz: float) -> "NucleusSpec":
        return cls(name=name, larmor_freq=mhz * 1e6)


class EprLine(BaseModel):
    """Discretised electron spectral density on a uniform angular-frequency grid."""
    grid: np.ndarray = Field(description="Frequencies omega_i in rad/s, strictly increasing and uniform")
    weights: np.ndarray = Field(description="g(omega_i) >= 0 with sum(g) * spacing = 1")
    shape_tag: Literal["rectangular", "gaussian"] = "rectangular"

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("grid", "weights", mode="before")
    @classmethod
    def _as_array(cls, value):
        return _frozen_array(value)

    @model_validator(mode="after")
    def _check(self):
        grid, weights = self.grid, self.weights
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid needs at least two points")
        if weights.shape != grid.shape:
            raise ValueError("weights and grid differ in length")
        steps = np.diff(grid)
        if np.any(steps <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.max(np.abs(steps - steps.mean())) > 1e-9 * steps.mean():
            raise ValueError("grid must be uniform")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        mass = weights.sum() * steps.mean()
        if abs(mass - 1.0) > 1e-10:
            raise ValueError(f"weights not normalised (sum g * spacing = {mass!r})")
        return self

    @property
    def spacing(self) -> float:
        return float((self.grid[-1] - self.grid[0]) / (self.grid.size - 1))

    @property
    def center(self) -> float:
        return float(0.5 * (self.grid[0] + self.grid[-1]))

    @property
    def n_points(self) -> int:
        return int(self.grid.size)

    def contains(self, omega: float) -> bool:
        return bool(self.grid[0] <= omega <= self.grid[-1])

    def nearest_index(self, omega: float) -> int:
        return int(np.clip(np.rint((omega - self.grid[0]) / self.spacing), 0, self.grid.size - 1))


class ElectronProfile(BaseModel):
    """Per-frequency electron polarization P_e(omega_i) on a line."""
    line: EprLine
    values: np.ndarray

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("values", mode="before")
    @classmethod
    def _as_array(cls, value):
        return _frozen_array(value)

    @model_validator(mode="after")
    def _check(self):
        if self.values.shape != self.line.grid.shape:
            raise ValueError("profile length does not match the line grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile contains non-finite values")
        if np.any(np.abs(self.values) > 1.0):
            raise ValueError("|P_e| must not exceed 1")
        return self

    def scaled(self, factor: float) -> "ElectronProfile":
        return ElectronProfile(line=self.line, values=self.values * factor)


def nucleus_from_table(name: str, table: dict) -> NucleusSpec:
    """Look a nucleus up in a name -> MHz table."""
    if name not in table:
        raise InvalidArgumentError(f"Unknown nucleus {name!r}; known: {sorted(table)}")
    return NucleusSpec.from_mhz(name, table[name])


