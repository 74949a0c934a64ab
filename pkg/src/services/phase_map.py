"""
Phase map
=========

Sweeps radical concentration x lattice temperature, runs the packet
simulation in every cell and reports the regime, eta and the nuclear
polarization. Cells are independent; with ``workers > 1`` they are farmed
out to a process pool and merged back by index.
"""

import logging
import multiprocessing
from typing import Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from pydantic import ValidationError

from src.core.errors import (
    InfiniteTemperatureError,
    InvalidArgumentError,
    NoDataError,
    OutOfRangeError,
    TmdnpError,
)
from src.models.line import ElectronProfile, EprLine, NucleusSpec
from src.models.packet import LatticeConfig, Regime, RegimeThresholds
from src.models.phase import PhaseCell, PhaseGrid, PhaseOptimum
from src.services import packet_sim
from src.services.polarization import spin_temperature_from_polarization
from src.services.tm_model import nuclear_polarization

logger = logging.getLogger(__name__)


def parse_grid(spec: str) -> List[float]:
    """Parse ``LO:HI:N`` into N evenly spaced values, or a comma list into its values."""
    try:
        if ":" in spec:
            lo, hi, n = spec.split(":")
            count = int(n)
            if count < 1:
                raise ValueError
            return [float(v) for v in np.linspace(float(lo), float(hi), count)]
        return [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise InvalidArgumentError(f"Bad grid specification {spec!r}; expected LO:HI:N or a comma list")


def evaluate_cell(
    line: EprLine,
    base_config: LatticeConfig,
    c: float,
    T: float,
    nucleus: NucleusSpec,
    thresholds: RegimeThresholds,
) -> PhaseCell:
    """build_model -> steady_state -> classify_regime -> nuclear_polarization for one cell.

    Library errors are caught and returned as a tagged cell.
    """
    try:
        config = base_config.model_copy(update={"c": c, "T": T})
        model = packet_sim.build_model(line, config)
        ss = packet_sim.steady_state(model)
        verdict = packet_sim.classify_regime(model, ss, thresholds)
        P_n = nuclear_polarization(ElectronProfile(line=line, values=ss.P), nucleus)
    except (TmdnpError, ValidationError, FloatingPointError) as e:
        logger.warning("Cell c=%s mM, T=%s K failed: %s", c, T, e)
        return PhaseCell(c=c, T=T, error=f"{type(e).__name__}: {e}")

    T_s = None
    if verdict.regime.is_tm:
        try:
            T_s = spin_temperature_from_polarization(P_n, nucleus)
        except (InfiniteTemperatureError, OutOfRangeError):
            T_s = None
    return PhaseCell(c=c, T=T, regime=verdict.regime, eta=verdict.eta, P_n=P_n, T_s=T_s)


def _evaluate_job(job: Tuple) -> PhaseCell:
    return evaluate_cell(*job)


def _validate_axis(values: Sequence[float], name: str) -> List[float]:
    values = [float(v) for v in values]
    if not values:
        raise InvalidArgumentError(f"{name} grid is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidArgumentError(f"{name} grid must be strictly increasing")
    if any(v <= 0 for v in values):
        raise InvalidArgumentError(f"{name} grid values must be positive")
    return values


def sweep(
    line: EprLine,
    base_config: LatticeConfig,
    c_grid: Sequence[float],
    T_grid: Sequence[float],
    nucleus: NucleusSpec,
    thresholds: Optional[RegimeThresholds] = None,
    workers: int = 1,
) -> PhaseGrid:
    c_values = _validate_axis(c_grid, "concentration")
    T_values = _validate_axis(T_grid, "temperature")
    thresholds = thresholds or RegimeThresholds()
    jobs = [(line, base_config, c, T, nucleus, thresholds) for c in c_values for T in T_values]
    logger.info("Sweeping %d x %d cells with %d worker(s)", len(c_values), len(T_values), workers)

    if workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(processes=workers) as pool:
            flat = pool.map(_evaluate_job, jobs)
    else:
        flat = [_evaluate_job(job) for job in jobs]

    n_T = len(T_values)
    cells = [flat[i * n_T:(i + 1) * n_T] for i in range(len(c_values))]
    failed = sum(cell.failed for cell in flat)
    if failed:
        logger.warning("%d of %d cells failed", failed, len(flat))
    return PhaseGrid(c_values=c_values, T_values=T_values, nucleus=nucleus.name, cells=cells)


def _is_breakdown(cell: PhaseCell) -> Optional[bool]:
    if cell.failed or cell.regime is None:
        return None
    return cell.regime is Regime.BREAKDOWN


def _neighbours(i: int, j: int, n_c: int, n_T: int) -> Iterable[Tuple[int, int]]:
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if (di or dj) and 0 <= i + di < n_c and 0 <= j + dj < n_T:
                yield i + di, j + dj


def boundary_cells(grid: PhaseGrid) -> Set[Tuple[int, int]]:
    """Cells with at least one of their eight neighbours on the other side of the
    Breakdown/TM divide. Failed cells are neither side."""
    n_c, n_T = len(grid.c_values), len(grid.T_values)
    boundary = set()
    for i, j, cell in grid.iter_cells():
        side = _is_breakdown(cell)
        if side is None:
            continue
        for ni, nj in _neighbours(i, j, n_c, n_T):
            other = _is_breakdown(grid.cells[ni][nj])
            if other is not None and other != side:
                boundary.add((i, j))
                break
    return boundary


def find_optimum(grid: PhaseGrid) -> PhaseOptimum:
    """Cell of largest |P_n|; ties go to lower c, then lower T."""
    best = None
    for i, j, cell in grid.iter_cells():
        if cell.failed or cell.P_n is None:
            continue
        if best is None or abs(cell.P_n) > abs(best[2].P_n):
            best = (i, j, cell)
    if best is None:
        raise NoDataError("Every cell of the phase grid failed")

    i, j, cell = best
    boundary = boundary_cells(grid)
    distance = min((max(abs(i - bi), abs(j - bj)) for bi, bj in boundary), default=None)
    logger.info("Optimum at c=%s mM, T=%s K, P_n=%.4g, boundary distance %s", cell.c, cell.T, cell.P_n, distance)
    return PhaseOptimum(c=cell.c, T=cell.T, P_n=cell.P_n, boundary_distance_cells=distance)
