"""
File formats
============

Readers and writers for every file the CLI touches. Readers check headers
strictly (order and case) and raise ``DataFileError`` naming the offending
path. Writers go through a temp file in the target directory followed by
``os.replace`` so a crashed run never leaves a half-written output.
"""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.core.constants import rad_to_ghz
from src.core.errors import DataFileError
from src.models.analysis import ScanMeta, ScanRecord, SweepProfile
from src.models.line import ElectronProfile, NucleusSpec
from src.models.phase import PhaseGrid

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
SCAN_COLUMNS = ["index", "re", "im"]
AMPLITUDE_COLUMNS = ["t_s", "amplitude"]
SWEEP_COLUMNS = ["mw_ghz", "signal"]
PHASE_COLUMNS = ["c_mM", "T_K", "eta", "regime", "P_n", "T_s_K"]
PROFILE_COLUMNS = ["omega_ghz", "p_thermal", "p_irradiated"]
MANIFEST_KEYS = ["nucleus", "larmor_mhz", "t_bath_k", "radical_mm", "mw_ghz", "flip_deg", "repetition_s", "dwell_us"]
SCAN_PATTERN = "scan_{:05d}.csv"


# ---------------------------------------------------------------------------
# Atomic writers
# ---------------------------------------------------------------------------

def _atomic_write(path: Path, write: Callable[[str], None]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    os.close(fd)
    try:
        write(tmp)
        os.replace(tmp, path)
    except OSError as e:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise DataFileError(f"Could not write {path}: {e}", path=str(path))
    logger.debug("Wrote %s", path)


def atomic_write_text(path: Path, text: str) -> None:
    def write(tmp: str) -> None:
        with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)

    _atomic_write(path, write)


def atomic_write_json(path: Path, payload: Any) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True, default=json_default) + "\n")


def atomic_write_csv(path: Path, frame: pd.DataFrame) -> None:
    _atomic_write(path, lambda tmp: frame.to_csv(tmp, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))


def json_default(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def sidecar_path(out: Path) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".meta.json")


# ---------------------------------------------------------------------------
# Readers
# ---------------------------------------------------------------------------

def _read_csv(path: Path, expected: Sequence[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise DataFileError(f"File not found: {path}", path=str(path))
    try:
        df = pd.read_csv(path, encoding="utf-8-sig")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataFileError(f"Could not parse {path}: {e}", path=str(path))
    if df.columns.tolist() != list(expected):
        raise DataFileError(
            f"{path} has header {df.columns.tolist()}, expected {list(expected)}", path=str(path)
        )
    numeric = [c for c in expected if c != "regime"]
    try:
        df[numeric] = df[numeric].apply(pd.to_numeric)
    except (ValueError, TypeError) as e:
        raise DataFileError(f"{path} contains non-numeric values: {e}", path=str(path))
    if df.empty:
        raise DataFileError(f"{path} holds no data rows", path=str(path))
    return df


def read_json(path: Path) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise DataFileError(f"File not found: {path}", path=str(path))
    except json.JSONDecodeError as e:
        raise DataFileError(f"{path} is not valid JSON: {e}", path=str(path))


def read_manifest(directory: Path) -> Dict[str, Any]:
    path = Path(directory) / "manifest.json"
    data = read_json(path)
    missing = [key for key in MANIFEST_KEYS if key not in data]
    if missing:
        raise DataFileError(f"{path} is missing keys {missing}", path=str(path))
    return data


def read_scan_series(directory: Path) -> List[ScanRecord]:
    """Load ``manifest.json`` and every ``scan_NNNNN.csv`` of a series directory."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    files = sorted(directory.glob("scan_*.csv"))
    if not files:
        raise DataFileError(f"No scan files in {directory}", path=str(directory))
    try:
        nucleus = NucleusSpec.from_mhz(manifest["nucleus"], float(manifest["larmor_mhz"]))
        dwell = float(manifest["dwell_us"]) * 1e-6
        repetition = float(manifest["repetition_s"])
    except (TypeError, ValueError) as e:
        raise DataFileError(f"Bad manifest values: {e}", path=str(directory / "manifest.json"))

    scans = []
    for n, path in enumerate(files):
        df = _read_csv(path, SCAN_COLUMNS)
        meta = ScanMeta(
            nucleus=nucleus,
            T_bath=float(manifest["t_bath_k"]),
            radical_mM=manifest.get("radical_mm"),
            mw_freq=manifest.get("mw_ghz"),
            flip_angle=float(manifest["flip_deg"]),
            timestamp=n * repetition,
        )
        samples = df["re"].to_numpy() + 1j * df["im"].to_numpy()
        scans.append(ScanRecord(samples=samples, dwell=dwell, meta=meta))
    logger.info("Read %d scans from %s", len(scans), directory)
    return scans


def write_scan_series(directory: Path, manifest: Dict[str, Any], fids: Sequence[np.ndarray]) -> None:
    directory = Path(directory)
    for n, fid in enumerate(fids):
        frame = pd.DataFrame({"index": np.arange(fid.size), "re": fid.real, "im": fid.imag})
        atomic_write_csv(directory / SCAN_PATTERN.format(n), frame)
    atomic_write_json(directory / "manifest.json", manifest)


def read_amplitude_csv(path: Path) -> List[Tuple[float, float]]:
    df = _read_csv(path, AMPLITUDE_COLUMNS)
    return list(zip(df["t_s"].astype(float), df["amplitude"].astype(float)))


def read_spectrum_csv(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    """Background spectrum: columns ``freq_hz,intensity``."""
    df = _read_csv(path, ["freq_hz", "intensity"])
    return df["intensity"].to_numpy(dtype=float), df["freq_hz"].to_numpy(dtype=float)


def read_sweep_csv(path: Path, nucleus: Optional[str] = None) -> SweepProfile:
    df = _read_csv(path, SWEEP_COLUMNS).sort_values("mw_ghz")
    if df["mw_ghz"].duplicated().any():
        raise DataFileError(f"{path} repeats microwave frequencies", path=str(path))
    return SweepProfile(points=list(zip(df["mw_ghz"].astype(float), df["signal"].astype(float))), nucleus=nucleus)


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

def phase_frame(grid: PhaseGrid) -> pd.DataFrame:
    rows = []
    for _, _, cell in grid.iter_cells():
        rows.append({
            "c_mM": cell.c,
            "T_K": cell.T,
            "eta": cell.eta,
            "regime": "FAIL" if cell.failed else cell.regime.code,
            "P_n": cell.P_n,
            "T_s_K": cell.T_s,
        })
    return pd.DataFrame(rows, columns=PHASE_COLUMNS)


def write_phase_csv(path: Path, grid: PhaseGrid) -> None:
    atomic_write_csv(path, phase_frame(grid))


def write_profile_csv(path: Path, thermal: ElectronProfile, irradiated: ElectronProfile) -> None:
    frame = pd.DataFrame({
        "omega_ghz": rad_to_ghz(thermal.line.grid),
        "p_thermal": thermal.values,
        "p_irradiated": irradiated.values,
    }, columns=PROFILE_COLUMNS)
    atomic_write_csv(path, frame)


def write_sweep_csv(path: Path, points: Sequence[Tuple[float, float]]) -> None:
    atomic_write_csv(path, pd.DataFrame(list(points), columns=SWEEP_COLUMNS))


def write_amplitude_csv(path: Path, frame: pd.DataFrame) -> None:
    atomic_write_csv(path, frame[AMPLITUDE_COLUMNS])
