"""
Data reduction
==============

The experimental pipeline, scan to spin temperature:

    FID --apodize/FFT--> spectrum --baseline--> --peak fit--> S(t)
    S(t) --build-up fit--> S_inf --reference--> P_n, T_s

plus the two comparisons used to test for thermal mixing: equal spin
temperatures of two nuclei and identical microwave-sweep shapes.
"""

import logging
import math
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial import Polynomial
from scipy.integrate import trapezoid
from scipy.optimize import curve_fit

from src.core.errors import (
    FitFailureError,
    InvalidArgumentError,
    NoCrossingError,
    NoDataError,
    UnderdeterminedError,
    UnphysicalEnhancementError,
)
from src.models.analysis import (
    BuildUpComparison,
    BuildUpResult,
    Coincidence,
    ScanRecord,
    SweepComparison,
    SweepProfile,
)
from src.models.line import NucleusSpec
from src.models.spin_temperature import SpinTempResult
from src.services.polarization import polarization_from_spin_temperature, zeeman_temperature_scale

logger = logging.getLogger(__name__)

MAX_BASELINE_DEGREE = 6
MIN_BUILDUP_POINTS = 5
MIN_SWEEP_POINTS = 5


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------

def baseline_correct(
    spectrum: np.ndarray,
    degree: int,
    exclude: Sequence[Tuple[int, int]] = (),
) -> np.ndarray:
    """Subtract a least-squares polynomial fitted outside the ``exclude`` index windows.

    Windows are half-open ``(start, stop)`` index ranges.
    """
    y = np.asarray(spectrum, dtype=float)
    if not 0 <= degree <= MAX_BASELINE_DEGREE:
        raise InvalidArgumentError(f"Baseline degree must lie in [0, {MAX_BASELINE_DEGREE}], got {degree}")
    x = np.arange(y.size, dtype=float)
    free = np.ones(y.size, dtype=bool)
    for start, stop in exclude:
        free[max(0, start):max(0, stop)] = False
    if free.sum() < degree + 1:
        raise UnderdeterminedError(
            f"{int(free.sum())} free points cannot determine a degree-{degree} baseline",
            free_points=int(free.sum()),
            degree=degree,
        )
    baseline = Polynomial.fit(x[free], y[free], degree)
    return y - baseline(x)


def subtract_background(
    spectrum: np.ndarray,
    axis: np.ndarray,
    background: np.ndarray,
    background_axis: np.ndarray,
) -> np.ndarray:
    """Subtract an empty-cup spectrum resampled onto ``axis``."""
    bg_axis = np.asarray(background_axis, dtype=float)
    bg = np.asarray(background, dtype=float)
    if bg_axis.shape != bg.shape or bg.size < 2:
        raise InvalidArgumentError("Background spectrum and its axis must be matching arrays of >= 2 points")
    order = np.argsort(bg_axis)
    return np.asarray(spectrum, dtype=float) - np.interp(axis, bg_axis[order], bg[order])


def apodize_and_transform(scan: ScanRecord, sigma: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gaussian apodization, zero filling to a power of two and a centred FFT.

    Returns the complex spectrum and its frequency axis in Hz, both in
    increasing frequency order.
    """
    if not sigma > 0:
        raise InvalidArgumentError(f"Apodization sigma must be positive, got {sigma}")
    n = scan.samples.size
    t = np.arange(n) * scan.dwell
    window = np.exp(-(t ** 2) / (2.0 * sigma ** 2))
    size = 1 << max(0, (n - 1).bit_length())
    padded = np.zeros(size, dtype=complex)
    padded[:n] = scan.samples * window
    spectrum = np.fft.fftshift(np.fft.fft(padded))
    axis = np.fft.fftshift(np.fft.fftfreq(size, d=scan.dwell))
    return spectrum, axis


def _lorentzian_peak(f, height, f0, hwhm, offset):
    return height / (1.0 + ((f - f0) / hwhm) ** 2) + offset


def _peak_window(spectrum: np.ndarray, axis: np.ndarray, window: Tuple[float, float]):
    y_all = np.asarray(spectrum, dtype=float)
    f_all = np.asarray(axis, dtype=float)
    lo, hi = sorted(window)
    mask = (f_all >= lo) & (f_all <= hi)
    diagnostics = {"window": [lo, hi], "points": int(mask.sum())}
    if mask.sum() < 4:
        raise FitFailureError("Peak window holds fewer than four points", diagnostics)
    return f_all[mask], y_all[mask], diagnostics


def fit_peak_shape(
    spectrum: np.ndarray, axis: np.ndarray, window: Tuple[float, float]
) -> Tuple[float, float, float]:
    """Lorentzian-plus-constant fit within ``window``; returns (height, f0, hwhm)."""
    f, y, diagnostics = _peak_window(spectrum, axis, window)
    offset0 = float(np.median(y))
    idx = int(np.argmax(np.abs(y - offset0)))
    height0 = float(y[idx] - offset0)
    step = float(np.min(np.abs(np.diff(f))))
    above_half = np.abs(y - offset0) >= 0.5 * abs(height0)
    hwhm0 = max(0.5 * step * int(above_half.sum()), step)
    try:
        popt, _ = curve_fit(
            _lorentzian_peak,
            f,
            y,
            p0=[height0, float(f[idx]), hwhm0, offset0],
            maxfev=10000,
        )
    except (RuntimeError, ValueError) as e:
        diagnostics["reason"] = str(e)
        raise FitFailureError("Lorentzian peak fit did not converge", diagnostics)
    if not np.all(np.isfinite(popt)) or popt[2] == 0:
        raise FitFailureError("Lorentzian peak fit returned degenerate parameters", diagnostics)
    return float(popt[0]), float(popt[1]), abs(float(popt[2]))


def fit_peak_amplitude(
    spectrum: np.ndarray,
    axis: np.ndarray,
    window: Tuple[float, float],
    shape: Optional[Tuple[float, float]] = None,
) -> float:
    """Height of a Lorentzian-plus-constant within ``window`` (same units as ``axis``).

    With ``shape = (f0, hwhm)`` only height and offset are fitted, by linear
    least squares, which stays well defined for scans with no signal.
    """
    if shape is None:
        return fit_peak_shape(spectrum, axis, window)[0]
    f, y, _ = _peak_window(spectrum, axis, window)
    f0, hwhm = shape
    design = np.column_stack([1.0 / (1.0 + ((f - f0) / hwhm) ** 2), np.ones_like(f)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0])


# ---------------------------------------------------------------------------
# Build-up curves
# ---------------------------------------------------------------------------

def _buildup(t, s_inf, tau):
    return s_inf * (1.0 - np.exp(-t / tau))


def durbin_watson(residuals: np.ndarray) -> Optional[float]:
    """sum (e_i - e_{i-1})^2 / sum e_i^2; None for an exact fit."""
    e = np.asarray(residuals, dtype=float)
    denominator = float(np.sum(e ** 2))
    if denominator == 0.0:
        return None
    return float(np.sum(np.diff(e) ** 2) / denominator)


def _initial_tau(t: np.ndarray, s: np.ndarray, s_inf0: float) -> float:
    half = max(2, t.size // 2)
    remaining = 1.0 - s[:half] / s_inf0
    ok = remaining > 0
    if ok.sum() >= 2:
        slope = Polynomial.fit(t[:half][ok], np.log(remaining[ok]), 1).convert().coef[-1]
        if slope < 0:
            return float(-1.0 / slope)
    return float((t[-1] - t[0]) / 3.0)


def fit_buildup(points: Sequence[Tuple[float, float]]) -> BuildUpResult:
    """Fit S(t) = S_inf (1 - exp(-t/tau)) by nonlinear least squares."""
    if len(points) < MIN_BUILDUP_POINTS:
        raise InvalidArgumentError(f"Build-up fit needs at least {MIN_BUILDUP_POINTS} points, got {len(points)}")
    t = np.array([p[0] for p in points], dtype=float)
    s = np.array([p[1] for p in points], dtype=float)
    if np.any(np.diff(t) <= 0):
        raise InvalidArgumentError("Build-up times must be strictly increasing")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(s))):
        raise InvalidArgumentError("Build-up series contains non-finite values")

    scale = float(np.max(np.abs(s)))
    if scale == 0.0 or np.ptp(s) <= 1e-12 * scale:
        raise FitFailureError("Constant series: tau is not identifiable", {"points": len(points), "value": scale})

    s_inf0 = float(s[np.argmax(np.abs(s))])
    tau0 = _initial_tau(t, s, s_inf0)
    diagnostics: Dict[str, object] = {"S_inf0": s_inf0, "tau0": tau0, "points": len(points)}
    try:
        popt, pcov = curve_fit(_buildup, t, s, p0=[s_inf0, tau0], xtol=1e-12, ftol=1e-12, maxfev=10000)
    except (RuntimeError, ValueError) as e:
        diagnostics["reason"] = str(e)
        raise FitFailureError("Build-up fit did not converge", diagnostics)

    s_inf, tau = (float(v) for v in popt)
    if not (np.isfinite(tau) and tau > 0 and np.isfinite(s_inf)) or not np.all(np.isfinite(pcov)):
        diagnostics.update(S_inf=s_inf, tau=tau)
        raise FitFailureError("Build-up fit is not identifiable", diagnostics)
    errors = np.sqrt(np.abs(np.diag(pcov)))
    rel_err = (float(errors[0] / abs(s_inf)) if s_inf else float("inf"), float(errors[1] / tau))
    residuals = s - _buildup(t, s_inf, tau)
    warning = bool(t[-1] < 0.5 * tau)
    if warning:
        logger.warning("Build-up window %.3g s is shorter than half of tau = %.3g s", t[-1], tau)
    return BuildUpResult(
        S_inf=s_inf,
        tau=tau,
        S_samples=[(float(a), float(b)) for a, b in zip(t, s)],
        fit_rel_err=rel_err,
        extrapolation_warning=warning,
        durbin_watson=durbin_watson(residuals),
    )


def compare_buildup_rates(a: BuildUpResult, b: BuildUpResult, k: float = 2.0) -> BuildUpComparison:
    """tau_a / tau_b with its propagated error; ``differ`` when the ratio is off 1 by more than k sigma."""
    if not k > 0:
        raise InvalidArgumentError("Coverage factor must be positive")
    ratio = a.tau / b.tau
    sigma = ratio * math.hypot(a.fit_rel_err[1], b.fit_rel_err[1])
    return BuildUpComparison(tau_ratio=ratio, sigma_ratio=sigma, differ=abs(ratio - 1.0) > k * sigma, coverage_k=k)


# ---------------------------------------------------------------------------
# Spin temperatures
# ---------------------------------------------------------------------------

def extract_spin_temperature(
    S_inf: float,
    S_eq: float,
    nucleus: NucleusSpec,
    T_bath: float,
    rel_err_S_inf: float = 0.0,
    rel_err_S_eq: float = 0.0,
) -> SpinTempResult:
    """Reference a signal against the thermal-equilibrium signal at T_bath and convert to T_s."""
    if S_eq == 0:
        raise InvalidArgumentError("Reference signal S_eq must be nonzero")
    if not T_bath > 0:
        raise InvalidArgumentError(f"Bath temperature must be positive, got {T_bath}")
    P_eq = polarization_from_spin_temperature(T_bath, nucleus)
    P_n = P_eq * S_inf / S_eq
    if abs(P_n) >= 1.0:
        raise UnphysicalEnhancementError(
            f"Enhancement {S_inf / S_eq:.6g} implies |P_n| = {abs(P_n):.6g} >= 1; check the reference",
            P_n=P_n,
        )
    if P_n == 0.0:
        raise InvalidArgumentError("Zero signal carries no spin temperature")
    scale = zeeman_temperature_scale(nucleus)
    artanh = math.atanh(P_n)
    T_s = scale / artanh

    rel = math.hypot(rel_err_S_inf, rel_err_S_eq)
    sigma_P = abs(P_n) * rel
    sigma_T = scale * sigma_P / (artanh ** 2 * (1.0 - P_n ** 2))
    return SpinTempResult(T_s=T_s, P_n=P_n, sigma_T_s=sigma_T, sigma_P_n=sigma_P, nucleus=nucleus.name)


def spin_temp_coincidence(
    a: SpinTempResult,
    b: SpinTempResult,
    sigma_a: Optional[float] = None,
    sigma_b: Optional[float] = None,
    k: float = 2.0,
) -> Coincidence:
    """Coincide iff |T_a - T_b| <= k sqrt(sigma_a^2 + sigma_b^2)."""
    sigma_a = a.sigma_T_s if sigma_a is None else sigma_a
    sigma_b = b.sigma_T_s if sigma_b is None else sigma_b
    if not (sigma_a and sigma_b and sigma_a > 0 and sigma_b > 0):
        raise InvalidArgumentError("Spin-temperature uncertainties must be positive")
    if abs(a.T_s - b.T_s) <= k * math.hypot(sigma_a, sigma_b):
        return Coincidence.COINCIDE
    return Coincidence.DIFFER


def spin_temperature_table(rows: Sequence[Dict], k: float = 2.0) -> pd.DataFrame:
    """Spin temperatures for several (nucleus, T_bath) measurements.

    Each row needs ``nucleus`` (NucleusSpec), ``T_bath``, ``S_inf`` and ``S_eq``;
    ``rel_err_S_inf``, ``rel_err_S_eq`` and ``label`` are optional. Rows sharing
    a bath temperature are tested pairwise; the ``coincidence`` column holds
    the verdict for the group (empty for a single nucleus).
    """
    if not rows:
        raise NoDataError("No spin-temperature rows given")
    records = []
    results = []
    for row in rows:
        result = extract_spin_temperature(
            row["S_inf"],
            row["S_eq"],
            row["nucleus"],
            row["T_bath"],
            row.get("rel_err_S_inf", 0.0),
            row.get("rel_err_S_eq", 0.0),
        )
        results.append(result)
        records.append({
            "label": row.get("label", ""),
            "nucleus": row["nucleus"].name,
            "T_bath_K": float(row["T_bath"]),
            "P_n": result.P_n,
            "T_s_K": result.T_s,
            "sigma_T_s_K": result.sigma_T_s,
            "coincidence": None,
        })
    table = pd.DataFrame.from_records(records)
    for _, group in table.groupby("T_bath_K", sort=True):
        if group["nucleus"].nunique() < 2:
            continue
        verdicts = [
            spin_temp_coincidence(results[i], results[j], k=k)
            for i, j in combinations(group.index, 2)
            if table.at[i, "nucleus"] != table.at[j, "nucleus"]
        ]
        verdict = Coincidence.COINCIDE if all(v is Coincidence.COINCIDE for v in verdicts) else Coincidence.DIFFER
        table.loc[group.index, "coincidence"] = verdict.value
    return table


# ---------------------------------------------------------------------------
# Microwave sweeps
# ---------------------------------------------------------------------------

def _crossing(freqs: np.ndarray, signal: np.ndarray) -> Tuple[int, float]:
    """Bracketing index i and fraction t of the zero crossing between the global max and min."""
    i_max, i_min = int(np.argmax(signal)), int(np.argmin(signal))
    lo, hi = sorted((i_max, i_min))
    middle = 0.5 * (freqs[i_max] + freqs[i_min])
    candidates = []
    for i in range(lo, hi):
        s0, s1 = signal[i], signal[i + 1]
        if s0 == 0.0:
            candidates.append((i, 0.0))
        elif s0 * s1 < 0.0:
            candidates.append((i, s0 / (s0 - s1)))
    if not candidates:
        raise NoCrossingError("Sweep profile has no sign change between its maximum and minimum")
    return min(candidates, key=lambda c: abs(freqs[c[0]] + c[1] * (freqs[c[0] + 1] - freqs[c[0]]) - middle))


def locate_zero_crossing(profile: SweepProfile) -> float:
    """Zero crossing of a sweep by linear interpolation (GHz)."""
    freqs = np.array([p[0] for p in profile.points], dtype=float)
    signal = np.array([p[1] for p in profile.points], dtype=float)
    if freqs.size < 2:
        raise NoCrossingError("Sweep profile has fewer than two points")
    i, t = _crossing(freqs, signal)
    return float(freqs[i] + t * (freqs[i + 1] - freqs[i]))


def _relative_normalized(profile: SweepProfile) -> Tuple[np.ndarray, np.ndarray, float]:
    if len(profile.points) < MIN_SWEEP_POINTS:
        raise InvalidArgumentError(f"Sweep profiles need at least {MIN_SWEEP_POINTS} points")
    freqs = np.array([p[0] for p in profile.points], dtype=float)
    signal = np.array([p[1] for p in profile.points], dtype=float)
    peak = float(np.max(np.abs(signal)))
    if peak == 0.0:
        raise NoCrossingError("Sweep profile is identically zero")
    i, t = _crossing(freqs, signal)
    step = freqs[i + 1] - freqs[i]
    relative = (freqs - freqs[i]) - t * step
    return relative, signal / peak, float(freqs[i] + t * step)


def compare_sweeps(h: SweepProfile, x: SweepProfile, threshold: float = 0.05) -> SweepComparison:
    """Shape discrepancy of two sweeps after crossing alignment and max normalization.

    discrepancy = integral |h - x| / overlap width on the union of both
    sample grids inside the overlap.
    """
    if not threshold > 0:
        raise InvalidArgumentError("Threshold must be positive")
    rel_h, norm_h, cross_h = _relative_normalized(h)
    rel_x, norm_x, cross_x = _relative_normalized(x)
    lo, hi = max(rel_h[0], rel_x[0]), min(rel_h[-1], rel_x[-1])
    if not hi > lo:
        raise NoDataError("Aligned sweep profiles do not overlap")
    grid = np.union1d(rel_h, rel_x)
    grid = grid[(grid >= lo) & (grid <= hi)]
    diff = np.abs(np.interp(grid, rel_h, norm_h) - np.interp(grid, rel_x, norm_x))
    discrepancy = float(trapezoid(diff, grid) / (hi - lo))
    verdict = discrepancy < threshold
    logger.info("Sweep discrepancy %.4g (threshold %.3g): %s", discrepancy, threshold, "TM" if verdict else "no TM")

    aligned_a = SweepProfile(
        points=[(float(f + cross_h), float(s)) for f, s in zip(rel_h, norm_h)],
        nucleus=h.nucleus, normalized=True, zero_crossing=cross_h,
    )
    aligned_b = SweepProfile(
        points=[(float(f + cross_h), float(s)) for f, s in zip(rel_x, norm_x)],
        nucleus=x.nucleus, normalized=True, zero_crossing=cross_h,
    )
    return SweepComparison(
        discrepancy=discrepancy,
        tm_verdict=verdict,
        threshold=threshold,
        shift_ghz=cross_h - cross_x,
        aligned_a=aligned_a,
        aligned_b=aligned_b,
    )


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------

def _corrected_spectrum(
    scan: ScanRecord,
    sigma_fraction: float,
    baseline_degree: int,
    peak_window_hz: float,
    peak_center_hz: Optional[float],
    background: Optional[Tuple[np.ndarray, np.ndarray]],
) -> Tuple[np.ndarray, np.ndarray, float]:
    sigma = sigma_fraction * scan.samples.size * scan.dwell
    spectrum, axis = apodize_and_transform(scan, sigma)
    real = spectrum.real
    if background is not None:
        real = subtract_background(real, axis, background[0], background[1])
    center = float(axis[np.argmax(np.abs(real))]) if peak_center_hz is None else peak_center_hz
    in_window = np.flatnonzero(np.abs(axis - center) <= peak_window_hz)
    exclude = [(int(in_window[0]), int(in_window[-1]) + 1)] if in_window.size else []
    return baseline_correct(real, baseline_degree, exclude), axis, center


def scan_amplitude(
    scan: ScanRecord,
    sigma_fraction: float,
    baseline_degree: int,
    peak_window_hz: float,
    peak_center_hz: Optional[float] = None,
    background: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    shape: Optional[Tuple[float, float]] = None,
) -> float:
    """Signal amplitude of one FID: apodize, transform, correct the baseline and fit the peak."""
    corrected, axis, center = _corrected_spectrum(
        scan, sigma_fraction, baseline_degree, peak_window_hz, peak_center_hz, background
    )
    return fit_peak_amplitude(corrected, axis, (center - peak_window_hz, center + peak_window_hz), shape)


def process_scan_series(
    scans: List[ScanRecord],
    sigma_fraction: float = 1.0 / 3.0,
    baseline_degree: int = 3,
    peak_window_hz: float = 2000.0,
    background: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> Tuple[List[Tuple[float, float]], BuildUpResult]:
    """Per-scan amplitudes and the build-up fit of a polarization series.

    Peak position and width come from the last (most polarized) scan; every
    scan is then reduced with that line shape held fixed.
    """
    if not scans:
        raise NoDataError("Scan series is empty")
    ordered = sorted(scans, key=lambda s: s.meta.timestamp)
    corrected, axis, center = _corrected_spectrum(
        ordered[-1], sigma_fraction, baseline_degree, peak_window_hz, None, background
    )
    _, f0, hwhm = fit_peak_shape(corrected, axis, (center - peak_window_hz, center + peak_window_hz))
    logger.debug("Peak at %.6g Hz with HWHM %.4g Hz", f0, hwhm)
    points = [
        (
            scan.meta.timestamp,
            scan_amplitude(scan, sigma_fraction, baseline_degree, peak_window_hz, center, background, (f0, hwhm)),
        )
        for scan in ordered
    ]
    return points, fit_buildup(points)
