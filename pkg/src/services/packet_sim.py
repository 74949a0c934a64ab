"""
Spin-packet rate equations
==========================

Each grid point of the EPR line is a spin packet obeying

    dP_i/dt = -(P_i - P0_i)/T1 - 2 W_i P_i + Gamma_ff (P_{i+1} + P_{i-1} - 2 P_i)

with zero-flux end packets. The system is linear, so the steady state is a
single tridiagonal solve; time integration steps explicitly when stable and
falls back to backward Euler otherwise.

The regime classifier reads three numbers off a steady state:

- hole localization: share of the polarization deficit within
  +-5 excitation widths of omega_mw;
- reversal: on the far side of omega_mw the non-Zeeman part P - <P> swings
  to the opposite sign of its value at omega_mw, with a swing of at least
  ``reversal_contrast`` times the mean deficit. The steady state solves
  M P = P0/T1 with M an M-matrix, so every P_i keeps the sign of P0 and a
  literal sign reversal of P cannot occur in this model;
- tanh residual: normalised RMS residual of a fit of P to A tanh(beta (omega - omega0)).
"""

import logging
from typing import List, Optional

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import least_squares

from src.core.errors import InvalidArgumentError, NumericError
from src.models.line import EprLine
from src.models.packet import (
    LatticeConfig,
    PacketModel,
    PacketState,
    Regime,
    RegimeMetrics,
    RegimeThresholds,
    RegimeVerdict,
)
from src.services.line_service import thermal_electron_profile
from src.services.tm_model import lorentzian

logger = logging.getLogger(__name__)

DEFAULT_MW_WIDTH_STEPS = 2.0
LOCALIZATION_WIDTHS = 5.0
IMPLICIT_SUBSTEP_T1 = 0.1


def build_model(line: EprLine, config: LatticeConfig) -> PacketModel:
    """Precompute T1(T), Gamma_ff(c) and the per-packet microwave rates."""
    t1 = config.t1
    gamma = config.gamma_ff
    if not (np.isfinite(t1) and t1 > 0 and np.isfinite(gamma) and gamma >= 0):
        raise InvalidArgumentError(f"Calibration yields T1={t1}, Gamma_ff={gamma}")
    mw_width = config.mw_width if config.mw_width is not None else DEFAULT_MW_WIDTH_STEPS * line.spacing
    rates = config.w_mw * lorentzian(line.grid - config.omega_mw, mw_width)
    return PacketModel(
        line=line,
        config=config,
        thermal=thermal_electron_profile(line, config.T),
        rates=rates,
        t1=t1,
        gamma_ff=gamma,
        mw_width=mw_width,
    )


def _rate_bands(model: PacketModel) -> np.ndarray:
    """Banded form of the relaxation matrix M with dP/dt = -M P + P0/T1."""
    n = model.line.n_points
    gamma = model.gamma_ff
    neighbours = np.full(n, 2.0)
    neighbours[0] = neighbours[-1] = 1.0
    bands = np.zeros((3, n))
    bands[0, 1:] = -gamma
    bands[1] = 1.0 / model.t1 + 2.0 * model.rates + gamma * neighbours
    bands[2, :-1] = -gamma
    return bands


def _derivative(model: PacketModel, P: np.ndarray) -> np.ndarray:
    bands = _rate_bands(model)
    MP = bands[1] * P
    MP[:-1] += bands[0, 1:] * P[1:]
    MP[1:] += bands[2, :-1] * P[:-1]
    return model.thermal.values / model.t1 - MP


def residual_rate(model: PacketModel, state: PacketState) -> float:
    """max_i |dP_i/dt| at a state."""
    return float(np.max(np.abs(_derivative(model, state.P))))


def steady_state(model: PacketModel) -> PacketState:
    """Exact fixed point of the rate equations by a tridiagonal solve."""
    bands = _rate_bands(model)
    try:
        P = solve_banded((1, 1), bands, model.thermal.values / model.t1)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericError(f"Steady-state system could not be solved: {e}")
    if not np.all(np.isfinite(P)):
        raise NumericError("Steady-state solution is not finite")
    return PacketState(P=np.clip(P, -1.0, 1.0), t=0.0)


def max_rate(model: PacketModel) -> float:
    return 1.0 / model.t1 + 2.0 * float(np.max(model.rates)) + 4.0 * model.gamma_ff


def integrate(
    model: PacketModel,
    state: PacketState,
    dt: float,
    t_end: float,
    stride: int = 1,
) -> List[PacketState]:
    """Step the rate equations from ``state`` for ``t_end`` seconds.

    Explicit Euler is used when dt < 0.5 / max_rate; otherwise each step is
    taken by backward Euler in substeps of at most T1/10. Returns the initial
    state followed by every ``stride``-th step and always the final state.
    """
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    if t_end < 0:
        raise InvalidArgumentError(f"t_end must be nonnegative, got {t_end}")
    if stride < 1:
        raise InvalidArgumentError("stride must be >= 1")

    explicit = dt < 0.5 / max_rate(model)
    bands = _rate_bands(model)
    source = model.thermal.values / model.t1
    P = np.array(state.P, dtype=float)
    t0 = state.t
    trajectory = [state]
    if t_end == 0:
        return trajectory

    n_steps = int(np.ceil(t_end / dt - 1e-12))
    logger.debug("Integrating %d steps with %s stepping", n_steps, "explicit" if explicit else "implicit")
    for step in range(1, n_steps + 1):
        h = min(dt, t_end - (step - 1) * dt)
        if explicit:
            P = P + h * _derivative(model, P)
        else:
            substeps = max(1, int(np.ceil(h / (IMPLICIT_SUBSTEP_T1 * model.t1))))
            sub = h / substeps
            implicit = bands * sub
            implicit[1] += 1.0
            for _ in range(substeps):
                P = solve_banded((1, 1), implicit, P + sub * source)
        if not np.all(np.isfinite(P)):
            raise NumericError(f"Integration diverged at step {step}")
        if step % stride == 0 or step == n_steps:
            trajectory.append(PacketState(P=np.clip(P, -1.0, 1.0), t=t0 + min(step * dt, t_end)))
    return trajectory


def _tanh_fit_residual(omega: np.ndarray, P: np.ndarray) -> float:
    rms = float(np.sqrt(np.mean(P ** 2)))
    if rms == 0.0:
        return 0.0
    x = (omega - omega.mean()) / (0.5 * (omega[-1] - omega[0]))
    y = P / rms

    def residuals(params):
        A, beta, x0 = params
        return A * np.tanh(beta * (x - x0)) - y

    best = np.inf
    # first start is a flat profile: tanh saturated across the whole window
    for x0_start, beta_start in ((-3.0, 3.0), (0.0, 2.0), (3.0, 3.0)):
        t = np.tanh(beta_start * (x - x0_start))
        A_start = float(np.dot(t, y) / np.dot(t, t))
        try:
            fit = least_squares(
                residuals,
                x0=[A_start, beta_start, x0_start],
                bounds=([-10.0, 1e-3, -5.0], [10.0, 1e3, 5.0]),
            )
        except ValueError:
            continue
        best = min(best, float(np.sqrt(np.mean(fit.fun ** 2))))
    return best


def regime_metrics(model: PacketModel, ss: PacketState, thresholds: RegimeThresholds) -> RegimeMetrics:
    line = model.line
    omega_mw = model.config.omega_mw
    g = line.weights
    p0 = model.thermal.values
    P = ss.P
    sign = 1.0 if np.sum(g * p0) >= 0 else -1.0

    deficit = sign * (p0 - P)
    total = float(np.sum(g * deficit))
    if total <= 0.0:
        localization = 0.0
    else:
        window = np.abs(line.grid - omega_mw) <= LOCALIZATION_WIDTHS * model.mw_width
        localization = float(np.clip(np.sum(g[window] * deficit[window]) / total, 0.0, 1.0))

    mean_p = float(np.sum(g * P) / np.sum(g))
    mean_deficit = total / float(np.sum(g))
    non_zeeman = sign * (P - mean_p)
    m = line.nearest_index(omega_mw)
    near, far = m, line.n_points - 1 - m
    reversal = False
    contrast = 0.0
    if near != far and mean_deficit > 0.0:
        far_side = non_zeeman[m + 1:] if far > near else non_zeeman[:m][::-1]
        at_mw = non_zeeman[m]
        if far_side.size:
            swing = far_side - at_mw
            contrast = float(np.max(np.abs(swing)) / mean_deficit)
            opposite = np.any(np.sign(far_side) == -np.sign(at_mw)) and at_mw != 0.0
            reversal = bool(opposite and contrast >= thresholds.reversal_contrast)

    return RegimeMetrics(
        hole_localization=localization,
        reversal_flag=reversal,
        reversal_contrast=contrast,
        tanh_fit_residual=_tanh_fit_residual(line.grid, P),
    )


def classify_regime(
    model: PacketModel, ss: PacketState, thresholds: Optional[RegimeThresholds] = None
) -> RegimeVerdict:
    """Breakdown if the deficit is localized; InhomogeneousTM on a significant
    tanh-like reversal; HomogeneousTM otherwise."""
    thresholds = thresholds or RegimeThresholds()
    metrics = regime_metrics(model, ss, thresholds)
    if metrics.hole_localization > thresholds.localization:
        regime = Regime.BREAKDOWN
    elif metrics.reversal_flag and metrics.tanh_fit_residual < thresholds.tanh_residual:
        regime = Regime.INHOMOGENEOUS
    else:
        regime = Regime.HOMOGENEOUS
    return RegimeVerdict(regime=regime, eta=model.eta, metrics=metrics, thresholds=thresholds)
