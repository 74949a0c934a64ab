"""
tmdnp command line
==================

    tmdnp sim regimes  --regime {homo,inhomo,hole} --out FILE
    tmdnp sim steady   --c MM --T K
    tmdnp sim sweep    --c MM --T K --lo GHZ --hi GHZ --n N --out FILE
    tmdnp phase        --c-grid LO:HI:N --t-grid LO:HI:N --out FILE
    tmdnp analyze buildup  --input DIR|CSV --out FILE
    tmdnp analyze spintemp --buildup FILE --reference FILE --t-bath K --nucleus NAME
    tmdnp analyze sweep    --a FILE --b FILE
    tmdnp synth        --out DIR|CSV

Every subcommand accepts ``--config FILE`` (merged over the bundled preset).
Exit codes: 0 success, 2 usage, 3 numeric or fit failure, 4 file I/O.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from src.core.config import RunConfig, get_settings, load_run_config
from src.core.constants import ghz_to_rad
from src.core.errors import DataFileError, FitFailureError, InvalidArgumentError, TmdnpError
from src.models.analysis import BuildUpResult
from src.models.tm_state import RegimeProfileParams
from src.services import analysis, io_formats, phase_map, simulation_service, synth
from src.services.io_formats import atomic_write_json, sidecar_path

logger = logging.getLogger("tmdnp")

EXIT_OK = 0
EXIT_USAGE = 2


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return value


def _grid(text: str) -> List[float]:
    try:
        return phase_map.parse_grid(text)
    except InvalidArgumentError as e:
        raise argparse.ArgumentTypeError(str(e))


def _emit(payload: Dict[str, Any], out: Optional[str] = None) -> None:
    if out:
        atomic_write_json(Path(out), payload)
    print(json.dumps(payload, indent=2, sort_keys=True, default=io_formats.json_default))


def _write_sidecar(out: str, argv: List[str], cfg: RunConfig, extra: Optional[Dict[str, Any]] = None) -> None:
    meta = {"command": ["tmdnp", *argv], "config": cfg.model_dump()}
    if extra:
        meta.update(extra)
    atomic_write_json(sidecar_path(Path(out)), meta)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_sim_regimes(args, cfg: RunConfig, argv: List[str]) -> int:
    nucleus = simulation_service.nucleus_from_config(cfg, args.nucleus)
    shape, width = simulation_service.parse_line_spec(args.line) if args.line else (None, None)
    line = simulation_service.line_from_config(cfg, nucleus, shape, width)
    mw_offset = args.mw_offset if args.mw_offset is not None else cfg.lattice.mw_ghz - cfg.line.center_ghz
    params = RegimeProfileParams(
        saturation=args.saturation if args.saturation is not None else cfg.regimes.saturation,
        hole_width=_ghz_or_none(args.hole_width if args.hole_width is not None else cfg.regimes.hole_width_ghz),
        hole_depth=args.hole_depth if args.hole_depth is not None else cfg.regimes.hole_depth,
        T_s=args.t_s,
    )
    T = args.temperature or cfg.regimes.temperature_k
    thermal, irradiated, report = simulation_service.simulate_regime(
        cfg, args.regime, nucleus, params, mw_offset, T, line=line
    )
    io_formats.write_profile_csv(Path(args.out), thermal, irradiated)
    _write_sidecar(args.out, argv, cfg, {"report": report})
    _emit(report, args.report)
    return EXIT_OK


def _ghz_or_none(value: Optional[float]) -> Optional[float]:
    return None if value is None else ghz_to_rad(value)


def cmd_sim_steady(args, cfg: RunConfig, argv: List[str]) -> int:
    nucleus = simulation_service.nucleus_from_config(cfg, args.nucleus)
    cell = simulation_service.steady_cell(cfg, args.c, args.T, nucleus)
    if cell.failed:
        logger.error("Steady state failed: %s", cell.error)
        return 3
    payload = cell.model_dump(mode="json", exclude={"error"})
    payload["regime"] = cell.regime.code
    _emit(payload, args.out)
    return EXIT_OK


def cmd_sim_sweep(args, cfg: RunConfig, argv: List[str]) -> int:
    nucleus = simulation_service.nucleus_from_config(cfg, args.nucleus)
    points = simulation_service.simulated_sweep(cfg, args.c, args.T, nucleus, args.lo, args.hi, args.n)
    io_formats.write_sweep_csv(Path(args.out), points)
    _write_sidecar(args.out, argv, cfg)
    return EXIT_OK


def cmd_phase(args, cfg: RunConfig, argv: List[str]) -> int:
    nucleus = simulation_service.nucleus_from_config(cfg, args.nucleus)
    c_grid = args.c_grid or phase_map.parse_grid(cfg.sweep.c_grid)
    t_grid = args.t_grid or phase_map.parse_grid(cfg.sweep.t_grid)
    workers = args.workers or get_settings().workers
    grid, optimum = simulation_service.phase_diagram(cfg, c_grid, t_grid, nucleus, workers)
    io_formats.write_phase_csv(Path(args.out), grid)
    summary = {"optimum": optimum.model_dump() if optimum else None}
    _write_sidecar(args.out, argv, cfg, summary)
    _emit(summary)
    return EXIT_OK


def _buildup_payload(result: BuildUpResult) -> Dict[str, Any]:
    return {
        "S_inf": result.S_inf,
        "tau": result.tau,
        "errors": {"S_inf_rel": result.fit_rel_err[0], "tau_rel": result.fit_rel_err[1]},
        "durbin_watson": result.durbin_watson,
        "extrapolation_warning": result.extrapolation_warning,
        "amplitudes": [[t, s] for t, s in result.S_samples],
    }


def cmd_analyze_buildup(args, cfg: RunConfig, argv: List[str]) -> int:
    source = Path(args.input)
    if source.is_dir():
        scans = io_formats.read_scan_series(source)
        background = io_formats.read_spectrum_csv(Path(args.background)) if args.background else None
        _, result = analysis.process_scan_series(
            scans,
            sigma_fraction=cfg.analysis.apodization_sigma_fraction,
            baseline_degree=cfg.analysis.baseline_degree,
            peak_window_hz=cfg.analysis.peak_window_hz,
            background=background,
        )
    else:
        result = analysis.fit_buildup(io_formats.read_amplitude_csv(source))
    payload = _buildup_payload(result)
    _emit(payload, args.out)
    _write_sidecar(args.out, argv, cfg)
    return EXIT_OK


def _read_buildup(path: str) -> Dict[str, Any]:
    data = io_formats.read_json(Path(path))
    try:
        return {
            "S_inf": float(data["S_inf"]),
            "rel": float(data.get("errors", {}).get("S_inf_rel", 0.0) or 0.0),
        }
    except (KeyError, TypeError, ValueError):
        raise DataFileError(f"{path} is not a build-up result", path=path)


def cmd_analyze_spintemp(args, cfg: RunConfig, argv: List[str]) -> int:
    nucleus = simulation_service.nucleus_from_config(cfg, args.nucleus)
    signal = _read_buildup(args.buildup)
    reference = _read_buildup(args.reference)
    result = analysis.extract_spin_temperature(
        signal["S_inf"], reference["S_inf"], nucleus, args.t_bath, signal["rel"], reference["rel"]
    )
    _emit(result.model_dump(), args.out)
    return EXIT_OK


def cmd_analyze_sweep(args, cfg: RunConfig, argv: List[str]) -> int:
    threshold = args.threshold if args.threshold is not None else cfg.analysis.sweep_threshold
    comparison = analysis.compare_sweeps(
        io_formats.read_sweep_csv(Path(args.a), nucleus="a"),
        io_formats.read_sweep_csv(Path(args.b), nucleus="b"),
        threshold,
    )
    payload = comparison.model_dump()
    payload["tm_verdict"] = "TM" if comparison.tm_verdict else "noTM"
    _emit(payload, args.out)
    return EXIT_OK


def cmd_synth(args, cfg: RunConfig, argv: List[str]) -> int:
    nucleus = simulation_service.nucleus_from_config(cfg, args.nucleus)
    params = synth.SynthParams(
        S_inf=args.s_inf,
        tau_s=args.tau,
        noise=args.noise,
        n_scans=args.n_scans,
        repetition_s=args.repetition,
        n_points=args.n_points,
        seed=args.seed,
        nucleus=nucleus.name,
        larmor_mhz=nucleus.larmor_freq / 1e6,
        t_bath_k=args.t_bath,
    )
    out = Path(args.out)
    if args.amplitude_only:
        io_formats.write_amplitude_csv(out, synth.synthesize_amplitudes(params))
        _write_sidecar(str(out), argv, cfg, {"synth": params.model_dump()})
    else:
        io_formats.write_scan_series(out, synth.manifest(params), synth.synthesize_fids(params))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config merged over the bundled preset")
    common.add_argument("--nucleus", help="Nucleus name from the config table (default: config nucleus)")

    parser = argparse.ArgumentParser(prog="tmdnp", description="Thermal-mixing DNP simulation and analysis")
    parser.add_argument("--log-level", default=None, help="Overrides TMDNP_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("sim", help="Line and packet simulations").add_subparsers(dest="sim_command", required=True)

    regimes = sim.add_parser("regimes", parents=[common], help="Canonical irradiated profiles and their P_n")
    regimes.add_argument("--regime", choices=simulation_service.REGIMES, required=True)
    regimes.add_argument("--line", help="rect:WIDTH_GHZ or gauss:FWHM_GHZ")
    regimes.add_argument("--mw-offset", type=float, help="Offset of omega_mw from the line center (GHz)")
    regimes.add_argument("--temperature", type=_positive_float, help="Lattice temperature (K)")
    regimes.add_argument("--saturation", type=float)
    regimes.add_argument("--hole-width", type=_positive_float, help="Full hole width (GHz)")
    regimes.add_argument("--hole-depth", type=float)
    regimes.add_argument("--t-s", type=float, help="Spin temperature of the inhomogeneous profile (K)")
    regimes.add_argument("--out", required=True, help="Profile CSV")
    regimes.add_argument("--report", help="Also write the JSON report here")
    regimes.set_defaults(handler=cmd_sim_regimes)

    steady = sim.add_parser("steady", parents=[common], help="Single (c, T) packet steady state")
    steady.add_argument("--c", type=_positive_float, required=True, help="Radical concentration (mM)")
    steady.add_argument("--T", type=_positive_float, required=True, help="Lattice temperature (K)")
    steady.add_argument("--out")
    steady.set_defaults(handler=cmd_sim_steady)

    msweep = sim.add_parser("sweep", parents=[common], help="Simulated microwave sweep")
    msweep.add_argument("--c", type=_positive_float, required=True)
    msweep.add_argument("--T", type=_positive_float, required=True)
    msweep.add_argument("--lo", type=float, required=True, help="GHz")
    msweep.add_argument("--hi", type=float, required=True, help="GHz")
    msweep.add_argument("--n", type=int, default=41)
    msweep.add_argument("--out", required=True)
    msweep.set_defaults(handler=cmd_sim_sweep)

    phase = commands.add_parser("phase", parents=[common], help="Concentration x temperature phase diagram")
    phase.add_argument("--c-grid", type=_grid, help="LO:HI:N in mM")
    phase.add_argument("--t-grid", type=_grid, help="LO:HI:N in K")
    phase.add_argument("--workers", type=int)
    phase.add_argument("--out", required=True)
    phase.set_defaults(handler=cmd_phase)

    analyze = commands.add_parser("analyze", help="Experimental data reduction").add_subparsers(
        dest="analyze_command", required=True
    )
    buildup = analyze.add_parser("buildup", parents=[common], help="Build-up fit of a scan series")
    buildup.add_argument("--input", required=True, help="Series directory or t_s,amplitude CSV")
    buildup.add_argument("--background", help="Empty-cup spectrum CSV (freq_hz,intensity)")
    buildup.add_argument("--out", required=True)
    buildup.set_defaults(handler=cmd_analyze_buildup)

    spintemp = analyze.add_parser("spintemp", parents=[common], help="Spin temperature against a reference")
    spintemp.add_argument("--buildup", required=True, help="Build-up JSON of the irradiated series")
    spintemp.add_argument("--reference", required=True, help="Build-up JSON of the off-resonance series")
    spintemp.add_argument("--t-bath", type=_positive_float, required=True)
    spintemp.add_argument("--out")
    spintemp.set_defaults(handler=cmd_analyze_spintemp)

    compare = analyze.add_parser("sweep", parents=[common], help="Compare two microwave sweeps")
    compare.add_argument("--a", required=True)
    compare.add_argument("--b", required=True)
    compare.add_argument("--threshold", type=_positive_float)
    compare.add_argument("--out")
    compare.set_defaults(handler=cmd_analyze_sweep)

    gen = commands.add_parser("synth", parents=[common], help="Generate a synthetic build-up series")
    gen.add_argument("--out", required=True)
    gen.add_argument("--s-inf", type=float, default=10.0)
    gen.add_argument("--tau", type=_positive_float, default=600.0)
    gen.add_argument("--noise", type=float, default=0.01)
    gen.add_argument("--n-scans", type=int, default=1081)
    gen.add_argument("--repetition", type=_positive_float, default=5.0)
    gen.add_argument("--n-points", type=int, default=512, help="Points per FID")
    gen.add_argument("--t-bath", type=_positive_float, default=1.5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--amplitude-only", action="store_true", help="Write a t_s,amplitude CSV instead of FIDs")
    gen.set_defaults(handler=cmd_synth)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    level = args.log_level or get_settings().log_level
    logging.basicConfig(level=level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        cfg = load_run_config(args.config)
        return args.handler(args, cfg, argv)
    except FitFailureError as e:
        logger.error("%s", e)
        print(json.dumps(e.to_dict(), default=io_formats.json_default), file=sys.stderr)
        return e.exit_code
    except TmdnpError as e:
        logger.error("%s", e)
        return e.exit_code
    except ValidationError as e:
        logger.error("Invalid arguments: %s", e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
