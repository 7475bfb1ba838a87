"""
Command-line front end for the SIRS/V vaccination game

Commands: ne-run, so-run, compare, study, sweep, verify.
Exit codes: 0 success, 1 error, 2 completed with warnings.
"""

import argparse
import asyncio
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from app.config import SimConfig, dump_config, load_config, load_presets, load_study_presets
from app.export.csv_export import write_comparison, write_study, write_summary, write_sweep, write_trajectory
from app.export.heatmap import render_sweep
from app.services.simulation_service import simulation_service
from sirsv.analysis.study import parse_values
from sirsv.analysis.sweep import STATUS_FAILED, STATUS_OK, STATUS_UNCONVERGED, parse_axis
from sirsv.errors import ConfigurationError, SimulationError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_WARNING = 2

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_PRESETS = PROJECT_ROOT / "config" / "sweep_presets.yaml"

RULE = "=" * 70


# ============================================================================
# Console output
# ============================================================================


def banner(title: str):
    print(f"\n{RULE}")
    print(title)
    print(RULE)


def ok(message: str):
    print(f"✓ {message}")


def warn(message: str):
    print(f"⚠️  {message}")


def fail(message: str):
    print(f"❌ {message}")


def configure_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


# ============================================================================
# Argument parsing
# ============================================================================


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=os.getenv("SIRSV_CONFIG"),
                        help="configuration file, YAML or key = value lines (env: SIRSV_CONFIG)")
    common.add_argument("--out", default=os.getenv("SIRSV_OUT"),
                        help="output directory (env: SIRSV_OUT)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one setting, e.g. --set omega=1/60 (repeatable)")
    common.add_argument("--workers", type=int, default=_env_int("SIRSV_WORKERS"),
                        help="worker processes for sweeps and studies (env: SIRSV_WORKERS)")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="sirsv",
        description="Nash equilibrium vs social optimum in an SIRS/V vaccination game",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("ne-run", parents=[common], help="behavior model (imitation dynamics)")
    commands.add_parser("so-run", parents=[common], help="optimal control (forward-backward sweep)")
    commands.add_parser("compare", parents=[common], help="both models and the social efficiency deficit")

    study = commands.add_parser("study", parents=[common], help="compare both models over values of one parameter")
    study.add_argument("--param", help="model parameter to vary, e.g. omega")
    study.add_argument("--values", help="comma separated values, e.g. 0,1/90,1/60,1/30")
    study.add_argument("--preset", help="named study from the presets file")
    study.add_argument("--presets-file", default=str(DEFAULT_PRESETS))

    sweep = commands.add_parser("sweep", parents=[common], help="2-D parameter sweep of the comparison")
    sweep.add_argument("--axis1", help="name:lo:hi:steps[:coupled]")
    sweep.add_argument("--axis2", help="name:lo:hi:steps[:coupled]")
    sweep.add_argument("--preset", help="named sweep from the presets file")
    sweep.add_argument("--presets-file", default=str(DEFAULT_PRESETS))
    sweep.add_argument("--render", action="store_true", help="write PPM heatmaps per field")

    verify = commands.add_parser("verify", parents=[common], help="run the oracle diagnostics")
    verify.add_argument("--seed", type=int, default=0)

    return parser


def _env_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    if value is None or not value.strip():
        return None
    try:
        return int(value)
    except ValueError:
        return None


def flag_overrides(args: argparse.Namespace, extra: Sequence[str] = ()) -> List[str]:
    """Preset overrides, then --set, then --out/--workers (later wins)."""
    overrides = list(extra) + list(args.overrides)
    if args.out:
        overrides.append(f"out_dir={args.out}")
    if args.workers is not None:
        overrides.append(f"workers={args.workers}")
    return overrides


def echo_config(cfg: SimConfig):
    print("Effective configuration:")
    print(dump_config(cfg).rstrip())


def prepare_output(cfg: SimConfig) -> Path:
    """Create the output directory and save effective_config.yaml; called once results exist."""
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "effective_config.yaml").write_text(dump_config(cfg), encoding="utf-8", newline="\n")
    return out_dir


# ============================================================================
# Commands
# ============================================================================


def cmd_ne_run(cfg: SimConfig) -> int:
    banner("🧮 BEHAVIOR MODEL (imitation dynamics)")
    echo_config(cfg)
    outcome = asyncio.run(simulation_service.run_behavior(cfg))
    run, metrics = outcome.run, outcome.metrics
    out_dir = prepare_output(cfg)

    write_trajectory(run.trajectory, out_dir / "ne_trajectory.csv")
    write_summary({
        "model": "behavior",
        "r0": outcome.r0,
        "converged": run.converged,
        "equilibrium_time": run.equilibrium_time,
        "horizon": metrics.horizon_used,
        "it": metrics.it,
        "vt": metrics.vt,
        "asp": metrics.asp,
        "it_eq": metrics.it_eq,
        "vt_eq": metrics.vt_eq,
    }, out_dir / "ne_summary.txt")
    ok(f"Trajectory and summary written to {out_dir}")
    print(f"   R0 = {outcome.r0:.2f}  IT = {metrics.it:.6g}  VT = {metrics.vt:.6g}  ASP = {metrics.asp:.6g}")

    if not run.converged:
        warn(f"Equilibrium not reached by t={metrics.horizon_used:g} (tol {cfg.eq_tol:g})")
        return EXIT_WARNING
    ok(f"Equilibrium reached at t={run.equilibrium_time:g}")
    return EXIT_OK


def cmd_so_run(cfg: SimConfig) -> int:
    banner("🎯 OPTIMAL CONTROL (forward-backward sweep)")
    echo_config(cfg)
    outcome = asyncio.run(simulation_service.run_control(cfg))
    run, metrics = outcome.run, outcome.metrics
    out_dir = prepare_output(cfg)

    write_trajectory(run.states, out_dir / "so_trajectory.csv")
    write_summary({
        "model": "optimal_control",
        "r0": outcome.r0,
        "converged": run.converged,
        "iterations": run.iterations,
        "final_change": run.convergence_history[-1],
        "final_relaxation": run.relaxation,
        "horizon": metrics.horizon_used,
        "j": metrics.j,
        "it": metrics.it,
        "vt": metrics.vt,
        "asp": metrics.asp,
    }, out_dir / "so_summary.txt")
    ok(f"Trajectory and summary written to {out_dir}")
    print(f"   J = {metrics.j:.6g}  IT = {metrics.it:.6g}  VT = {metrics.vt:.6g}  ASP = {metrics.asp:.6g}")

    if not run.converged:
        warn(f"Sweep did not converge within {cfg.fbs.max_iters} iterations")
        return EXIT_WARNING
    ok(f"Converged after {run.iterations} iterations")
    return EXIT_OK


def cmd_compare(cfg: SimConfig) -> int:
    banner("⚖️  NASH EQUILIBRIUM vs SOCIAL OPTIMUM")
    echo_config(cfg)
    comparison = asyncio.run(simulation_service.run_comparison(cfg))
    out_dir = prepare_output(cfg)

    write_trajectory(comparison.ne_run.trajectory, out_dir / "ne_trajectory.csv")
    write_trajectory(comparison.so_run.states, out_dir / "so_trajectory.csv")
    write_comparison(comparison, out_dir / "comparison.csv")
    ok(f"Trajectories and comparison written to {out_dir}")
    print(f"   ASP_NE = {comparison.ne.asp:.6g}  ASP_SO = {comparison.so.asp:.6g}  SED = {comparison.sed:.6g}")

    status = EXIT_OK
    if not comparison.ne_run.converged:
        warn("Behavior model did not reach equilibrium within the horizon")
        status = EXIT_WARNING
    if not comparison.so_run.converged:
        warn("Optimal-control sweep did not converge")
        status = EXIT_WARNING
    return status


def _study_target(args: argparse.Namespace):
    if args.preset:
        presets = load_study_presets(args.presets_file)
        if args.preset not in presets:
            raise ConfigurationError(
                f"unknown study {args.preset!r}; available: {', '.join(sorted(presets))}"
            )
        preset = presets[args.preset]
        parameter, values = preset.parameter, preset.values
    else:
        parameter, values = None, None
    if args.param:
        parameter = args.param
    if args.values:
        values = parse_values(args.values)
    if parameter is None or values is None:
        raise ConfigurationError("study needs --param and --values or a --preset")
    return parameter, values


def cmd_study(cfg: SimConfig, args: argparse.Namespace) -> int:
    parameter, values = _study_target(args)

    banner(f"📈 PARAMETER STUDY {parameter}")
    echo_config(cfg)
    print(f"{parameter} = {', '.join(repr(value) for value in values)}")
    result = asyncio.run(simulation_service.run_parameter_study(cfg, parameter, values))
    out_dir = prepare_output(cfg)

    written = write_study(result, out_dir)
    ok(f"{len(result.points)} value(s): summary and {len(written) - 1} trajectories written to {out_dir}")
    for point in result.points:
        comparison = point.comparison
        print(f"   {parameter} = {point.value:<10.6g} VT_NE = {comparison.ne.vt:.6g}  "
              f"VT_SO = {comparison.so.vt:.6g}  SED = {comparison.sed:.6g}")

    if not result.all_converged:
        warn("Some runs did not converge (see study.csv)")
        return EXIT_WARNING
    return EXIT_OK


def cmd_sweep(cfg: SimConfig, args: argparse.Namespace, preset=None) -> int:
    axis1 = parse_axis(args.axis1) if args.axis1 else (preset.axis1 if preset else None)
    axis2 = parse_axis(args.axis2) if args.axis2 else (preset.axis2 if preset else None)
    if axis1 is None or axis2 is None:
        raise ConfigurationError("sweep needs --axis1 and --axis2 or a --preset")

    banner(f"🗺️  PARAMETER SWEEP {axis1.parameter} x {axis2.parameter}")
    echo_config(cfg)
    result = asyncio.run(simulation_service.run_parameter_sweep(cfg, axis1, axis2))
    out_dir = prepare_output(cfg)

    write_sweep(result, out_dir / "sweep.csv")
    ok(f"{result.shape[0]} x {result.shape[1]} grid written to {out_dir / 'sweep.csv'}")
    if args.render:
        images = render_sweep(result, out_dir)
        ok(f"{len(images)} heatmaps rendered")

    counts = result.status_counts()
    print("   " + "  ".join(f"{name}={count}" for name, count in counts.items()))
    if counts[STATUS_OK] == 0:
        warn("No cell completed successfully")
        return EXIT_WARNING
    if counts[STATUS_FAILED] or counts[STATUS_UNCONVERGED]:
        warn(f"{counts[STATUS_FAILED]} failed, {counts[STATUS_UNCONVERGED]} unconverged cell(s)")
        return EXIT_WARNING
    return EXIT_OK


def cmd_verify(cfg: SimConfig, seed: int) -> int:
    banner("🔍 ORACLE DIAGNOSTICS")
    results = asyncio.run(simulation_service.verify(cfg, seed))
    for result in results:
        (ok if result.passed else fail)(f"{result.name}: {result.detail}")
    if all(result.passed for result in results):
        print("\n✅ ALL CHECKS PASSED")
        return EXIT_OK
    return EXIT_WARNING


# ============================================================================
# Entry point
# ============================================================================


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    try:
        preset = None
        extra: Sequence[str] = ()
        if args.command == "sweep" and args.preset:
            presets = load_presets(args.presets_file)
            if args.preset not in presets:
                raise ConfigurationError(
                    f"unknown preset {args.preset!r}; available: {', '.join(sorted(presets))}"
                )
            preset = presets[args.preset]
            extra = preset.override_flags()

        cfg = load_config(args.config, flag_overrides(args, extra))

        if args.command == "ne-run":
            return cmd_ne_run(cfg)
        if args.command == "so-run":
            return cmd_so_run(cfg)
        if args.command == "compare":
            return cmd_compare(cfg)
        if args.command == "study":
            return cmd_study(cfg, args)
        if args.command == "sweep":
            return cmd_sweep(cfg, args, preset)
        return cmd_verify(cfg, args.seed)
    except (SimulationError, ValidationError) as e:
        fail(str(e))
        return EXIT_ERROR
    except OSError as e:
        fail(f"I/O error: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
