"""Command-line front end: validate scenarios, run them, report timings.

Exit codes: 0 — run completed and stayed safe (minimum global barrier over the
run >= -1e-6); 1 — the run completed unsafely or a controller became
infeasible; 2 — the scenario or the invocation was invalid.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import kernels
from .errors import ControllerError, InfeasibleProblem, ScenarioError
from .metrics import csv_header, csv_row
from .sim import (SIMULATION_MODES, RunResult, Simulation, bundled_scenario_names,
                  load_scenario)

SAFETY_FLOOR = -1e-6


def _add_common(parser):
    parser.add_argument("scenario",
                        help="path to a .scenario file or a bundled scenario name")
    parser.add_argument("--mode", choices=(*SIMULATION_MODES, "both"),
                        default="decentralized",
                        help="controller to run (default: decentralized)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario's random seed")
    parser.add_argument("--kernels", choices=kernels.available(), default=None,
                        help="numeric kernel backend (default: best available)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmsafe",
        description="Safety-filtered density control for robot swarms.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and write metrics")
    _add_common(run)
    run.add_argument("--out", type=Path, default=None,
                     help="output directory (default: runs/<scenario name>)")
    run.add_argument("--frames", action="store_true",
                     help="also write per-step robot states to frames/")
    run.add_argument("--quiet", action="store_true", help="suppress progress output")

    val = sub.add_parser("validate", help="check a scenario file and exit")
    val.add_argument("scenario", help="path to a .scenario file or a bundled name")

    timing = sub.add_parser("timing", help="run a scenario and report decision timings")
    _add_common(timing)

    sub.add_parser("scenarios", help="list the scenarios bundled with the package")
    return parser


def _modes(arg) -> tuple[str, ...]:
    return tuple(SIMULATION_MODES) if arg == "both" else (arg,)


def _write_outputs(out_dir: Path, result: RunResult, *, suffix="", frames=False):
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"metrics{suffix}.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(csv_header(result.scenario.n_robots))
        for sm in result.history:
            writer.writerow(csv_row(sm))
    if frames and result.frames is not None:
        frame_dir = out_dir / (f"frames{suffix}" if suffix else "frames")
        frame_dir.mkdir(exist_ok=True)
        for fr in result.frames:
            (frame_dir / f"{fr['step']:04d}.json").write_text(
                json.dumps(fr, indent=2) + "\n")
    return csv_path


def _bound_report(result: RunResult) -> dict:
    history = result.history
    return {
        "swarm_bound": {
            "min_margin": min(sm.swarm_bound.margin for sm in history),
            "holds_all_steps": all(sm.swarm_bound.holds for sm in history),
        },
        "individual_bound": {
            "min_margin": min(float(sm.individual_margins.min()) for sm in history),
            "holds_all_steps": all((sm.individual_margins >= 0.0).all()
                                   for sm in history),
        },
        "neighbor_proximity": {
            "min_margin": min(sm.proximity.margin for sm in history),
            "holds_all_steps": all(sm.proximity.holds for sm in history),
        },
    }


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    out_dir = args.out if args.out is not None else Path("runs") / scenario.name
    both = args.mode == "both"
    summaries = {}
    reports = {}
    status = 0
    for mode in _modes(args.mode):
        simulation = Simulation(scenario, mode=mode, seed=args.seed)
        try:
            result = simulation.run(record_frames=args.frames)
        except (InfeasibleProblem, ControllerError) as exc:
            print(f"error: [{mode}] {exc}", file=sys.stderr)
            return 1
        summary = result.summary()
        summaries[mode] = summary
        reports[mode] = _bound_report(result)
        suffix = f"_{mode}" if both else ""
        csv_path = _write_outputs(out_dir, result, suffix=suffix, frames=args.frames)
        if not summary["safety_ok"]:
            status = 1
        if not args.quiet:
            print(f"[{mode}] steps={summary['steps']} "
                  f"min_barrier={summary['min_barrier']:.6g} "
                  f"tracking {summary['initial_tracking_error']:.4g} -> "
                  f"{summary['final_tracking_error']:.4g} "
                  f"(ratio {summary['tracking_ratio']:.3f}) "
                  f"decide {summary['mean_decide_ms_per_robot']:.2f} ms/robot")
            print(f"[{mode}] wrote {csv_path}")
    summary_payload = summaries[args.mode] if not both else summaries
    report_payload = reports[args.mode] if not both else reports
    (out_dir / "summary.json").write_text(json.dumps(summary_payload, indent=2) + "\n")
    (out_dir / "bound_report.json").write_text(json.dumps(report_payload, indent=2) + "\n")
    if not args.quiet:
        print(f"wrote {out_dir / 'summary.json'} and {out_dir / 'bound_report.json'}")
        if status:
            print("SAFETY VIOLATION: global barrier dropped below "
                  f"{SAFETY_FLOOR}", file=sys.stderr)
    return status


def _cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    grid = scenario.build_grid()
    mask = scenario.danger_mask(grid)
    print(f"ok: {scenario.name} — {scenario.n_robots} robots, "
          f"{scenario.steps} steps of {scenario.dt}s, grid {grid.nx}x{grid.ny} "
          f"({grid.cell}m cells), danger set {len(mask)} cells")
    return 0


def _cmd_timing(args) -> int:
    scenario = load_scenario(args.scenario)
    for mode in _modes(args.mode):
        simulation = Simulation(scenario, mode=mode, seed=args.seed)
        try:
            result = simulation.run()
        except (InfeasibleProblem, ControllerError) as exc:
            print(f"error: [{mode}] {exc}", file=sys.stderr)
            return 1
        summary = result.summary()
        print(f"[{mode}] kernels={kernels.active()} "
              f"robots={summary['n_robots']} steps={summary['steps']} "
              f"decide mean {summary['mean_decide_ms_per_robot']:.3f} ms/robot, "
              f"max {summary['max_decide_ms_per_robot']:.3f} ms/robot")
    return 0


def _cmd_scenarios(_args) -> int:
    for name in bundled_scenario_names():
        scenario = load_scenario(name)
        print(f"{name}: {scenario.description or scenario.name}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "kernels", None):
        kernels.use(args.kernels)
    handler = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "timing": _cmd_timing,
        "scenarios": _cmd_scenarios,
    }[args.command]
    try:
        return handler(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
