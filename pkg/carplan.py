# carplan command-line runner
# solve -> trace -> slice / render, plus the dijkstra oracle cross-check
# each phase is logged with timing; failures map to distinct exit codes

import sys
import json
import time
import logging
import argparse
from pathlib import Path
from typing import Optional

sys.path.insert(0, str(Path(__file__).parent / "configs"))
sys.path.insert(0, str(Path(__file__).parent / "src"))

import config

from grid.field import Config, GridSpec
from scenario.scene import Scene, SceneLoadError, load_scene
from solver.hjb_solver import ConfigurationError, SolverParams, solve
from storage.field_store import (
    FIELD_SUFFIX, FieldCompatibilityError, FieldFormatError, check_compatible, load_result, save_result,
)

logger = logging.getLogger("carplan")

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_USAGE = 2
EXIT_SCENE = 3
EXIT_NOT_CONVERGED = 4
EXIT_TRAJECTORY = 5
EXIT_FIELD = 6

DIVIDER = "=" * 60
ORACLE_DEFAULT_GRID = "24,24,16"

# helpers


def step(name):
    logger.info(f"\n{DIVIDER}\n  {name}\n{DIVIDER}")


def timed(fn):
    start = time.time()
    result = fn()
    elapsed = time.time() - start
    logger.info(f"  completed in {elapsed:.1f}s")
    return result, elapsed


def configure_logging(verbose: bool = False):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
    )


def default_field_path(scene: Scene, spec: GridSpec) -> Path:
    return config.settings.OUTPUT_DIR / f"{scene.name}_{spec.I}x{spec.J}x{spec.K}{FIELD_SUFFIX}"


def resolve_start(scene: Scene, args) -> Optional[Config]:
    if args.start and args.start_name:
        raise ValueError("Give either --start or --start-name, not both")
    if args.start:
        return Config.parse(args.start)
    if args.start_name:
        if args.start_name not in scene.starts:
            raise ValueError(f"Scene '{scene.name}' has no start named '{args.start_name}' "
                             f"(available: {', '.join(sorted(scene.starts)) or 'none'})")
        return scene.starts[args.start_name]
    return None


def load_field(scene: Scene, args, grid: Optional[str] = None):
    spec = GridSpec.parse(grid, scene.bounds) if grid else None
    path = Path(args.field) if args.field else default_field_path(
        scene, spec or GridSpec.parse(str(config.settings.GRID_SIZE), scene.bounds))
    result = load_result(path)
    check_compatible(result, scene, spec, strict_containment=config.settings.MASK_STRICT_CONTAINMENT)
    return result


def _trace(scene: Scene, result, start: Config, args):
    from trajectory.tracer import TraceParams, Tracer

    params = TraceParams.for_grid(result.spec, dt=args.dt, use_recorded_controls=args.recorded)
    logger.info(f"Tracing from {start.as_tuple()} with dt={params.dt:.4g}"
                f"{' (recorded controls)' if params.use_recorded_controls else ''}")
    return Tracer(result, scene).integrate(start, params)


# subcommands

def cmd_solve(args) -> int:
    settings = config.settings
    settings.ensure_directories()

    step("Load scene")
    scene = load_scene(args.scene)
    spec = GridSpec.parse(args.grid, scene.bounds)
    sp = SolverParams.from_settings(eps=args.eps, max_outer=args.max_iters)

    step(f"Solve {spec.I}x{spec.J}x{spec.K}")
    result, elapsed = timed(lambda: solve(scene, spec, sp))

    step("Save value field")
    out = Path(args.out) if args.out else default_field_path(scene, spec)
    save_result(result, out)

    summary = {"scene": scene.name, "field": str(out), "solve_seconds": round(elapsed, 3), **result.summary()}
    if args.report:
        report_path = out.with_suffix(".json")
        with open(report_path, "w") as f:
            json.dump(summary, f, indent=2, default=str)
        logger.info(f"Run summary saved to {report_path}")

    print(f"scene:            {scene.name}")
    print(f"grid:             {spec.I}x{spec.J}x{spec.K}")
    print(f"turning radius:   {scene.car.turning_radius:.6g}")
    print(f"outer iterations: {result.outer_iterations}")
    print(f"final residual:   {result.final_residual:.3e}")
    print(f"converged:        {result.converged}")
    print(f"reachable:        {summary['reachable_fraction']:.2%}")
    print(f"field:            {out}")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_trace(args) -> int:
    from export.tables import trajectory_frame, write_table

    step("Load scene + field")
    scene = load_scene(args.scene)
    result = load_field(scene, args, args.grid)
    start = resolve_start(scene, args)
    if start is None:
        raise ValueError("trace needs --start or --start-name")

    step("Integrate trajectory")
    traj, _ = timed(lambda: _trace(scene, result, start, args))

    out = Path(args.out) if args.out else config.settings.OUTPUT_DIR / f"{scene.name}_trajectory.csv"
    write_table(trajectory_frame(traj), out, config.settings.CSV_FLOAT_FORMAT)

    print(f"duration:     {traj.duration:.6g}")
    print(f"kink count:   {traj.kink_count}")
    print(f"reached goal: {traj.reached_goal}")
    print(f"trajectory:   {out}")
    return EXIT_OK


def cmd_slice(args) -> int:
    import pandas as pd
    from export.field_slicer import FieldSlicer
    from export.tables import write_table

    scene = load_scene(args.scene)
    result = load_field(scene, args, args.grid)
    slicer = FieldSlicer(result.u)
    summary = None

    if args.cloud:
        df = slicer.slice_by_level_band(args.level_min, args.level_max)
        kind = "cloud"
    elif args.lane_y is not None:
        df = slicer.lane_profile(args.lane_y, args.theta[0] if args.theta else 0.0)
        kind = "lane"
    else:
        if not args.theta:
            raise ValueError("slice needs --theta, --lane-y or --cloud")
        slices = slicer.slice_by_theta_range(args.theta)
        df = pd.concat(list(slices.values()), ignore_index=True)
        summary = slicer.summary(slices)
        for row in summary.itertuples(index=False):
            logger.info(f"Slice theta={row.slice}: {row.reached} reached nodes ({row.reached_pct:.1f}%)")
        kind = "theta"

    out = Path(args.out) if args.out else config.settings.OUTPUT_DIR / f"{scene.name}_{kind}.csv"
    write_table(df, out, config.settings.CSV_FLOAT_FORMAT)
    print(f"rows:  {len(df)}")
    print(f"slice: {out}")
    if summary is not None and len(summary) > 1:
        summary_path = write_table(summary, out.with_name(f"{out.stem}_summary.csv"), config.settings.CSV_FLOAT_FORMAT)
        print(f"summary: {summary_path}")
    return EXIT_OK


def cmd_render(args) -> int:
    from export.renderer import render_scene
    from export.tables import read_trajectory

    scene = load_scene(args.scene)
    start = resolve_start(scene, args)
    needs_field = start is not None or args.theta is not None
    result = load_field(scene, args, args.grid) if (needs_field or args.field) else None

    traj = None
    if args.trajectory:
        traj = read_trajectory(args.trajectory)
    elif start is not None:
        traj = _trace(scene, result, start, args)

    out = Path(args.out) if args.out else config.settings.OUTPUT_DIR / f"{scene.name}.svg"
    render_scene(scene, out, trajectory=traj,
                 field=result.u if result is not None else None, theta=args.theta)
    print(f"drawing: {out}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from oracle.dijkstra import dijkstra_travel_time
    from oracle.comparison import compare_fields, save_report

    settings = config.settings
    settings.ensure_directories()
    scene = load_scene(args.scene)

    if args.field:
        result = load_result(args.field)
        check_compatible(result, scene, strict_containment=settings.MASK_STRICT_CONTAINMENT)
        spec = result.spec
    else:
        spec = GridSpec.parse(args.grid or ORACLE_DEFAULT_GRID, scene.bounds)
        step(f"Solve {spec.I}x{spec.J}x{spec.K}")
        sp = SolverParams.from_settings(eps=args.eps, max_outer=args.max_iters)
        result, _ = timed(lambda: solve(scene, spec, sp))

    step("Dijkstra oracle")
    step_count = args.step_count or settings.ORACLE_STEP_COUNT
    oracle_u, _ = timed(lambda: dijkstra_travel_time(scene, spec, step_count, settings.ORACLE_MAX_NODES,
                                                     settings.MASK_STRICT_CONTAINMENT))

    report = compare_fields(result.u, oracle_u, result.walls,
                            {"max_median_abs_diff": settings.ORACLE_MEDIAN_TOLERANCE})
    report["scene"] = scene.name
    report["step_count"] = step_count

    out = Path(args.out) if args.out else \
        settings.REPORTS_DIR / "oracle" / f"{scene.name}_{spec.I}x{spec.J}x{spec.K}_oracle_report.json"
    save_report(report, out)

    for key, value in report["metrics"].items():
        print(f"{key:40s} {value}")
    print(f"status: {report['status']}")
    return EXIT_OK if report["status"] == "pass" else EXIT_CHECKS_FAILED


COMMANDS = {
    "solve": cmd_solve,
    "trace": cmd_trace,
    "slice": cmd_slice,
    "render": cmd_render,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="carplan",
                                     description="Time-optimal car paths from a swept HJB value field")
    parser.add_argument("--verbose", action="store_true", help="debug logging (per-sweep changes)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid_default=None):
        p.add_argument("--scene", required=True, help="scene file or bundled scene name")
        p.add_argument("--grid", default=grid_default, help="I or I,J,K")
        p.add_argument("--out", help="output path")

    def field_arg(p):
        p.add_argument("--field", help="value-field container (.cpf) from `solve`")

    def start_args(p):
        p.add_argument("--start", help='start configuration "x,y,theta"')
        p.add_argument("--start-name", help="named start from the scene file")
        p.add_argument("--recorded", action="store_true", help="use recorded sweep controls only")
        p.add_argument("--dt", type=float, help="euler step (default: quarter cell)")

    p = sub.add_parser("solve", help="sweep the value field and save it")
    common(p, str(config.settings.GRID_SIZE))
    p.add_argument("--eps", type=float, help="convergence tolerance")
    p.add_argument("--max-iters", type=int, help="outer iteration cap")
    p.add_argument("--report", action="store_true", help="write a json run summary next to the field")

    p = sub.add_parser("trace", help="integrate a time-optimal trajectory to csv")
    common(p)
    field_arg(p)
    start_args(p)

    p = sub.add_parser("slice", help="export field slices to csv")
    common(p)
    field_arg(p)
    p.add_argument("--theta", type=float, nargs="+",
                   help="slice heading(s) in radians; several headings stack into one csv plus a summary csv")
    p.add_argument("--lane-y", type=float, help="u along y = const at --theta")
    p.add_argument("--cloud", action="store_true", help="(x, y, theta, u) point cloud")
    p.add_argument("--level-min", type=float, help="cloud lower u bound")
    p.add_argument("--level-max", type=float, help="cloud upper u bound")

    p = sub.add_parser("render", help="svg drawing of the scene and a trajectory")
    common(p)
    field_arg(p)
    start_args(p)
    p.add_argument("--trajectory", help="trajectory csv from `trace`")
    p.add_argument("--theta", type=float, help="draw the u contour at this heading")

    p = sub.add_parser("oracle", help="compare the solver against the dijkstra oracle")
    common(p)
    field_arg(p)
    p.add_argument("--eps", type=float, help="convergence tolerance")
    p.add_argument("--max-iters", type=int, help="outer iteration cap")
    p.add_argument("--step-count", type=int, help="cells per oracle edge (odd)")

    return parser


def main(argv=None) -> int:
    from trajectory.tracer import TrajectoryError

    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    try:
        return COMMANDS[args.command](args)
    except (SceneLoadError, ConfigurationError) as e:
        logger.error(f"Scene error: {e}")
        return EXIT_SCENE
    except (FieldFormatError, FieldCompatibilityError) as e:
        logger.error(f"Field error: {e}")
        return EXIT_FIELD
    except TrajectoryError as e:
        logger.error(f"Trajectory failed: {e}")
        return EXIT_TRAJECTORY
    except FileNotFoundError as e:
        logger.error(str(e))
        return EXIT_SCENE if "Scene" in str(e) else EXIT_FIELD
    except ValueError as e:
        logger.error(str(e))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
