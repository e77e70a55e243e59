"""Command-line interface.

Subcommands: solve, pose, workspace, sweep, replay, serve, shadow.
Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible result
(tension solve infeasible, pose estimate not recoverable).

All numeric output is in SI units; --format structured emits JSON.
"""

import argparse
import json
import sys

import numpy as np

from . import quat
from .config import data_path, load_service_config
from .errors import (
    BindError,
    DegenerateString,
    EmptyMesh,
    NoConvergence,
    NumericalFailure,
    ParseError,
    RankDeficient,
    ScriptError,
    ShwError,
)
from .kinematics import estimate_pose
from .mesh import load_mesh, save_obj
from .rig import GripPose, build_structure_matrix, default_rig, load_rig
from .scene import load_scene, project_shadow
from .tension import solve_tensions
from .workspace import GridSpec, analyze_workspace, diameter_sweep, sweep_to_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INFEASIBLE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _floats(text, n, what):
    parts = text.replace(",", " ").split()
    if len(parts) != n:
        raise ValueError(f"{what}: expected {n} numbers, got {len(parts)}")
    return np.array([float(x) for x in parts])


def _load_rig_arg(args):
    if args.rig:
        return load_rig(args.rig)
    return default_rig()


def _pose_arg(text):
    v = _floats(text, 7, "pose")
    return GripPose(v[:3], v[3:])


def _cmd_solve(args):
    rig = _load_rig_arg(args)
    pose = _pose_arg(args.pose)
    w = _floats(args.wrench, 6, "wrench")
    S = build_structure_matrix(rig, pose)
    rep = solve_tensions(S, w, rig.tension_bounds)
    if args.format == "structured":
        print(json.dumps({
            "status": rep.status,
            "tensions_N": [float(t) for t in rep.tensions] if rep.feasible else None,
            "residual_N": rep.residual_norm if rep.feasible else None,
            "objective_N2": rep.objective if rep.feasible else None,
            "iterations": rep.iterations,
        }))
    else:
        print(f"status: {rep.status}  (iterations {rep.iterations})")
        if rep.feasible:
            print("tensions [N]: " + "  ".join(f"{t:.4f}" for t in rep.tensions))
            print(f"residual [N]: {rep.residual_norm:.3e}")
            print(f"objective [N^2]: {rep.objective:.6f}")
    return EXIT_OK if rep.feasible else EXIT_INFEASIBLE


def _cmd_pose(args):
    rig = _load_rig_arg(args)
    lengths = _floats(args.lengths, 8, "lengths")
    guess = _pose_arg(args.guess) if args.guess else GripPose.identity()
    try:
        est = estimate_pose(rig, lengths, guess)
    except (NoConvergence, RankDeficient) as e:
        print(f"pose estimation failed: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    p, q = est.pose.position, est.pose.orientation
    if args.format == "structured":
        print(json.dumps({
            "position_m": [float(x) for x in p],
            "quaternion_wxyz": [float(x) for x in q],
            "residual_rms_m": est.residual_rms,
            "iterations": est.iterations,
        }))
    else:
        print(f"position [m]: {p[0]:.6f} {p[1]:.6f} {p[2]:.6f}")
        print(f"quaternion [w x y z]: {q[0]:.6f} {q[1]:.6f} {q[2]:.6f} {q[3]:.6f}")
        print(f"residual rms [m]: {est.residual_rms:.3e}  (iterations {est.iterations})")
    return EXIT_OK


def _cmd_workspace(args):
    rig = _load_rig_arg(args)
    b = _floats(args.bounds, 6, "bounds")
    r = _floats(args.resolution, 3, "resolution")
    grid = GridSpec(bounds=((b[0], b[1]), (b[2], b[3]), (b[4], b[5])),
                    resolution=(int(r[0]), int(r[1]), int(r[2])))
    orientation = (_pose_arg(args.orientation).orientation
                   if args.orientation else None)
    report = analyze_workspace(rig, grid, orientation)
    report.to_csv(args.csv)
    if args.summary:
        report.save_summary(args.summary)
    s = report.summary()
    if args.format == "structured":
        print(json.dumps(s))
    else:
        print(f"cells: {s['cells']}  feasible fraction: {s['feasible_fraction']:.3f}")
        print(f"min force capability [N]: {s['min_force_capability']:.3f}")
        print(f"min torque capability [N*m]: {s['min_torque_capability']:.4f}")
        print(f"report written to {args.csv}")
    return EXIT_OK


def _cmd_sweep(args):
    rig = _load_rig_arg(args)
    diameters = sorted(float(x) for x in args.diameters.replace(",", " ").split())
    rows = diameter_sweep(rig, diameters)
    if args.csv:
        sweep_to_csv(rows, args.csv)
    if args.format == "structured":
        print(json.dumps(rows))
    else:
        print("diameter_m  condition_number  torque_capability_Nm")
        for r in rows:
            cond = r["condition_number"]
            cond_s = f"{cond:12.3f}" if np.isfinite(cond) else "         inf"
            print(f"{r['diameter_m']:10.3f}  {cond_s}      "
                  f"{r['torque_capability_Nm']:.6f}")
    return EXIT_OK


def _cmd_replay(args):
    from .hapticd import load_script, run_scenario
    from .hapticd.loop import LoopParams

    rig = _load_rig_arg(args)
    scene = load_scene(args.scene or data_path("scene_car.json"))
    script = load_script(args.script)
    params = LoopParams()
    result = run_scenario(script, scene, rig, params)
    if args.log:
        result.log.save(args.log)
    if args.jsonl:
        result.log.export_jsonl(args.jsonl)
    if args.metrics:
        with open(args.metrics, "w") as fh:
            json.dump(result.summary, fh, indent=2)
            fh.write("\n")
    if args.format == "structured":
        print(json.dumps(result.summary))
    else:
        s = result.summary
        print(f"ticks: {s['ticks']}  coverage: {s['coverage']:.4f}  "
              f"slip events: {s['slip_events']}")
        print(f"max wrench [N / N*m, inf-norm]: {s['max_wrench']:.4f}  "
              f"infeasible ticks: {s['infeasible_ticks']}")
        print(f"step time [ms]: median {s['median_step_ms']:.3f}  "
              f"p99 {s['p99_step_ms']:.3f}")
        print(f"log digest: {s['digest']}")
    return EXIT_OK


def _cmd_serve(args):
    from .hapticd.service import serve

    config = load_service_config(args.config or data_path("service_default.json"))
    if args.udp_port is not None:
        config.udp_port = args.udp_port
    if args.ws_port is not None:
        config.ws_port = args.ws_port
    if args.http_port is not None:
        config.http_port = args.http_port
    if args.http_root:
        config.http_root = args.http_root
    serve(config)      # prints the actual bound ports once up
    return EXIT_OK


def _cmd_shadow(args):
    mesh = load_mesh(args.mesh)
    light = _floats(args.light, 3, "light")
    light = light / np.linalg.norm(light)
    plane = _floats(args.plane, 4, "plane")
    normal = plane[:3] / np.linalg.norm(plane[:3])
    projected = project_shadow(mesh.vertices, light, normal, plane[3])
    save_obj((projected, mesh.triangles), args.out)
    print(f"projected {len(projected)} vertices onto plane, wrote {args.out}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="shwsim", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for any randomized analysis sampling")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def common(p):
        p.add_argument("--rig", help="rig config JSON (default: bundled rig)")
        p.add_argument("--format", choices=("table", "structured"),
                       default="table")

    p = sub.add_parser("solve", help="tension distribution for a wrench")
    common(p)
    p.add_argument("--pose", default="0 0 0 1 0 0 0",
                   help="grip pose: x y z qw qx qy qz")
    p.add_argument("--wrench", required=True, help="fx fy fz tx ty tz")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("pose", help="estimate pose from 8 string lengths")
    common(p)
    p.add_argument("--lengths", required=True, help="8 lengths in meters")
    p.add_argument("--guess", help="initial pose: x y z qw qx qy qz")
    p.set_defaults(func=_cmd_pose)

    p = sub.add_parser("workspace", help="grid workspace analysis")
    common(p)
    p.add_argument("--bounds", default="-0.3 0.3 -0.2 0.2 -0.2 0.2",
                   help="x0 x1 y0 y1 z0 z1")
    p.add_argument("--resolution", default="5 5 5", help="nx ny nz")
    p.add_argument("--orientation", help="fixed orientation as a pose string")
    p.add_argument("--csv", required=True, help="per-cell CSV output path")
    p.add_argument("--summary", help="JSON summary output path")
    p.set_defaults(func=_cmd_workspace)

    p = sub.add_parser("sweep", help="attachment-circle diameter sweep")
    common(p)
    p.add_argument("--diameters", default="0,0.05,0.1,0.2,0.3")
    p.add_argument("--csv", help="CSV output path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("replay", help="deterministic scenario replay")
    common(p)
    p.add_argument("--scene", help="scene config JSON (default: bundled car scene)")
    p.add_argument("--script", required=True, help="scenario script file")
    p.add_argument("--log", help="binary frame log output path")
    p.add_argument("--jsonl", help="lossless JSONL export path")
    p.add_argument("--metrics", help="summary JSON output path")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("serve", help="run the live service")
    p.add_argument("--config", help="service config JSON (default: bundled)")
    p.add_argument("--udp-port", type=int, dest="udp_port")
    p.add_argument("--ws-port", type=int, dest="ws_port")
    p.add_argument("--http-port", type=int, dest="http_port")
    p.add_argument("--http-root", dest="http_root",
                   help="static directory for the viewer")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("shadow", help="project a mesh onto a plane")
    p.add_argument("--mesh", required=True, help="input OBJ or binary STL")
    p.add_argument("--light", required=True, help="light direction lx ly lz")
    p.add_argument("--plane", required=True, help="plane nx ny nz offset")
    p.add_argument("--out", required=True, help="output OBJ path")
    p.set_defaults(func=_cmd_shadow)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else EXIT_OK
    try:
        return args.func(args)
    except FileNotFoundError as e:
        print(f"file not found: {e.filename or e}", file=sys.stderr)
        return EXIT_DATA
    except (ParseError, EmptyMesh, ScriptError, BindError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (DegenerateString, NumericalFailure) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ShwError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
