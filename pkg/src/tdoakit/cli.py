"""Command-line front door: locate, dop-map, simulate, track, eval, serve.

Exit codes: 0 success, 2 input error, 3 degenerate geometry, 4
non-convergence under --strict. All numbers are printed with 9 significant
digits so identical inputs and seeds diff byte-identically.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .errors import DegenerateGeometryError, NearAnchorError, SingularSystemError
from .evaluation import (
    ScenarioReport,
    StaticScenario,
    TrackScenario,
    builtin_scenarios,
    run_static_pair,
    run_static_scenario,
    run_track_scenario,
    scenario_from_dict,
)
from .gauss_newton import GaussNewtonConfig, locate_gauss_newton
from .geometry import SPEED_OF_LIGHT, AnchorSet, Point, TdoaVector, pair_count, pair_row
from .dop import GridSpec, dop_map
from .linear import locate_linear

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_NO_CONVERGENCE = 4


class CliInputError(Exception):
    pass


def _round9(x: float) -> float:
    if x is None or isinstance(x, bool):
        return x
    if not math.isfinite(x):
        return x
    return float("%.9g" % x)


def _json_ready(obj):
    """Round all floats to 9 significant digits for reproducible output."""
    if isinstance(obj, float):
        return _round9(obj)
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_json_ready(obj), indent=2) + "\n"


def load_anchors(path: str) -> AnchorSet:
    if not os.path.exists(path):
        raise CliInputError(f"anchors file not found: {path}")
    try:
        with open(path) as fh:
            data = json.load(fh)
        entries = data["anchors"] if isinstance(data, dict) else data
        return AnchorSet(
            [(a["x"], a["y"]) for a in entries],
            labels=[str(a.get("label", i)) for i, a in enumerate(entries)],
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise CliInputError(f"cannot parse anchors file {path}: {e}") from e


def load_tdoa(path: str, n_anchors: int) -> TdoaVector:
    """Read a measurement CSV; the header picks the interpretation.

    ``pair_i,pair_j,d_ij_m`` rows carry pre-differenced pair values in
    metres; ``anchor,timestamp_s`` rows carry per-anchor receive times that
    are differenced here. Indices are 0-based.
    """
    if not os.path.exists(path):
        raise CliInputError(f"tdoa file not found: {path}")
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise CliInputError(f"tdoa file {path} is empty")
    header = [h.strip() for h in lines[0].split(",")]
    try:
        if header == ["pair_i", "pair_j", "d_ij_m"]:
            values = np.full(pair_count(n_anchors), np.nan)
            for ln in lines[1:]:
                si, sj, sv = ln.split(",")
                i, j, v = int(si), int(sj), float(sv)
                if i < j:
                    values[pair_row(n_anchors, i, j)] = v
                else:
                    values[pair_row(n_anchors, j, i)] = -v
            if np.isnan(values).any():
                raise CliInputError(f"tdoa file {path} does not cover all anchor pairs")
            return TdoaVector(values, n_anchors)
        if header == ["anchor", "timestamp_s"]:
            ts = np.full(n_anchors, np.nan)
            for ln in lines[1:]:
                si, sv = ln.split(",")
                ts[int(si)] = float(sv)
            if np.isnan(ts).any():
                raise CliInputError(f"tdoa file {path} misses timestamps for some anchors")
            from .measurement import ToaSample, toa_to_tdoa

            return toa_to_tdoa(ToaSample(ts, np.zeros(n_anchors)))
        raise CliInputError(
            f"unrecognized tdoa header {lines[0]!r}; expected "
            "'pair_i,pair_j,d_ij_m' or 'anchor,timestamp_s'"
        )
    except CliInputError:
        raise
    except (ValueError, IndexError) as e:
        raise CliInputError(f"cannot parse tdoa file {path}: {e}") from e


def _parse_estimator_arg(s: str):
    if s == "linear-symmetric":
        return ("linear", "symmetric", None)
    if s.startswith("linear-central:"):
        try:
            return ("linear", "central", int(s.split(":", 1)[1]))
        except ValueError as e:
            raise CliInputError(f"bad central index in estimator {s!r}") from e
    if s == "gauss-newton":
        return ("gauss-newton", "", None)
    raise CliInputError(f"unknown estimator {s!r}")


def cmd_locate(args) -> int:
    anchors = load_anchors(args.anchors)
    dhat = load_tdoa(args.tdoa, anchors.n)
    family, mode, central = _parse_estimator_arg(args.estimator)
    if family == "linear" and anchors.n < 4:
        print(f"error: {args.estimator} requires >= 4 anchors, got {anchors.n}",
              file=sys.stderr)
        return EXIT_DEGENERATE
    try:
        if family == "linear":
            fix = locate_linear(anchors, dhat, mode=mode, central=central)
            out = {
                "x": fix.point.x,
                "y": fix.point.y,
                "estimator": args.estimator,
                "diagnostics": {
                    "sigma_min": fix.sigma_min,
                    "sigma_max": fix.sigma_max,
                    "cond": fix.cond,
                },
            }
        else:
            init = None
            if args.init:
                try:
                    ix, iy = (float(v) for v in args.init.split(","))
                except ValueError as e:
                    raise CliInputError(f"bad --init {args.init!r}; expected X,Y") from e
                init = Point(ix, iy)
            cfg = GaussNewtonConfig(initial_guess=init, tolerance=args.tol)
            report = locate_gauss_newton(anchors, dhat, cfg)
            if args.strict and not report.converged:
                print("error: solver did not converge", file=sys.stderr)
                return EXIT_NO_CONVERGENCE
            out = {
                "x": report.estimate.x,
                "y": report.estimate.y,
                "estimator": args.estimator,
                "diagnostics": {
                    "iterations": report.iterations,
                    "converged": report.converged,
                    "final_step_norm": report.final_step_norm,
                    "final_residual_norm": report.final_residual_norm,
                    "jacobian_sigma_min": report.jacobian_sigma_min,
                },
            }
    except (SingularSystemError, DegenerateGeometryError, NearAnchorError) as e:
        print(f"error: degenerate geometry: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    sys.stdout.write(_dump_json(out))
    return EXIT_OK


def _parse_bounds(s: str) -> tuple[float, float, float, float]:
    try:
        vals = [float(v) for v in s.split(",")]
        if len(vals) != 4:
            raise ValueError("need 4 values")
        return vals[0], vals[1], vals[2], vals[3]
    except ValueError as e:
        raise CliInputError(f"bad --bounds {s!r}; expected XMIN,XMAX,YMIN,YMAX") from e


def _parse_res(s: str) -> tuple[int, int]:
    try:
        vals = [int(v) for v in s.split(",")]
        if len(vals) == 1:
            return vals[0], vals[0]
        if len(vals) != 2:
            raise ValueError("need 1 or 2 values")
        return vals[0], vals[1]
    except ValueError as e:
        raise CliInputError(f"bad --res {s!r}; expected NX,NY") from e


def cmd_dop_map(args) -> int:
    anchors = load_anchors(args.anchors)
    x_min, x_max, y_min, y_max = _parse_bounds(args.bounds)
    nx, ny = _parse_res(args.res)
    try:
        grid_spec = GridSpec(x_min, x_max, y_min, y_max, nx, ny)
        grid = dop_map(
            anchors,
            grid_spec,
            kind=args.kind,
            central=args.central,
            symmetric=args.symmetric,
        )
    except ValueError as e:
        raise CliInputError(str(e)) from e
    fmt = args.format
    if fmt == "auto":
        fmt = "json" if args.out.endswith(".json") else "csv"
    payload = grid.to_json() + "\n" if fmt == "json" else grid.to_csv()
    with open(args.out, "w") as fh:
        fh.write(payload)
    print(f"wrote {args.out} ({grid.nx}x{grid.ny} {grid.kind})")
    return EXIT_OK


def _load_scenario(name_or_path: str):
    registry = builtin_scenarios()
    if name_or_path in registry:
        return registry[name_or_path]
    if not os.path.exists(name_or_path):
        raise CliInputError(
            f"scenario {name_or_path!r} is neither a builtin name nor a file; "
            f"builtins: {', '.join(sorted(registry))}"
        )
    try:
        with open(name_or_path) as fh:
            return scenario_from_dict(json.load(fh))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise CliInputError(f"cannot parse scenario file {name_or_path}: {e}") from e


def _write_report(report: ScenarioReport, out: str | None, as_json: bool) -> None:
    summary = {
        "rmse": report.rmse,
        "samples": len(report.errors),
        "failures": report.failures,
        "nonconverged": report.nonconverged,
        "seed": report.seed,
        "config": report.config,
    }
    if out:
        with open(out, "w") as fh:
            fh.write(_dump_json(report.to_json_dict()))
        csv_path = os.path.splitext(out)[0] + ".csv"
        with open(csv_path, "w") as fh:
            fh.write(report.to_csv())
        print(f"wrote {out} and {csv_path}")
    if as_json or not out:
        sys.stdout.write(_dump_json(summary))


def cmd_simulate(args) -> int:
    scenario = _load_scenario(args.scenario)
    try:
        if isinstance(scenario, StaticScenario):
            report = run_static_scenario(scenario, args.seed)
        else:
            report = run_track_scenario(scenario, args.seed)
    except (SingularSystemError, DegenerateGeometryError, NearAnchorError) as e:
        print(f"error: degenerate geometry: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    _write_report(report, args.out, args.json)
    return EXIT_OK


def cmd_track(args) -> int:
    scenario = _load_scenario(args.scenario)
    if not isinstance(scenario, TrackScenario):
        raise CliInputError(f"scenario {args.scenario!r} is not a track scenario")
    report = run_track_scenario(scenario, args.seed)
    if args.out:
        traj = report.trajectory
        with open(args.out, "w") as fh:
            fh.write(traj.to_csv())
        print(f"wrote {args.out}")
    summary = {
        "rmse": report.rmse,
        "fixes": len(report.errors),
        "failures": report.failures,
        "seed": report.seed,
    }
    if args.json or not args.out:
        sys.stdout.write(_dump_json(summary))
    return EXIT_OK


def cmd_eval(args) -> int:
    """Paired comparison over the built-in site: deployment x estimator."""
    registry = builtin_scenarios()
    seed = args.seed
    rows = []
    for est in ("linear", "nonlinear"):
        a = registry[f"table4-triangular-{est}"]
        b = registry[f"table4-rectangular-{est}"]
        ra, rb = run_static_pair(a, b, seed)
        rows.append(("static", est, "triangular", ra.rmse))
        rows.append(("static", est, "rectangular", rb.rmse))
    for est in ("linear", "nonlinear"):
        for dep in ("triangular", "rectangular"):
            r = run_track_scenario(registry[f"table5-{dep}-{est}"], seed)
            rows.append(("track", est, dep, r.rmse))
    if args.json:
        sys.stdout.write(
            _dump_json(
                [
                    {"kind": k, "estimator": e, "deployment": d, "rmse": r}
                    for k, e, d, r in rows
                ]
            )
        )
    else:
        print(f"{'kind':8} {'estimator':10} {'deployment':12} rmse_m")
        for k, e, d, r in rows:
            print(f"{k:8} {e:10} {d:12} {'%.9g' % r}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    bind = args.bind or os.environ.get("TDOA_BIND", "127.0.0.1:8787")
    host, _, port = bind.rpartition(":")
    uvicorn.run(create_app(), host=host or "127.0.0.1", port=int(port))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tdoakit",
        description="TDoA localization toolkit: estimators, DoP maps, tracking, evaluation.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("locate", help="single-shot position fix from a measurement file")
    q.add_argument("--anchors", required=True, help="anchors JSON file")
    q.add_argument("--tdoa", required=True, help="measurement CSV (pairs or timestamps)")
    q.add_argument(
        "--estimator",
        default="gauss-newton",
        help="linear-central:<i> | linear-symmetric | gauss-newton",
    )
    q.add_argument("--init", default=None, help="initial guess X,Y (iterative only)")
    q.add_argument("--tol", type=float, default=1e-9, help="step-norm stop tolerance")
    q.add_argument("--strict", action="store_true", help="exit 4 on non-convergence")
    q.add_argument("--json", action="store_true", help="(output is always JSON)")
    q.set_defaults(func=cmd_locate)

    q = sub.add_parser("dop-map", help="DoP heatmap over a grid of candidate positions")
    q.add_argument("--anchors", required=True)
    q.add_argument("--kind", choices=["linear-cond", "nonlinear-kappa"], required=True)
    q.add_argument("--central", type=int, default=None, help="central anchor index")
    q.add_argument("--symmetric", action="store_true", help="triple construction")
    q.add_argument("--bounds", required=True, help="XMIN,XMAX,YMIN,YMAX")
    q.add_argument("--res", default="200,200", help="NX,NY cells")
    q.add_argument("--out", required=True)
    q.add_argument("--format", choices=["auto", "csv", "json"], default="auto")
    q.set_defaults(func=cmd_dop_map)

    q = sub.add_parser("simulate", help="run a static or track scenario")
    q.add_argument("--scenario", required=True, help="builtin name or JSON file")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", default=None, help="report JSON path (CSV written alongside)")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("track", help="run a track scenario and emit the trajectory CSV")
    q.add_argument("--scenario", required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", default=None, help="trajectory CSV path")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_track)

    q = sub.add_parser("eval", help="paired deployment comparison on the builtin site")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_eval)

    q = sub.add_parser("serve", help="start the HTTP service")
    q.add_argument("--bind", default=None, help="HOST:PORT (default TDOA_BIND or 127.0.0.1:8787)")
    q.set_defaults(func=cmd_serve)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad flags, which matches the input-error code
        return int(e.code) if e.code else EXIT_OK
    try:
        return args.func(args)
    except CliInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (SingularSystemError, DegenerateGeometryError, NearAnchorError) as e:
        print(f"error: degenerate geometry: {e}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
