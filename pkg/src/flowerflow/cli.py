"""Command line entry point: ``flowerflow <group> <command> ...``.

Exit codes: 0 pass, 1 check failure, 2 usage or parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .ends import check_local_convexity
from .errors import DomainError, FlowerflowError, RegionExit, ScenarioError, SolverError
from .manifold import TangentVector, geodesic_shoot, make_manifold, minimizing_geodesic
from .nets import Cage, cage_to_flower, cage_to_json, is_geodesic_net, measure, net_from_json
from .scenario import CHECK_FAIL, NUMERIC_FAIL, PARSE_FAIL, PASS, STATUS_LABEL, format_table, load_scenario, run_batch, run_fill, run_scenario


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(PARSE_FAIL)


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2))


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _out_dir(args, scenario_path: str, name: str) -> Path:
    if args.out is not None:
        return Path(args.out)
    return Path.cwd() / "flowerflow_out" / name


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ScenarioError("$", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError("$", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


# -- commands --------------------------------------------------------------------------


def cmd_flow_run(args) -> int:
    sc = load_scenario(args.scenario)
    r = run_scenario(sc, _out_dir(args, args.scenario, sc.name))
    _emit(r.summary)
    return r.status


def cmd_flow_batch(args) -> int:
    d = Path(args.directory)
    if not d.is_dir():
        raise ScenarioError("directory", f"{d} is not a directory")
    out_root = Path(args.out) if args.out is not None else Path.cwd() / "flowerflow_out"
    rows = run_batch(d, args.jobs, out_root)
    print(format_table(rows))
    out_root.mkdir(parents=True, exist_ok=True)
    (out_root / "batch_report.json").write_text(json.dumps(rows, sort_keys=True, indent=2) + "\n")
    return PASS if all(r["status"] == STATUS_LABEL[PASS] for r in rows) else CHECK_FAIL


def cmd_net_check(args) -> int:
    m, net = net_from_json(_load_json(args.net))
    meas = measure(net)
    ok = is_geodesic_net(meas, args.tol_stat, args.tol_geo)
    out = meas.to_json()
    out["is_geodesic_net"] = ok
    out["tol_stat"] = args.tol_stat
    out["tol_geo"] = args.tol_geo
    _emit(out)
    return PASS if ok else CHECK_FAIL


def cmd_ends_check(args) -> int:
    sc = load_scenario(args.scenario)
    if sc.ends is None or not sc.ends.sigmas:
        raise ScenarioError("ends", "scenario has no separating curves")
    pairs = args.pairs if args.pairs is not None else sc.pairs
    reps = [check_local_convexity(sc.manifold, sc.ends, i, pairs, sc.seed, delta=args.delta) for i in range(len(sc.ends.sigmas))]
    ok = all(r.passed for r in reps)
    _emit({"name": sc.name, "seed": sc.seed, "passed": ok, "ends": [r.to_json() for r in reps]})
    return PASS if ok else CHECK_FAIL


def cmd_cage_retract(args) -> int:
    if not 0.0 <= args.t <= 1.0:
        raise ScenarioError("--t", "must lie in [0, 1]")
    m, cage = net_from_json(_load_json(args.cage), max_seg=args.max_seg)
    if not isinstance(cage, Cage):
        raise ScenarioError("cage", "file does not describe a cage")
    out = cage_to_flower(m, cage, args.t, args.max_seg)
    doc = cage_to_json(out)
    doc["t"] = args.t
    doc["edge_lengths"] = {f"{a}-{b}": out.edges[(a, b)].length for (a, b) in sorted(out.edges)}
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out is not None:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return PASS


def cmd_fill_disk(args) -> int:
    sc = load_scenario(args.scenario)
    r = run_fill(sc, _out_dir(args, args.scenario, sc.name))
    _emit(r.summary)
    return r.status


def cmd_manifold_geodesic(args) -> int:
    m = make_manifold(args.manifold)
    p = m.point(args.start, args.chart)
    if args.end is not None:
        q = m.point(args.end, args.chart)
        seg = minimizing_geodesic(m, p, q, args.samples)
        doc = {
            "start": list(seg.start.coords),
            "end": list(seg.end.coords),
            "length": seg.length,
            "initial_velocity": list(seg.initial_velocity.components),
            "samples": [list(s.coords) for s in seg.samples],
        }
    else:
        if args.velocity is None:
            raise ScenarioError("--velocity", "give --end or --velocity")
        q, w = geodesic_shoot(m, p, TangentVector(p, np.asarray(args.velocity)), args.t)
        doc = {"start": list(p.coords), "end": list(q.coords), "end_chart": q.chart_id, "t": args.t, "end_velocity": list(w.components)}
    doc["manifold"] = m.describe()
    _emit(doc)
    return PASS


# -- parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="flowerflow", description="Length-shortening flow of geodesic flowers on surfaces.")
    groups = ap.add_subparsers(dest="group", required=True, parser_class=_Parser)

    flow = groups.add_parser("flow", help="run flows from scenario files").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = flow.add_parser("run", help="run one scenario")
    p.add_argument("scenario")
    p.add_argument("--out", help="artifact directory (default ./flowerflow_out/<name>)")
    p.set_defaults(func=cmd_flow_run)
    p = flow.add_parser("batch", help="run every scenario in a directory")
    p.add_argument("directory")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="artifact root (default ./flowerflow_out)")
    p.set_defaults(func=cmd_flow_batch)

    net = groups.add_parser("net", help="inspect nets").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = net.add_parser("check", help="measure a net and test the geodesic-net conditions")
    p.add_argument("net")
    p.add_argument("--tol-stat", type=float, default=1e-6)
    p.add_argument("--tol-geo", type=float, default=1e-6)
    p.set_defaults(func=cmd_net_check)

    ends = groups.add_parser("ends", help="check ends").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = ends.add_parser("check", help="sampled local convexity test at each separating curve")
    p.add_argument("scenario")
    p.add_argument("--pairs", type=int)
    p.add_argument("--delta", type=float)
    p.set_defaults(func=cmd_ends_check)

    cage = groups.add_parser("cage", help="cage operations").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = cage.add_parser("retract", help="deform a cage towards a flower")
    p.add_argument("cage")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--max-seg", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cage_retract)

    fill = groups.add_parser("fill", help="disk fillings").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = fill.add_parser("disk", help="fill a closed curve by flowing it")
    p.add_argument("scenario")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fill_disk)

    man = groups.add_parser("manifold", help="geometric primitives").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = man.add_parser("geodesic", help="shoot a geodesic or solve the two-point problem")
    p.add_argument("--manifold", required=True, help="kind id, profile name or JSON descriptor")
    p.add_argument("--start", type=_floats, required=True)
    p.add_argument("--chart", type=int, default=0)
    p.add_argument("--end", type=_floats)
    p.add_argument("--velocity", type=_floats)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=16)
    p.set_defaults(func=cmd_manifold_geodesic)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PARSE_FAIL
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PARSE_FAIL
    except (SolverError, RegionExit, FlowerflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERIC_FAIL


if __name__ == "__main__":
    sys.exit(main())
