"""Scenario files: validation, execution and artifact writing.

A scenario names a manifold, an initial net (inline JSON or a generator),
an optional flow configuration and ends decomposition, the property suites
to check, expectations on the outcome, and the artifacts to write.  Without
``flow_config`` the scenario is check-only: the initial net is measured.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .ends import EndsDecomposition, check_local_convexity, ends_from_json
from .errors import DomainError, FlowAborted, FlowerflowError, PreconditionError, ScenarioError
from .fill import DiskFilling, NoFilling, escape_onset, fill_2cage
from .flow import FlowConfig, FlowOutcome, check_flow_properties, run_cage_flow, run_flow
from .manifold import Manifold, SurfaceOfRevolution, make_manifold
from .nets import (
    Cage,
    GeodesicNet,
    PiecewiseGeodesicFlower,
    equator_petal,
    flower_from_arrays,
    flower_from_petals,
    is_geodesic_net,
    measure,
    net_from_json,
    parallel_circle,
    round_loop,
    theta_net,
    torus_class_cage,
    triangle_cage,
)

PASS, CHECK_FAIL, PARSE_FAIL, NUMERIC_FAIL = 0, 1, 2, 3
STATUS_LABEL = {PASS: "PASS", CHECK_FAIL: "FAIL(check)", PARSE_FAIL: "FAIL(parse)", NUMERIC_FAIL: "FAIL(numerical)"}

KNOWN_KEYS = {"name", "seed", "manifold", "initial_net", "flow_config", "ends", "checks", "expect", "outputs", "tolerances"}
CHECKS = {"flow_properties", "local_convexity", "net_residual"}
OUTPUTS = {"summary", "json_trace", "csv_trace", "svg"}
DEFAULT_OUTPUTS = ("summary",)
DEFAULT_PAIRS = 2000
SEED_ENV = "FLOWERFLOW_SEED"


@dataclass
class Scenario:
    name: str
    seed: int
    manifold: Manifold
    initial_net: object
    config: FlowConfig | None
    ends: EndsDecomposition | None
    checks: tuple
    expect: dict
    outputs: tuple
    tolerances: dict = field(default_factory=dict)
    pairs: int = DEFAULT_PAIRS
    source: str = ""


# -- generators -------------------------------------------------------------------


def _height_for_radius(m: SurfaceOfRevolution, radius: float) -> float:
    grid = np.linspace(m.u_min, m.u_max, 2001)
    g = m.rho(grid) - radius
    idx = np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)
    if idx.size == 0:
        raise DomainError(f"no parallel of radius {radius} inside the working region")
    i = int(idx[0])
    return float(brentq(lambda u: float(m.rho(u)) - radius, grid[i], grid[i + 1], xtol=1e-14))


def _add_noise(m: Manifold, f: PiecewiseGeodesicFlower, scale: float, seed: int) -> PiecewiseGeodesicFlower:
    if scale <= 0:
        return f
    rng = np.random.default_rng(seed)
    pts = m.normalize(f.points + scale * rng.standard_normal(f.points.shape))
    noisy = flower_from_arrays(m, f.base, pts)
    # redistribute so no segment outgrows the spacing the flow expects
    return flower_from_petals(m, noisy.base, [noisy.petal(j) for j in range(noisy.petal_count)], f.points.shape[1])


def _need(params: dict, key: str, path: str):
    if key not in params:
        raise ScenarioError(f"{path}.{key}", "missing")
    return params[key]


def _gen_equator(m, p, N, seed, path):
    return equator_petal(m, N, float(p.get("perturbation", 0.0)))


def _gen_parallel(m, p, N, seed, path):
    if not isinstance(m, SurfaceOfRevolution):
        raise ScenarioError(path, "parallel_circle needs a surface of revolution")
    if "u" in p:
        u = float(p["u"])
    else:
        u = _height_for_radius(m, float(_need(p, "radius", path)))
    return parallel_circle(m, u, N, float(p.get("base_phi", 0.0)))


def _gen_loop(m, p, N, seed, path):
    return round_loop(m, _need(p, "center", path), float(_need(p, "radius", path)), N)


def _gen_theta(m, p, N, seed, path):
    return theta_net(m, int(p.get("segments", 8)))


def _gen_triangle(m, p, N, seed, path):
    verts = np.asarray(_need(p, "vertices", path), dtype=float)
    return triangle_cage(m, verts, p.get("max_seg"))


def _gen_torus_cage(m, p, N, seed, path):
    return torus_class_cage(m, float(p.get("wiggle", 0.04)), float(p.get("max_seg", 0.1)))


GENERATORS = {
    "equator_petal": _gen_equator,
    "parallel_circle": _gen_parallel,
    "round_loop": _gen_loop,
    "theta_net": _gen_theta,
    "triangle_cage": _gen_triangle,
    "torus_class_cage": _gen_torus_cage,
}


def build_net(m: Manifold, spec, N: int | None, seed: int, path: str = "initial_net"):
    if not isinstance(spec, dict):
        raise ScenarioError(path, "must be an object")
    if "generator" in spec:
        name = spec["generator"]
        if name not in GENERATORS:
            raise ScenarioError(f"{path}.generator", f"unknown generator {name!r}; known: {sorted(GENERATORS)}")
        params = spec.get("params", {})
        if not isinstance(params, dict):
            raise ScenarioError(f"{path}.params", "must be an object")
        n = int(params.get("N", N if N is not None else 32))
        try:
            net = GENERATORS[name](m, params, n, seed, f"{path}.params")
        except (DomainError, PreconditionError, ValueError, TypeError) as exc:
            raise ScenarioError(f"{path}.params", str(exc)) from None
        if isinstance(net, PiecewiseGeodesicFlower):
            net = _add_noise(m, net, float(params.get("noise", 0.0)), seed)
        return net
    _, net = net_from_json(spec, m, N)
    return net


# -- validation ---------------------------------------------------------------------


def _num(obj: dict, key: str, path: str, positive: bool = True) -> float:
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(f"{path}.{key}", "must be a finite number")
    if positive and v <= 0:
        raise ScenarioError(f"{path}.{key}", "must be positive")
    return float(v)


def _flow_config(m: Manifold, obj, path: str = "flow_config") -> FlowConfig:
    if not isinstance(obj, dict):
        raise ScenarioError(path, "must be an object")
    L = _num(obj, "L", path)
    delta = _num(obj, "delta", path)
    allowed = set(FlowConfig.__dataclass_fields__) - {"L", "delta"}
    over = {}
    for k, v in obj.items():
        if k in ("L", "delta"):
            continue
        if k not in allowed:
            raise ScenarioError(f"{path}.{k}", f"unknown field; allowed: {sorted(allowed)}")
        if k == "convex_balls":
            over[k] = tuple((tuple(map(float, b[0])), float(b[1])) for b in v)
        elif k in ("N", "max_steps", "stationary_window", "record_every"):
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ScenarioError(f"{path}.{k}", "must be a positive integer")
            over[k] = v
        else:
            over[k] = _num(obj, k, path)
    try:
        return FlowConfig.create(m, L, delta, **over)
    except DomainError as exc:
        raise ScenarioError(path, str(exc)) from None


def seed_override() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(SEED_ENV, f"must be an integer, got {raw!r}") from None


def parse_scenario(obj, source: str = "") -> Scenario:
    """Validate a scenario object; every error names the offending field."""
    if not isinstance(obj, dict):
        raise ScenarioError("$", "scenario must be a JSON object")
    for k in obj:
        if k not in KNOWN_KEYS:
            raise ScenarioError(k, f"unknown field; allowed: {sorted(KNOWN_KEYS)}")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise ScenarioError("name", "must be a non-empty string")
    seed = obj.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ScenarioError("seed", "must be an integer")
    env = seed_override()
    if env is not None:
        seed = env
    if "manifold" not in obj:
        raise ScenarioError("manifold", "missing")
    try:
        m = make_manifold(obj["manifold"])
    except (DomainError, ValueError, TypeError) as exc:
        raise ScenarioError("manifold", str(exc)) from None
    config = _flow_config(m, obj["flow_config"]) if "flow_config" in obj else None
    ends = None
    pairs = DEFAULT_PAIRS
    if "ends" in obj:
        ends = ends_from_json(m, obj["ends"])
        pairs = obj["ends"].get("pairs", DEFAULT_PAIRS)
        if not isinstance(pairs, int) or pairs < 1:
            raise ScenarioError("ends.pairs", "must be a positive integer")
    if "initial_net" not in obj:
        raise ScenarioError("initial_net", "missing")
    net = build_net(m, obj["initial_net"], None if config is None else config.N, seed)
    if config is not None and isinstance(net, GeodesicNet):
        raise ScenarioError("initial_net", "general nets cannot be flowed; give a flower or a cage, or drop flow_config")
    checks = obj.get("checks", [])
    if not isinstance(checks, list):
        raise ScenarioError("checks", "must be a list")
    for i, c in enumerate(checks):
        if c not in CHECKS:
            raise ScenarioError(f"checks[{i}]", f"unknown check {c!r}; known: {sorted(CHECKS)}")
        if c == "flow_properties" and config is None:
            raise ScenarioError(f"checks[{i}]", "flow_properties needs flow_config")
        if c == "local_convexity" and (ends is None or not ends.sigmas):
            raise ScenarioError(f"checks[{i}]", "local_convexity needs ends with at least one sigma")
    outputs = obj.get("outputs", list(DEFAULT_OUTPUTS))
    if not isinstance(outputs, list):
        raise ScenarioError("outputs", "must be a list")
    for i, o in enumerate(outputs):
        if o not in OUTPUTS:
            raise ScenarioError(f"outputs[{i}]", f"unknown output {o!r}; known: {sorted(OUTPUTS)}")
    expect = obj.get("expect", {})
    if not isinstance(expect, dict):
        raise ScenarioError("expect", "must be an object")
    tol = obj.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ScenarioError("tolerances", "must be an object")
    return Scenario(name, seed, m, net, config, ends, tuple(checks), expect, tuple(outputs), tol, pairs, source)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError("$", f"cannot read {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("$", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_scenario(obj, str(path))


# -- expectations -----------------------------------------------------------------------


def _expectations(sc: Scenario, summary: dict, outcome: FlowOutcome | None) -> dict:
    """Evaluate each key of ``expect``; returns name -> {passed, value, target}."""
    e = sc.expect
    res = {}
    out = summary.get("outcome", {})
    meas = summary.get("measurement", {})

    def put(name, ok, value, target):
        res[name] = {"passed": bool(ok), "value": value, "target": target}

    if "kind" in e:
        put("kind", out.get("kind") == e["kind"], out.get("kind"), e["kind"])
    if "end" in e:
        put("end", out.get("end") == e["end"], out.get("end"), e["end"])
    if "final_length" in e:
        tol = float(e.get("length_tol", 1e-3))
        v = out.get("final_length", meas.get("total_length"))
        put("final_length", v is not None and abs(v - e["final_length"]) <= tol, v, [e["final_length"], tol])
    if "total_length" in e:
        tol = float(e.get("length_tol", 1e-6))
        v = meas.get("total_length")
        put("total_length", v is not None and abs(v - e["total_length"]) <= tol, v, [e["total_length"], tol])
    if "max_residual" in e:
        v = meas.get("max_residual", out.get("max_residual"))
        put("max_residual", v is not None and v <= e["max_residual"], v, e["max_residual"])
    if "geodesic_deviation" in e:
        v = meas.get("geodesic_deviation")
        put("geodesic_deviation", v is not None and v <= e["geodesic_deviation"], v, e["geodesic_deviation"])
    if e.get("strictly_decreasing") and outcome is not None:
        lens = np.asarray(outcome.trace.lengths)
        bad = np.flatnonzero(np.diff(lens) >= 0)
        put("strictly_decreasing", bad.size == 0, None if bad.size == 0 else int(bad[0] + 1), True)
    if e.get("core_distance_exceeds_L") and outcome is not None and sc.ends is not None:
        d = float(np.min(sc.ends.core_distance_model(outcome.flower.all_points())))
        put("core_distance_exceeds_L", d > sc.config.L, d, sc.config.L)
    return res


# -- artifacts -----------------------------------------------------------------------------


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_traces(outcome: FlowOutcome, out_dir: Path, outputs) -> list:
    tr = outcome.trace
    rows = [
        {"step": k, "t": tr.times[k], "length": tr.lengths[k], "residual": tr.residuals[k], "dt": tr.dts[k], "displacement": tr.displacements[k]}
        for k in range(len(tr.times))
    ]
    written = []
    if "json_trace" in outputs:
        p = out_dir / "trace.jsonl"
        with p.open("w") as fh:
            for r in rows:
                fh.write(json.dumps(r, sort_keys=True) + "\n")
        written.append(p.name)
    if "csv_trace" in outputs:
        p = out_dir / "trace.csv"
        with p.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["step", "t", "length", "residual", "dt", "displacement"])
            w.writeheader()
            w.writerows(rows)
        written.append(p.name)
    return written


def _snapshot_polylines(m: Manifold, outcome: FlowOutcome, count: int = 8) -> list:
    from .nets import flower_from_arrays

    snaps = outcome.trace.snapshots
    pick = sorted(set(np.linspace(0, len(snaps) - 1, min(count, len(snaps))).round().astype(int)))
    lines = []
    for i in pick:
        _, _, base, pts = snaps[i]
        f = flower_from_arrays(m, base, pts)
        for j in range(f.petal_count):
            lines.append(_dense_closed(m, f.vertices(j)))
    return lines


def _dense_closed(m: Manifold, verts: np.ndarray, per: int = 6) -> np.ndarray:
    v, _, st, _ = m.log(verts[:-1], verts[1:])
    fr = (np.arange(per) / per)[None, :, None]
    x = np.repeat(verts[:-1, None, :], per, axis=1)
    y, _, _ = m.exp(x.reshape(-1, verts.shape[1]), (fr * v[:, None, :]).reshape(-1, verts.shape[1]))
    return np.concatenate([y, verts[-1:]])


def write_flow_svg(m: Manifold, outcome: FlowOutcome, path: Path, title: str) -> None:
    from .viz import write_svg

    write_svg(path, m, _snapshot_polylines(m, outcome), title=title, points=outcome.flower.base[None])


def write_net_svg(m: Manifold, net, path: Path, title: str) -> None:
    from .nets import dense_samples
    from .viz import write_svg

    if isinstance(net, PiecewiseGeodesicFlower):
        polys = [_dense_closed(m, net.vertices(j)) for j in range(net.petal_count)]
    else:
        polys = [dense_samples(m, bg, 6) for _, _, _, bg in net.edge_items()]
    write_svg(path, m, polys, title=title, points=net.vertices if not isinstance(net, PiecewiseGeodesicFlower) else net.base[None])


def write_filling_svg(m: Manifold, filling: DiskFilling, path: Path, title: str, count: int = 12) -> None:
    from .viz import write_svg

    sheets = filling.sheets
    pick = sorted(set(np.linspace(0, len(sheets) - 1, min(count, len(sheets))).round().astype(int)))
    polys = [_dense_closed(m, sheets[i][1]) for i in pick]
    apex = m.point_to_model(filling.apex)[None] if filling.apex_is_point else None
    write_svg(path, m, polys, title=title, points=apex)


# -- running ------------------------------------------------------------------------------


@dataclass
class RunResult:
    status: int
    summary: dict
    wall: float = 0.0

    @property
    def label(self) -> str:
        return STATUS_LABEL[self.status]


def _measure_json(net) -> dict:
    meas = measure(net)
    d = meas.to_json()
    d.pop("balancing_residuals", None)
    return d


def run_scenario(sc: Scenario, out_dir: Path | None = None) -> RunResult:
    """Execute a validated scenario and write its artifacts into ``out_dir``."""
    t0 = time.perf_counter()
    m = sc.manifold
    summary: dict = {"name": sc.name, "seed": sc.seed, "manifold": m.describe(), "mode": "flow" if sc.config else "check"}
    checks: dict = {}
    status = PASS
    outcome = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if sc.config is None:
            summary["measurement"] = _measure_json(sc.initial_net)
            if isinstance(sc.initial_net, PiecewiseGeodesicFlower):
                summary["measurement"]["kind"] = "flower"
        else:
            summary["config"] = sc.config.to_json()
            try:
                if isinstance(sc.initial_net, Cage):
                    outcome = run_cage_flow(m, sc.initial_net, sc.config, sc.ends)
                else:
                    outcome = run_flow(m, sc.initial_net, sc.config, sc.ends)
            except FlowAborted as exc:
                outcome = exc.outcome
                summary["error"] = str(exc)
                status = NUMERIC_FAIL
            if outcome is not None:
                summary["outcome"] = outcome.summary()
                if outcome.measurement is not None:
                    summary["measurement"] = dict(summary["outcome"]["measurement"])
        if status == PASS:
            for c in sc.checks:
                if c == "flow_properties":
                    rep = check_flow_properties(outcome, m, sc.ends)
                    checks[c] = {"passed": rep.passed, "results": rep.to_json()}
                elif c == "local_convexity":
                    reps = [check_local_convexity(m, sc.ends, i, sc.pairs, sc.seed) for i in range(len(sc.ends.sigmas))]
                    checks[c] = {"passed": all(r.passed for r in reps), "ends": [r.to_json() for r in reps]}
                elif c == "net_residual":
                    net = sc.initial_net if outcome is None else outcome.flower
                    meas = measure(net)
                    ok = is_geodesic_net(meas, float(sc.tolerances.get("tol_stat", 1e-6)), float(sc.tolerances.get("tol_geo", 1e-6)))
                    checks[c] = {"passed": ok, "max_residual": meas.max_residual, "geodesic_deviation": meas.geodesic_deviation}
    except FlowerflowError as exc:
        summary["error"] = str(exc)
        status = NUMERIC_FAIL
    wall = time.perf_counter() - t0
    summary["checks"] = checks
    exp = _expectations(sc, summary, outcome)
    summary["expectations"] = exp
    wanted = sc.expect.get("checks", {})
    checks_ok = all(v["passed"] == bool(wanted.get(k, True)) for k, v in checks.items())
    if status == PASS and (not checks_ok or not all(v["passed"] for v in exp.values())):
        status = CHECK_FAIL
    summary["status"] = STATUS_LABEL[status]
    if out_dir is not None:
        written = []
        if outcome is not None:
            # an aborted flow always leaves its partial trace behind
            outs = set(sc.outputs) | ({"json_trace"} if status == NUMERIC_FAIL else set())
            written += write_traces(outcome, out_dir, outs)
            if "svg" in sc.outputs:
                write_flow_svg(m, outcome, out_dir / "flow.svg", sc.name)
                written.append("flow.svg")
        elif "svg" in sc.outputs:
            write_net_svg(m, sc.initial_net, out_dir / "net.svg", sc.name)
            written.append("net.svg")
        if "summary" in sc.outputs:
            written.append("summary.json")
        summary["artifacts"] = sorted(written)
        if "summary" in sc.outputs:
            (out_dir / "summary.json").write_text(_dump(summary))
    return RunResult(status, summary, wall)


def run_fill(sc: Scenario, out_dir: Path | None = None) -> RunResult:
    """Fill the scenario's initial closed curve (loop or 2-cage)."""
    if sc.config is None:
        raise ScenarioError("flow_config", "fill needs a flow configuration")
    t0 = time.perf_counter()
    m = sc.manifold
    summary: dict = {"name": sc.name, "seed": sc.seed, "manifold": m.describe(), "mode": "fill"}
    status = PASS
    filling = None
    try:
        filling = fill_2cage(m, sc.initial_net, sc.config, sc.ends)
        lens = filling.sheet_lengths()
        summary["sheets"] = len(filling.sheets)
        summary["monotone_sheet_lengths"] = bool(np.all(np.diff(lens) <= 1e-9 * max(1.0, lens[0])))
        summary["boundary_length"] = float(lens[0])
        if filling.apex_is_point:
            summary["apex"] = {"point": list(filling.apex.coords)}
        else:
            s0, eid = escape_onset(filling, sc.ends)
            summary["apex"] = {"end": filling.apex}
            summary["escape_onset"] = s0
            summary["escape_onset_end"] = eid
        if filling.outcome is not None:
            summary["outcome"] = filling.outcome.summary()
    except NoFilling as exc:
        summary["error"] = str(exc)
        summary["outcome"] = exc.outcome.summary()
        status = CHECK_FAIL
    except FlowerflowError as exc:
        summary["error"] = str(exc)
        status = NUMERIC_FAIL
    wall = time.perf_counter() - t0
    if status == PASS and not summary["monotone_sheet_lengths"]:
        status = CHECK_FAIL
    summary["status"] = STATUS_LABEL[status]
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        if filling is not None:
            (out_dir / "filling.json").write_text(_dump(filling.to_json()))
            if "svg" in sc.outputs:
                write_filling_svg(m, filling, out_dir / "filling.svg", sc.name)
        (out_dir / "fill_summary.json").write_text(_dump(summary))
    return RunResult(status, summary, wall)


# -- batch -----------------------------------------------------------------------------------


def _batch_one(args):
    path, out_root = args
    t0 = time.perf_counter()
    try:
        sc = load_scenario(path)
    except ScenarioError as exc:
        return {"file": Path(path).name, "name": Path(path).stem, "status": STATUS_LABEL[PARSE_FAIL], "outcome": None, "final_length": None, "wall_time": time.perf_counter() - t0, "error": str(exc)}
    r = run_scenario(sc, Path(out_root) / sc.name if out_root is not None else None)
    out = r.summary.get("outcome", {})
    return {
        "file": Path(path).name,
        "name": sc.name,
        "status": r.label,
        "outcome": out.get("label", "measured" if sc.config is None else None),
        "final_length": out.get("final_length", r.summary.get("measurement", {}).get("total_length")),
        "wall_time": r.wall,
        "error": r.summary.get("error"),
    }


def run_batch(directory, jobs: int = 1, out_root=None) -> list:
    """Run every *.json scenario in ``directory``; rows come back in file-name order."""
    files = sorted(Path(directory).glob("*.json"))
    tasks = [(str(f), None if out_root is None else str(out_root)) for f in files]
    if jobs <= 1 or len(tasks) <= 1:
        rows = [_batch_one(t) for t in tasks]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_batch_one, tasks))
    seen: dict = {}
    for r in rows:
        if r["status"] != STATUS_LABEL[PARSE_FAIL] and r["name"] in seen:
            r["status"] = STATUS_LABEL[PARSE_FAIL]
            r["error"] = f"name: duplicate scenario name {r['name']!r} (also in {seen[r['name']]})"
        seen.setdefault(r["name"], r["file"])
    return rows


def format_table(rows) -> str:
    head = ("name", "status", "outcome", "final_length", "wall_time")
    lines = [" | ".join(head)]
    for r in rows:
        fl = "-" if r["final_length"] is None else f"{r['final_length']:.9g}"
        lines.append(" | ".join([r["name"], r["status"], str(r["outcome"] or "-"), fl, f"{r['wall_time']:.2f}s"]))
    return "\n".join(lines)
