"""Weak curve-shortening flow on piecewise-geodesic flowers.

One step moves every vertex along the geodesic in the direction of its
field vector, then Birkhoff-rebalances each petal.  The field at a vertex is
the sum of unit tangents of its incident segments (directed away from it);
petals that fit in a small ball around the base are instead dragged along
by the base and pulled toward it, blended in by a smooth weight of the
petal's extent.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .ends import EndsDecomposition
from .errors import DomainError, FlowAborted, FlowerflowError, PreconditionError, RebalanceError
from .manifold import Manifold, Point, TangentVector
from .nets import (
    Cage,
    NetMeasurement,
    PiecewiseGeodesicFlower,
    flower_from_arrays,
    flower_from_petals,
    flower_tangent_sums,
    length,
    measure,
    rebalance_points,
    retracted_flower,
    seg_eps,
    solve_segments,
)


@dataclass(frozen=True)
class FlowConfig:
    L: float
    delta: float
    I: float
    N: int
    dt: float
    a: float
    escape_radius: float
    tol_stat: float = 1e-6
    tol_geo: float = 1e-6
    max_steps: int = 200_000
    stationary_window: int = 50
    contraction_fraction: float = 0.01
    cfl: float = 0.25
    monotone_slack: float = 1e-8
    record_every: int = 1
    convex_balls: tuple = ()

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("N must be at least 1")
        if not 0 < self.a < self.I:
            raise DomainError("need 0 < a < I")
        if self.dt <= 0 or self.I <= 0 or self.delta <= 0:
            raise DomainError("dt, I and delta must be positive")

    @classmethod
    def create(cls, m: Manifold, L: float, delta: float, **overrides) -> "FlowConfig":
        """Derive I, N, dt, a and the escape radius from L, delta and the manifold."""
        i1 = m.injectivity_floor
        I = min(delta / 2.0, i1 / 4.0)
        base = dict(
            L=float(L),
            delta=float(delta),
            I=I,
            N=max(1, int(math.floor(L / I))),
            dt=I / (10.0 * m.dimension),
            a=I / 4.0,
            escape_radius=float(L),
        )
        base.update(overrides)
        return cls(**base)

    def with_budget(self, m: Manifold, L: float) -> "FlowConfig":
        """Same config with a larger length budget (and the N it implies)."""
        if L <= self.L:
            return self
        return FlowConfig(**{**asdict(self), "L": float(L), "N": max(1, int(math.floor(L / self.I)))})

    def to_json(self) -> dict:
        d = asdict(self)
        d["convex_balls"] = [list(map(list, b)) if isinstance(b[0], (list, tuple)) else list(b) for b in self.convex_balls]
        return d


# -- vector field ---------------------------------------------------------------


def smoothstep_weight(e: np.ndarray, a: float) -> np.ndarray:
    """1 for e <= a/2, 0 for e >= a, C^1 monotone in between."""
    z = np.clip((a - np.asarray(e, dtype=float)) / (0.5 * a), 0.0, 1.0)
    return z * z * (3.0 - 2.0 * z)


class FieldData(NamedTuple):
    v_base: np.ndarray  # (d,)
    v_points: np.ndarray  # (P, N, d)
    generic_base: np.ndarray  # (d,) all petals counted
    generic_points: np.ndarray  # (P, N, d)
    weights: np.ndarray  # (P,)
    extents: np.ndarray  # (P,) lower bounds where no exact value was needed
    residual: float  # max generic residual over all vertices
    speed: float  # max field norm over all vertices

    @property
    def blending(self) -> bool:
        return bool(np.any(self.weights > 0))


def _check_rebalanced(f: PiecewiseGeodesicFlower, cfg: FlowConfig):
    if np.any(f.lengths > cfg.I * (1 + 1e-9)):
        raise PreconditionError(f"segment of length {float(f.lengths.max()):.6g} exceeds I={cfg.I:.6g}; rebalance first")


def petal_extents(f: PiecewiseGeodesicFlower, cutoff: float):
    """Max distance of each petal's points from the base.

    Exact (with the base-to-point geodesics) for petals that might be
    shorter than ``cutoff``; for the rest a lower bound >= cutoff.
    """
    m = f.manifold
    P, N, d = f.points.shape
    lb = m.distance_lower_bound(f.base, f.points).max(axis=1)
    ext = lb.copy()
    need = np.flatnonzero(lb < cutoff)
    logs = {}
    if need.size:
        pts = f.points[need]
        base = np.broadcast_to(f.base, pts.shape)
        vs, ve, ln = solve_segments(m, base, pts)
        ext[need] = ln.max(axis=1)
        for n_i, j in enumerate(need):
            logs[int(j)] = (vs[n_i], ve[n_i], ln[n_i])
    return ext, logs


def field_data(f: PiecewiseGeodesicFlower, cfg: FlowConfig) -> FieldData:
    m = f.manifold
    P, N, d = f.points.shape
    at_base, interior = flower_tangent_sums(f)
    ext, logs = petal_extents(f, cfg.a)
    w = smoothstep_weight(ext, cfg.a)
    generic_base = np.sum(at_base, axis=0)
    v_base = np.sum((1.0 - w)[:, None] * at_base, axis=0)
    v_points = interior.copy()
    eps = seg_eps(m)
    for j in np.flatnonzero(w > 0):
        vs, ve, ln = logs[int(j)]
        ok = (ln > eps)[:, None]
        toward = np.where(ok, -ve / np.where(ln > eps, ln, 1.0)[:, None], 0.0)
        base_rep = np.broadcast_to(f.base, vs.shape)
        carried, st = m.transport(base_rep, vs, np.broadcast_to(v_base, vs.shape))
        if np.any(st != 0):
            raise FlowerflowError("transport of the base field left the working region")
        v_points[j] = (1.0 - w[j]) * interior[j] + w[j] * (carried + toward)
    v_points = m.project_tangent(f.points, v_points)
    v_base = m.project_tangent(f.base, v_base)
    # one metric evaluation for all four norms
    xs = np.concatenate([f.base[None], f.base[None], f.points.reshape(-1, d), f.points.reshape(-1, d)])
    vs_all = np.concatenate([generic_base[None], v_base[None], interior.reshape(-1, d), v_points.reshape(-1, d)])
    nrm = m.norm(xs, vs_all)
    n_in = P * N
    residual = max(float(nrm[0]), float(nrm[2 : 2 + n_in].max()) if n_in else 0.0)
    speed = max(float(nrm[1]), float(nrm[2 + n_in :].max()) if n_in else 0.0)
    return FieldData(v_base, v_points, generic_base, interior, w, ext, residual, speed)


def vector_field(m: Manifold, flower: PiecewiseGeodesicFlower, config: FlowConfig) -> dict:
    """Field vectors keyed "base" and (petal, k)."""
    _check_rebalanced(flower, config)
    fd = field_data(flower, config)
    out = {"base": m.tangent_from_model(flower.base, fd.v_base)}
    for j in range(flower.petal_count):
        for k in range(flower.N):
            out[(j, k)] = m.tangent_from_model(flower.points[j, k], fd.v_points[j, k])
    return out


class FirstVariation(NamedTuple):
    value: float
    generic: bool


def first_variation(m: Manifold, flower: PiecewiseGeodesicFlower, config: FlowConfig) -> FirstVariation:
    """-sum |V(p)|^2 over all vertices; ``generic`` is False when blending is active."""
    fd = field_data(flower, config)
    total = float(m.norm(flower.base, fd.v_base) ** 2 + np.sum(m.norm(flower.points, fd.v_points) ** 2))
    return FirstVariation(-total, not fd.blending)


# -- stepping ------------------------------------------------------------------------


def displace(f: PiecewiseGeodesicFlower, v_base, v_points, dt: float) -> PiecewiseGeodesicFlower:
    """Move each vertex along its geodesic for time dt (no rebalancing)."""
    m = f.manifold
    P, N, d = f.points.shape
    x = np.concatenate([f.base[None], f.points.reshape(-1, d)])
    v = np.concatenate([np.asarray(v_base)[None], np.asarray(v_points).reshape(-1, d)])
    y, _, st = m.exp(x, dt * v)
    if np.any(st != 0):
        bad = int(np.flatnonzero(st != 0)[0])
        raise RebalanceError("a vertex left the working region", petal=None if bad == 0 else (bad - 1) // N)
    return flower_from_arrays(m, y[0], y[1:].reshape(P, N, d), guess=f.v_start)


def rebalance(f: PiecewiseGeodesicFlower) -> PiecewiseGeodesicFlower:
    """Birkhoff deformation of every petal at once."""
    m = f.manifold
    P, N, d = f.points.shape
    chains = np.stack([f.vertices(j) for j in range(P)])
    new = rebalance_points(m, chains, f.v_start, f.lengths, N)
    try:
        out = flower_from_arrays(m, f.base, new, guess=f.v_start)
    except FlowerflowError as exc:
        raise RebalanceError(str(exc)) from None
    limit = 0.5 * m.injectivity_floor
    if np.any(out.lengths >= limit):
        j = int(np.argmax(out.lengths.max(axis=1)))
        raise RebalanceError(f"segment length {float(out.lengths.max()):.6g} reached {limit:.6g}", petal=j)
    return out


def effective_dt(f: PiecewiseGeodesicFlower, fd: FieldData, cfg: FlowConfig) -> float:
    """Configured dt, capped so no vertex moves more than I/4 or a cfl fraction of its shortest segment."""
    m = f.manifold
    vmax = fd.speed
    dt = cfg.dt
    if vmax > 0:
        dt = min(dt, 0.25 * cfg.I / vmax)
    live = f.lengths[f.lengths > seg_eps(m)]
    if live.size:
        dt = min(dt, cfg.cfl * float(live.min()))
    return dt


class StepInfo(NamedTuple):
    dt: float
    residual: float
    blending: bool
    halvings: int
    max_displacement: float


def step(m: Manifold, flower: PiecewiseGeodesicFlower, config: FlowConfig, fd: FieldData | None = None):
    """One flow step: displace along the field, then rebalance.

    Returns (new flower, StepInfo).  If the rebalanced length exceeds the old
    length the step is retried with half the time step (up to 30 times).
    """
    f = flower
    fd = field_data(f, config) if fd is None else fd
    residual = fd.residual
    if residual == 0.0 and not fd.blending:
        return f, StepInfo(0.0, 0.0, False, 0, 0.0)
    dt = effective_dt(f, fd, config)
    old = length(f)
    halvings = 0
    while True:
        moved = displace(f, fd.v_base, fd.v_points, dt)
        new = rebalance(moved)
        if length(new) <= old + 1e-13 * max(1.0, old) or halvings >= 30:
            break
        dt *= 0.5
        halvings += 1
    return new, StepInfo(dt, residual, fd.blending, halvings, fd.speed * dt)


# -- outcomes ------------------------------------------------------------------------


@dataclass
class FlowTrace:
    times: list = field(default_factory=list)
    lengths: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    dts: list = field(default_factory=list)
    displacements: list = field(default_factory=list)
    ball_excursion: list = field(default_factory=list)
    end_excursion: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # (step, t, base, points)

    def append(self, t, L, r, dt, disp, ball, endx):
        self.times.append(float(t))
        self.lengths.append(float(L))
        self.residuals.append(float(r))
        self.dts.append(float(dt))
        self.displacements.append(float(disp))
        self.ball_excursion.append(float(ball))
        self.end_excursion.append(float(endx))


@dataclass
class FlowOutcome:
    kind: str  # ContractedToPoint | StationaryFlower | EscapedToEnd | BudgetExhausted
    steps_taken: int
    flower: PiecewiseGeodesicFlower
    trace: FlowTrace
    config: FlowConfig
    point: Point | None = None
    measurement: NetMeasurement | None = None
    end_id: str | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def length_trace(self):
        return list(zip(self.trace.times, self.trace.lengths))

    @property
    def residual_trace(self):
        return list(zip(self.trace.times, self.trace.residuals))

    @property
    def final_length(self) -> float:
        return length(self.flower)

    def label(self) -> str:
        if self.kind == "EscapedToEnd":
            return f"EscapedToEnd({self.end_id})"
        return self.kind

    def summary(self) -> dict:
        out = {
            "kind": self.kind,
            "label": self.label(),
            "steps": self.steps_taken,
            "final_length": self.final_length,
            "max_residual": self.trace.residuals[-1] if self.trace.residuals else 0.0,
            "final_time": self.trace.times[-1] if self.trace.times else 0.0,
        }
        m = self.flower.manifold
        if self.point is not None:
            out["point"] = list(self.point.coords)
            out["point_chart"] = self.point.chart_id
        if self.end_id is not None:
            out["end"] = self.end_id
        if self.measurement is not None:
            out["measurement"] = {
                "total_length": self.measurement.total_length,
                "per_petal_lengths": list(self.measurement.per_petal_lengths),
                "max_residual": self.measurement.max_residual,
                "geodesic_deviation": self.measurement.geodesic_deviation,
            }
        out["base"] = list(m.point_from_model(self.flower.base).coords)
        out["diagnostics"] = {k: v for k, v in self.diagnostics.items() if isinstance(v, (int, float, str, bool))}
        return out


def _ball_excursion(m: Manifold, f: PiecewiseGeodesicFlower, balls) -> float:
    """How far the flower sticks out of the declared balls it started in (<= 0 inside)."""
    if not balls:
        return -math.inf
    pts = f.all_points()
    worst = -math.inf
    for c, r in balls:
        dist = m.norm(np.broadcast_to(c, pts.shape), m.log(np.broadcast_to(c, pts.shape), pts)[0])
        worst = max(worst, float(np.max(dist)) - r)
    return worst


def _end_excursion(ends: EndsDecomposition | None, f: PiecewiseGeodesicFlower, end_idx) -> float:
    """Depth of the deepest point on the core side of the end the flow started in (<= 0 outside the core)."""
    if ends is None or end_idx is None:
        return -math.inf
    return float(np.max(-ends.depth(f.all_points(), end_idx)))


def _balls_model(m: Manifold, cfg: FlowConfig):
    out = []
    for spec in cfg.convex_balls:
        center, radius = spec
        c = m.to_model(np.asarray(center, dtype=float), 0)
        out.append((c, float(radius)))
    return out


def _starting_end(ends: EndsDecomposition | None, f: PiecewiseGeodesicFlower):
    if ends is None:
        return None
    pts = f.all_points()
    for i in range(len(ends.sigmas)):
        if np.all(ends.depth(pts, i) > ends.band):
            return i
    return None


def contract(f: PiecewiseGeodesicFlower) -> PiecewiseGeodesicFlower:
    """Collapse every point onto the base."""
    m = f.manifold
    P, N, d = f.points.shape
    pts = np.broadcast_to(f.base, (P, N, d)).copy()
    z = np.zeros((P, N + 1, d))
    return PiecewiseGeodesicFlower(m, f.base.copy(), pts, z, z.copy(), np.zeros((P, N + 1)), tuple([True] * P))


def _diameter_bound(f: PiecewiseGeodesicFlower, cutoff: float) -> float:
    """Upper bound on the flower diameter (2 x max distance from the base), exact enough below ``cutoff``."""
    per = f.petal_lengths()
    if per.size == 0 or per.max() == 0:
        return 0.0
    if per.max() > 4 * cutoff:
        return float(per.max())
    ext, _ = petal_extents(f, math.inf)
    return float(2.0 * ext.max())


def run_flow(
    m: Manifold,
    flower: PiecewiseGeodesicFlower,
    config: FlowConfig,
    ends: EndsDecomposition | None = None,
    callback=None,
) -> FlowOutcome:
    """Iterate ``step`` until contraction, stationarity, escape or the step budget.

    ``callback(step_index, t, flower)`` is invoked after every accepted step.
    """
    if length(flower) > config.L * (1 + 1e-12):
        raise PreconditionError(f"flower length {length(flower):.6g} exceeds the budget L={config.L:.6g}")
    _check_rebalanced(flower, config)
    trace = FlowTrace()
    balls = _balls_model(m, config)
    start_end = _starting_end(ends, flower)
    start_in_balls = [b for b in balls if _ball_excursion(m, flower, [b]) <= 1e-12]
    f = flower
    t = 0.0
    calm = 0
    thr = config.contraction_fraction * config.I
    diag: dict = {"halvings": 0, "blending_steps": 0, "start_end": None if start_end is None else ends.sigmas[start_end].id}

    def finish(kind, **kw):
        return FlowOutcome(kind, len(trace.times) - 1, f, trace, config, diagnostics=diag, **kw)

    def record(k, fd_res, dt, disp):
        trace.append(t, length(f), fd_res, dt, disp, _ball_excursion(m, f, start_in_balls), _end_excursion(ends, f, start_end))
        if k % config.record_every == 0:
            trace.snapshots.append((k, t, f.base.copy(), f.points.copy()))

    fd = field_data(f, config)
    record(0, fd.residual, 0.0, 0.0)
    k = 0
    try:
        while True:
            res = trace.residuals[-1]
            # (a) collapse to a point
            if len(trace.lengths) < 2 or trace.lengths[-1] <= trace.lengths[-2]:
                if _diameter_bound(f, thr) < thr:
                    f = contract(f)
                    t_c = t
                    record(k + 1, 0.0, 0.0, 0.0)
                    if trace.snapshots[-1][0] != k + 1:
                        trace.snapshots.append((k + 1, t_c, f.base.copy(), f.points.copy()))
                    return finish("ContractedToPoint", point=f.base_point)
            # (b) stationary
            calm = calm + 1 if res <= config.tol_stat else 0
            if calm >= config.stationary_window:
                meas = measure(f)
                if meas.max_residual <= config.tol_stat and meas.geodesic_deviation <= config.tol_geo:
                    _snap_last(trace, k, t, f)
                    return finish("StationaryFlower", measurement=meas)
            # (c) escape
            if ends is not None and ends.sigmas:
                eid = ends.escaped(f.all_points(), config.escape_radius)
                if eid is not None:
                    _snap_last(trace, k, t, f)
                    return finish("EscapedToEnd", end_id=eid)
            # (d) budget
            if k >= config.max_steps:
                _snap_last(trace, k, t, f)
                return finish("BudgetExhausted")
            f_new, info = step(m, f, config, fd)
            diag["halvings"] += info.halvings
            diag["blending_steps"] += int(info.blending)
            f = f_new
            t += info.dt
            k += 1
            fd = field_data(f, config)
            record(k, fd.residual, info.dt, info.max_displacement)
            if callback is not None:
                callback(k, t, f)
    except FlowerflowError as exc:
        _snap_last(trace, k, t, f)
        out = finish("Aborted")
        out.diagnostics["error"] = str(exc)
        raise FlowAborted(f"flow stopped at step {k}: {exc}", outcome=out, cause=exc) from exc


def _snap_last(trace: FlowTrace, k, t, f):
    if not trace.snapshots or trace.snapshots[-1][0] != k:
        trace.snapshots.append((k, t, f.base.copy(), f.points.copy()))


def run_cage_flow(m: Manifold, cage: Cage, config: FlowConfig, ends: EndsDecomposition | None = None, callback=None) -> FlowOutcome:
    """Retract the cage onto a flower at its top vertex, then flow the flower.

    The budget is raised to the retracted flower's length when the
    retraction made it longer than L.
    """
    if length(cage) > config.L * (1 + 1e-12):
        raise PreconditionError(f"cage length {length(cage):.6g} exceeds the budget L={config.L:.6g}")
    eps = seg_eps(m)
    if all(bg.length <= eps for bg in cage.edges.values()):
        f = retracted_flower(m, cage, config.N)
        trace = FlowTrace()
        trace.append(0.0, 0.0, 0.0, 0.0, 0.0, -math.inf, -math.inf)
        trace.snapshots.append((0, 0.0, f.base.copy(), f.points.copy()))
        return FlowOutcome("ContractedToPoint", 0, f, trace, config, point=f.base_point, diagnostics={"retraction_length": 0.0})
    flen = 0.0
    for _ in range(3):
        f = retracted_flower(m, cage, config.N)
        flen = length(f)
        cfg = config.with_budget(m, flen)
        if cfg.N == config.N:
            break
        config = cfg
    out = run_flow(m, f, config, ends, callback)
    out.diagnostics["retraction_length"] = flen
    out.diagnostics["budget"] = config.L
    return out


# -- property audit --------------------------------------------------------------------


@dataclass
class PropertyResult:
    name: str
    passed: bool
    worst: float
    first_bad_step: int | None = None
    detail: str = ""


@dataclass
class PropertyReport:
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def get(self, name: str) -> PropertyResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_json(self) -> list:
        return [asdict(r) for r in self.results]


def check_flow_properties(
    outcome: FlowOutcome,
    m: Manifold | None = None,
    ends: EndsDecomposition | None = None,
    extra_steps: int = 100,
    slack: float = 1e-8,
) -> PropertyReport:
    """Audit a finished trajectory.

    monotone      lengths never increase by more than ``slack`` per step
    decrease      away from stationarity the length drops over windows of
                  10 dt by at least a quarter of the first-variation estimate
    stationary    once the residual is below tol_stat, later length changes
                  stay within what that residual allows
    convex_sets   declared balls / the starting end are never left (by more
                  than one step's geometric slack)
    absorbing     after an escape, ``extra_steps`` more steps never come back
                  within the escape radius (needs ``m`` and ``ends``)
    """
    tr = outcome.trace
    cfg = outcome.config
    L = np.asarray(tr.lengths)
    R = np.asarray(tr.residuals)
    dts = np.asarray(tr.dts)
    results = []

    inc = np.diff(L) if L.size > 1 else np.zeros(0)
    bad = np.flatnonzero(inc > slack)
    results.append(
        PropertyResult("monotone", bad.size == 0, float(inc.max()) if inc.size else 0.0, int(bad[0]) + 1 if bad.size else None)
    )

    # windows of lambda = 10 steps; the first variation predicts a drop of at
    # least sum(dt * residual^2), and rebalancing only shortens further
    worst_ratio = math.inf
    first = None
    for s0 in range(0, max(L.size - 10, 0), 10):
        if R[s0] <= cfg.tol_stat:
            continue
        r = np.minimum(R[s0 : s0 + 10], R[s0 + 1 : s0 + 11])
        want = 0.25 * float(np.sum(dts[s0 + 1 : s0 + 11] * r**2))
        if want <= 0:
            continue
        ratio = (L[s0] - L[s0 + 10]) / want
        worst_ratio = min(worst_ratio, ratio)
        if ratio < 1.0 and first is None:
            first = s0
    results.append(PropertyResult("decrease", first is None, float(worst_ratio), first))

    worst = 0.0
    first = None
    n_pts = outcome.flower.points.shape[0] * outcome.flower.points.shape[1] + 1
    for s in range(L.size - 1):
        if R[s] <= cfg.tol_stat:
            allowed = dts[s + 1] * n_pts * cfg.tol_stat**2 + 1e-10
            change = abs(L[s + 1] - L[s])
            if outcome.kind == "ContractedToPoint" and s == L.size - 2:
                continue
            worst = max(worst, change - allowed)
            if change > allowed and first is None:
                first = s + 1
    results.append(PropertyResult("stationary", first is None, worst, first))

    bx = np.asarray(tr.ball_excursion)
    ex = np.asarray(tr.end_excursion)
    worst = -math.inf
    first = None
    for arr, tol in ((bx, 1e-9), (ex, 0.0)):
        if arr.size and np.isfinite(arr).any():
            # the allowance is one step's worth of motion for the end test
            limit = tol if tol > 0 else float(np.max(tr.displacements) if tr.displacements else 0.0)
            hits = np.flatnonzero(arr > limit + 1e-12)
            worst = max(worst, float(np.nanmax(arr)))
            if hits.size and (first is None or hits[0] < first):
                first = int(hits[0])
    results.append(PropertyResult("convex_sets", first is None, worst, first))

    if outcome.kind == "EscapedToEnd":
        if m is None or ends is None:
            results.append(PropertyResult("absorbing", False, math.nan, None, "manifold and ends needed to continue the flow"))
        else:
            f = outcome.flower
            i = ends.end_index(outcome.end_id)
            lev = ends.escape_level(i, cfg.escape_radius)
            sign = ends.sigmas[i].sign
            worst = math.inf
            first = None
            try:
                for s in range(extra_steps):
                    f, _ = step(m, f, cfg)
                    margin = float(np.min(sign * (ends.coordinate(f.all_points()) - lev)))
                    worst = min(worst, margin)
                    if margin <= 0 and first is None:
                        first = s + 1
                results.append(PropertyResult("absorbing", first is None, worst, first))
            except FlowerflowError as exc:
                results.append(PropertyResult("absorbing", False, math.nan, None, f"continuation failed: {exc}"))
    return PropertyReport(results)
