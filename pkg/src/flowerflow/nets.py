"""Geodesic nets, cages and piecewise-geodesic flowers.

All geometry is stored in model coordinates (see ``manifold.base``).  A broken
geodesic is a vertex list plus, for every segment, the initial and terminal
velocities of the unit-time minimizing geodesic joining its endpoints; the
metric norm of the initial velocity is the segment length.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RebalanceError, ScenarioError, SolverError
from .manifold import Manifold, Point, TangentVector, make_manifold

SEG_EPS_FACTOR = 1e-9


def seg_eps(m: Manifold) -> float:
    """Degeneracy threshold below which a segment counts as constant."""
    return SEG_EPS_FACTOR * m.working_region_diameter()


def solve_segments(m: Manifold, a: np.ndarray, b: np.ndarray, guess=None):
    """Minimizing geodesics a[i] -> b[i]; returns (v_start, v_end, lengths)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    shape = a.shape
    d = shape[-1]
    af = a.reshape(-1, d)
    bf = b.reshape(-1, d)
    g = None if guess is None else np.asarray(guess, dtype=float).reshape(-1, d)
    vs, ve, st, res = m.log(af, bf, g)
    if np.any(st != 0):
        bad = int(np.flatnonzero(st != 0)[0])
        raise SolverError(f"minimizing geodesic {bad} failed with status {int(st[bad])}", float(res[bad]))
    lengths = m.norm(af, vs)
    return vs.reshape(shape), ve.reshape(shape), lengths.reshape(shape[:-1])


def _unit(m: Manifold, x, v, lengths, eps):
    safe = np.where(lengths > eps, lengths, 1.0)[..., None]
    return np.where((lengths > eps)[..., None], v / safe, 0.0)


# -- broken geodesics -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BrokenGeodesic:
    points: np.ndarray  # (k+1, d)
    v_start: np.ndarray  # (k, d)
    v_end: np.ndarray  # (k, d)
    lengths: np.ndarray  # (k,)

    @property
    def length(self) -> float:
        return float(np.sum(self.lengths))

    @property
    def segment_count(self) -> int:
        return len(self.lengths)

    def reversed(self) -> "BrokenGeodesic":
        return BrokenGeodesic(self.points[::-1].copy(), -self.v_end[::-1], -self.v_start[::-1], self.lengths[::-1].copy())


def broken_geodesic(m: Manifold, pts, max_seg: float | None = None) -> BrokenGeodesic:
    """Join consecutive model points by minimizing geodesics.

    With ``max_seg`` every segment longer than it is split evenly so that all
    pieces stay below the bound.
    """
    pts = m.normalize(np.asarray(pts, dtype=float))
    if len(pts) < 2:
        raise DomainError("a broken geodesic needs at least two points")
    vs, ve, ln = solve_segments(m, pts[:-1], pts[1:])
    bg = BrokenGeodesic(pts, vs, ve, ln)
    if max_seg is not None and np.any(ln > max_seg):
        bg = resample(m, bg, max_seg)
    return bg


def concat(parts: list[BrokenGeodesic]) -> BrokenGeodesic:
    parts = [p for p in parts if p.segment_count > 0]
    pts = [parts[0].points]
    for p in parts[1:]:
        pts.append(p.points[1:])
    return BrokenGeodesic(
        np.concatenate(pts),
        np.concatenate([p.v_start for p in parts]),
        np.concatenate([p.v_end for p in parts]),
        np.concatenate([p.lengths for p in parts]),
    )


def point_along(m: Manifold, bg: BrokenGeodesic, s: float):
    """Point at arc length s along bg, with the segment index and fraction."""
    cum = np.concatenate([[0.0], np.cumsum(bg.lengths)])
    s = min(max(s, 0.0), cum[-1])
    k = int(np.searchsorted(cum, s, side="right") - 1)
    k = min(max(k, 0), bg.segment_count - 1)
    ln = bg.lengths[k]
    frac = 0.0 if ln <= 0 else min(max((s - cum[k]) / ln, 0.0), 1.0)
    if frac == 0.0:
        return bg.points[k].copy(), k, 0.0
    if frac == 1.0:
        return bg.points[k + 1].copy(), k, 1.0
    y, _, st = m.exp(bg.points[k][None], (frac * bg.v_start[k])[None])
    if st[0] != 0:
        raise SolverError("point on segment left the working region")
    return y[0], k, frac


def sub_geodesic(m: Manifold, bg: BrokenGeodesic, s0: float, s1: float) -> BrokenGeodesic:
    """Portion of bg between arc lengths s0 <= s1, as a broken geodesic."""
    total = bg.length
    s0 = min(max(s0, 0.0), total)
    s1 = min(max(s1, 0.0), total)
    p0, k0, f0 = point_along(m, bg, s0)
    p1, k1, f1 = point_along(m, bg, s1)
    if s1 - s0 <= 0:
        return BrokenGeodesic(np.array([p0, p0]), np.zeros((1, p0.size)), np.zeros((1, p0.size)), np.zeros(1))
    pts = [p0] + [bg.points[i] for i in range(k0 + 1, k1 + 1)] + [p1]
    # drop duplicates created when a cut lands on an existing vertex
    clean = [pts[0]]
    for q in pts[1:]:
        if np.linalg.norm(q - clean[-1]) > 0:
            clean.append(q)
    if len(clean) == 1:
        clean.append(clean[0])
    return broken_geodesic(m, np.array(clean))


def resample(m: Manifold, bg: BrokenGeodesic, max_seg: float) -> BrokenGeodesic:
    """Split segments so that each piece is at most ``max_seg`` long."""
    pts = [bg.points[0]]
    for k in range(bg.segment_count):
        pieces = max(1, int(math.ceil(bg.lengths[k] / max_seg - 1e-12)))
        if pieces > 1:
            fr = np.arange(1, pieces)[:, None] / pieces
            x = np.repeat(bg.points[k][None], pieces - 1, axis=0)
            y, _, _ = m.exp(x, fr * bg.v_start[k][None])
            pts.extend(y)
        pts.append(bg.points[k + 1])
    if len(pts) == bg.segment_count + 1:
        return bg
    return broken_geodesic(m, np.array(pts))


def dense_samples(m: Manifold, bg: BrokenGeodesic, per_segment: int = 8) -> np.ndarray:
    """Points along every segment (model coordinates), for image comparisons."""
    out = [bg.points[:1]]
    fr = np.arange(1, per_segment + 1)[:, None] / per_segment
    for k in range(bg.segment_count):
        x = np.repeat(bg.points[k][None], per_segment, axis=0)
        y, _, _ = m.exp(x, fr * bg.v_start[k][None])
        out.append(y)
    return np.concatenate(out)


# -- nets ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GeodesicNet:
    """A graph mapped to the manifold with broken-geodesic edges.

    ``edges`` lists (a, b, path) with path running from vertex a to vertex b.
    Parallel edges are allowed.
    """

    manifold: Manifold
    vertices: np.ndarray
    edges: tuple

    def edge_items(self):
        for idx, (a, b, bg) in enumerate(self.edges):
            yield idx, a, b, bg


@dataclass(frozen=True, eq=False)
class Cage:
    """Ordered-vertex 1-skeleton of an ``order``-simplex with broken-geodesic edges."""

    manifold: Manifold
    order: int
    vertices: np.ndarray
    edges: dict
    constant_flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.order < 1:
            raise DomainError("cage order must be at least 1")
        if len(self.vertices) != self.order + 1:
            raise DomainError(f"an order-{self.order} cage needs {self.order + 1} vertices")
        want = {(a, b) for a in range(self.order + 1) for b in range(a + 1, self.order + 1)}
        if set(self.edges) != want:
            raise DomainError(f"cage edges must be exactly {sorted(want)}")
        m = self.manifold
        tol = 1e-7 * max(1.0, m.working_region_diameter())
        for (a, b), bg in self.edges.items():
            d0 = m.norm(self.vertices[a], _model_diff(m, self.vertices[a], bg.points[0]))
            d1 = m.norm(self.vertices[b], _model_diff(m, self.vertices[b], bg.points[-1]))
            if d0 > tol or d1 > tol:
                raise DomainError(f"edge {a}-{b} does not join vertices {a} and {b}")
        if not self.constant_flags:
            eps = seg_eps(m)
            object.__setattr__(self, "constant_flags", {k: bool(bg.length <= eps) for k, bg in self.edges.items()})

    def edge_items(self):
        for key in sorted(self.edges):
            yield key, key[0], key[1], self.edges[key]


def _model_diff(m: Manifold, x, y):
    v, _, _, _ = m.log(np.asarray(x)[None], np.asarray(y)[None])
    return v[0]


def make_cage(m: Manifold, vertices, edge_paths: dict | None = None, max_seg: float | None = None) -> Cage:
    """Build a cage from model-coordinate vertices.

    ``edge_paths`` maps (a, b) to a sequence of model points from vertex a
    to vertex b; missing edges are single minimizing geodesics.
    """
    verts = m.normalize(np.asarray(vertices, dtype=float))
    order = len(verts) - 1
    edges = {}
    for a in range(order + 1):
        for b in range(a + 1, order + 1):
            path = None if edge_paths is None else edge_paths.get((a, b))
            if path is None:
                path = np.array([verts[a], verts[b]])
            edges[(a, b)] = broken_geodesic(m, np.asarray(path, dtype=float), max_seg)
    return Cage(m, order, verts, edges)


# -- flowers ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PiecewiseGeodesicFlower:
    """Base point plus P petals, each closed by N interior points.

    Petal j visits base, points[j, 0], ..., points[j, N-1], base; segment k of
    petal j runs from vertex k to vertex k+1 of that list.
    """

    manifold: Manifold
    base: np.ndarray  # (d,)
    points: np.ndarray  # (P, N, d)
    v_start: np.ndarray  # (P, N+1, d)
    v_end: np.ndarray  # (P, N+1, d)
    lengths: np.ndarray  # (P, N+1)
    constant_flags: tuple = ()

    def __post_init__(self):
        if not self.constant_flags:
            eps = seg_eps(self.manifold)
            flags = tuple(bool(x) for x in np.sum(self.lengths, axis=1) <= eps)
            object.__setattr__(self, "constant_flags", flags)

    @property
    def N(self) -> int:
        return self.points.shape[1]

    @property
    def petal_count(self) -> int:
        return self.points.shape[0]

    def vertices(self, j: int) -> np.ndarray:
        b = self.base[None]
        return np.concatenate([b, self.points[j], b])

    def all_points(self) -> np.ndarray:
        return np.concatenate([self.base[None], self.points.reshape(-1, self.base.size)])

    def petal(self, j: int) -> BrokenGeodesic:
        return BrokenGeodesic(self.vertices(j), self.v_start[j], self.v_end[j], self.lengths[j])

    def petal_lengths(self) -> np.ndarray:
        return np.sum(self.lengths, axis=1)

    @property
    def base_point(self) -> Point:
        return self.manifold.point_from_model(self.base)


def flower_from_arrays(m: Manifold, base, points, guess=None) -> PiecewiseGeodesicFlower:
    base = m.normalize(np.asarray(base, dtype=float))
    points = m.normalize(np.asarray(points, dtype=float))
    P, N, d = points.shape
    b = np.repeat(np.repeat(base[None, None], P, axis=0), 1, axis=1)
    chain = np.concatenate([b, points, b], axis=1)
    vs, ve, ln = solve_segments(m, chain[:, :-1], chain[:, 1:], guess)
    return PiecewiseGeodesicFlower(m, base, points, vs, ve, ln)


def make_flower(m: Manifold, base, petals, N: int, max_seg: float | None = None) -> PiecewiseGeodesicFlower:
    """Flower from loops given as model-point lists (base excluded or included).

    Each loop is closed through ``base``, then Birkhoff-rebalanced into N+1
    equal segments.  An empty loop is a constant petal.
    """
    base = m.normalize(np.asarray(base, dtype=float))
    rows = []
    for j, loop in enumerate(petals):
        loop = np.asarray(loop, dtype=float).reshape(-1, base.size)
        chain = np.concatenate([base[None], loop, base[None]])
        if len(loop) == 0:
            rows.append(np.repeat(base[None], N, axis=0))
            continue
        bg = broken_geodesic(m, chain, max_seg)
        rows.append(birkhoff_rebalance(m, bg, N, petal_index=j).points[1:-1])
    return flower_from_arrays(m, base, np.array(rows))


def flower_from_petals(m: Manifold, base, petals: list[BrokenGeodesic], N: int) -> PiecewiseGeodesicFlower:
    base = m.normalize(np.asarray(base, dtype=float))
    rows = []
    for j, bg in enumerate(petals):
        if bg.length <= seg_eps(m):
            rows.append(np.repeat(base[None], N, axis=0))
        else:
            rows.append(birkhoff_rebalance(m, bg, N, petal_index=j).points[1:-1])
    return flower_from_arrays(m, base, np.array(rows))


# -- measurements -------------------------------------------------------------


@dataclass(frozen=True)
class NetMeasurement:
    total_length: float
    per_petal_lengths: tuple
    balancing_residuals: dict
    max_residual: float
    geodesic_deviation: float

    def to_json(self) -> dict:
        return {
            "total_length": self.total_length,
            "per_petal_lengths": list(self.per_petal_lengths),
            "max_residual": self.max_residual,
            "geodesic_deviation": self.geodesic_deviation,
            "balancing_residuals": {_key_str(k): v for k, v in self.balancing_residuals.items()},
        }


def _key_str(k) -> str:
    if isinstance(k, tuple):
        return "-".join(_key_str(x) for x in k)
    return str(k)


def length(net) -> float:
    if isinstance(net, PiecewiseGeodesicFlower):
        return float(np.sum(net.lengths))
    if isinstance(net, BrokenGeodesic):
        return net.length
    return float(sum(bg.length for _, _, _, bg in net.edge_items()))


def flower_tangent_sums(f: PiecewiseGeodesicFlower, weights=None):
    """Generic-stratum sums of unit tangents.

    Returns (petal contributions at the base, shape (P, d); sums at the
    interior points, shape (P, N, d)).  Tangents point away from the vertex;
    degenerate segments contribute zero.
    """
    m = f.manifold
    eps = seg_eps(m)
    P, N, d = f.points.shape
    b = np.broadcast_to(f.base, (P, d))
    ts = _unit(m, None, f.v_start, f.lengths, eps)  # at segment starts
    te = -_unit(m, None, f.v_end, f.lengths, eps)  # at segment ends, pointing back
    at_base = ts[:, 0] + te[:, N]
    interior = ts[:, 1:] + te[:, :N]
    return at_base, interior


def balancing_residual(net, at) -> TangentVector:
    """Sum of the unit tangents at a vertex, directed away from it.

    Vertex ids: for flowers "base" or (petal, k) with k the interior point
    index; for nets and cages a vertex index, or (edge key, k) for the k-th
    interior breakpoint of an edge.
    """
    m = net.manifold
    if isinstance(net, PiecewiseGeodesicFlower):
        at_base, interior = flower_tangent_sums(net)
        if at == "base":
            return m.tangent_from_model(net.base, np.sum(at_base, axis=0))
        try:
            j, k = at
            if not (0 <= j < net.petal_count and 0 <= k < net.N):
                raise IndexError
        except (TypeError, ValueError, IndexError):
            raise DomainError(f"unknown flower vertex {at!r}") from None
        return m.tangent_from_model(net.points[j, k], interior[j, k])
    table = _net_residual_vectors(net)
    if at not in table:
        raise DomainError(f"unknown vertex {at!r}")
    x, vec = table[at]
    return m.tangent_from_model(x, vec)


def _net_residual_vectors(net) -> dict:
    m = net.manifold
    eps = seg_eps(m)
    d = net.vertices.shape[1]
    out = {i: (net.vertices[i], np.zeros(d)) for i in range(len(net.vertices))}
    for key, a, b, bg in net.edge_items():
        ts = _unit(m, None, bg.v_start, bg.lengths, eps)
        te = -_unit(m, None, bg.v_end, bg.lengths, eps)
        out[a] = (out[a][0], out[a][1] + ts[0])
        out[b] = (out[b][0], out[b][1] + te[-1])
        for k in range(1, bg.segment_count):
            out[(key, k)] = (bg.points[k], ts[k] + te[k - 1])
    return out


def segment_deviation(m: Manifold, x: np.ndarray, v: np.ndarray, ln: float, count: int = 16) -> float:
    """Turning of one segment: covariant acceleration over speed, unit-time parameter."""
    if ln <= seg_eps(m):
        return 0.0
    pts, _, ok = m.samples(x, v, count)
    if not ok:
        return math.inf
    acc = m.covariant_acceleration(pts, 1.0 / count)
    return float(np.max(acc) / ln)


def measure(net, count: int = 16) -> NetMeasurement:
    m = net.manifold
    if isinstance(net, PiecewiseGeodesicFlower):
        at_base, interior = flower_tangent_sums(net)
        res = {"base": float(m.norm(net.base, np.sum(at_base, axis=0)))}
        norms = m.norm(net.points, interior)
        for j in range(net.petal_count):
            for k in range(net.N):
                res[(j, k)] = float(norms[j, k])
        per = tuple(float(x) for x in net.petal_lengths())
        dev = 0.0
        for j in range(net.petal_count):
            verts = net.vertices(j)
            for k in range(net.N + 1):
                dev = max(dev, segment_deviation(m, verts[k], net.v_start[j, k], net.lengths[j, k], count))
    else:
        table = _net_residual_vectors(net)
        res = {k: float(m.norm(x, v)) for k, (x, v) in table.items()}
        per = tuple(bg.length for _, _, _, bg in net.edge_items())
        dev = 0.0
        for _, _, _, bg in net.edge_items():
            for k in range(bg.segment_count):
                dev = max(dev, segment_deviation(m, bg.points[k], bg.v_start[k], bg.lengths[k], count))
    return NetMeasurement(
        total_length=float(sum(per)),
        per_petal_lengths=per,
        balancing_residuals=res,
        max_residual=max(res.values()) if res else 0.0,
        geodesic_deviation=dev,
    )


def is_geodesic_net(meas: NetMeasurement, tol_stat: float = 1e-6, tol_geo: float = 1e-6) -> bool:
    return meas.max_residual <= tol_stat and meas.geodesic_deviation <= tol_geo


# -- Birkhoff rebalancing -------------------------------------------------------


def rebalance_points(m: Manifold, chains: np.ndarray, v_start: np.ndarray, lengths: np.ndarray, N: int):
    """Equal-arc-length subdivision of several closed chains at once.

    ``chains`` has shape (P, K+1, d) (first and last rows are the base),
    ``v_start``/``lengths`` describe its K segments.  Returns the N new
    interior points of every chain, shape (P, N, d).
    """
    P, K1, d = chains.shape
    cum = np.concatenate([np.zeros((P, 1)), np.cumsum(lengths, axis=1)], axis=1)
    totals = cum[:, -1]
    s = totals[:, None] * (np.arange(1, N + 1)[None, :] / (N + 1))
    idx = np.empty((P, N), dtype=np.int64)
    for j in range(P):
        idx[j] = np.searchsorted(cum[j], s[j], side="right") - 1
    idx = np.clip(idx, 0, K1 - 2)
    rows = np.arange(P)[:, None]
    seg_len = lengths[rows, idx]
    safe = np.where(seg_len > 0, seg_len, 1.0)
    frac = np.clip((s - cum[rows, idx]) / safe, 0.0, 1.0)
    frac = np.where(seg_len > 0, frac, 0.0)
    # targets that coincide with an existing vertex up to rounding are
    # snapped to it, so an already balanced petal is reproduced exactly
    snap_hi = frac > 1.0 - 1e-12
    idx = np.where(snap_hi, idx + 1, idx)
    frac = np.where(snap_hi | (frac < 1e-12), 0.0, frac)
    idx = np.minimum(idx, K1 - 1)
    x = chains[rows, idx]
    out = x.copy()
    move = frac > 0
    if np.any(move):
        v = frac[move][:, None] * v_start[rows, np.minimum(idx, K1 - 2)][move]
        y, _, st = m.exp(x[move], v)
        if np.any(st != 0):
            bad = int(np.argwhere(move)[np.flatnonzero(st != 0)[0]][0])
            raise RebalanceError("subdivision point left the working region", petal=bad)
        out[move] = y
    return out


def birkhoff_rebalance(m: Manifold, petal: BrokenGeodesic, N: int, petal_index: int | None = None) -> BrokenGeodesic:
    """Resample a closed petal into N+1 arcs of equal length joined by minimizing geodesics."""
    if N < 1:
        raise DomainError("N must be at least 1")
    new = rebalance_points(m, petal.points[None], petal.v_start[None], petal.lengths[None], N)[0]
    chain = np.concatenate([petal.points[:1], new, petal.points[-1:]])
    try:
        vs, ve, ln = solve_segments(m, chain[:-1], chain[1:])
    except SolverError as exc:
        raise RebalanceError(str(exc), petal=petal_index) from None
    limit = 0.5 * m.injectivity_floor
    if np.any(ln >= limit):
        raise RebalanceError(f"segment of length {float(np.max(ln)):.6g} exceeds {limit:.6g}", petal=petal_index)
    return BrokenGeodesic(chain, vs, ve, ln)


# -- cage retraction -------------------------------------------------------------


def cage_to_flower(m: Manifold, cage: Cage, t: float, max_seg: float | None = None) -> Cage:
    """Slide every vertex toward the top vertex along its edge to it.

    At parameter t vertex i < top sits at fraction t of edge (i, top).  Edge
    (i, j) becomes: the walked part of edge (i, top) backwards, the original
    edge (i, j), then the walked part of edge (j, top).  Edge (i, top) keeps
    only its unwalked part.  The point set covered by the cage is unchanged.
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError("t must lie in [0, 1]")
    top = cage.order
    if t == 0.0:
        return cage
    walked = {}
    new_vertices = cage.vertices.copy()
    new_edges = {}
    for i in range(top):
        e = cage.edges[(i, top)]
        s = t * e.length
        walked[i] = sub_geodesic(m, e, 0.0, s)
        new_vertices[i] = walked[i].points[-1] if t < 1.0 else cage.vertices[top]
        new_edges[(i, top)] = sub_geodesic(m, e, s, e.length)
        if t == 1.0:
            p = cage.vertices[top]
            new_edges[(i, top)] = BrokenGeodesic(np.array([p, p]), np.zeros((1, p.size)), np.zeros((1, p.size)), np.zeros(1))
    for i in range(top):
        for j in range(i + 1, top):
            parts = [walked[i].reversed(), cage.edges[(i, j)], walked[j]]
            bg = concat([p for p in parts if p.length > 0] or [cage.edges[(i, j)]])
            if max_seg is not None:
                bg = resample(m, bg, max_seg)
            new_edges[(i, j)] = bg
    if t == 1.0:
        new_vertices[:] = cage.vertices[top]
    return Cage(m, cage.order, new_vertices, new_edges)


def retracted_flower(m: Manifold, cage: Cage, N: int) -> PiecewiseGeodesicFlower:
    """Flower at the top vertex obtained from the fully retracted cage."""
    full = cage_to_flower(m, cage, 1.0)
    base = full.vertices[cage.order]
    petals = [full.edges[k] for k in sorted(full.edges)]
    return flower_from_petals(m, base, petals, N)


def image_hausdorff(m: Manifold, a_nets, b_nets, per_segment: int = 8, torus_box=None) -> float:
    """Hausdorff distance between the sampled images of two nets (embedding space)."""
    from scipy.spatial import cKDTree

    def cloud(net):
        pts = []
        items = net.edge_items() if not isinstance(net, PiecewiseGeodesicFlower) else (
            (j, 0, 0, net.petal(j)) for j in range(net.petal_count)
        )
        for _, _, _, bg in items:
            pts.append(dense_samples(m, bg, per_segment))
        return np.concatenate(pts)

    pa = cloud(a_nets)
    pb = cloud(b_nets)
    if torus_box is not None:
        # the flat torus lattice is axis-aligned here: compare in the periodic box
        box = np.asarray(torus_box, dtype=float)
        pa = np.mod(pa, box)
        pb = np.mod(pb, box)
        ta = cKDTree(pa, boxsize=box)
        tb = cKDTree(pb, boxsize=box)
    else:
        pa = m.embed(pa)
        pb = m.embed(pb)
        ta = cKDTree(pa)
        tb = cKDTree(pb)
    return float(max(tb.query(pa)[0].max(), ta.query(pb)[0].max()))


def sampling_gap(m: Manifold, net, per_segment: int = 8) -> float:
    """Largest distance between consecutive dense samples of a net."""
    gap = 0.0
    for _, _, _, bg in net.edge_items():
        if bg.segment_count:
            gap = max(gap, float(np.max(bg.lengths)) / per_segment)
    return gap


# -- generators ------------------------------------------------------------------


def theta_net(m: Manifold, segments: int = 8, longitudes=(0.0, 2 * math.pi / 3, 4 * math.pi / 3)) -> GeodesicNet:
    """Two poles of a round sphere joined by meridians."""
    r = m.radius
    north = np.array([0.0, 0.0, r])
    south = np.array([0.0, 0.0, -r])
    edges = []
    th = np.linspace(0.0, math.pi, segments + 1)
    for lon in longitudes:
        pts = r * np.stack([np.sin(th) * math.cos(lon), np.sin(th) * math.sin(lon), np.cos(th)], axis=1)
        pts[0] = north
        pts[-1] = south
        edges.append((0, 1, broken_geodesic(m, pts)))
    return GeodesicNet(m, np.array([north, south]), tuple(edges))


def parallel_circle(m: Manifold, u: float, N: int, base_phi: float = 0.0) -> PiecewiseGeodesicFlower:
    """One-petal flower tracing the parallel at height u of a surface of revolution."""
    phi = base_phi + 2 * math.pi * np.arange(1, N + 1) / (N + 1)
    pts = np.stack([np.full(N, float(u)), np.mod(phi, 2 * math.pi)], axis=1)
    return flower_from_arrays(m, [u, base_phi % (2 * math.pi)], pts[None])


def equator_petal(m: Manifold, N: int, perturbation: float = 0.0) -> PiecewiseGeodesicFlower:
    """The equator of a round sphere as one petal based at longitude 0.

    Interior point j is pushed by ``perturbation`` in colatitude with an
    alternating sign pattern that is odd under reflection through the base,
    so the enclosed areas stay balanced.
    """
    r = m.radius
    K = N + 1
    shifts = np.zeros(N)
    for j in range(1, K):
        if 2 * j < K:
            shifts[j - 1] = perturbation * (-1) ** (j + 1)
        elif 2 * j > K:
            shifts[j - 1] = -shifts[K - j - 1]
    phi = 2 * math.pi * np.arange(1, N + 1) / K
    theta = math.pi / 2 + shifts
    pts = r * np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1)
    return flower_from_arrays(m, [r, 0.0, 0.0], pts[None])


def round_loop(m: Manifold, center, radius: float, N: int, start_angle: float = 0.0) -> PiecewiseGeodesicFlower:
    """Regular (N+1)-gon inscribed in a Euclidean circle, based at its first corner."""
    c = np.asarray(center, dtype=float)
    ang = start_angle + 2 * math.pi * np.arange(N + 2) / (N + 1)
    pts = c + radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return flower_from_arrays(m, pts[0], pts[1:-1][None])


def triangle_cage(m: Manifold, vertices, max_seg: float | None = None, edge_paths: dict | None = None) -> Cage:
    return make_cage(m, vertices, edge_paths, max_seg)


def torus_class_cage(m: Manifold, wiggle: float = 0.04, max_seg: float = 0.1) -> Cage:
    """Triangle cage on the unit-square torus whose boundary winds once around the first lattice direction.

    Vertices sit at x = 0.1, 0.4, 0.7 on a slightly wavy line y ~ 0.5; edges
    (0, 1) and (1, 2) go right, edge (0, 2) goes left through the seam, so the
    loop 0 -> 1 -> 2 -> 0 has winding (1, 0).
    """
    verts = np.array([[0.1, 0.5], [0.4, 0.5 + wiggle], [0.7, 0.5 - wiggle]])
    left = np.array([[0.1, 0.5], [-0.1, 0.5 + 0.5 * wiggle], [-0.3, 0.5 - wiggle]])
    return make_cage(m, verts, {(0, 2): left}, max_seg=max_seg)


# -- JSON ---------------------------------------------------------------------------


def _pt_json(m: Manifold, x) -> list:
    coords, cid = m.from_model(np.asarray(x))
    out = [float(c) for c in coords]
    return out if cid == 0 else {"coords": out, "chart": int(cid)}


def _pt_model(m: Manifold, obj, path: str) -> np.ndarray:
    try:
        if isinstance(obj, dict):
            coords, cid = obj["coords"], int(obj.get("chart", 0))
        else:
            coords, cid = obj, 0
        p = m.point(coords, cid)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(path, f"bad point: {exc}") from None
    return m.point_to_model(p)


def flower_to_json(f: PiecewiseGeodesicFlower, manifold_id=None) -> dict:
    m = f.manifold
    return {
        "manifold": manifold_id if manifold_id is not None else m.describe(),
        "base": _pt_json(m, f.base),
        "petals": [[_pt_json(m, q) for q in f.points[j]] for j in range(f.petal_count)],
    }


def cage_to_json(c: Cage, manifold_id=None) -> dict:
    m = c.manifold
    return {
        "manifold": manifold_id if manifold_id is not None else m.describe(),
        "cage": {
            "vertices": [_pt_json(m, v) for v in c.vertices],
            "edges": {f"{a}-{b}": [_pt_json(m, q) for q in c.edges[(a, b)].points] for (a, b) in sorted(c.edges)},
        },
    }


def net_to_json(n: GeodesicNet, manifold_id=None) -> dict:
    m = n.manifold
    return {
        "manifold": manifold_id if manifold_id is not None else m.describe(),
        "net": {
            "vertices": [_pt_json(m, v) for v in n.vertices],
            "edges": [{"from": a, "to": b, "points": [_pt_json(m, q) for q in bg.points]} for a, b, bg in n.edges],
        },
    }


def net_from_json(obj, manifold=None, N: int | None = None, max_seg: float | None = None):
    """Parse any of the three net formats; returns (manifold, net)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise ScenarioError("$", "net description must be an object")
    m = manifold
    if m is None:
        if "manifold" not in obj:
            raise ScenarioError("manifold", "missing")
        try:
            m = make_manifold(obj["manifold"])
        except DomainError as exc:
            raise ScenarioError("manifold", str(exc)) from None
    if "cage" in obj:
        c = obj["cage"]
        verts = np.array([_pt_model(m, v, f"cage.vertices[{i}]") for i, v in enumerate(c.get("vertices", []))])
        if len(verts) < 2:
            raise ScenarioError("cage.vertices", "need at least two vertices")
        paths = {}
        for key, pts in c.get("edges", {}).items():
            try:
                a, b = (int(s) for s in key.split("-"))
            except ValueError:
                raise ScenarioError(f"cage.edges.{key}", "keys look like '0-1'") from None
            paths[(a, b)] = np.array([_pt_model(m, q, f"cage.edges.{key}[{i}]") for i, q in enumerate(pts)])
        try:
            return m, make_cage(m, verts, paths, max_seg)
        except DomainError as exc:
            raise ScenarioError("cage", str(exc)) from None
    if "net" in obj:
        n = obj["net"]
        verts = np.array([_pt_model(m, v, f"net.vertices[{i}]") for i, v in enumerate(n.get("vertices", []))])
        edges = []
        for i, e in enumerate(n.get("edges", [])):
            pts = np.array([_pt_model(m, q, f"net.edges[{i}].points[{k}]") for k, q in enumerate(e["points"])])
            edges.append((int(e["from"]), int(e["to"]), broken_geodesic(m, pts, max_seg)))
        return m, GeodesicNet(m, verts, tuple(edges))
    if "base" in obj and "petals" in obj:
        base = _pt_model(m, obj["base"], "base")
        petals = [
            np.array([_pt_model(m, q, f"petals[{j}][{k}]") for k, q in enumerate(p)]).reshape(-1, base.size)
            for j, p in enumerate(obj["petals"])
        ]
        counts = {len(p) for p in petals}
        if N is None and len(counts) == 1:
            n_pts = counts.pop()
            if n_pts == 0:
                raise ScenarioError("petals", "all petals empty; give N")
            return m, flower_from_arrays(m, base, np.array(petals))
        if N is None:
            raise ScenarioError("petals", "petals have different point counts; give N to rebalance")
        return m, make_flower(m, base, petals, N, max_seg)
    raise ScenarioError("$", "expected 'base'/'petals', 'cage' or 'net'")
