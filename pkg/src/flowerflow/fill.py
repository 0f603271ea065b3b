"""Disk fillings of closed curves swept out by the flow.

A 2-cage (triangle of broken geodesics) is read as one closed curve based at
its first vertex and flowed as a one-petal flower.  Snapshots of the petal
become the sheets of the filling; the terminal datum is the point the curve
collapsed to, or the id of the end it escaped into.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ends import EndsDecomposition
from .errors import DomainError, FlowerflowError, PreconditionError
from .flow import FlowConfig, FlowOutcome, run_flow
from .manifold import Manifold, Point
from .nets import BrokenGeodesic, Cage, PiecewiseGeodesicFlower, birkhoff_rebalance, concat, flower_from_arrays, seg_eps

SHEET_DROP = 0.02


class NoFilling(FlowerflowError):
    """The flow neither contracted nor escaped, so no disk was produced."""

    def __init__(self, message: str, outcome: FlowOutcome):
        super().__init__(message)
        self.outcome = outcome


@dataclass
class DiskFilling:
    manifold: Manifold
    boundary: np.ndarray  # closed polyline, model coordinates
    sheets: list  # (s, closed polyline) with s increasing in [0, 1]
    apex: object  # Point or end id
    outcome: FlowOutcome | None = None

    @property
    def apex_is_point(self) -> bool:
        return isinstance(self.apex, Point)

    def sheet_lengths(self) -> np.ndarray:
        m = self.manifold
        out = []
        for _, poly in self.sheets:
            v, _, _, _ = m.log(poly[:-1], poly[1:])
            out.append(float(np.sum(m.norm(poly[:-1], v))))
        return np.array(out)

    def to_json(self) -> dict:
        m = self.manifold

        def pts(a):
            return [list(m.point_from_model(q).coords) for q in a]

        apex = list(self.apex.coords) if self.apex_is_point else {"end": self.apex}
        return {
            "manifold": m.describe(),
            "boundary": pts(self.boundary),
            "sheets": [{"s": float(s), "points": pts(p)} for s, p in self.sheets],
            "apex": apex,
        }


def boundary_curve(m: Manifold, cage2) -> BrokenGeodesic:
    """Closed broken geodesic v0 -> v1 -> v2 -> v0 of a 2-cage (or a closed curve as is)."""
    if isinstance(cage2, BrokenGeodesic):
        return cage2
    if isinstance(cage2, PiecewiseGeodesicFlower):
        if cage2.petal_count != 1:
            raise DomainError("only one-petal flowers are closed curves")
        return cage2.petal(0)
    if not isinstance(cage2, Cage) or cage2.order != 2:
        raise DomainError("fill_2cage needs a 2-cage")
    return concat([cage2.edges[(0, 1)], cage2.edges[(1, 2)], cage2.edges[(0, 2)].reversed()])


def fill_2cage(m: Manifold, cage2, config: FlowConfig, ends: EndsDecomposition | None = None, drop: float = SHEET_DROP) -> DiskFilling:
    """Flow the curve and keep snapshots whenever its length fell by ``drop``.

    Raises NoFilling (carrying the outcome) when the flow ends stationary or
    runs out of steps.
    """
    curve = boundary_curve(m, cage2)
    boundary = curve.points.copy()
    if curve.length <= seg_eps(m):
        p = m.point_from_model(boundary[0])
        return DiskFilling(m, boundary, [(0.0, boundary.copy())], p, None)
    if curve.length > config.L * (1 + 1e-12):
        raise PreconditionError(f"curve length {curve.length:.6g} exceeds L={config.L:.6g}")
    petal = birkhoff_rebalance(m, curve, config.N, petal_index=0)
    f0 = flower_from_arrays(m, boundary[0], petal.points[1:-1][None])

    snaps = []
    last = [float(np.sum(f0.lengths))]

    def keep(k, t, f):
        ln = float(np.sum(f.lengths))
        if ln <= (1.0 - drop) * last[0]:
            snaps.append((t, f.vertices(0).copy()))
            last[0] = ln

    out = run_flow(m, f0, config, ends, callback=keep)
    if out.kind not in ("ContractedToPoint", "EscapedToEnd"):
        raise NoFilling(f"flow ended as {out.label()}; no filling", out)
    t_end = out.trace.times[-1] if out.trace.times else 0.0
    final = out.flower.vertices(0).copy()
    if not snaps or not np.array_equal(snaps[-1][1], final):
        snaps.append((t_end, final))
    scale = t_end if t_end > 0 else 1.0
    sheets = [(0.0, boundary.copy())] + [(min(t / scale, 1.0), p) for t, p in snaps]
    sheets[-1] = (1.0, sheets[-1][1])
    apex = out.point if out.kind == "ContractedToPoint" else out.end_id
    return DiskFilling(m, boundary, sheets, apex, out)


def sheets_inside_ball(m: Manifold, filling: DiskFilling, center, radius: float, slack: float = 1e-9) -> bool:
    c = np.asarray(center, dtype=float)
    for _, poly in filling.sheets:
        v, _, _, _ = m.log(np.broadcast_to(c, poly.shape), poly)
        if np.any(m.norm(np.broadcast_to(c, poly.shape), v) > radius + slack):
            return False
    return True


def escape_onset(filling: DiskFilling, ends: EndsDecomposition):
    """Smallest s0 after which every sheet lies strictly inside one end, with that end's id.

    Returns (None, None) if the last sheet is not inside an end.
    """
    s0 = None
    end = None
    for s, poly in reversed(filling.sheets):
        inside = None
        for i, sg in enumerate(ends.sigmas):
            if np.all(ends.depth(poly, i) > ends.band):
                inside = sg.id
        if inside is None or (end is not None and inside != end):
            break
        end = inside
        s0 = s
    return s0, end
