"""Riemannian primitives on the test surfaces.

The functions here take and return ``Point``/``TangentVector`` values in
chart coordinates and validate their inputs.  The flow code works on model
coordinate arrays through the ``Manifold`` methods directly.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, RegionExit, SolverError
from .base import GeodesicSegment, Manifold, Point, TangentVector, integrate_chart_geodesic
from .flat import EuclideanPlane, FlatTorus
from .registry import make_manifold
from .revolution import PROFILES, SurfaceOfRevolution
from .sphere import RoundSphere

__all__ = [
    "Point",
    "TangentVector",
    "GeodesicSegment",
    "Manifold",
    "EuclideanPlane",
    "FlatTorus",
    "RoundSphere",
    "SurfaceOfRevolution",
    "PROFILES",
    "make_manifold",
    "metric_at",
    "geodesic_shoot",
    "minimizing_geodesic",
    "parallel_transport",
    "distance",
    "segment_from_model",
    "integrate_chart_geodesic",
]

POSITION_TOL = 1e-8


def _check_point(m: Manifold, p: Point):
    arr = p.array
    if arr.shape != (m.dimension,) or not np.all(np.isfinite(arr)) or not m.chart_contains(arr, p.chart_id):
        raise DomainError(f"{p} is outside chart {p.chart_id} of {m.kind}")


def metric_at(m: Manifold, p: Point) -> np.ndarray:
    _check_point(m, p)
    return m.metric_chart(p.array, p.chart_id)


def geodesic_shoot(m: Manifold, p: Point, v: TangentVector, t: float) -> tuple[Point, TangentVector]:
    """Follow the geodesic with gamma(0) = p, gamma'(0) = v up to parameter t.

    Raises RegionExit (carrying the last in-region state) if the trajectory
    leaves the working region.
    """
    _check_point(m, p)
    x = m.point_to_model(p)
    vm = m.tangent_to_model(TangentVector(p, v.components))
    if t == 0:
        return p, m.tangent_from_model(x, vm)
    y, w, st = m.exp(x[None], (t * vm)[None], refine=True)
    vel = w[0] / t
    if st[0] != 0:
        raise RegionExit(
            f"geodesic left the working region of {m.kind}",
            point=m.point_from_model(y[0]),
            velocity=m.tangent_from_model(y[0], vel),
            t_exit=float("nan"),
        )
    return m.point_from_model(y[0]), m.tangent_from_model(y[0], vel)


def segment_from_model(m: Manifold, x: np.ndarray, v: np.ndarray, count: int = 16) -> GeodesicSegment:
    """GeodesicSegment for exp(x, s v), s in [0, 1], from model-coordinate data."""
    pts, vels, ok = m.samples(np.asarray(x, dtype=float), np.asarray(v, dtype=float), count)
    if not ok:
        raise RegionExit(f"segment leaves the working region of {m.kind}")
    samples = tuple(m.point_from_model(m.normalize(q)) for q in pts)
    length = float(m.norm(np.asarray(x, dtype=float), np.asarray(v, dtype=float)))
    end = m.normalize(pts[-1])
    return GeodesicSegment(
        start=samples[0],
        end=samples[-1],
        initial_velocity=m.tangent_from_model(x, v),
        length=length,
        samples=samples,
        terminal_velocity=m.tangent_from_model(end, vels[-1]),
    )


def minimizing_geodesic(m: Manifold, p: Point, q: Point, count: int = 16) -> GeodesicSegment:
    """Shortest geodesic from p to q inside the uniqueness regime."""
    _check_point(m, p)
    _check_point(m, q)
    x = m.point_to_model(p)
    y = m.point_to_model(q)
    v, _, st, res = m.log(x[None], y[None])
    if st[0] != 0:
        raise SolverError(f"two-point problem on {m.kind} failed (status {int(st[0])})", float(res[0]))
    length = float(m.norm(x, v[0]))
    if length >= 0.5 * m.injectivity_floor:
        raise DomainError(
            f"points are {length:.6g} apart, beyond half the injectivity floor {0.5 * m.injectivity_floor:.6g}"
        )
    seg = segment_from_model(m, x, v[0], count)
    # report the caller's endpoints exactly; interior samples come from the solver
    samples = (p,) + seg.samples[1:-1] + (q,)
    return GeodesicSegment(p, q, seg.initial_velocity, seg.length, samples, seg.terminal_velocity)


def parallel_transport(m: Manifold, v: TangentVector, along: GeodesicSegment) -> TangentVector:
    xv = m.point_to_model(v.base)
    xs = m.point_to_model(along.start)
    if np.linalg.norm(xv - xs) > POSITION_TOL * max(1.0, m.working_region_diameter()):
        raise DomainError("vector is not based at the segment start")
    a = m.tangent_to_model(v)
    vel = m.tangent_to_model(along.initial_velocity)
    out, st = m.transport(xs[None], vel[None], a[None])
    if st[0] != 0:
        raise RegionExit("transport path leaves the working region")
    y = m.point_to_model(along.end)
    return m.tangent_from_model(y, out[0])


def _upper_bound(m: Manifold, x: np.ndarray, y: np.ndarray) -> float:
    if isinstance(m, SurfaceOfRevolution):
        # walk the parallel through the lower-radius endpoint, then the meridian
        dphi = abs((y[1] - x[1] + math.pi) % (2 * math.pi) - math.pi)
        r = float(min(m.rho(x[0]), m.rho(y[0])))
        return r * dphi + m.meridian_arclength(x[0], y[0])
    if isinstance(m, RoundSphere):
        return m.radius * math.pi
    return float(np.linalg.norm(y - x))


def distance(m: Manifold, p: Point, q: Point, with_flag: bool = False):
    """Riemannian distance; with ``with_flag`` also returns whether it is exact.

    Inside half the injectivity floor the shooting solution is the distance.
    Beyond it, or if shooting fails, a chart-path length is returned as an
    upper bound and the flag is False.
    """
    _check_point(m, p)
    _check_point(m, q)
    x = m.point_to_model(p)
    y = m.point_to_model(q)
    v, _, st, _ = m.log(x[None], y[None])
    d = float(m.norm(x, v[0]))
    exact = st[0] == 0 and d < 0.5 * m.injectivity_floor
    if st[0] != 0:
        d = _upper_bound(m, x, y)
    elif not exact:
        d = min(d, _upper_bound(m, x, y))
    if d < 1e-14:
        d = 0.0
    return (d, bool(exact)) if with_flag else d
