"""Point types and the abstract Riemannian surface interface.

Every manifold works in two coordinate systems.  Chart coordinates are what
users see: ``Point.coords`` and ``TangentVector.components``.  Model
coordinates are what the array routines use; they coincide with the chart
for the plane, the torus and surfaces of revolution, and are the ambient
R^3 embedding for the round sphere (whose charts are singular at their
poles).  ``to_model``/``from_model`` convert between the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class Point:
    coords: tuple[float, ...]
    chart_id: int = 0

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def to_json(self) -> list[float]:
        return [float(c) for c in self.coords]


@dataclass(frozen=True)
class TangentVector:
    base: Point
    components: tuple[float, ...]

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.components, dtype=float)


@dataclass(frozen=True)
class GeodesicSegment:
    """A geodesic from ``start`` to ``end`` sampled at uniform arc fractions."""

    start: Point
    end: Point
    initial_velocity: TangentVector
    length: float
    samples: tuple[Point, ...] = field(repr=False)
    terminal_velocity: TangentVector | None = field(default=None, repr=False)


class Manifold:
    """Riemannian surface with batched model-coordinate primitives.

    Subclasses provide the chart metric and Christoffel symbols, the
    chart/model conversions, and ``exp``/``log``/``transport`` on arrays of
    shape (..., model_dim).  ``exp`` and ``log`` are normalized to unit
    parameter time: ``exp(x, v)`` is the endpoint of the geodesic with
    initial velocity v after time 1, and ``log(x, y)`` returns the initial
    velocity of the minimizing geodesic so that its norm is the distance.
    """

    kind: str = "abstract"
    dimension: int = 2
    model_dim: int = 2
    injectivity_floor: float = math.inf
    convexity_floor: float = math.inf

    # -- chart side -----------------------------------------------------

    def chart_contains(self, coords: np.ndarray, chart_id: int = 0) -> bool:
        raise NotImplementedError

    def metric_chart(self, coords: np.ndarray, chart_id: int = 0) -> np.ndarray:
        raise NotImplementedError

    def christoffel_chart(self, coords: np.ndarray, chart_id: int = 0) -> np.ndarray:
        """Gamma[k, i, j] at ``coords``."""
        raise NotImplementedError

    def point(self, coords, chart_id: int = 0) -> Point:
        """Validated Point constructor."""
        arr = np.asarray(coords, dtype=float)
        if arr.shape != (self.dimension,):
            raise DomainError(f"expected {self.dimension} coordinates, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or not self.chart_contains(arr, chart_id):
            raise DomainError(f"{tuple(arr)} is outside chart {chart_id} of {self.kind}")
        return Point(tuple(float(c) for c in arr), int(chart_id))

    def vector(self, base: Point, components) -> TangentVector:
        arr = np.asarray(components, dtype=float)
        if arr.shape != (self.dimension,) or not np.all(np.isfinite(arr)):
            raise DomainError(f"bad tangent components {components!r}")
        return TangentVector(base, tuple(float(c) for c in arr))

    # -- conversions ----------------------------------------------------

    def to_model(self, coords, chart_id: int = 0) -> np.ndarray:
        return np.asarray(coords, dtype=float).copy()

    def from_model(self, x: np.ndarray) -> tuple[np.ndarray, int]:
        return np.asarray(x, dtype=float).copy(), 0

    def vector_to_model(self, coords, chart_id: int, comps) -> np.ndarray:
        return np.asarray(comps, dtype=float).copy()

    def vector_from_model(self, x: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, int, np.ndarray]:
        coords, cid = self.from_model(x)
        return coords, cid, np.asarray(w, dtype=float).copy()

    def point_to_model(self, p: Point) -> np.ndarray:
        return self.to_model(p.array, p.chart_id)

    def point_from_model(self, x: np.ndarray) -> Point:
        coords, cid = self.from_model(x)
        return Point(tuple(float(c) for c in coords), cid)

    def tangent_to_model(self, v: TangentVector) -> np.ndarray:
        return self.vector_to_model(v.base.array, v.base.chart_id, v.array)

    def tangent_from_model(self, x: np.ndarray, w: np.ndarray) -> TangentVector:
        coords, cid, comps = self.vector_from_model(x, w)
        return TangentVector(Point(tuple(float(c) for c in coords), cid), tuple(float(c) for c in comps))

    # -- model-space geometry -------------------------------------------

    def inner(self, x: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def norm(self, x: np.ndarray, a: np.ndarray) -> np.ndarray:
        return np.sqrt(np.maximum(self.inner(x, a, a), 0.0))

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return x

    def project_tangent(self, x: np.ndarray, a: np.ndarray) -> np.ndarray:
        return a

    def exp(self, x: np.ndarray, v: np.ndarray, refine: bool = False):
        """Return (endpoint, terminal velocity, status) for unit time."""
        raise NotImplementedError

    def log(self, x: np.ndarray, y: np.ndarray, guess: np.ndarray | None = None):
        """Return (initial velocity, terminal velocity, status, residual)."""
        raise NotImplementedError

    def transport(self, x: np.ndarray, v: np.ndarray, a: np.ndarray):
        """Transport ``a`` along the geodesic exp(x, s v), s in [0, 1].

        Returns (vectors at the endpoint, status).
        """
        raise NotImplementedError

    def samples(self, x: np.ndarray, v: np.ndarray, count: int):
        """Points and velocities at ``count + 1`` uniform fractions of a geodesic."""
        ts = np.linspace(0.0, 1.0, count + 1)
        pts = []
        vels = []
        for t in ts:
            if t == 0.0:
                pts.append(np.array(x, dtype=float))
                vels.append(np.array(v, dtype=float))
                continue
            y, w, _ = self.exp(x[None], (t * v)[None])
            pts.append(y[0])
            vels.append(w[0] / t)
        return np.array(pts), np.array(vels), True

    def distance_lower_bound(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Cheap lower bound on d(x, y); exact by default."""
        x = np.broadcast_to(np.asarray(x, dtype=float), np.shape(y))
        shape = np.shape(y)
        v, _, _, _ = self.log(x.reshape(-1, shape[-1]), np.asarray(y, dtype=float).reshape(-1, shape[-1]))
        return self.norm(x.reshape(-1, shape[-1]), v).reshape(shape[:-1])

    def in_working_region(self, x: np.ndarray) -> np.ndarray:
        return np.ones(np.shape(x)[:-1], dtype=bool)

    def working_region_diameter(self) -> float:
        return 1.0

    def embed(self, x: np.ndarray) -> np.ndarray:
        """Ambient coordinates for drawing and Hausdorff comparisons."""
        return np.asarray(x, dtype=float)

    def covariant_acceleration(self, pts: np.ndarray, h: float) -> np.ndarray:
        """Norm of D_t gamma' at interior samples of a uniformly sampled curve.

        Uses fourth-order central differences in model coordinates; returns
        an array of length len(pts) - 4.
        """
        d1 = (pts[:-4] - 8 * pts[1:-3] + 8 * pts[3:-1] - pts[4:]) / (12 * h)
        d2 = (-pts[:-4] + 16 * pts[1:-3] - 30 * pts[2:-2] + 16 * pts[3:-1] - pts[4:]) / (12 * h * h)
        x = pts[2:-2]
        acc = self._covariant(x, d1, d2)
        return self.norm(x, acc)

    def _covariant(self, x, d1, d2):
        out = np.empty_like(d2)
        for i in range(len(x)):
            coords, cid = self.from_model(x[i])
            gam = self.christoffel_chart(coords, cid)
            out[i] = d2[i] + np.einsum("kij,i,j->k", gam, d1[i], d1[i])
        return out

    def describe(self) -> dict:
        return {"kind": self.kind}


def integrate_chart_geodesic(m: Manifold, coords, comps, t: float = 1.0, steps: int = 2000, chart_id: int = 0):
    """Plain RK4 on the chart geodesic equation using ``christoffel_chart``.

    Independent of every closed form and compiled kernel; used to cross-check
    them.  Returns (coords, velocity) at parameter t.
    """
    x = np.asarray(coords, dtype=float).copy()
    v = np.asarray(comps, dtype=float).copy()
    h = t / steps

    def rhs(x, v):
        gam = m.christoffel_chart(x, chart_id)
        return v, -np.einsum("kij,i,j->k", gam, v, v)

    for _ in range(steps):
        k1x, k1v = rhs(x, v)
        k2x, k2v = rhs(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
        k3x, k3v = rhs(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
        k4x, k4v = rhs(x + h * k3x, v + h * k3v)
        x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return x, v
