"""Flat surfaces: the Euclidean plane and flat tori R^2 / lattice."""

from __future__ import annotations

import itertools
import math

import numpy as np

from .base import Manifold


class EuclideanPlane(Manifold):
    kind = "euclidean_plane"

    def __init__(self, working_radius: float = 10.0):
        self.working_radius = float(working_radius)
        self.injectivity_floor = math.inf
        self.convexity_floor = math.inf

    def chart_contains(self, coords, chart_id=0):
        return chart_id == 0 and bool(np.all(np.isfinite(coords)))

    def metric_chart(self, coords, chart_id=0):
        return np.eye(2)

    def christoffel_chart(self, coords, chart_id=0):
        return np.zeros((2, 2, 2))

    def inner(self, x, a, b):
        return np.sum(np.asarray(a) * np.asarray(b), axis=-1)

    def exp(self, x, v, refine=False):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        return x + v, v.copy(), np.zeros(x.shape[:-1], dtype=np.int64)

    def log(self, x, y, guess=None):
        d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        shape = d.shape[:-1]
        return d, d.copy(), np.zeros(shape, dtype=np.int64), np.zeros(shape)

    def transport(self, x, v, a):
        a = np.asarray(a, dtype=float)
        return a.copy(), np.zeros(a.shape[:-1], dtype=np.int64)

    def samples(self, x, v, count):
        t = np.linspace(0.0, 1.0, count + 1)[:, None]
        pts = np.asarray(x)[None, :] + t * np.asarray(v)[None, :]
        return pts, np.repeat(np.asarray(v, dtype=float)[None, :], count + 1, axis=0), True

    def in_working_region(self, x):
        return np.linalg.norm(np.asarray(x), axis=-1) <= self.working_radius

    def working_region_diameter(self):
        return 2.0 * self.working_radius

    def _covariant(self, x, d1, d2):
        return d2

    def describe(self):
        return {"kind": self.kind, "working_radius": self.working_radius}


class FlatTorus(Manifold):
    """R^2 modulo the lattice spanned by the rows of ``lattice``.

    Chart coordinates are Cartesian coordinates in the covering plane; model
    coordinates are reduced into the fundamental parallelogram.  Minimizing
    geodesics use the shortest lattice translate of the displacement.
    """

    kind = "flat_torus"

    def __init__(self, lattice=((1.0, 0.0), (0.0, 1.0))):
        self.lattice = np.asarray(lattice, dtype=float)
        if self.lattice.shape != (2, 2) or abs(np.linalg.det(self.lattice)) < 1e-12:
            raise ValueError("lattice must be two independent vectors")
        self._inv = np.linalg.inv(self.lattice)
        offsets = np.array(list(itertools.product((-1, 0, 1), repeat=2)), dtype=float)
        self._offsets = offsets @ self.lattice
        vecs = [self.lattice[0], self.lattice[1], self.lattice[0] + self.lattice[1], self.lattice[0] - self.lattice[1]]
        self.systole = float(min(np.linalg.norm(v) for v in vecs))
        self.injectivity_floor = 0.5 * self.systole
        self.convexity_floor = 0.25 * self.systole

    def chart_contains(self, coords, chart_id=0):
        return chart_id == 0 and bool(np.all(np.isfinite(coords)))

    def metric_chart(self, coords, chart_id=0):
        return np.eye(2)

    def christoffel_chart(self, coords, chart_id=0):
        return np.zeros((2, 2, 2))

    def normalize(self, x):
        x = np.asarray(x, dtype=float)
        s = x @ self._inv
        s = s - np.floor(s)
        s[s >= 1.0] = 0.0
        return s @ self.lattice

    def to_model(self, coords, chart_id=0):
        return self.normalize(np.asarray(coords, dtype=float))

    def inner(self, x, a, b):
        return np.sum(np.asarray(a) * np.asarray(b), axis=-1)

    def shortest_translate(self, d):
        d = np.asarray(d, dtype=float)
        s = d @ self._inv
        d0 = (s - np.round(s)) @ self.lattice
        cand = d0[..., None, :] + self._offsets
        idx = np.argmin(np.sum(cand * cand, axis=-1), axis=-1)
        return np.take_along_axis(cand, idx[..., None, None], axis=-2)[..., 0, :]

    def exp(self, x, v, refine=False):
        v = np.asarray(v, dtype=float)
        return self.normalize(np.asarray(x, dtype=float) + v), v.copy(), np.zeros(v.shape[:-1], dtype=np.int64)

    def log(self, x, y, guess=None):
        d = self.shortest_translate(np.asarray(y, dtype=float) - np.asarray(x, dtype=float))
        shape = d.shape[:-1]
        return d, d.copy(), np.zeros(shape, dtype=np.int64), np.zeros(shape)

    def transport(self, x, v, a):
        a = np.asarray(a, dtype=float)
        return a.copy(), np.zeros(a.shape[:-1], dtype=np.int64)

    def samples(self, x, v, count):
        # unwrapped, so finite differences along the sample list stay valid
        t = np.linspace(0.0, 1.0, count + 1)[:, None]
        pts = np.asarray(x)[None, :] + t * np.asarray(v)[None, :]
        return pts, np.repeat(np.asarray(v, dtype=float)[None, :], count + 1, axis=0), True

    def working_region_diameter(self):
        corners = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float) @ self.lattice
        return float(max(np.linalg.norm(c1 - c2) for c1 in corners for c2 in corners))

    def _covariant(self, x, d1, d2):
        return d2

    def describe(self):
        return {"kind": self.kind, "lattice": self.lattice.tolist()}
