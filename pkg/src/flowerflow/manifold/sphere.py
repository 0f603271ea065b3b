"""Round sphere of radius R with two rotated colatitude/longitude charts.

Chart 0 is the usual (theta, phi) chart with poles on the z axis.  Chart 1
uses the same formulas with the pole axis moved to x, so that points near
the chart-0 poles have regular coordinates.  ``from_model`` picks chart 0
whenever sin(theta) >= 1/2.  Geodesics, logarithms and transport are closed
form great-circle formulas on the embedding.
"""

from __future__ import annotations

import math

import numpy as np

from .base import Manifold

TWO_PI = 2.0 * math.pi
_SWITCH = 0.5


def _chart_embed(theta, phi, chart_id):
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    if chart_id == 0:
        return np.stack([st * cp, st * sp, ct], axis=-1)
    return np.stack([ct, st * cp, st * sp], axis=-1)


def _chart_frame(theta, phi, chart_id):
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    if chart_id == 0:
        d_theta = np.stack([ct * cp, ct * sp, -st], axis=-1)
        d_phi = np.stack([-st * sp, st * cp, np.zeros_like(st)], axis=-1)
    else:
        d_theta = np.stack([-st, ct * cp, ct * sp], axis=-1)
        d_phi = np.stack([np.zeros_like(st), -st * sp, st * cp], axis=-1)
    return d_theta, d_phi


class RoundSphere(Manifold):
    kind = "round_sphere"
    model_dim = 3

    def __init__(self, radius: float = 1.0):
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        self.injectivity_floor = math.pi * self.radius
        self.convexity_floor = 0.5 * math.pi * self.radius

    # -- chart ----------------------------------------------------------

    def chart_contains(self, coords, chart_id=0):
        theta, phi = coords
        return chart_id in (0, 1) and 0.0 < theta < math.pi and 0.0 <= phi < TWO_PI

    def metric_chart(self, coords, chart_id=0):
        theta = coords[0]
        r2 = self.radius**2
        return np.diag([r2, r2 * math.sin(theta) ** 2])

    def christoffel_chart(self, coords, chart_id=0):
        theta = coords[0]
        g = np.zeros((2, 2, 2))
        g[0, 1, 1] = -math.sin(theta) * math.cos(theta)
        g[1, 0, 1] = g[1, 1, 0] = math.cos(theta) / math.sin(theta)
        return g

    # -- conversions ----------------------------------------------------

    def to_model(self, coords, chart_id=0):
        c = np.asarray(coords, dtype=float)
        return self.radius * _chart_embed(c[..., 0], c[..., 1], chart_id)

    def from_model(self, x):
        u = np.asarray(x, dtype=float) / self.radius
        u = u / np.linalg.norm(u)
        if math.hypot(u[0], u[1]) >= _SWITCH:
            theta = math.acos(max(-1.0, min(1.0, u[2])))
            phi = math.atan2(u[1], u[0]) % TWO_PI
            return np.array([theta, phi]), 0
        theta = math.acos(max(-1.0, min(1.0, u[0])))
        phi = math.atan2(u[2], u[1]) % TWO_PI
        return np.array([theta, phi]), 1

    def vector_to_model(self, coords, chart_id, comps):
        dt, dp = _chart_frame(coords[0], coords[1], chart_id)
        return self.radius * (comps[0] * dt + comps[1] * dp)

    def vector_from_model(self, x, w):
        coords, cid = self.from_model(x)
        dt, dp = _chart_frame(coords[0], coords[1], cid)
        dt = self.radius * dt
        dp = self.radius * dp
        w = np.asarray(w, dtype=float)
        comps = np.array([w @ dt / (dt @ dt), w @ dp / (dp @ dp)])
        return coords, cid, comps

    # -- geometry -------------------------------------------------------

    def normalize(self, x):
        x = np.asarray(x, dtype=float)
        return self.radius * x / np.linalg.norm(x, axis=-1, keepdims=True)

    def project_tangent(self, x, a):
        n = np.asarray(x) / self.radius
        return a - np.sum(a * n, axis=-1, keepdims=True) * n

    def inner(self, x, a, b):
        return np.sum(np.asarray(a) * np.asarray(b), axis=-1)

    def exp(self, x, v, refine=False):
        x = np.asarray(x, dtype=float)
        v = self.project_tangent(x, np.asarray(v, dtype=float))
        speed = np.linalg.norm(v, axis=-1, keepdims=True)
        ang = speed / self.radius
        safe = np.where(speed > 0, speed, 1.0)
        e = v / safe
        y = np.cos(ang) * x + self.radius * np.sin(ang) * e
        w = -np.sin(ang) * speed * x / self.radius + np.cos(ang) * v
        y = self.normalize(y)
        return y, w, np.zeros(x.shape[:-1], dtype=np.int64)

    def _frame(self, x, y):
        xu = np.asarray(x, dtype=float) / self.radius
        yu = np.asarray(y, dtype=float) / self.radius
        c = np.clip(np.sum(xu * yu, axis=-1), -1.0, 1.0)
        perp = yu - c[..., None] * xu
        s = np.linalg.norm(perp, axis=-1)
        ang = np.arctan2(s, c)
        safe = np.where(s > 0, s, 1.0)
        e = perp / safe[..., None]
        return xu, e, ang, s

    def log(self, x, y, guess=None):
        xu, e, ang, s = self._frame(x, y)
        dist = self.radius * ang
        v = dist[..., None] * e
        w = dist[..., None] * (-np.sin(ang)[..., None] * xu + np.cos(ang)[..., None] * e)
        status = np.where((s == 0) & (ang > 1.0), 3, 0).astype(np.int64)
        return v, w, status, np.zeros(dist.shape)

    def transport(self, x, v, a):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        a = np.asarray(a, dtype=float)
        xu = x / self.radius
        speed = np.linalg.norm(v, axis=-1, keepdims=True)
        safe = np.where(speed > 0, speed, 1.0)
        e = v / safe
        ang = speed / self.radius
        a_par = np.sum(a * e, axis=-1, keepdims=True)
        a_rad = np.sum(a * xu, axis=-1, keepdims=True)
        rest = a - a_par * e - a_rad * xu
        e_end = -np.sin(ang) * xu + np.cos(ang) * e
        out = a_par * e_end + rest
        out = np.where(speed > 0, out, a)
        return out, np.zeros(x.shape[:-1], dtype=np.int64)

    def samples(self, x, v, count):
        t = np.linspace(0.0, 1.0, count + 1)[:, None]
        xs = np.repeat(np.asarray(x, dtype=float)[None], count + 1, axis=0)
        y, w, _ = self.exp(xs, t * np.asarray(v)[None])
        return y, np.where(t > 0, w / np.where(t > 0, t, 1.0), np.asarray(v)[None]), True

    def working_region_diameter(self):
        return math.pi * self.radius

    def _covariant(self, x, d1, d2):
        return self.project_tangent(x, d2)

    def describe(self):
        return {"kind": self.kind, "radius": self.radius}
