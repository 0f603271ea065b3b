"""Surfaces of revolution rho(u) about the vertical axis, in the (u, phi) chart.

The embedding is (rho(u) cos phi, rho(u) sin phi, u); the induced metric is
diag(1 + rho'(u)^2, rho(u)^2).  Longitude is normalized to [0, 2 pi) and
differences are taken through the seam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from ..errors import DomainError
from . import _revolution_kernels as K
from .base import Manifold

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ProfileFamily:
    pid: int
    params: tuple[str, ...]
    defaults: tuple[float, ...]
    region: tuple[float, float]
    description: str


PROFILES = {
    # z = c / x rotated about the z axis: radius c/u at height u > 0
    "hyperbola": ProfileFamily(K.HYPERBOLA, ("c",), (1.0,), (0.25, 7.0), "rho(u) = c / u"),
    "sech_bulge": ProfileFamily(K.SECH_BULGE, ("a",), (1.0,), (-3.0, 3.0), "rho(u) = a sech(u)"),
    "paraboloid": ProfileFamily(K.PARABOLOID, ("k",), (1.0,), (0.25, 25.0), "rho(u) = sqrt(u / k)"),
    "catenoid": ProfileFamily(K.CATENOID, ("c",), (1.0,), (-3.0, 3.0), "rho(u) = c cosh(u / c)"),
}


class SurfaceOfRevolution(Manifold):
    kind = "surface_of_revolution"

    # arc-length step of the fixed-step integrator and Newton settings
    h_arc = 0.02
    newton_tol = 1e-10
    newton_maxit = 50

    def __init__(self, profile: str, params: dict | None = None, working_region=None, injectivity_floor=None):
        if profile not in PROFILES:
            raise DomainError(f"unknown profile {profile!r}; known: {sorted(PROFILES)}")
        fam = PROFILES[profile]
        self.profile_name = profile
        self.family = fam
        values = dict(zip(fam.params, fam.defaults))
        values.update(params or {})
        unknown = set(values) - set(fam.params)
        if unknown:
            raise DomainError(f"unknown parameters {sorted(unknown)} for profile {profile}")
        self.params = values
        self._prm = np.array([values[k] for k in fam.params], dtype=float)
        lo, hi = working_region if working_region is not None else fam.region
        self.u_min, self.u_max = float(lo), float(hi)
        if not self.u_min < self.u_max:
            raise DomainError("working region must satisfy u_min < u_max")
        if profile in ("hyperbola", "paraboloid") and self.u_min <= 0:
            raise DomainError(f"{profile} requires u_min > 0")
        self._diameter = None
        est_inj, est_conv = self._estimate_floors()
        self.injectivity_floor = float(injectivity_floor) if injectivity_floor is not None else est_inj
        self.convexity_floor = min(est_conv, 0.5 * self.injectivity_floor)

    # -- profile --------------------------------------------------------

    def _profile_array(self, u):
        u = np.asarray(u, dtype=float)
        out = K.profile_batch(self.family.pid, self._prm, np.ascontiguousarray(u.reshape(-1)))
        return out.reshape(u.shape + (3,))

    def rho(self, u):
        return self._profile_array(u)[..., 0]

    def profile_derivatives(self, u: float):
        return K.profile(self.family.pid, self._prm, float(u))

    def gaussian_curvature(self, u):
        pr = self._profile_array(u)
        return -pr[..., 2] / (pr[..., 0] * (1.0 + pr[..., 1] ** 2) ** 2)

    def _estimate_floors(self):
        grid = np.linspace(self.u_min, self.u_max, 2001)
        radii = self.rho(grid)
        kmax = float(np.max(self.gaussian_curvature(grid)))
        # a geodesic loop has to wind around the axis; half its length is
        # at least pi times the smallest parallel radius it can reach
        self._rho_min = float(np.min(radii))
        loop_bound = math.pi * self._rho_min
        conj_bound = math.pi / math.sqrt(kmax) if kmax > 0 else math.inf
        inj = min(loop_bound, conj_bound)
        return inj, 0.5 * inj

    def meridian_arclength(self, u0: float, u1: float) -> float:
        """Arc length of the meridian between heights u0 and u1 (signed order ignored)."""
        a, b = sorted((float(u0), float(u1)))
        if a == b:
            return 0.0

        def speed(s):
            _, r1, _ = K.profile(self.family.pid, self._prm, s)
            return math.sqrt(1.0 + r1 * r1)

        val, _ = integrate.quad(speed, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
        return val

    def height_at_arclength(self, u0: float, s: float, direction: int) -> float:
        """Height reached by walking meridian arc length ``s`` from u0 (direction +1 or -1)."""
        if s <= 0:
            return float(u0)
        bound = self.u_max if direction > 0 else self.u_min
        if self.meridian_arclength(u0, bound) < s:
            return math.inf if direction > 0 else -math.inf
        f = lambda u: self.meridian_arclength(u0, u) - s
        return optimize.brentq(f, min(u0, bound), max(u0, bound), xtol=1e-13)

    # -- chart ----------------------------------------------------------

    def chart_contains(self, coords, chart_id=0):
        u, phi = coords
        if chart_id != 0 or not (0.0 <= phi < TWO_PI):
            return False
        if self.profile_name in ("hyperbola", "paraboloid") and u <= 0:
            return False
        return True

    def metric_chart(self, coords, chart_id=0):
        r, r1, _ = K.profile(self.family.pid, self._prm, float(coords[0]))
        return np.diag([1.0 + r1 * r1, r * r])

    def christoffel_chart(self, coords, chart_id=0):
        r, r1, r2 = K.profile(self.family.pid, self._prm, float(coords[0]))
        a = 1.0 + r1 * r1
        g = np.zeros((2, 2, 2))
        g[0, 0, 0] = r1 * r2 / a
        g[0, 1, 1] = -r * r1 / a
        g[1, 0, 1] = g[1, 1, 0] = r1 / r
        return g

    def to_model(self, coords, chart_id=0):
        c = np.asarray(coords, dtype=float).copy()
        c[..., 1] = np.mod(c[..., 1], TWO_PI)
        return c

    # -- geometry -------------------------------------------------------

    def _coeffs(self, u):
        pr = self._profile_array(u)
        return 1.0 + pr[..., 1] ** 2, pr[..., 0] ** 2

    def inner(self, x, a, b):
        x = np.asarray(x, dtype=float)
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        ga, gb = self._coeffs(x[..., 0])
        return ga * a[..., 0] * b[..., 0] + gb * a[..., 1] * b[..., 1]

    def normalize(self, x):
        x = np.array(x, dtype=float)
        x[..., 1] = np.mod(x[..., 1], TWO_PI)
        return x

    @staticmethod
    def _flat(arr):
        arr = np.asarray(arr, dtype=float)
        return np.ascontiguousarray(arr.reshape(-1, 2)), arr.shape

    def exp(self, x, v, refine=False):
        xf, shape = self._flat(x)
        vf, _ = self._flat(v)
        y, w, st = K.exp_batch(self.family.pid, self._prm, xf, vf, self.u_min, self.u_max, self.h_arc, refine)
        return y.reshape(shape), w.reshape(shape), st.reshape(shape[:-1])

    def log(self, x, y, guess=None):
        xf, shape = self._flat(x)
        yf, _ = self._flat(y)
        if guess is None:
            gf = np.zeros_like(xf)
            use = False
        else:
            gf, _ = self._flat(guess)
            use = True
        v, w, st, res = K.log_batch(
            self.family.pid, self._prm, xf, yf, gf, use, self.u_min, self.u_max, self.h_arc, self.newton_tol, self.newton_maxit
        )
        return v.reshape(shape), w.reshape(shape), st.reshape(shape[:-1]), res.reshape(shape[:-1])

    def transport(self, x, v, a):
        xf, shape = self._flat(x)
        vf, _ = self._flat(v)
        af, _ = self._flat(a)
        b, st = K.transport_batch(self.family.pid, self._prm, xf, vf, af, self.u_min, self.u_max, self.h_arc)
        return b.reshape(shape), st.reshape(shape[:-1])

    def samples(self, x, v, count):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        out, ok = K.trajectory(self.family.pid, self._prm, x[0], x[1], v[0], v[1], int(count), self.u_min, self.u_max, self.h_arc / 4)
        return out[:, :2], out[:, 2:], bool(ok)

    def distance_lower_bound(self, x, y):
        # meridian speed is at least 1 and every path sweeps the longitude gap
        # at radius no smaller than the working-region minimum
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        du = np.abs(y[..., 0] - x[..., 0])
        dphi = np.abs(np.mod(y[..., 1] - x[..., 1] + math.pi, TWO_PI) - math.pi)
        return np.maximum(du, self._rho_min * dphi)

    def in_working_region(self, x):
        u = np.asarray(x)[..., 0]
        return (u >= self.u_min) & (u <= self.u_max)

    def working_region_diameter(self):
        if self._diameter is None:
            r_max = float(np.max(self.rho(np.linspace(self.u_min, self.u_max, 401))))
            self._diameter = self.meridian_arclength(self.u_min, self.u_max) + math.pi * r_max
        return self._diameter

    def embed(self, x):
        x = np.asarray(x, dtype=float)
        r = self.rho(x[..., 0])
        return np.stack([r * np.cos(x[..., 1]), r * np.sin(x[..., 1]), x[..., 0]], axis=-1)

    def describe(self):
        return {
            "kind": self.kind,
            "profile": self.profile_name,
            "params": dict(self.params),
            "working_region": [self.u_min, self.u_max],
        }
