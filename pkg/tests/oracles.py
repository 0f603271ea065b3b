"""Independent reference computations used by the tests."""

import math

import numpy as np
from scipy.integrate import solve_ivp


def rot_metric_oracle(rho, drho):
    """Christoffel right-hand side of the (u, phi) geodesic equation for a profile rho(u)."""

    def rhs(t, y):
        u, phi, du, dphi = y
        r, rp = rho(u), drho(u)
        g11 = 1.0 + rp * rp
        # d/du (1 + rho'^2) = 2 rho' rho''; use a centered difference for rho''
        h = 1e-5
        rpp = (drho(u + h) - drho(u - h)) / (2 * h)
        ddu = -(rp * rpp * du * du - r * rp * dphi * dphi) / g11
        ddphi = -2.0 * rp / r * du * dphi
        return [du, dphi, ddu, ddphi]

    return rhs


def sech_rho(u):
    return 1.0 / math.cosh(u)


def sech_drho(u):
    return -math.tanh(u) / math.cosh(u)


def hyperbola_rho(u):
    return 1.0 / u


def hyperbola_drho(u):
    return -1.0 / (u * u)


def random_close_points(rng, m, n, scale):
    """n pairs (x, y) of model points with chart separation about ``scale``."""
    xs, ys = [], []
    for _ in range(n):
        if m.kind == "round_sphere":
            th = rng.uniform(0.4, math.pi - 0.4)
            ph = rng.uniform(0, 2 * math.pi)
            a = m.to_model([th, ph])
            b = m.to_model([th + rng.uniform(-scale, scale), (ph + rng.uniform(-scale, scale)) % (2 * math.pi)])
        elif m.kind == "surface_of_revolution":
            u = rng.uniform(m.u_min + 0.5, m.u_max - 0.5)
            ph = rng.uniform(0, 2 * math.pi)
            a = np.array([u, ph])
            b = np.array([u + rng.uniform(-scale, scale), (ph + rng.uniform(-scale, scale)) % (2 * math.pi)])
        elif m.kind == "flat_torus":
            a = rng.uniform(0, 1, 2)
            b = m.normalize(a + rng.uniform(-scale, scale, 2))
        else:
            a = rng.uniform(-3, 3, 2)
            b = a + rng.uniform(-scale, scale, 2)
        xs.append(a)
        ys.append(b)
    return np.array(xs), np.array(ys)


def ivp_geodesic(rho, drho, u0, phi0, du0, dphi0, t):
    """Endpoint (u, phi, du, dphi) of a rotation-surface geodesic from scipy's RK45 at tight tolerance."""
    sol = solve_ivp(rot_metric_oracle(rho, drho), (0.0, t), [u0, phi0, du0, dphi0], rtol=1e-11, atol=1e-12)
    return sol.y[:, -1]


def clairaut_constant(rho, u, du, dphi, drho):
    """rho^2 dphi / |v|: conserved along geodesics of a rotation surface."""
    r = rho(u)
    speed = math.sqrt((1 + drho(u) ** 2) * du * du + r * r * dphi * dphi)
    return r * r * dphi / speed


def sphere_from_angles(theta, phi):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
