"""Compiled geodesic kernels for surfaces of revolution in the (u, phi) chart.

The surface is the rotation of the profile radius rho(u) about the axis, with
u the height along the axis, so the metric is diag(1 + rho'(u)^2, rho(u)^2).
All kernels integrate with classical fixed-step RK4; the step count per
geodesic is derived from its metric length so that short segments stay cheap.

Status codes returned by the batch kernels:
    0 ok, 1 left the working region, 2 no convergence, 3 singular Jacobian.
"""

import math

import numpy as np
from numba import njit

HYPERBOLA = 0
SECH_BULGE = 1
PARABOLOID = 2
CATENOID = 3

OK = 0
EXITED = 1
NO_CONVERGENCE = 2
SINGULAR = 3

TWO_PI = 2.0 * math.pi


@njit(cache=True, inline="always")
def profile(pid, prm, u):
    """Return rho, rho', rho'' of the named profile family at height u."""
    if pid == HYPERBOLA:
        c = prm[0]
        return c / u, -c / (u * u), 2.0 * c / (u * u * u)
    elif pid == SECH_BULGE:
        a = prm[0]
        s = 1.0 / math.cosh(u)
        t = math.tanh(u)
        return a * s, -a * s * t, a * s * (t * t - s * s)
    elif pid == PARABOLOID:
        k = prm[0]
        r = math.sqrt(u / k)
        return r, 0.5 / (k * r), -0.25 / (k * k * r * r * r)
    else:
        c = prm[0]
        return c * math.cosh(u / c), math.sinh(u / c), math.cosh(u / c) / c


@njit(cache=True, inline="always")
def _acc(pid, prm, u, du, dp):
    r, r1, r2 = profile(pid, prm, u)
    a = 1.0 + r1 * r1
    return -(r1 * r2 * du * du - r * r1 * dp * dp) / a, -2.0 * r1 / r * du * dp


@njit(cache=True, inline="always")
def _speed(pid, prm, u, du, dp):
    r, r1, _ = profile(pid, prm, u)
    return math.sqrt((1.0 + r1 * r1) * du * du + r * r * dp * dp)


@njit(cache=True, inline="always")
def _nsteps(pid, prm, u, du, dp, h_arc):
    m = int(math.ceil(_speed(pid, prm, u, du, dp) / h_arc))
    if m < 2:
        m = 2
    if m > 100000:
        m = 100000
    return m


@njit(cache=True)
def shoot(pid, prm, u, p, du, dp, m, lo, hi):
    """Integrate the geodesic equation over unit parameter time in m steps.

    Returns (u, phi, u', phi', ok); ok is False when u left [lo, hi], in which
    case the returned state is the last one inside the region.
    """
    h = 1.0 / m
    for _ in range(m):
        a1, b1 = _acc(pid, prm, u, du, dp)
        u2 = u + 0.5 * h * du
        if u2 < lo or u2 > hi:
            return u, p, du, dp, False
        du2 = du + 0.5 * h * a1
        dp2 = dp + 0.5 * h * b1
        a2, b2 = _acc(pid, prm, u2, du2, dp2)
        u3 = u + 0.5 * h * du2
        if u3 < lo or u3 > hi:
            return u, p, du, dp, False
        du3 = du + 0.5 * h * a2
        dp3 = dp + 0.5 * h * b2
        a3, b3 = _acc(pid, prm, u3, du3, dp3)
        u4 = u + h * du3
        if u4 < lo or u4 > hi:
            return u, p, du, dp, False
        du4 = du + h * a3
        dp4 = dp + h * b3
        a4, b4 = _acc(pid, prm, u4, du4, dp4)
        un = u + h / 6.0 * (du + 2.0 * du2 + 2.0 * du3 + du4)
        if un < lo or un > hi:
            return u, p, du, dp, False
        p += h / 6.0 * (dp + 2.0 * dp2 + 2.0 * dp3 + dp4)
        du += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        dp += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        u = un
    return u, p, du, dp, True


@njit(cache=True, inline="always")
def _wrap(d):
    d = d - TWO_PI * math.floor((d + math.pi) / TWO_PI)
    if d <= -math.pi:
        d += TWO_PI
    return d


@njit(cache=True, inline="always")
def _norm_phi(p):
    p = p - TWO_PI * math.floor(p / TWO_PI)
    if p < 0.0:
        p += TWO_PI
    if p >= TWO_PI:
        p -= TWO_PI
    return p


@njit(cache=True)
def exp_batch(pid, prm, X, V, lo, hi, h_arc, refine):
    """Exponential map with terminal velocity for K start points.

    With ``refine`` the step count is doubled until the endpoint moves by
    less than 1e-11 (adaptive refinement of the fixed-step scheme).
    """
    k_count = X.shape[0]
    Y = np.empty_like(X)
    W = np.empty_like(V)
    status = np.zeros(k_count, dtype=np.int64)
    for k in range(k_count):
        m = _nsteps(pid, prm, X[k, 0], V[k, 0], V[k, 1], h_arc)
        u, p, du, dp, ok = shoot(pid, prm, X[k, 0], X[k, 1], V[k, 0], V[k, 1], m, lo, hi)
        if refine and ok:
            for _ in range(12):
                m *= 2
                u2, p2, du2, dp2, ok2 = shoot(pid, prm, X[k, 0], X[k, 1], V[k, 0], V[k, 1], m, lo, hi)
                err = abs(u2 - u) + abs(p2 - p)
                u, p, du, dp, ok = u2, p2, du2, dp2, ok2
                if err < 1e-11 or not ok:
                    break
        Y[k, 0] = u
        Y[k, 1] = _norm_phi(p)
        W[k, 0] = du
        W[k, 1] = dp
        if not ok:
            status[k] = EXITED
    return Y, W, status


@njit(cache=True)
def _initial_guess(pid, prm, x0, x1, d0, d1):
    # second-order guess: chart difference corrected by the Christoffel
    # symbols at the chart midpoint
    um = x0 + 0.5 * d0
    r, r1, r2 = profile(pid, prm, um)
    a = 1.0 + r1 * r1
    guu = r1 * r2 / a
    gpp = -r * r1 / a
    gup = r1 / r
    v0 = d0 + 0.5 * (guu * d0 * d0 + gpp * d1 * d1)
    v1 = d1 + 0.5 * (2.0 * gup * d0 * d1)
    return v0, v1


@njit(cache=True)
def log_batch(pid, prm, X, Y, G, use_guess, lo, hi, h_arc, tol, maxit):
    """Solve the two-point problem x -> y by Newton shooting.

    Returns initial velocities V (the minimizing candidate with metric norm
    equal to its length), terminal velocities W, status codes and final
    chart residuals.  The Jacobian is formed by forward differences and
    reused while Newton contracts quickly.
    """
    k_count = X.shape[0]
    V = np.empty_like(X)
    W = np.empty_like(X)
    status = np.zeros(k_count, dtype=np.int64)
    resid = np.zeros(k_count)
    for k in range(k_count):
        x0 = X[k, 0]
        x1 = X[k, 1]
        d0 = Y[k, 0] - x0
        d1 = _wrap(Y[k, 1] - x1)
        t0 = x0 + d0
        t1 = x1 + d1
        if use_guess:
            v0 = G[k, 0]
            v1 = G[k, 1]
        else:
            v0, v1 = _initial_guess(pid, prm, x0, x1, d0, d1)
        if d0 == 0.0 and d1 == 0.0:
            V[k, 0] = 0.0
            V[k, 1] = 0.0
            W[k, 0] = 0.0
            W[k, 1] = 0.0
            continue
        ja = 1.0
        jb = 0.0
        jc = 0.0
        jd = 1.0
        have_jac = False
        prev = 1e300
        st = NO_CONVERGENCE
        du = 0.0
        dp = 0.0
        f0 = 0.0
        f1 = 0.0
        for it in range(maxit):
            m = _nsteps(pid, prm, x0, v0, v1, h_arc)
            u, p, du, dp, ok = shoot(pid, prm, x0, x1, v0, v1, m, lo, hi)
            if not ok:
                st = EXITED
                break
            f0 = u - t0
            f1 = p - t1
            res = abs(f0) + abs(f1)
            if not have_jac or res > 0.1 * prev:
                scale = 1e-7 * (abs(v0) + abs(v1) + 1e-3)
                ua, pa, _, _, oka = shoot(pid, prm, x0, x1, v0 + scale, v1, m, lo, hi)
                ub, pb, _, _, okb = shoot(pid, prm, x0, x1, v0, v1 + scale, m, lo, hi)
                if not (oka and okb):
                    st = EXITED
                    break
                ja = (ua - u) / scale
                jc = (pa - p) / scale
                jb = (ub - u) / scale
                jd = (pb - p) / scale
                have_jac = True
            det = ja * jd - jb * jc
            if det == 0.0 or not math.isfinite(det):
                st = SINGULAR
                break
            s0 = (jd * f0 - jb * f1) / det
            s1 = (-jc * f0 + ja * f1) / det
            v0 -= s0
            v1 -= s1
            prev = res
            if res < tol:
                # the free correction above already used the last Jacobian;
                # the terminal velocity is updated to first order with it
                st = OK
                break
        V[k, 0] = v0
        V[k, 1] = v1
        W[k, 0] = du
        W[k, 1] = dp
        status[k] = st
        resid[k] = abs(f0) + abs(f1)
    return V, W, status, resid


@njit(cache=True)
def transport_batch(pid, prm, X, V, A, lo, hi, h_arc):
    """Parallel transport A along the geodesics with initial velocities V."""
    k_count = X.shape[0]
    B = np.empty_like(A)
    status = np.zeros(k_count, dtype=np.int64)
    for k in range(k_count):
        u = X[k, 0]
        du = V[k, 0]
        dp = V[k, 1]
        w0 = A[k, 0]
        w1 = A[k, 1]
        m = _nsteps(pid, prm, u, du, dp, h_arc)
        h = 1.0 / m
        ok = True
        for _ in range(m):
            # state (u, du, dp, w0, w1); phi does not enter the coefficients
            r, r1, r2 = profile(pid, prm, u)
            a = 1.0 + r1 * r1
            guu = r1 * r2 / a
            gpp = -r * r1 / a
            gup = r1 / r
            ka_u = du
            ka_du = -(guu * du * du + gpp * dp * dp)
            ka_dp = -2.0 * gup * du * dp
            ka_w0 = -(guu * du * w0 + gpp * dp * w1)
            ka_w1 = -gup * (du * w1 + dp * w0)

            u2 = u + 0.5 * h * ka_u
            du2 = du + 0.5 * h * ka_du
            dp2 = dp + 0.5 * h * ka_dp
            w02 = w0 + 0.5 * h * ka_w0
            w12 = w1 + 0.5 * h * ka_w1
            r, r1, r2 = profile(pid, prm, u2)
            a = 1.0 + r1 * r1
            guu = r1 * r2 / a
            gpp = -r * r1 / a
            gup = r1 / r
            kb_u = du2
            kb_du = -(guu * du2 * du2 + gpp * dp2 * dp2)
            kb_dp = -2.0 * gup * du2 * dp2
            kb_w0 = -(guu * du2 * w02 + gpp * dp2 * w12)
            kb_w1 = -gup * (du2 * w12 + dp2 * w02)

            u3 = u + 0.5 * h * kb_u
            du3 = du + 0.5 * h * kb_du
            dp3 = dp + 0.5 * h * kb_dp
            w03 = w0 + 0.5 * h * kb_w0
            w13 = w1 + 0.5 * h * kb_w1
            r, r1, r2 = profile(pid, prm, u3)
            a = 1.0 + r1 * r1
            guu = r1 * r2 / a
            gpp = -r * r1 / a
            gup = r1 / r
            kc_u = du3
            kc_du = -(guu * du3 * du3 + gpp * dp3 * dp3)
            kc_dp = -2.0 * gup * du3 * dp3
            kc_w0 = -(guu * du3 * w03 + gpp * dp3 * w13)
            kc_w1 = -gup * (du3 * w13 + dp3 * w03)

            u4 = u + h * kc_u
            du4 = du + h * kc_du
            dp4 = dp + h * kc_dp
            w04 = w0 + h * kc_w0
            w14 = w1 + h * kc_w1
            if u4 < lo or u4 > hi or u2 < lo or u2 > hi:
                ok = False
                break
            r, r1, r2 = profile(pid, prm, u4)
            a = 1.0 + r1 * r1
            guu = r1 * r2 / a
            gpp = -r * r1 / a
            gup = r1 / r
            kd_u = du4
            kd_du = -(guu * du4 * du4 + gpp * dp4 * dp4)
            kd_dp = -2.0 * gup * du4 * dp4
            kd_w0 = -(guu * du4 * w04 + gpp * dp4 * w14)
            kd_w1 = -gup * (du4 * w14 + dp4 * w04)

            u += h / 6.0 * (ka_u + 2.0 * kb_u + 2.0 * kc_u + kd_u)
            du += h / 6.0 * (ka_du + 2.0 * kb_du + 2.0 * kc_du + kd_du)
            dp += h / 6.0 * (ka_dp + 2.0 * kb_dp + 2.0 * kc_dp + kd_dp)
            w0 += h / 6.0 * (ka_w0 + 2.0 * kb_w0 + 2.0 * kc_w0 + kd_w0)
            w1 += h / 6.0 * (ka_w1 + 2.0 * kb_w1 + 2.0 * kc_w1 + kd_w1)
        B[k, 0] = w0
        B[k, 1] = w1
        if not ok:
            status[k] = EXITED
    return B, status


@njit(cache=True)
def trajectory(pid, prm, u, p, du, dp, count, lo, hi, h_arc):
    """Sample a geodesic at ``count + 1`` uniform parameter fractions.

    Rows are (u, phi, u', phi'); phi is left unwrapped so consecutive samples
    are continuous.  The second return value is False on region exit.
    """
    out = np.empty((count + 1, 4))
    out[0, 0] = u
    out[0, 1] = p
    out[0, 2] = du
    out[0, 3] = dp
    sub = int(math.ceil(_nsteps(pid, prm, u, du, dp, h_arc) / count))
    if sub < 2:
        sub = 2
    for j in range(count):
        u, p, du, dp, ok = shoot(pid, prm, u, p, du / count, dp / count, sub, lo, hi)
        du *= count
        dp *= count
        out[j + 1, 0] = u
        out[j + 1, 1] = p
        out[j + 1, 2] = du
        out[j + 1, 3] = dp
        if not ok:
            return out[: j + 2], False
    return out, True


@njit(cache=True)
def profile_batch(pid, prm, U):
    """rho, rho', rho'' at every entry of the 1-d array U."""
    out = np.empty((U.shape[0], 3))
    for i in range(U.shape[0]):
        r, r1, r2 = profile(pid, prm, U[i])
        out[i, 0] = r
        out[i, 1] = r1
        out[i, 2] = r2
    return out
