import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import (
    clairaut_constant,
    hyperbola_drho,
    hyperbola_rho,
    ivp_geodesic,
    random_close_points,
    sech_drho,
    sech_rho,
)

from flowerflow.errors import DomainError, RegionExit
from flowerflow.manifold import (
    FlatTorus,
    Point,
    RoundSphere,
    SurfaceOfRevolution,
    TangentVector,
    distance,
    geodesic_shoot,
    make_manifold,
    metric_at,
    minimizing_geodesic,
    parallel_transport,
    segment_from_model,
)

# -- metric ------------------------------------------------------------------------


def test_plane_metric_is_identity_TRIVIAL(plane):
    assert np.array_equal(metric_at(plane, Point((0.3, -2.0))), np.eye(2))


def test_sphere_metric_chart_form_TRIVIAL(sphere):
    th = 0.7
    g = metric_at(sphere, Point((th, 1.1)))
    assert np.allclose(g, np.diag([1.0, math.sin(th) ** 2]), atol=1e-15)


def test_revolution_metric_induced_form_TRIVIAL(sech):
    u = 0.8
    g = metric_at(sech, Point((u, 2.0)))
    assert np.allclose(g, np.diag([1.0 + sech_drho(u) ** 2, sech_rho(u) ** 2]), rtol=1e-13)


def test_metric_outside_chart_raises(sphere, hyperbola):
    with pytest.raises(DomainError):
        metric_at(sphere, Point((-0.1, 0.0)))
    with pytest.raises(DomainError):
        metric_at(hyperbola, Point((-1.0, 0.0)))
    with pytest.raises(DomainError):
        metric_at(hyperbola, Point((1.0, 7.0)))


def test_metric_positive_on_random_points_DERIVED(plane, sphere, torus, sech, hyperbola):
    rng = np.random.default_rng(3)
    for m in (plane, sphere, torus, sech, hyperbola):
        for _ in range(1000):
            if m.kind == "round_sphere":
                c = (rng.uniform(0.01, math.pi - 0.01), rng.uniform(0, 2 * math.pi))
            elif m.kind == "surface_of_revolution":
                c = (rng.uniform(m.u_min, m.u_max), rng.uniform(0, 2 * math.pi))
            elif m.kind == "flat_torus":
                c = tuple(rng.uniform(0, 1, 2))
            else:
                c = tuple(rng.uniform(-5, 5, 2))
            g = metric_at(m, Point(c))
            assert np.allclose(g, g.T)
            assert np.linalg.eigvalsh(g).min() > 0


# -- shooting --------------------------------------------------------------------------


def test_plane_shoot_straight_line_TRIVIAL(plane):
    p = Point((0.0, 0.0))
    q, w = geodesic_shoot(plane, p, TangentVector(p, (1.0, 0.0)), 2.0)
    assert np.allclose(q.coords, (2.0, 0.0))
    assert np.allclose(w.components, (1.0, 0.0))


def test_sphere_half_great_circle_is_antipodal_TRIVIAL(sphere):
    p = Point((math.pi / 2, 0.0))
    q, _ = geodesic_shoot(sphere, p, TangentVector(p, (0.0, 1.0)), math.pi)
    assert np.allclose(sphere.point_to_model(q), [-1.0, 0.0, 0.0], atol=1e-9)


def test_sech_waist_is_closed_geodesic_TRIVIAL(sech):
    p = Point((0.0, 0.5))
    q, w = geodesic_shoot(sech, p, TangentVector(p, (0.0, 1.0)), 2 * math.pi)
    assert abs(q.coords[0]) < 1e-9
    assert abs(((q.coords[1] - 0.5 + math.pi) % (2 * math.pi)) - math.pi) < 1e-9


@pytest.mark.parametrize("which", ["sech", "hyperbola"])
def test_revolution_shoot_matches_ivp_oracle_DERIVED(which, sech, hyperbola):
    m, rho, drho, u0 = (sech, sech_rho, sech_drho, 0.3) if which == "sech" else (hyperbola, hyperbola_rho, hyperbola_drho, 1.5)
    rng = np.random.default_rng(11)
    for _ in range(10):
        du, dphi = rng.normal(size=2)
        t = rng.uniform(0.2, 1.0)
        p = Point((u0, 1.0))
        q, w = geodesic_shoot(m, p, TangentVector(p, (du, dphi)), t)
        ref = ivp_geodesic(rho, drho, u0, 1.0, du, dphi, t)
        assert abs(q.coords[0] - ref[0]) < 1e-7
        assert abs(((q.coords[1] - ref[1] + math.pi) % (2 * math.pi)) - math.pi) < 1e-7
        assert np.allclose(w.components, ref[2:], atol=1e-6)


def test_clairaut_constant_conserved_along_samples_DERIVED(sech):
    x = np.array([0.4, 0.0])
    v = np.array([0.9, 0.7])
    seg = segment_from_model(sech, x, v, count=33)
    pts, vels, ok = sech.samples(x, v, 33)
    assert ok
    c0 = clairaut_constant(sech_rho, x[0], v[0], v[1], sech_drho)
    for q, w in zip(pts, vels):
        assert abs(clairaut_constant(sech_rho, q[0], w[0], w[1], sech_drho) - c0) < 1e-8
    assert seg.length == pytest.approx(float(sech.norm(x, v)))


def test_shoot_out_of_region_reports_exit(hyperbola):
    p = Point((0.5, 0.0))
    with pytest.raises(RegionExit) as ei:
        geodesic_shoot(hyperbola, p, TangentVector(p, (-1.0, 0.0)), 2.0)
    assert ei.value.point is not None


@given(st.floats(0.3, 2.8), st.floats(0, 6.28), st.floats(-1, 1), st.floats(-1, 1), st.floats(0.1, 1.0))
def test_speed_conserved_along_shoot(th, ph, a, b, t):
    m = RoundSphere()
    if abs(a) + abs(b) < 1e-3:
        return
    p = Point((th, ph))
    v = TangentVector(p, (a, b))
    q, w = geodesic_shoot(m, p, v, t)
    s0 = float(m.norm(m.point_to_model(p), m.tangent_to_model(v)))
    s1 = float(m.norm(m.point_to_model(q), m.tangent_to_model(w)))
    assert abs(s1 - s0) <= 1e-6 * s0


@given(st.floats(-2.5, 2.5), st.floats(0, 6.28), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0.3, 1.0))
def test_speed_conserved_on_sech(u, ph, a, b, t):
    m = SurfaceOfRevolution("sech_bulge")
    if abs(a) + abs(b) < 1e-3:
        return
    p = Point((u, ph))
    v = TangentVector(p, (a, b))
    try:
        q, w = geodesic_shoot(m, p, v, t)
    except RegionExit:
        return
    s0 = float(m.norm(m.point_to_model(p), m.tangent_to_model(v)))
    s1 = float(m.norm(m.point_to_model(q), m.tangent_to_model(w)))
    assert abs(s1 - s0) <= 1e-6 * s0


# -- two-point problem ---------------------------------------------------------------------


def test_plane_minimizing_length_TRIVIAL(plane):
    seg = minimizing_geodesic(plane, Point((0.0, 0.0)), Point((3.0, 4.0)))
    assert seg.length == pytest.approx(5.0, abs=1e-12)


def test_sphere_equator_arc_TRIVIAL(sphere):
    seg = minimizing_geodesic(sphere, Point((math.pi / 2, 0.0)), Point((math.pi / 2, 0.4)))
    assert seg.length == pytest.approx(0.4, abs=1e-12)


def test_torus_wraparound_TRIVIAL(torus):
    seg = minimizing_geodesic(torus, Point((0.1, 0.1)), Point((0.9, 0.1)))
    assert seg.length == pytest.approx(0.2, abs=1e-12)


def test_minimizing_beyond_half_injectivity_raises(sphere):
    with pytest.raises(DomainError):
        minimizing_geodesic(sphere, Point((math.pi / 2, 0.0)), Point((math.pi / 2, 3.0)))


def test_endpoints_are_exact(sech):
    p, q = Point((0.2, 0.1)), Point((0.25, 0.18))
    seg = minimizing_geodesic(sech, p, q)
    assert seg.samples[0] == p and seg.samples[-1] == q


@pytest.mark.parametrize("kind", ["euclidean_plane", "round_sphere", "flat_torus", "sech_bulge", "hyperbola"])
def test_bvp_ivp_consistency(kind):
    m = make_manifold(kind if kind != "hyperbola" else {"kind": "surface_of_revolution", "profile": "hyperbola", "working_region": [0.25, 6.2]})
    rng = np.random.default_rng(5)
    xs, ys = random_close_points(rng, m, 30, min(0.3, 0.2 * m.injectivity_floor))
    for x, y in zip(xs, ys):
        p, q = m.point_from_model(x), m.point_from_model(y)
        seg = minimizing_geodesic(m, p, q)
        if seg.length < 1e-12:
            continue
        unit = TangentVector(seg.initial_velocity.base, tuple(np.asarray(seg.initial_velocity.components) / seg.length))
        r, _ = geodesic_shoot(m, p, unit, seg.length)
        assert np.linalg.norm(m.point_to_model(r) - m.normalize(y)) < 1e-6 or m.kind == "flat_torus" and np.allclose(
            m.normalize(m.point_to_model(r)), m.normalize(y), atol=1e-6
        )


# -- transport ----------------------------------------------------------------------------


def test_plane_transport_keeps_components_TRIVIAL(plane):
    seg = minimizing_geodesic(plane, Point((0.0, 0.0)), Point((2.0, 1.0)))
    v = TangentVector(Point((0.0, 0.0)), (0.3, -0.7))
    assert np.allclose(parallel_transport(plane, v, seg).components, (0.3, -0.7))


@pytest.mark.parametrize("kind", ["round_sphere", "sech_bulge", "flat_torus"])
def test_self_transport_is_terminal_tangent_TRIVIAL(kind):
    m = make_manifold(kind)
    p = m.point_from_model(m.to_model([1.0, 0.3]) if kind == "round_sphere" else np.array([0.4, 0.3]))
    q = m.point_from_model(m.to_model([1.3, 0.6]) if kind == "round_sphere" else np.array([0.48, 0.36]))
    seg = minimizing_geodesic(m, p, q)
    out = parallel_transport(m, seg.initial_velocity, seg)
    a = m.tangent_to_model(out)
    b = m.tangent_to_model(seg.terminal_velocity)
    assert np.allclose(a, b, atol=1e-8)


def test_transport_base_mismatch_raises(sphere):
    seg = minimizing_geodesic(sphere, Point((1.0, 0.0)), Point((1.2, 0.1)))
    with pytest.raises(DomainError):
        parallel_transport(sphere, TangentVector(Point((1.5, 0.0)), (1.0, 0.0)), seg)


def test_transport_isometry(sech, sphere):
    rng = np.random.default_rng(2)
    for m in (sech, sphere):
        xs, ys = random_close_points(rng, m, 20, min(0.4, 0.2 * m.injectivity_floor))
        for x, y in zip(xs, ys):
            seg = minimizing_geodesic(m, m.point_from_model(x), m.point_from_model(y))
            comps = rng.normal(size=2)
            v = TangentVector(seg.start, tuple(comps))
            w = parallel_transport(m, v, seg)
            n0 = float(m.norm(m.point_to_model(seg.start), m.tangent_to_model(v)))
            n1 = float(m.norm(m.point_to_model(seg.end), m.tangent_to_model(w)))
            assert abs(n1 - n0) <= 1e-8 * n0


def test_octant_holonomy_is_enclosed_area_DERIVED(sphere):
    # around the geodesic triangle (pi/2, 0) -> (pi/2, pi/2) -> north pole the
    # holonomy angle equals the enclosed area pi/2 (Gauss-Bonnet)
    north = sphere.point_from_model(np.array([0.0, 0.0, 1.0]))
    a = Point((math.pi / 2, 0.0))
    b = Point((math.pi / 2, math.pi / 2))
    v = TangentVector(a, (-1.0, 0.0))
    cur = v
    for p, q in ((a, b), (b, north), (north, a)):
        # halve each quarter circle to stay below half the injectivity floor
        mid = sphere.point_from_model(sphere.normalize(sphere.point_to_model(p) + sphere.point_to_model(q)))
        for s, e in ((p, mid), (mid, q)):
            cur = parallel_transport(sphere, cur, minimizing_geodesic(sphere, s, e))
    x = sphere.point_to_model(a)
    w0 = sphere.tangent_to_model(v)
    w1 = sphere.tangent_to_model(cur)
    ang = math.atan2(float(np.dot(np.cross(w0, w1), x)), float(np.dot(w0, w1)))
    assert abs(abs(ang) - math.pi / 2) < 1e-8


# -- distance -----------------------------------------------------------------------------------


def test_distance_examples_TRIVIAL(plane, sphere):
    assert distance(plane, Point((0.0, 0.0)), Point((3.0, 4.0))) == pytest.approx(5.0)
    p = Point((0.7, 0.2))
    assert distance(sphere, p, p) == 0.0
    north = sphere.point_from_model(np.array([0.0, 0.0, 1.0]))
    assert distance(sphere, north, Point((math.pi / 2, 1.0))) == pytest.approx(math.pi / 2, abs=1e-12)


def test_distance_flag_marks_upper_bound(hyperbola):
    d, exact = distance(hyperbola, Point((1.0, 0.0)), Point((1.0, math.pi)), with_flag=True)
    assert not exact
    assert d <= math.pi * 1.0 + 1e-12


@pytest.mark.parametrize("kind", ["euclidean_plane", "round_sphere", "flat_torus", "sech_bulge"])
def test_triangle_inequality(kind):
    m = make_manifold(kind)
    rng = np.random.default_rng(9)
    xs, ys = random_close_points(rng, m, 40, 0.3)
    dim = xs.shape[1]
    for x, y in zip(xs, ys):
        z = m.normalize(y + rng.uniform(-0.2, 0.2, dim))
        p, q, r = (m.point_from_model(m.normalize(w)) for w in (x, y, z))
        assert distance(m, p, r) <= distance(m, p, q) + distance(m, q, r) + 1e-6


# -- registry ----------------------------------------------------------------------------------


def test_registry_forms():
    assert isinstance(make_manifold("flat_torus"), FlatTorus)
    assert make_manifold("sech_bulge").profile_name == "sech_bulge"
    assert make_manifold("surface_of_revolution:catenoid").profile_name == "catenoid"
    m = make_manifold('{"kind": "round_sphere", "radius": 2.0}')
    assert m.radius == 2.0
    with pytest.raises(DomainError):
        make_manifold({"kind": "surface_of_revolution", "profile": "sech_bulge", "params": {"zz": 1}})
    with pytest.raises(DomainError):
        make_manifold("klein_bottle")
