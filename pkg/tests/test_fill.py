import json
import math

import numpy as np
import pytest

from flowerflow.errors import DomainError, PreconditionError
from flowerflow.fill import DiskFilling, NoFilling, boundary_curve, escape_onset, fill_2cage, sheets_inside_ball
from flowerflow.flow import FlowConfig
from flowerflow.nets import equator_petal, round_loop, triangle_cage


@pytest.fixture(scope="module")
def plane_filling(plane):
    cfg = FlowConfig.create(plane, L=0.33, delta=0.01)
    return fill_2cage(plane, round_loop(plane, [0.0, 0.0], 0.05, cfg.N), cfg), cfg


def test_round_loop_apex_at_center_TRIVIAL(plane_filling):
    f, _ = plane_filling
    assert f.apex_is_point
    assert np.linalg.norm(np.asarray(f.apex.coords)) <= 1e-3


def test_plane_sheets_monotone_and_shrink(plane_filling):
    f, cfg = plane_filling
    lens = f.sheet_lengths()
    assert np.all(np.diff(lens) <= 0)
    assert lens[0] == pytest.approx(2 * math.pi * 0.05, rel=5e-3)
    assert np.array_equal(f.sheets[0][1], f.boundary)
    ss = [s for s, _ in f.sheets]
    assert ss[0] == 0.0 and ss[-1] == 1.0 and np.all(np.diff(ss) >= 0)
    last = f.sheets[-1][1]
    assert np.max(np.linalg.norm(last - last.mean(axis=0), axis=1)) < cfg.I / 100


def test_plane_filling_is_local_DERIVED(plane, plane_filling):
    # a shortening curve in the plane never leaves the disk around its own boundary
    f, _ = plane_filling
    assert sheets_inside_ball(plane, f, [0.0, 0.0], 0.05)
    assert not sheets_inside_ball(plane, f, [0.0, 0.0], 0.04)


def test_filling_json(plane_filling):
    f, _ = plane_filling
    doc = json.loads(json.dumps(f.to_json()))
    assert set(doc) == {"manifold", "boundary", "sheets", "apex"}
    assert len(doc["sheets"]) == len(f.sheets)
    assert doc["apex"] == list(f.apex.coords)


def test_constant_cage_single_sheet_TRIVIAL(sphere):
    p = [0.0, 0.6, 0.8]
    c = triangle_cage(sphere, [p, p, p])
    f = fill_2cage(sphere, c, FlowConfig.create(sphere, L=1.0, delta=0.2))
    assert len(f.sheets) == 1
    assert f.apex_is_point and np.allclose(sphere.point_to_model(f.apex), p)
    assert f.outcome is None


def test_triangle_cage_fills_to_point(plane):
    c = triangle_cage(plane, [[0.0, 0.0], [0.06, 0.0], [0.0, 0.06]], 0.01)
    cfg = FlowConfig.create(plane, L=0.25, delta=0.01)
    f = fill_2cage(plane, c, cfg)
    assert f.apex_is_point
    assert np.all(np.diff(f.sheet_lengths()) <= 0)
    # the apex lies inside the triangle
    x, y = f.apex.coords
    assert x >= 0 and y >= 0 and x + y <= 0.06


def test_boundary_curve_of_cage(plane):
    c = triangle_cage(plane, [[0, 0], [1, 0], [0, 1]], 0.25)
    bc = boundary_curve(plane, c)
    assert bc.length == pytest.approx(2 + math.sqrt(2), abs=1e-12)
    assert np.allclose(bc.points[0], bc.points[-1])
    assert np.allclose(bc.points[0], [0, 0])
    with pytest.raises(DomainError):
        boundary_curve(plane, "not a cage")


def test_curve_longer_than_L_is_rejected(plane):
    cfg = FlowConfig.create(plane, L=0.1, delta=0.01)
    with pytest.raises(PreconditionError):
        fill_2cage(plane, round_loop(plane, [0, 0], 0.05, 40), cfg)


def test_stationary_flow_gives_no_filling(sphere):
    cfg = FlowConfig.create(sphere, L=7.5, delta=0.4)
    with pytest.raises(NoFilling) as ei:
        fill_2cage(sphere, equator_petal(sphere, cfg.N, 0.0), cfg)
    assert ei.value.outcome.kind == "StationaryFlower"


def test_hyperbola_escape_filling_DERIVED(hyperbola, hyperbola_ends, hyperbola_filling):
    f, _ = hyperbola_filling
    assert not f.apex_is_point and f.apex == "narrow"
    assert np.all(np.diff(f.sheet_lengths()) <= 0)
    s0, end = escape_onset(f, hyperbola_ends)
    assert end == "narrow" and s0 < 1.0
    late = [poly for s, poly in f.sheets if s >= s0]
    assert len(late) >= 2
    for poly in late:
        assert np.all(hyperbola_ends.core_distance_model(poly) > 0)
    # the boundary itself sits inside the narrow end, so every sheet does
    for _, poly in f.sheets:
        assert np.all(poly[:, 0] > 1.0)


def test_escape_onset_none_when_last_sheet_in_core_TRIVIAL(plane):
    from flowerflow.ends import EndsDecomposition, Sigma

    dec = EndsDecomposition(plane, (Sigma(1.0, "+"),), 0.05)
    loop = round_loop(plane, [0, 0], 0.05, 10).vertices(0)
    f = DiskFilling(plane, loop, [(0.0, loop)], None)
    assert escape_onset(f, dec) == (None, None)
