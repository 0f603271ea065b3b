"""SVG figures: chart plots for flat surfaces, orthographic views otherwise."""

from __future__ import annotations

import math

import numpy as np

from .manifold import Manifold, RoundSphere, SurfaceOfRevolution

VIEW_AZIMUTH = math.radians(30.0)
VIEW_ELEVATION = math.radians(20.0)


def project(m: Manifold, pts: np.ndarray) -> np.ndarray:
    """2-d drawing coordinates for model points."""
    pts = np.asarray(pts, dtype=float)
    if not isinstance(m, (RoundSphere, SurfaceOfRevolution)):
        return pts[..., :2]
    e = m.embed(pts) if isinstance(m, SurfaceOfRevolution) else pts
    ca, sa = math.cos(VIEW_AZIMUTH), math.sin(VIEW_AZIMUTH)
    ce, se = math.cos(VIEW_ELEVATION), math.sin(VIEW_ELEVATION)
    x = ca * e[..., 0] - sa * e[..., 1]
    y = sa * e[..., 0] + ca * e[..., 1]
    return np.stack([x, -se * y + ce * e[..., 2]], axis=-1)


def _unwrap_torus(m: Manifold, poly: np.ndarray) -> np.ndarray:
    if m.kind != "flat_torus":
        return poly
    steps = m.shortest_translate(np.diff(poly, axis=0))
    return np.concatenate([poly[:1], poly[0] + np.cumsum(steps, axis=0)])


def write_svg(path, m: Manifold, polylines, title: str = "", points=None, colors=None) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 5))
    n = len(polylines)
    cmap = plt.get_cmap("viridis")
    for i, poly in enumerate(polylines):
        xy = project(m, _unwrap_torus(m, np.asarray(poly)))
        c = colors[i] if colors is not None else cmap(i / max(n - 1, 1))
        ax.plot(xy[:, 0], xy[:, 1], "-", lw=1.0, color=c)
    if points is not None:
        xy = project(m, np.atleast_2d(points))
        ax.plot(xy[:, 0], xy[:, 1], "o", ms=4, color="crimson")
    ax.set_aspect("equal")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
