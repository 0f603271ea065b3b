"""Build manifolds from string ids or JSON parameter blocks."""

from __future__ import annotations

import json

from ..errors import DomainError
from .base import Manifold
from .flat import EuclideanPlane, FlatTorus
from .revolution import PROFILES, SurfaceOfRevolution
from .sphere import RoundSphere


def _from_dict(d: dict) -> Manifold:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind is None:
        raise DomainError("manifold description needs a 'kind'")
    try:
        if kind == "euclidean_plane":
            return EuclideanPlane(**d)
        if kind == "round_sphere":
            return RoundSphere(**d)
        if kind == "flat_torus":
            return FlatTorus(**d)
        if kind == "surface_of_revolution":
            profile = d.pop("profile", None)
            if profile is None:
                raise DomainError("surface_of_revolution needs a 'profile'")
            return SurfaceOfRevolution(profile, **d)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {kind}: {exc}") from None
    if kind in PROFILES:
        return SurfaceOfRevolution(kind, **d)
    raise DomainError(f"unknown manifold kind {kind!r}")


def make_manifold(desc) -> Manifold:
    """Accepts a Manifold, a dict, a JSON string or a bare id.

    Bare ids are the kind names ("round_sphere", "flat_torus", ...) or a
    profile name ("sech_bulge", "hyperbola", ...), optionally written as
    "surface_of_revolution:<profile>".
    """
    if isinstance(desc, Manifold):
        return desc
    if isinstance(desc, dict):
        return _from_dict(desc)
    if not isinstance(desc, str):
        raise DomainError(f"cannot build a manifold from {type(desc).__name__}")
    text = desc.strip()
    if text.startswith("{"):
        return _from_dict(json.loads(text))
    if text.startswith("surface_of_revolution:"):
        return SurfaceOfRevolution(text.split(":", 1)[1])
    if text in PROFILES:
        return SurfaceOfRevolution(text)
    return _from_dict({"kind": text})
