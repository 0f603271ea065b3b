"""Curve-shortening flow on geodesic flowers and cages over Riemannian surfaces."""

__version__ = "0.1.0"
