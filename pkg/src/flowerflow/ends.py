"""Core/end decompositions and a sampled check of locally convex ends.

Each separating curve is a level set of an "end coordinate": the height u on
a surface of revolution, the Euclidean radius on the plane.  An end is the
side of one level set named by ``side`` ("+" for larger values).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ScenarioError
from .manifold import EuclideanPlane, Manifold, Point, SurfaceOfRevolution

BAND = 1e-6


@dataclass(frozen=True)
class Sigma:
    level: float
    side: str = "+"
    name: str | None = None

    def __post_init__(self):
        if self.side not in ("+", "-"):
            raise DomainError(f"end side must be '+' or '-', got {self.side!r}")

    @property
    def id(self) -> str:
        return self.name if self.name is not None else self.side

    @property
    def sign(self) -> float:
        return 1.0 if self.side == "+" else -1.0


@dataclass(frozen=True)
class EndsDecomposition:
    manifold: Manifold
    sigmas: tuple = ()
    delta: float = 0.05
    band: float = BAND
    _escape_levels: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        m = self.manifold
        if self.delta <= 0:
            raise DomainError("delta must be positive")
        if len(self.sigmas) > 8:
            raise DomainError("at most 8 ends are supported")
        if self.sigmas and not isinstance(m, (SurfaceOfRevolution, EuclideanPlane)):
            raise DomainError(f"separating curves are not supported on {m.kind}")
        lo, hi = self.coordinate_range()
        for s in self.sigmas:
            if not lo < s.level < hi:
                raise DomainError(f"sigma level {s.level} lies outside the working region ({lo}, {hi})")
        # the core must be nonempty: some coordinate value lies on no end side
        grid = np.linspace(lo, hi, 4001)[1:-1]
        inside = np.ones_like(grid, dtype=bool)
        for s in self.sigmas:
            inside &= s.sign * (grid - s.level) <= 0
        if not inside.any():
            raise DomainError("the ends cover the whole working region; the core is empty")
        for i, s in enumerate(self.sigmas):
            for t in self.sigmas[i + 1 :]:
                both = (s.sign * (grid - s.level) > 0) & (t.sign * (grid - t.level) > 0)
                if both.any():
                    raise DomainError(f"ends {s.id} and {t.id} overlap")

    # -- coordinates ------------------------------------------------------

    def coordinate_range(self):
        m = self.manifold
        if isinstance(m, SurfaceOfRevolution):
            return m.u_min, m.u_max
        if isinstance(m, EuclideanPlane):
            return 0.0, m.working_radius
        return -math.inf, math.inf

    def coordinate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if isinstance(self.manifold, SurfaceOfRevolution):
            return x[..., 0]
        return np.linalg.norm(x, axis=-1)

    def depth(self, x, i: int) -> np.ndarray:
        """Signed coordinate distance into end i (negative on the core side)."""
        s = self.sigmas[i]
        return s.sign * (self.coordinate(x) - s.level)

    def end_index(self, sid) -> int:
        for i, s in enumerate(self.sigmas):
            if s.id == sid or str(i) == str(sid):
                return i
        raise DomainError(f"unknown end {sid!r}")

    def sigma_radius(self, i: int) -> float:
        m = self.manifold
        lev = self.sigmas[i].level
        if isinstance(m, SurfaceOfRevolution):
            return float(m.rho(lev))
        return lev

    def sigma_point(self, i: int, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        lev = self.sigmas[i].level
        if isinstance(self.manifold, SurfaceOfRevolution):
            return np.stack([np.full_like(phi, lev), np.mod(phi, 2 * math.pi)], axis=-1)
        return lev * np.stack([np.cos(phi), np.sin(phi)], axis=-1)

    # -- distances --------------------------------------------------------

    def core_distance_model(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, x.shape[-1])
        out = np.zeros(len(flat))
        m = self.manifold
        for i, s in enumerate(self.sigmas):
            dep = self.depth(flat, i)
            for k in np.flatnonzero(dep > 0):
                if isinstance(m, SurfaceOfRevolution):
                    out[k] = m.meridian_arclength(s.level, flat[k, 0])
                else:
                    out[k] = dep[k]
        return out.reshape(x.shape[:-1])

    def escape_level(self, i: int, radius: float) -> float:
        """End coordinate beyond which points are more than ``radius`` from the core."""
        key = (i, float(radius))
        if key not in self._escape_levels:
            s = self.sigmas[i]
            m = self.manifold
            if isinstance(m, SurfaceOfRevolution):
                lev = m.height_at_arclength(s.level, radius, 1 if s.side == "+" else -1)
            else:
                lev = s.level + s.sign * radius
            self._escape_levels[key] = lev
        return self._escape_levels[key]

    def escaped(self, x, radius: float):
        """End id if every point is farther than ``radius`` from the core, else None."""
        x = np.asarray(x, dtype=float)
        for i, s in enumerate(self.sigmas):
            lev = self.escape_level(i, radius)
            if not math.isfinite(lev):
                continue
            if np.all(s.sign * (self.coordinate(x) - lev) > 0):
                return s.id
        return None

    def describe(self) -> dict:
        key = "u" if isinstance(self.manifold, SurfaceOfRevolution) else "r"
        sig = []
        for s in self.sigmas:
            d = {key: s.level, "end_side": s.side}
            if s.name is not None:
                d["name"] = s.name
            sig.append(d)
        return {"sigma": sig, "delta": self.delta}


def ends_from_json(m: Manifold, obj: dict, path: str = "ends") -> EndsDecomposition:
    if not isinstance(obj, dict):
        raise ScenarioError(path, "must be an object")
    sig = []
    for k, s in enumerate(obj.get("sigma", [])):
        p = f"{path}.sigma[{k}]"
        if not isinstance(s, dict):
            raise ScenarioError(p, "must be an object")
        level = s.get("u", s.get("r", s.get("level")))
        if level is None:
            raise ScenarioError(p, "needs 'u' (surface of revolution) or 'r' (plane)")
        try:
            sig.append(Sigma(float(level), s.get("end_side", "+"), s.get("name")))
        except DomainError as exc:
            raise ScenarioError(p, str(exc)) from None
    try:
        return EndsDecomposition(m, tuple(sig), float(obj.get("delta", 0.05)))
    except DomainError as exc:
        raise ScenarioError(path, str(exc)) from None


# -- classification ------------------------------------------------------------


@dataclass(frozen=True)
class Position:
    kind: str  # in_core_closure | in_end | straddling
    end: str | None = None

    def __str__(self):
        return self.kind if self.end is None else f"{self.kind}({self.end})"


def net_sample_points(net, per_segment: int = 4) -> np.ndarray:
    from .nets import PiecewiseGeodesicFlower, dense_samples

    m = net.manifold
    if isinstance(net, PiecewiseGeodesicFlower):
        parts = [dense_samples(m, net.petal(j), per_segment) for j in range(net.petal_count)]
        return np.concatenate(parts + [net.base[None]])
    return np.concatenate([dense_samples(m, bg, per_segment) for _, _, _, bg in net.edge_items()])


def classify_points(dec: EndsDecomposition, pts) -> Position:
    pts = np.asarray(pts, dtype=float)
    for i, s in enumerate(dec.sigmas):
        dep = dec.depth(pts, i)
        if np.all(dep > dec.band):
            return Position("in_end", s.id)
        if np.any(dep > dec.band):
            return Position("straddling", s.id)
    return Position("in_core_closure")


def classify_position(m: Manifold, dec: EndsDecomposition, net) -> Position:
    """Where a net lies relative to the core and the ends, from sampled points."""
    return classify_points(dec, net_sample_points(net))


def core_distance(m: Manifold, dec: EndsDecomposition, p: Point) -> float:
    """Distance from p to the closure of the core (meridian arc length on surfaces of revolution)."""
    x = m.point_to_model(p)
    return float(dec.core_distance_model(x[None])[0])


# -- local convexity -------------------------------------------------------------


@dataclass(frozen=True)
class ConvexityReport:
    end: str
    passed: bool
    worst_penetration: float
    witness: tuple | None
    n_pairs: int
    failures: int
    penetrating_pairs: int
    valid: bool
    delta: float

    def to_json(self) -> dict:
        return {
            "end": self.end,
            "passed": self.passed,
            "worst_penetration": self.worst_penetration,
            "witness": None if self.witness is None else [list(p.coords) for p in self.witness],
            "n_pairs": self.n_pairs,
            "failures": self.failures,
            "penetrating_pairs": self.penetrating_pairs,
            "valid": self.valid,
            "delta": self.delta,
        }


def check_local_convexity(
    m: Manifold, dec: EndsDecomposition, i: int, sample_count: int = 2000, seed: int = 0, samples_per_geodesic: int = 32, delta: float | None = None
) -> ConvexityReport:
    """Sample delta-close pairs on sigma_i and test their minimizing geodesics.

    Pairs are stratified: the first longitude is uniform within one of
    ``sample_count`` equal bins, the longitude gap uniform within one of the
    same number of bins covering (0, delta / radius], with the gap bins
    shuffled by the seeded generator.  Interior samples of each geodesic
    must satisfy depth >= -band (inside the end or on sigma_i).
    """
    if not 0 <= i < len(dec.sigmas):
        raise DomainError(f"no separating curve with index {i}")
    delta = dec.delta if delta is None else float(delta)
    if delta >= 0.5 * m.injectivity_floor:
        raise DomainError(f"delta={delta} must be below half the injectivity floor {0.5 * m.injectivity_floor:.6g}")
    rng = np.random.default_rng(seed)
    n = int(sample_count)
    phi0 = 2 * math.pi * (np.arange(n) + rng.random(n)) / n
    gap_max = delta / dec.sigma_radius(i)
    gaps = gap_max * (rng.permutation(n) + rng.random(n)) / n
    gaps = np.maximum(gaps, 1e-9 * gap_max)
    a = dec.sigma_point(i, phi0)
    b = dec.sigma_point(i, phi0 + gaps)
    v, _, st, _ = m.log(a, b)
    ok = st == 0
    failures = int(np.count_nonzero(~ok))
    fr = np.arange(1, samples_per_geodesic)[None, :, None] / samples_per_geodesic
    xs = np.repeat(a[:, None, :], samples_per_geodesic - 1, axis=1)
    ys, _, st2 = m.exp(xs.reshape(-1, a.shape[1]), (fr * v[:, None, :]).reshape(-1, a.shape[1]))
    ys = ys.reshape(n, samples_per_geodesic - 1, -1)
    ok &= np.all(st2.reshape(n, -1) == 0, axis=1)
    failures = int(np.count_nonzero(~ok))
    pen = -dec.depth(ys, i).min(axis=1)
    pen = np.where(ok, pen, -np.inf)
    worst = int(np.argmax(pen))
    worst_pen = float(max(pen[worst], 0.0))
    bad = pen > dec.band
    witness = None
    if bad.any():
        witness = (m.point_from_model(a[worst]), m.point_from_model(b[worst]))
    valid = failures <= 0.01 * n
    return ConvexityReport(
        end=dec.sigmas[i].id,
        passed=bool(valid and not bad.any()),
        worst_penetration=worst_pen,
        witness=witness,
        n_pairs=n,
        failures=failures,
        penetrating_pairs=int(np.count_nonzero(bad)),
        valid=bool(valid),
        delta=delta,
    )
