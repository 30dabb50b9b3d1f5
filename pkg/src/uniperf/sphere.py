"""Chordal and Euclidean geometry on the extended space R^n ∪ {∞}.

Finite points are plain numpy vectors of length ``n``; the point at infinity
is the module-level singleton :data:`INFINITY`.  The chordal metric is the
stereographic one normalised so that antipodal points are at distance 1::

    chi(x, y)   = |x - y| / (sqrt(1 + |x|^2) sqrt(1 + |y|^2))
    chi(x, inf) = 1 / sqrt(1 + |x|^2)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "INFINITY",
    "Metric",
    "RoundRing",
    "DegenerateRingError",
    "MoebiusInversion",
    "is_infinity",
    "as_point",
    "chordal_distance",
    "chordal_distance_matrix",
    "chordal_diameter",
    "euclidean_ring_modulus",
    "chordal_ring_modulus",
    "ring_modulus",
    "modulus_monotonicity_check",
    "invert",
    "sphere_surface_area",
    "chordal_sphere_to_euclidean",
    "chordal_radius_to_euclidean",
    "stereographic_lift",
    "stereographic_project",
    "chordal_isometry_to_origin",
]

MAX_DIMENSION = 4


class _Infinity:
    """The point at infinity of S^n. Compares equal only to itself."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


class Metric(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    CHORDAL = "chordal"


class DegenerateRingError(ValueError):
    """Raised for rings with inner radius >= outer radius."""


def is_infinity(x) -> bool:
    return x is INFINITY


def as_point(x, n: int | None = None) -> np.ndarray:
    """Validate a finite point and return it as a float vector."""
    p = np.asarray(x, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"a point must be a 1-d vector, got shape {p.shape}")
    if n is not None and p.shape[0] != n:
        raise ValueError(f"dimension mismatch: expected {n}, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise ValueError("finite point has non-finite coordinates")
    return p


def chordal_distance(x, y) -> float:
    """Chordal distance between two points of R^n ∪ {∞}."""
    if is_infinity(x) and is_infinity(y):
        return 0.0
    if is_infinity(y):
        x, y = y, x
    if is_infinity(x):
        q = as_point(y)
        return 1.0 / math.sqrt(1.0 + float(q @ q))
    p = as_point(x)
    q = as_point(y, p.shape[0])
    num = float(np.linalg.norm(p - q))
    den = math.sqrt(1.0 + float(p @ p)) * math.sqrt(1.0 + float(q @ q))
    return min(num / den, 1.0)


def chordal_distance_matrix(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Pairwise chordal distances between rows of ``a`` and rows of ``b``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = a if b is None else np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ValueError("dimension mismatch")
    diff = a[:, None, :] - b[None, :, :]
    num = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    sa = np.sqrt(1.0 + np.einsum("ij,ij->i", a, a))
    sb = np.sqrt(1.0 + np.einsum("ij,ij->i", b, b))
    return np.minimum(num / (sa[:, None] * sb[None, :]), 1.0)


def chordal_diameter(points: np.ndarray) -> float:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) < 2:
        return 0.0
    return float(chordal_distance_matrix(points).max())


@dataclass(frozen=True)
class RoundRing:
    """The open round annulus ``{y : inner < dist(y, center) < outer}``."""

    center: np.ndarray
    inner: float
    outer: float
    metric: Metric = Metric.EUCLIDEAN

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "metric", Metric(self.metric))
        if not (self.inner > 0 and self.outer > 0):
            raise ValueError("ring radii must be positive")

    @property
    def n(self) -> int:
        return self.center.shape[0]

    def distances(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.metric is Metric.EUCLIDEAN:
            return np.linalg.norm(points - self.center, axis=1)
        return chordal_distance_matrix(self.center[None, :], points)[0]

    def contains(self, points: np.ndarray) -> np.ndarray:
        d = self.distances(points)
        return (d > self.inner) & (d < self.outer)

    def to_dict(self) -> dict:
        return {
            "center": [float(c) for c in self.center],
            "inner": float(self.inner),
            "outer": float(self.outer),
            "metric": self.metric.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RoundRing":
        return cls(np.asarray(d["center"], float), d["inner"], d["outer"], Metric(d["metric"]))


def euclidean_ring_modulus(ring: RoundRing) -> float:
    """``log(outer / inner)``."""
    if ring.inner >= ring.outer:
        raise DegenerateRingError(f"inner radius {ring.inner} >= outer radius {ring.outer}")
    return math.log(ring.outer / ring.inner)


def chordal_ring_modulus(ring: RoundRing) -> float:
    """Modulus of the chordal annulus ``A_chi(x, u, w)``.

    ``log((w/u) * sqrt((1 - u^2) / (1 - w^2)))``, valid for ``0 < u < w < 1``.
    """
    u, w = ring.inner, ring.outer
    if w >= 1.0:
        raise ValueError(f"chordal outer radius must be < 1, got {w}")
    if u >= w:
        raise DegenerateRingError(f"inner radius {u} >= outer radius {w}")
    return math.log(w / u) + 0.5 * (math.log1p(-u * u) - math.log1p(-w * w))


def ring_modulus(ring: RoundRing) -> float:
    if ring.metric is Metric.EUCLIDEAN:
        return euclidean_ring_modulus(ring)
    return chordal_ring_modulus(ring)


def _chordal_ball_as_euclidean(center: np.ndarray, r: float):
    """Euclidean description of the closed chordal ball B_chi(center, r).

    Returns ``("ball", c, rho)``, ``("exterior", c, rho)`` (closed complement of
    an open ball, together with infinity) or ``("halfspace", normal, offset)``.
    """
    x2 = float(center @ center)
    a = r * r * (1.0 + x2)
    if abs(1.0 - a) < 1e-14:
        # boundary passes through infinity: the half-space 2 x.y >= |x|^2 - a
        return ("halfspace", center, 0.5 * (x2 - a))
    c = center / (1.0 - a)
    rho2 = float(c @ c) - (x2 - a) / (1.0 - a)
    rho = math.sqrt(max(rho2, 0.0))
    return ("ball" if a < 1.0 else "exterior", c, rho)


def chordal_sphere_to_euclidean(center, r: float) -> tuple[np.ndarray, float]:
    """Centre and radius of the Euclidean sphere ``{y : chi(center, y) = r}``.

    Valid when the chordal sphere does not pass through infinity and bounds a
    Euclidean ball containing ``center``.
    """
    kind, c, rho = _chordal_ball_as_euclidean(as_point(center), r)
    if kind != "ball":
        raise ValueError("chordal sphere does not bound a bounded Euclidean ball")
    return c, rho


def chordal_radius_to_euclidean(r):
    """Euclidean radius of the chordal ball of radius ``r`` about the origin."""
    r = np.asarray(r, dtype=float)
    if np.any((r < 0) | (r >= 1)):
        raise ValueError("chordal radius must lie in [0, 1)")
    return r / np.sqrt(1.0 - r * r)


def modulus_monotonicity_check(inner: RoundRing, outer: RoundRing) -> bool:
    """Check ``mod(inner) <= mod(outer)`` for nested round rings.

    Requires ``inner`` to be contained in ``outer`` as point sets; this is
    verified for rings in the same metric (sufficient condition: the inner
    ring's disc pair sits inside the outer ring's annular region).
    """
    if inner.metric is not outer.metric:
        raise ValueError("rings must use the same metric")
    off = float(np.linalg.norm(inner.center - outer.center))
    if inner.metric is Metric.CHORDAL:
        off = chordal_distance(inner.center, outer.center)
    nested = (inner.outer + off <= outer.outer + 1e-12) and (
        inner.inner - off >= outer.inner - 1e-12
    )
    if not nested:
        raise ValueError("precondition violated: rings are not nested")
    return ring_modulus(inner) <= ring_modulus(outer) + 1e-12


@dataclass(frozen=True)
class MoebiusInversion:
    """Inversion in the unit sphere about ``pole``; sends ``pole`` to infinity."""

    pole: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pole", as_point(self.pole))

    def __call__(self, y):
        return invert(self, y)

    def apply_array(self, points: np.ndarray) -> np.ndarray:
        d = np.atleast_2d(np.asarray(points, dtype=float)) - self.pole
        r2 = np.einsum("ij,ij->i", d, d)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.pole + d / r2[:, None]
        out[r2 == 0] = np.inf
        return out


def invert(g: MoebiusInversion, y):
    """``pole + (y - pole) / |y - pole|^2``, with ``pole <-> INFINITY``."""
    if is_infinity(y):
        return g.pole.copy()
    q = as_point(y, g.pole.shape[0])
    d = q - g.pole
    r2 = float(d @ d)
    if r2 == 0.0:
        return INFINITY
    return g.pole + d / r2


def sphere_surface_area(n: int) -> float:
    """Surface area omega_{n-1} of the unit sphere S^{n-1} in R^n."""
    if n not in (2, 3, 4):
        raise ValueError(f"unsupported dimension {n}; expected 2, 3 or 4")
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def stereographic_lift(points: np.ndarray) -> np.ndarray:
    """Map R^n to the unit sphere in R^{n+1} (origin to the south pole)."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    s = np.einsum("ij,ij->i", p, p)
    return np.column_stack([2 * p, s - 1.0]) / (1.0 + s)[:, None]


def stereographic_project(sphere_points: np.ndarray) -> np.ndarray:
    """Inverse of :func:`stereographic_lift`; the north pole maps to inf."""
    q = np.atleast_2d(np.asarray(sphere_points, dtype=float))
    with np.errstate(divide="ignore"):
        return q[:, :-1] / (1.0 - q[:, -1])[:, None]


def chordal_isometry_to_origin(x):
    """Return a chordal isometry of R^n ∪ {∞} sending ``x`` to the origin.

    Realised as a rotation of the stereographic sphere in the plane spanned
    by the lift of ``x`` and the south pole.  The returned callable maps an
    ``(m, n)`` array of finite points to an ``(m, n)`` array (rows may become
    infinite when a point is sent to the north pole).
    """
    x = as_point(x)
    n = x.shape[0]
    a = stereographic_lift(x[None, :])[0]
    south = np.zeros(n + 1)
    south[-1] = -1.0
    cos_t = float(np.clip(a @ south, -1.0, 1.0))
    v = a - cos_t * south
    nv = np.linalg.norm(v)
    if nv < 1e-15:
        # finite x lifts next to the south pole only when x = 0
        rot = np.eye(n + 1)
    else:
        e1 = v / nv
        e2 = south
        sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
        # rotation taking a = cos_t e2 + sin_t e1 to e2, identity off span(e1, e2)
        c, s = cos_t, sin_t
        rot = (
            np.eye(n + 1)
            + (c - 1.0) * (np.outer(e1, e1) + np.outer(e2, e2))
            + s * (np.outer(e2, e1) - np.outer(e1, e2))
        )

    def apply(points):
        lifted = stereographic_lift(points)
        return stereographic_project(lifted @ rot.T)

    return apply
