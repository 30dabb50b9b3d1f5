"""Uniform perfectness of finite point clouds.

A round annulus ``A(c, u, w) = {u < d(y, c) < w}`` separates a cloud when
it contains no cloud point while both the closed ball ``d(y, c) <= u`` and
the set ``d(y, c) >= w`` contain cloud points.  The largest modulus of a
separating annulus bounds how far the cloud is from being uniformly perfect.

Finite samples always admit arbitrarily thick annuli below the sampling
scale, so every search here floors the inner radius at a resolution ``eps``:
for a center ``c`` with sorted distances ``d_0 <= d_1 <= ...`` to the cloud,
the candidates are ``A(c, d_k, d_{k+1})`` with ``d_k >= eps``.  At a cloud
point ``d_0 = 0`` and the first candidate is the floored annulus
``A(x, eps, d_1)``.  In the chordal metric the outer side is a cap around the
antipode of ``c``, and its radius ``sqrt(1 - w^2)`` is floored the same way.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .cloud import PointCloud
from .sphere import (
    INFINITY,
    Metric,
    RoundRing,
    chordal_diameter,
    chordal_distance,
    chordal_distance_matrix,
    ring_modulus,
)

logger = logging.getLogger(__name__)

__all__ = [
    "SeparationWitness",
    "PerfectnessReport",
    "PreconditionError",
    "DiscardRing",
    "default_epsilon",
    "radial_gap_scan",
    "center_optimized_search",
    "ring_to_centered_annulus",
    "bounded_annulus_normalization",
    "analyze",
    "TauTable",
    "two_plate_capacity_check",
    "disjoint_continua_check",
    "random_two_plate_condenser",
    "random_polyline_pair",
    "UniformPerfectness",
]

CHUNK_ELEMENTS = 4_000_000
TIE_RTOL = 1e-12
NOT_PERFECT = "not perfect at resolution epsilon"


class PreconditionError(ValueError):
    """The ring-to-annulus construction is not licensed for this input."""


class DiscardRing(ValueError):
    """The truncated annulus is empty; the ring is dropped."""


@dataclass
class SeparationWitness:
    """A round annulus separating a cloud.

    ``side_inner`` holds the indices of cloud points in the bounded
    complementary component, ``side_outer`` those outside.
    """

    ring: RoundRing
    modulus: float
    side_inner: np.ndarray
    side_outer: np.ndarray

    def is_valid(self, points: np.ndarray) -> bool:
        """No point in the open ring and both sides non-empty."""
        d = self.ring.distances(points)
        inside = (d > self.ring.inner) & (d < self.ring.outer)
        return bool(not inside.any() and (d <= self.ring.inner).any() and (d >= self.ring.outer).any())

    def to_dict(self) -> dict:
        return {
            "ring": self.ring.to_dict(),
            "modulus": float(self.modulus),
            "n_inner": int(len(self.side_inner)),
            "n_outer": int(len(self.side_outer)),
        }


@dataclass
class PerfectnessReport:
    """Outcome of :func:`analyze`.

    Attributes
    ----------
    alpha_hat : float
        Largest separating-annulus modulus found, over both metrics.
    epsilon : float
        Resolution floor for inner radii.
    witnesses : list of SeparationWitness
        Best witnesses, ``witnesses[0]`` attaining ``alpha_hat``.
    per_point_gap_stats : dict
        Quantiles of the best modulus per cloud point.
    alpha_by_metric : dict
    refinement : list of dict
        ``alpha_hat`` of the radial scan at ``8 eps, 4 eps, 2 eps, eps``.
    flags : list of str
    """

    alpha_hat: float
    epsilon: float
    witnesses: list
    per_point_gap_stats: dict
    alpha_by_metric: dict = field(default_factory=dict)
    refinement: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    n_points: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def perfect_at_resolution(self) -> bool:
        return NOT_PERFECT not in self.flags

    def to_dict(self) -> dict:
        return {
            "alpha_hat": float(self.alpha_hat),
            "epsilon": float(self.epsilon),
            "alpha_by_metric": {k: float(v) for k, v in self.alpha_by_metric.items()},
            "refinement": self.refinement,
            "flags": list(self.flags),
            "n_points": self.n_points,
            "per_point_gap_stats": self.per_point_gap_stats,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "metadata": self.metadata,
        }


# ------------------------------------------------------------------------ core


def _distances(centers: np.ndarray, points: np.ndarray, metric: Metric) -> np.ndarray:
    # same arithmetic as RoundRing.distances, so witness radii are reproduced exactly
    if metric is Metric.EUCLIDEAN:
        return np.linalg.norm(points[None, :, :] - centers[:, None, :], axis=2)
    return chordal_distance_matrix(centers, points)


def _log_ratio(inner: np.ndarray, outer: np.ndarray, metric: Metric) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        mod = np.log(outer / inner)
        if metric is Metric.CHORDAL:
            mod = mod + 0.5 * (np.log1p(-inner * inner) - np.log1p(-outer * outer))
    return mod


def _best_rings(centers: np.ndarray, points: np.ndarray, eps, metric: Metric):
    """Best floored annulus around each center, for one or several floors.

    Returns arrays ``(modulus, inner, outer)`` of shape ``(len(eps), len(centers))``;
    the modulus is ``-inf`` where nothing separates.
    """
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    m = len(points)
    k = len(centers)
    mod = np.full((len(eps), k), -np.inf)
    inner = np.full((len(eps), k), np.nan)
    outer = np.full((len(eps), k), np.nan)
    if m < 2:
        return mod, inner, outer
    step = max(1, CHUNK_ELEMENTS // m)
    for s in range(0, k, step):
        d = np.sort(_distances(centers[s : s + step], points, metric), axis=1)
        lo, hi = d[:, :-1], d[:, 1:]
        # a center on a cloud point has d_0 = 0; only then is the inner radius floored
        own = np.zeros(lo.shape, bool)
        own[:, 0] = lo[:, 0] == 0.0
        for j, e in enumerate(eps):
            u = np.where(own, e, lo)
            w = hi
            ok = own | (lo >= e)
            if metric is Metric.CHORDAL:
                # the outer side is a cap around the antipode; floor its radius too
                w = np.minimum(hi, math.sqrt(max(0.0, 1.0 - e * e)))
            ok &= w > u
            val = np.where(ok, _log_ratio(u, np.where(ok, w, 2 * u), metric), -np.inf)
            # first maximum: the smallest inner radius among ties
            arg = np.argmax(val, axis=1)
            rows = np.arange(len(d))
            mod[j, s : s + step] = val[rows, arg]
            inner[j, s : s + step] = u[rows, arg]
            outer[j, s : s + step] = w[rows, arg]
    return mod, inner, outer


def _witness(points: np.ndarray, center, inner: float, outer: float, metric: Metric) -> SeparationWitness:
    ring = RoundRing(np.asarray(center, float), float(inner), float(outer), metric)
    d = ring.distances(points)
    return SeparationWitness(
        ring, ring_modulus(ring), np.flatnonzero(d <= inner), np.flatnonzero(d >= outer)
    )


def _order(mods: np.ndarray, centers: np.ndarray, inners: np.ndarray) -> np.ndarray:
    """Indices by decreasing modulus; near-ties by center (lexicographic) then inner radius."""
    top = np.max(mods)
    keys = [inners] + [centers[:, i] for i in range(centers.shape[1] - 1, -1, -1)]
    # quantise the modulus so that values within the tie tolerance compare equal
    q = np.round(-mods / max(TIE_RTOL * abs(top), 1e-300))
    keys.append(q)
    return np.lexsort(keys)


def _as_points(cloud) -> np.ndarray:
    if isinstance(cloud, PointCloud):
        return cloud.points
    return PointCloud(cloud).points


def _metric(metric) -> Metric:
    return metric if isinstance(metric, Metric) else Metric(str(metric).lower())


def default_epsilon(cloud: PointCloud) -> float:
    """Twice the generator's sampling scale, else the 1st percentile of nearest-neighbour distances."""
    scale = cloud.metadata.get("sampling_scale") if isinstance(cloud, PointCloud) else None
    if scale:
        return 2.0 * float(scale)
    pts = _as_points(cloud)
    d, _ = cKDTree(pts).query(pts, k=2)
    return float(np.percentile(d[:, 1], 1))


def radial_gap_scan(cloud, metric="euclidean", epsilon: float | None = None, top_k: int | None = 10):
    """Best floored separating annulus centred at each cloud point.

    Parameters
    ----------
    cloud : PointCloud or array_like
    metric : {"euclidean", "chordal"}
    epsilon : float, optional
        Resolution floor; see :func:`default_epsilon`.
    top_k : int or None
        Number of witnesses returned (all centers when None).

    Returns
    -------
    list of SeparationWitness
        Sorted by decreasing modulus; empty when nothing separates at this
        resolution.
    """
    metric = _metric(metric)
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(cloud)
    eps = default_epsilon(cloud) if epsilon is None else float(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    pts = cloud.points
    mod, inner, outer = (a[0] for a in _best_rings(pts, pts, eps, metric))
    good = np.flatnonzero(np.isfinite(mod))
    if len(good) == 0:
        logger.info("no separating annulus with inner radius >= %g", eps)
        return []
    order = good[_order(mod[good], pts[good], inner[good])]
    if top_k is not None:
        order = order[:top_k]
    return [_witness(pts, pts[i], inner[i], outer[i], metric) for i in order]


def _seed_centers(pts: np.ndarray, scan_best: np.ndarray, eps: float, budget: int, rng) -> np.ndarray:
    m, n = pts.shape
    pairs = m * (m - 1) // 2
    if pairs * 3 <= budget:
        # small clouds: every pairwise midpoint and every point pushed by eps
        # towards each other point cover all breakpoints of the 1-d objective
        i, j = np.triu_indices(m, 1)
        mids = 0.5 * (pts[i] + pts[j])
        diff = pts[j] - pts[i]
        unit = diff / np.linalg.norm(diff, axis=1, keepdims=True)
        return np.concatenate([mids, pts[i] + eps * unit, pts[j] - eps * unit])
    top = scan_best[: max(1, min(32, len(scan_best)))]
    tree = cKDTree(pts)
    _, nb = tree.query(pts[top], k=min(9, m))
    mids = 0.5 * (pts[top][:, None, :] + pts[nb]).reshape(-1, n)
    rand_pairs = rng.integers(0, m, size=(max(0, budget // 4 - len(mids)), 2))
    extra = 0.5 * (pts[rand_pairs[:, 0]] + pts[rand_pairs[:, 1]])
    return np.concatenate([mids, extra])


def center_optimized_search(
    cloud,
    epsilon: float | None = None,
    budget: int = 4096,
    seed: int = 0,
    metric="euclidean",
) -> SeparationWitness:
    """Best floored separating annulus over freely placed centers.

    Starts from the radial scan, cloud-point midpoints and random pair
    midpoints, then refines the best few centers by compass search.  The
    result is never worse than the radial scan.

    Raises
    ------
    ValueError
        If nothing separates the cloud at this resolution.
    """
    metric = _metric(metric)
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(cloud)
    eps = default_epsilon(cloud) if epsilon is None else float(epsilon)
    pts = cloud.points
    n = pts.shape[1]
    rng = np.random.default_rng(seed)

    mod, inner, outer = (a[0] for a in _best_rings(pts, pts, eps, metric))
    good = np.flatnonzero(np.isfinite(mod))
    scan_order = good[_order(mod[good], pts[good], inner[good])] if len(good) else good
    centers = [pts]
    mods, inners, outers = [mod], [inner], [outer]

    seeds = _seed_centers(pts, scan_order, eps, budget, rng)
    if len(seeds):
        s_mod, s_in, s_out = (a[0] for a in _best_rings(seeds, pts, eps, metric))
        centers.append(seeds)
        mods.append(s_mod)
        inners.append(s_in)
        outers.append(s_out)
    spent = len(seeds)

    C = np.concatenate(centers)
    M = np.concatenate(mods)
    U = np.concatenate(inners)
    W = np.concatenate(outers)
    ok = np.isfinite(M)
    if not ok.any():
        raise ValueError(f"nothing separates the cloud at resolution {eps:g}")

    # compass refinement of the best few starting points
    directions = np.concatenate([np.eye(n), -np.eye(n)])
    start = np.flatnonzero(ok)[_order(M[ok], C[ok], U[ok])][:8]
    for idx in start:
        c, best, u, w = C[idx].copy(), M[idx], U[idx], W[idx]
        step = 0.5 * u
        while spent < budget and step > 1e-3 * eps:
            trial = c + step * directions
            t_mod, t_in, t_out = (a[0] for a in _best_rings(trial, pts, eps, metric))
            spent += len(trial)
            j = int(np.argmax(t_mod))
            if t_mod[j] > best * (1 + TIE_RTOL) + 1e-15:
                c, best, u, w = trial[j], t_mod[j], t_in[j], t_out[j]
            else:
                step *= 0.5
        C = np.vstack([C, c])
        M = np.append(M, best)
        U = np.append(U, u)
        W = np.append(W, w)

    ok = np.flatnonzero(np.isfinite(M))
    i = ok[_order(M[ok], C[ok], U[ok])[0]]
    return _witness(pts, C[i], U[i], W[i], metric)


# ----------------------------------------------------------- ring reductions


def _set_distance(A: np.ndarray, B: np.ndarray) -> float:
    return float(chordal_distance_matrix(A, B).min())


def ring_to_centered_annulus(E, F, X) -> RoundRing:
    """Replace a separating ring by a chordal annulus centred in the smaller side.

    ``E`` and ``F`` sample the two complementary components of a ring that
    separates ``X`` with ``chi(E) <= chi(F)``.  The construction is licensed
    when ``10 chi(E) <= chi(E, F)``; it returns ``A_chi(x, chi(E), chi(x, F))``
    for a point ``x`` of ``X`` in ``E``.

    Raises
    ------
    PreconditionError
        If the gate fails, the diameters are in the wrong order, or no
        point of ``X`` lies in ``E``.
    """
    E = np.atleast_2d(np.asarray(E, float))
    F = np.atleast_2d(np.asarray(F, float))
    X = _as_points(X)
    u = chordal_diameter(E) if len(E) > 1 else 0.0
    if len(F) > 1 and chordal_diameter(F) < u:
        raise PreconditionError("E must be the side of smaller chordal diameter")
    gap = _set_distance(E, F)
    if not 10.0 * u <= gap:
        raise PreconditionError(f"gate fails: 10 chi(E) = {10 * u:.4g} > chi(E, F) = {gap:.4g}")
    in_E = chordal_distance_matrix(X, E).min(axis=1) <= 1e-12
    if not in_E.any():
        raise PreconditionError("no point of X lies in E")
    x = X[np.flatnonzero(in_E)[0]]
    w = float(chordal_distance_matrix(x[None], F).min())
    if u <= 0:
        raise PreconditionError("E is a single point; the annulus is degenerate")
    return RoundRing(x, u, w, Metric.CHORDAL)


def bounded_annulus_normalization(ring: RoundRing, X, eta: float | None = None) -> RoundRing:
    """Cap the outer chordal radius at ``eta / 2`` so the annulus stays bounded.

    ``eta`` is the chordal distance from infinity to ``X`` (computed when
    omitted).  The result keeps the center and inner radius.

    Raises
    ------
    DiscardRing
        If the inner radius reaches ``min(eta / 2, outer)``.
    """
    if Metric(ring.metric) is not Metric.CHORDAL:
        raise ValueError("a chordal ring is required")
    X = _as_points(X)
    if eta is None:
        eta = float(min(chordal_distance(x, INFINITY) for x in X))
    if eta <= 0:
        raise ValueError("eta must be positive")
    v = min(0.5 * eta, ring.outer)
    if ring.inner >= v:
        raise DiscardRing(f"inner radius {ring.inner:.4g} >= {v:.4g}")
    if v == ring.outer:
        return ring
    return RoundRing(ring.center, ring.inner, v, Metric.CHORDAL)


# -------------------------------------------------------------------- analyze


def analyze(
    cloud: PointCloud,
    epsilon: float | None = None,
    metrics=("euclidean", "chordal"),
    budget: int = 4096,
    seed: int = 0,
    top_k: int = 5,
    thin: bool | float = True,
) -> PerfectnessReport:
    """Uniform-perfectness report of a cloud.

    Parameters
    ----------
    cloud : PointCloud
    epsilon : float, optional
        Resolution floor, default :func:`default_epsilon`.
    metrics : sequence of {"euclidean", "chordal"}
    budget : int
        Center evaluations for :func:`center_optimized_search`.
    seed : int
    top_k : int
        Witnesses kept in the report.
    thin : bool or float
        Thin the cloud to a greedy net first: ``True`` uses spacing
        ``epsilon`` when the generator records a sampling scale (no thinning
        otherwise), a float gives the spacing.  Nets of nested samples are
        nested, and at spacing ``epsilon`` they saturate early, which keeps
        ``alpha_hat`` stable as the sample grows.
    """
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(cloud)
    eps = default_epsilon(cloud) if epsilon is None else float(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if thin is True:
        spacing = eps if cloud.metadata.get("sampling_scale") else None
    else:
        spacing = thin or None
    work = _thin(cloud, float(spacing)) if spacing else cloud
    pts = work.points

    floors = eps * np.array([8.0, 4.0, 2.0, 1.0])
    candidates = []
    alpha_by_metric = {}
    series = np.full(len(floors), -np.inf)
    per_point = None
    for name in metrics:
        metric = _metric(name)
        mod, inner, outer = _best_rings(pts, pts, floors, metric)
        series = np.maximum(series, mod.max(axis=1))
        good = np.flatnonzero(np.isfinite(mod[-1]))
        if per_point is None:
            per_point = mod[-1][good]
        for i in good[_order(mod[-1][good], pts[good], inner[-1][good])][:top_k] if len(good) else []:
            candidates.append(_witness(pts, pts[i], inner[-1][i], outer[-1][i], metric))
        try:
            best = center_optimized_search(work, eps, budget, seed, metric)
            candidates.append(best)
            alpha_by_metric[metric.value] = best.modulus
        except ValueError:
            alpha_by_metric[metric.value] = -math.inf

    flags = []
    if not candidates:
        flags.append(NOT_PERFECT)
        return PerfectnessReport(
            -math.inf, eps, [], {}, alpha_by_metric, [], flags, len(pts), dict(cloud.metadata)
        )
    mods = np.array([w.modulus for w in candidates])
    cen = np.array([w.ring.center for w in candidates])
    inn = np.array([w.ring.inner for w in candidates])
    order = _order(mods, cen, inn)
    witnesses = [candidates[i] for i in order[:top_k]]
    alpha = witnesses[0].modulus
    if len(witnesses[0].side_inner) == 1:
        # the best annulus isolates a single point: its modulus is set by the floor
        flags.append(NOT_PERFECT)
    stats = {}
    if per_point is not None and len(per_point):
        q = np.quantile(per_point, [0.0, 0.5, 0.9, 1.0])
        stats = {"min": q[0], "median": q[1], "p90": q[2], "max": q[3], "count": int(len(per_point))}
        stats = {k: (float(v) if k != "count" else v) for k, v in stats.items()}
    refinement = [{"epsilon": float(e), "alpha_hat": float(a)} for e, a in zip(floors, series)]
    refinement[-1]["alpha_hat"] = float(max(alpha, series[-1]))
    return PerfectnessReport(
        float(alpha), eps, witnesses, stats, alpha_by_metric, refinement, flags, len(pts), dict(cloud.metadata)
    )


def _thin(cloud: PointCloud, spacing: float) -> PointCloud:
    """Greedy net of the cloud, after keeping the first point of each small cell."""
    pts = cloud.points
    n = pts.shape[1]
    cell = spacing / math.sqrt(n) / 2.0
    keys = np.floor(pts / cell).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    first = np.sort(first)
    pre = PointCloud(pts[first], cloud.metadata)
    return pre.thin(spacing)


# ------------------------------------------------------- inequality checkers


class TauTable:
    """Cached Teichmüller capacity estimates on a geometric grid of ``s``.

    :meth:`upper` returns the estimate at the largest grid point not above
    ``s``; since the capacity decreases in ``s`` this over-estimates the value
    at ``s``, which makes lower-bound checks conservative.
    """

    def __init__(self, s_grid=None, n: int = 2, resolution: int = 64, tol: float = 3e-3, box_factor: float = 4.0):
        self.s_grid = np.asarray(s_grid if s_grid is not None else 2.0 ** np.arange(-3, 9), float)
        self.n = n
        self.resolution = resolution
        self.tol = tol
        self.box_factor = box_factor
        self._values: dict[float, float] = {}

    def value(self, s: float) -> float:
        """Estimate at ``s``; the resolution is doubled while the plates touch on the grid."""
        from .modulus import PlatesTouchError, tau_estimate

        s = float(s)
        if s not in self._values:
            res = self.resolution
            while True:
                try:
                    r = tau_estimate(s, n=self.n, resolution=res, box_factor=self.box_factor, tol=self.tol)
                    break
                except PlatesTouchError:
                    if res >= 8 * self.resolution:
                        raise
                    res *= 2
            self._values[s] = r.capacity
        return self._values[s]

    def upper(self, s: float) -> float:
        below = self.s_grid[self.s_grid <= s]
        if len(below) == 0:
            return self.value(s)
        return self.value(float(below[-1]))


_DEFAULT_TABLES: dict = {}


def _table(n: int) -> TauTable:
    if n not in _DEFAULT_TABLES:
        _DEFAULT_TABLES[n] = TauTable(n=n)
    return _DEFAULT_TABLES[n]


@dataclass
class InequalityCheck:
    lhs: float
    rhs: float
    s: float
    holds: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "s": self.s, "holds": self.holds}


def _boundary_samples(prim, count: int = 256) -> np.ndarray:
    from .modulus import Ball, Polyline, Segment

    if isinstance(prim, Ball):
        c = np.asarray(prim.center, float)
        t = 2 * np.pi * np.arange(count) / count
        return c + prim.radius * np.stack([np.cos(t), np.sin(t)], axis=1)
    if isinstance(prim, Segment):
        a, b = np.asarray(prim.a, float), np.asarray(prim.b, float)
        return a + np.linspace(0, 1, count)[:, None] * (b - a)
    if isinstance(prim, Polyline):
        v = np.asarray(prim.vertices, float)
        per = max(2, count // max(1, len(v) - 1))
        return np.concatenate([v[i] + np.linspace(0, 1, per)[:, None] * (v[i + 1] - v[i]) for i in range(len(v) - 1)])
    raise TypeError(f"unsupported plate {type(prim).__name__}")


def _resolved_capacity(E, F, resolution: int, tol: float) -> float:
    """Two-plate capacity, doubling the resolution (up to 8x) until both plates hold grid nodes."""
    from .modulus import PlatesTouchError, ring_capacity

    res = resolution
    while True:
        try:
            return ring_capacity(E, F, n=2, resolution=res, tol=tol).capacity
        except (PlatesTouchError, ValueError) as exc:
            if res >= 8 * resolution or not _unresolved(exc):
                raise
            logger.info("plates unresolved at resolution %d; doubling", res)
            res *= 2


def _unresolved(exc: Exception) -> bool:
    from .modulus import PlatesTouchError

    return isinstance(exc, PlatesTouchError) or "non-empty" in str(exc)


def two_plate_capacity_check(
    E,
    F,
    slack: float = 0.9,
    resolution: int = 64,
    tol: float = 1e-2,
    table: TauTable | None = None,
) -> InequalityCheck:
    """Check ``capac >= slack * 2^(1-n) * tau(2 chi(E, F) / min(chi(E), chi(F)))`` in the plane.

    ``E`` and ``F`` are disjoint plate primitives (disks, segments,
    polylines); chordal quantities are measured on dense boundary samples.
    """
    n = 2
    SE, SF = _boundary_samples(E), _boundary_samples(F)
    s = 2.0 * _set_distance(SE, SF) / min(chordal_diameter(SE), chordal_diameter(SF))
    table = table or _table(n)
    rhs = slack * 2.0 ** (1 - n) * table.upper(s)
    lhs = _resolved_capacity(E, F, resolution, tol)
    return InequalityCheck(lhs, rhs, s, lhs >= rhs)


def disjoint_continua_check(
    E,
    F,
    slack: float = 0.9,
    resolution: int = 64,
    tol: float = 1e-2,
    table: TauTable | None = None,
) -> InequalityCheck:
    """Check ``M(curves joining E and F) >= slack * 2^(1-n) * tau(d(E, F) / d(E))`` for ``d(E) <= d(F)``.

    Plates are swapped when ``E`` is the larger continuum.
    """
    from scipy.spatial.distance import cdist, pdist

    n = 2
    SE, SF = _boundary_samples(E), _boundary_samples(F)
    dE, dF = pdist(SE).max(), pdist(SF).max()
    if dE > dF:
        E, F, SE, SF, dE, dF = F, E, SF, SE, dF, dE
    s = float(cdist(SE, SF).min() / dE)
    table = table or _table(n)
    rhs = slack * 2.0 ** (1 - n) * table.upper(s)
    lhs = _resolved_capacity(E, F, resolution, tol)
    return InequalityCheck(lhs, rhs, s, lhs >= rhs)


def random_two_plate_condenser(rng: np.random.Generator, min_gap: float = 0.15):
    """Two disjoint disks with centers in ``[-1, 1]^2`` and radii in ``[0.1, 0.5]``."""
    from .modulus import Ball

    while True:
        r = rng.uniform(0.1, 0.5, 2)
        c = rng.uniform(-1, 1, (2, 2))
        if np.linalg.norm(c[0] - c[1]) - r.sum() >= min_gap:
            return Ball(c[0], r[0]), Ball(c[1], r[1])


def random_polyline_pair(rng: np.random.Generator, vertices: int = 4, min_gap: float = 0.15):
    """Two disjoint random polylines in ``[-1, 1]^2``."""
    from scipy.spatial.distance import cdist

    from .modulus import Polyline

    while True:
        v = []
        for _ in range(2):
            start = rng.uniform(-1, 1, 2)
            steps = rng.normal(scale=0.25, size=(vertices - 1, 2))
            v.append(np.clip(np.vstack([start, start + np.cumsum(steps, axis=0)]), -1, 1))
        A, B = Polyline(v[0]), Polyline(v[1])
        SA, SB = _boundary_samples(A), _boundary_samples(B)
        if cdist(SA, SB).min() >= min_gap and np.ptp(SA, axis=0).max() > 0.1 and np.ptp(SB, axis=0).max() > 0.1:
            return A, B


# ------------------------------------------------------------------ estimator


class UniformPerfectness(BaseEstimator):
    """Estimator wrapper around :func:`analyze`.

    ``fit(X)`` analyses the rows of ``X`` as a point cloud.  There is no
    transform: the result is a single report per cloud, exposed through the
    fitted attributes and :meth:`score`.

    Parameters
    ----------
    epsilon : float or None
        Resolution floor; None uses the 1st percentile of nearest-neighbour
        distances.
    metrics : tuple of str
    budget : int
    seed : int
    top_k : int
    thin : float or None
        Greedy-net spacing applied before the search.

    Attributes
    ----------
    alpha_ : float
    epsilon_ : float
    witnesses_ : list of SeparationWitness
    report_ : PerfectnessReport
    """

    def __init__(self, epsilon=None, metrics=("euclidean", "chordal"), budget=4096, seed=0, top_k=5, thin=None):
        self.epsilon = epsilon
        self.metrics = metrics
        self.budget = budget
        self.seed = seed
        self.top_k = top_k
        self.thin = thin

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2, ensure_min_features=2)
        if X.shape[1] > 4:
            raise ValueError("point clouds live in R^n with n <= 4")
        report = analyze(
            PointCloud(X),
            epsilon=self.epsilon,
            metrics=self.metrics,
            budget=self.budget,
            seed=self.seed,
            top_k=self.top_k,
            thin=self.thin or False,
        )
        self.report_ = report
        self.alpha_ = report.alpha_hat
        self.epsilon_ = report.epsilon
        self.witnesses_ = report.witnesses
        self.n_features_in_ = X.shape[1]
        return self

    def score(self, X=None, y=None) -> float:
        """Negative ``alpha_hat``: larger is more uniformly perfect."""
        check_is_fitted(self, "alpha_")
        return -self.alpha_
