"""Box-counting dimension and Hausdorff-content lower-bound checks on point clouds.

Boxes are closed cubes ``prod [k_i eps, (k_i + 1) eps]`` of a grid anchored at
the origin.  A point on a box face may be assigned to either neighbouring box;
:func:`box_count` returns the size of a smallest such assignment, so a closed
interval of length ``eps`` aligned with the grid counts once.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .cloud import PointCloud

logger = logging.getLogger(__name__)

__all__ = [
    "DimensionFit",
    "ContentEstimate",
    "ContentCheck",
    "box_count",
    "sampling_scale",
    "default_window",
    "fit_dimension",
    "content_estimate",
    "content_lower_bound_check",
    "BoxCountingDimension",
]

MIN_SCALES = 4
MIN_R2 = 0.98
FACE_TOL = 1e-9
CONTENT_RADIUS_FACTOR = 10.0
CONTENT_FINEST_FACTOR = 4.0


def _points(cloud) -> np.ndarray:
    if isinstance(cloud, PointCloud):
        return cloud.points
    pts = np.asarray(cloud, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("points must have shape (m, n) with m >= 1")
    return pts


def _box_keys(idx: np.ndarray, base: np.ndarray, radix: np.ndarray) -> np.ndarray:
    return ((idx - base) * radix).sum(axis=-1)


def box_count(cloud, epsilon: float) -> int:
    """Number of closed grid boxes of side ``epsilon`` needed to cover the cloud."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    pts = _points(cloud)
    n = pts.shape[1]
    u = pts / epsilon
    lo = np.floor(u - FACE_TOL).astype(np.int64)
    hi = np.floor(u + FACE_TOL).astype(np.int64)
    # mixed-radix integer keys for box indices
    base = lo.min(axis=0)
    span = hi.max(axis=0) - base + 1
    radix = np.cumprod(np.concatenate([[1], span[::-1][:-1]]))[::-1]
    if float(np.prod(span.astype(float))) >= 2.0**62:
        raise ValueError("epsilon too small for the extent of the cloud")
    # lo == hi on every axis: the point lies inside a single box
    single = np.all(lo == hi, axis=1)
    forced = np.unique(_box_keys(hi[single], base, radix))
    amb = np.flatnonzero(~single)
    if len(amb) == 0:
        return len(forced)
    corners = np.array(list(product((0, 1), repeat=n)), dtype=bool)
    cands = np.stack(
        [_box_keys(np.where(c, hi[amb], lo[amb]), base, radix) for c in corners], axis=1
    )
    cands = np.sort(cands, axis=1)
    pending = cands[~np.isin(cands, forced).any(axis=1)]
    if len(pending) == 0:
        return len(forced)
    # face points not covered by forced boxes: greedy set cover over distinct candidate sets
    sets = [set(row.tolist()) for row in np.unique(pending, axis=0)]
    extra = 0
    while sets:
        tally: dict[int, int] = {}
        for cs in sets:
            for c in cs:
                tally[c] = tally.get(c, 0) + 1
        best = min(tally, key=lambda c: (-tally[c], c))
        extra += 1
        sets = [cs for cs in sets if best not in cs]
    return len(forced) + extra


def sampling_scale(cloud) -> float:
    """The generator's sampling scale, else the median nearest-neighbour distance."""
    if isinstance(cloud, PointCloud) and cloud.metadata.get("sampling_scale"):
        return float(cloud.metadata["sampling_scale"])
    pts = _points(cloud)
    if len(pts) < 2:
        return 0.0
    d, _ = cKDTree(pts).query(pts, k=2)
    return float(np.median(d[:, 1]))


@dataclass
class DimensionFit:
    """Least-squares fit of ``log N(eps)`` against ``log(1 / eps)``.

    The slope is a box dimension, an upper proxy for the Hausdorff dimension.
    """

    epsilons: np.ndarray
    counts: np.ndarray
    slope: float
    intercept: float
    r2: float
    flags: list = field(default_factory=list)
    label: str = "box dimension"

    @property
    def ok(self) -> bool:
        return not self.flags

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "epsilons": [float(e) for e in self.epsilons],
            "counts": [int(c) for c in self.counts],
            "slope": float(self.slope),
            "intercept": float(self.intercept),
            "r2": float(self.r2),
            "flags": list(self.flags),
        }


def default_window(cloud, n_scales: int | None = None) -> np.ndarray:
    """Dyadic scales from about a quarter of the extent down to twice the sampling scale.

    When fewer than four such scales exist, the window reaches down to the
    sampling scale itself and then starts higher.
    """
    pts = _points(cloud)
    extent = float(np.max(np.ptp(pts, axis=0))) if len(pts) > 1 else 1.0
    if extent == 0:
        extent = 1.0
    top = 2.0 ** round(math.log2(extent / 4.0))
    s = sampling_scale(cloud)
    if n_scales is not None:
        return top * 2.0 ** -np.arange(n_scales)
    if s <= 0:
        return top * 2.0 ** -np.arange(8)

    def count(t, floor):
        return int(math.floor(math.log2(t / floor) + 1e-9)) + 1 if t >= floor else 0

    k = count(top, 2.0 * s)
    if k < MIN_SCALES:
        k = count(top, s)
    while k < MIN_SCALES and top < extent:
        top *= 2.0
        k = count(top, s)
    return top * 2.0 ** -np.arange(max(k, MIN_SCALES))


def fit_dimension(cloud, epsilons=None, check_resolution: bool = True) -> DimensionFit:
    """Box-counting dimension over a window of scales.

    Parameters
    ----------
    cloud : PointCloud or array_like
    epsilons : sequence of float, optional
        Strictly decreasing scales, at least four; default
        :func:`default_window`.
    check_resolution : bool
        Reject windows reaching below the cloud's sampling scale.

    Raises
    ------
    ValueError
        If the window is too short, not decreasing, or below the sampling
        scale.
    """
    eps = default_window(cloud) if epsilons is None else np.asarray(epsilons, dtype=float)
    if len(eps) < MIN_SCALES:
        raise ValueError(f"a fit needs at least {MIN_SCALES} scales")
    if np.any(np.diff(eps) >= 0) or np.any(eps <= 0):
        raise ValueError("scales must be positive and strictly decreasing")
    if check_resolution:
        s = sampling_scale(cloud)
        if eps.min() < s:
            raise ValueError(
                f"smallest scale {eps.min():.3g} is below the sampling scale {s:.3g}; "
                "the fit would measure the sample, not the set"
            )
    counts = np.array([box_count(cloud, e) for e in eps])
    x = np.log(1.0 / eps)
    y = np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid**2)) / total if total > 0 else 1.0
    flags = []
    if r2 < MIN_R2:
        flags.append(f"r2 {r2:.4f} below {MIN_R2}")
    return DimensionFit(eps, counts, max(float(slope), 0.0), float(intercept), r2, flags)


@dataclass
class ContentEstimate:
    """Greedy dyadic estimate of the ``beta``-content of ``cloud ∩ B(center, r)``.

    A box of side ``l`` is charged as a ball of radius ``sqrt(n) l / 2``
    (the ball with the box's diameter), which keeps the estimate an upper
    bound for covers by balls.
    """

    beta: float
    content_hat: float
    r: float
    center: np.ndarray
    conversion: float

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "content_hat": self.content_hat,
            "r": self.r,
            "center": [float(c) for c in self.center],
            "ball_radius_per_box_side": self.conversion,
        }


def _dyadic_content(pts: np.ndarray, beta: float, top: float, finest: float) -> float:
    """Cheapest cover by dyadic boxes between sides ``top`` and ``finest``."""
    n = pts.shape[1]
    conv = math.sqrt(n) / 2.0
    levels = max(0, int(math.ceil(math.log2(top / finest))))
    side = top * 2.0**-levels
    keys = np.floor(pts / side).astype(np.int64)
    keys, inv = np.unique(keys, axis=0, return_inverse=True)
    cost = np.full(len(keys), (conv * side) ** beta)
    for _ in range(levels):
        side *= 2.0
        parent = np.floor_divide(keys, 2)
        parent, inv = np.unique(parent, axis=0, return_inverse=True)
        inv = np.ravel(inv)
        children = np.bincount(inv, weights=cost, minlength=len(parent))
        cost = np.minimum(children, (conv * side) ** beta)
        keys = parent
    return float(cost.sum())


def content_estimate(cloud, beta: float, center, r: float, finest: float | None = None) -> ContentEstimate:
    """Estimate ``Lambda^beta(closed ball(center, r) ∩ cloud)``."""
    pts = _points(cloud)
    center = np.asarray(center, dtype=float)
    sub = pts[np.linalg.norm(pts - center, axis=1) <= r]
    n = pts.shape[1]
    # boxes much smaller than the sample spacing would miss most of the set
    finest = CONTENT_FINEST_FACTOR * sampling_scale(cloud) if finest is None else finest
    if len(sub) == 0:
        return ContentEstimate(beta, 0.0, r, center, math.sqrt(n) / 2)
    top = 2.0 ** math.ceil(math.log2(2.0 * r))
    value = _dyadic_content(sub, beta, top, max(finest, top * 2.0**-30))
    return ContentEstimate(beta, value, r, center, math.sqrt(n) / 2)


@dataclass
class ContentCheck:
    """Ratios ``content_hat / r^beta`` over the trials of :func:`content_lower_bound_check`."""

    beta: float
    min_ratio: float
    radii: np.ndarray
    min_by_radius: np.ndarray
    ratios: np.ndarray

    @property
    def spread(self) -> float:
        """Largest over smallest per-radius minimum."""
        m = self.min_by_radius
        return float(m.max() / m.min()) if m.min() > 0 else math.inf

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "min_ratio": self.min_ratio,
            "radii": [float(r) for r in self.radii],
            "min_by_radius": [float(v) for v in self.min_by_radius],
            "spread": self.spread,
        }


def content_lower_bound_check(
    cloud,
    beta: float,
    radii=None,
    centers: int = 16,
    seed: int = 0,
) -> ContentCheck:
    """Minimum of ``content_hat(B(x, r) ∩ cloud) / r^beta`` over random ``x`` in the cloud.

    Parameters
    ----------
    cloud : PointCloud or array_like
    beta : float
        Exponent in ``(0, n]``.
    radii : sequence of float, optional
        Default: dyadic radii from half the extent down to ``10 x`` the
        sampling scale (at most six).
    centers : int
        Cloud points drawn as centers (same points for every radius).
    seed : int

    Raises
    ------
    ValueError
        If ``beta`` is out of range or a radius is below ``10 x`` the
        sampling scale.
    """
    pts = _points(cloud)
    n = pts.shape[1]
    if not 0 < beta <= n:
        raise ValueError(f"beta must lie in (0, {n}]")
    s = sampling_scale(cloud)
    if radii is None:
        extent = float(np.max(np.ptp(pts, axis=0)))
        top = extent / 2.0
        k = int(math.floor(math.log2(top / (CONTENT_RADIUS_FACTOR * s)) + 1e-9)) + 1 if s > 0 else 6
        radii = top * 2.0 ** -np.arange(max(1, min(k, 6)))
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < CONTENT_RADIUS_FACTOR * s * (1 - 1e-12)):
        raise ValueError(f"radii must be at least {CONTENT_RADIUS_FACTOR:g} x the sampling scale {s:.3g}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(pts), size=min(centers, len(pts)), replace=False)
    ratios = np.empty((len(radii), len(idx)))
    for i, r in enumerate(radii):
        for j, c in enumerate(idx):
            est = content_estimate(pts, beta, pts[c], r, finest=CONTENT_FINEST_FACTOR * s)
            ratios[i, j] = est.content_hat / r**beta
    by_radius = ratios.min(axis=1)
    return ContentCheck(float(beta), float(by_radius.min()), radii, by_radius, ratios)


class BoxCountingDimension(BaseEstimator):
    """Estimator wrapper around :func:`fit_dimension`.

    Parameters
    ----------
    epsilons : sequence of float or None
        Scale window; None uses :func:`default_window`.
    sampling_scale : float or None
        Resolution of the sample, used to validate the window and for the
        default window; None uses the median nearest-neighbour distance.

    Attributes
    ----------
    dimension_ : float
    r2_ : float
    fit_ : DimensionFit
    """

    def __init__(self, epsilons=None, sampling_scale=None):
        self.epsilons = epsilons
        self.sampling_scale = sampling_scale

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=1)
        meta = {"sampling_scale": self.sampling_scale} if self.sampling_scale else {}
        cloud = PointCloud(X, meta) if len(X) > 1 else X
        self.fit_ = fit_dimension(cloud, self.epsilons)
        self.dimension_ = self.fit_.slope
        self.r2_ = self.fit_.r2
        self.n_features_in_ = X.shape[1]
        return self

    def score(self, X=None, y=None) -> float:
        """Coefficient of determination of the log-log fit."""
        check_is_fitted(self, "fit_")
        return self.r2_
