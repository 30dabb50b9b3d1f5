"""Finite point clouds with generator metadata."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

__all__ = ["PointCloud", "DUPLICATE_TOL"]

DUPLICATE_TOL = 1e-12


@dataclass
class PointCloud:
    """A finite set of points in R^n.

    Points closer than ``DUPLICATE_TOL`` to an earlier point are dropped on
    construction, so the stored points are distinct.

    Parameters
    ----------
    points : array_like, shape (m, n)
    metadata : dict
        Generator name, parameters, sample depth, seed and similar.
    """

    points: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError("points must have shape (m, n)")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        self.points = _drop_duplicates(pts)
        if len(self.points) < 2:
            raise ValueError("a point cloud needs at least two distinct points")
        self.metadata = dict(self.metadata)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    def prefix(self, m: int) -> "PointCloud":
        """The first ``m`` points, with the depth recorded in the metadata."""
        meta = dict(self.metadata, depth=int(m))
        return PointCloud(self.points[:m], meta)

    def nearest_neighbor_distances(self) -> np.ndarray:
        d, _ = cKDTree(self.points).query(self.points, k=2)
        return d[:, 1]

    def thin(self, spacing: float) -> "PointCloud":
        """Greedy net: keep points in order, dropping any within ``spacing`` of a kept one."""
        if spacing <= 0:
            return self
        keep = greedy_net(self.points, spacing)
        return PointCloud(self.points[keep], dict(self.metadata, net_spacing=float(spacing)))

    def diameter(self) -> float:
        from scipy.spatial import ConvexHull
        from scipy.spatial.distance import pdist

        pts = self.points
        if len(pts) > 64 and pts.shape[1] in (2, 3):
            try:
                pts = pts[ConvexHull(pts).vertices]
            except Exception:  # degenerate hulls (collinear, coplanar)
                pass
        if len(pts) > 4000:
            # collinear or coplanar sets with huge hulls: bound through the bounding box
            lo, hi = pts.min(axis=0), pts.max(axis=0)
            return float(np.linalg.norm(hi - lo))
        return float(pdist(pts).max())


def greedy_net(points: np.ndarray, spacing: float) -> np.ndarray:
    """Indices of a greedy ``spacing``-net of ``points``, scanned in order.

    The scan order makes nets of nested prefixes nested as well.
    """
    points = np.asarray(points, dtype=float)
    cell = spacing
    buckets: dict[tuple, list[int]] = {}
    keep = []
    n = points.shape[1]
    offsets = np.array(np.meshgrid(*[[-1, 0, 1]] * n, indexing="ij")).reshape(n, -1).T
    s2 = spacing * spacing
    for i, p in enumerate(points):
        key = tuple(np.floor(p / cell).astype(np.int64))
        close = False
        for off in offsets:
            for j in buckets.get(tuple(np.add(key, off)), ()):
                d = points[j] - p
                if d @ d < s2:
                    close = True
                    break
            if close:
                break
        if not close:
            buckets.setdefault(key, []).append(i)
            keep.append(i)
    return np.asarray(keep, dtype=np.int64)


def _drop_duplicates(pts: np.ndarray) -> np.ndarray:
    if len(pts) < 2:
        return pts
    tree = cKDTree(pts)
    pairs = tree.query_pairs(DUPLICATE_TOL, output_type="ndarray")
    if len(pairs) == 0:
        return pts
    drop = np.zeros(len(pts), bool)
    # keep the earlier point of each close pair
    for i, j in sorted(map(tuple, pairs)):
        if not drop[i]:
            drop[j] = True
    return pts[~drop]
