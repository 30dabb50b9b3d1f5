"""Reference point clouds: Cantor sets, circles, segments and solid balls."""

from __future__ import annotations

import numpy as np

from .cloud import PointCloud

__all__ = ["cantor_cloud", "circle_cloud", "segment_cloud", "ball_cloud"]


def cantor_cloud(depth: int, ratio: float = 1.0 / 3.0, n: int = 2) -> PointCloud:
    """Endpoints of the depth-``depth`` intervals of the middle-``ratio`` Cantor set in ``[0, 1]``.

    The points lie on the first axis of R^n.
    """
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    a = np.zeros(1)
    length = 1.0
    keep = (1.0 - ratio) / 2.0
    for _ in range(depth):
        # left children keep their start, right children start after the gap
        a = np.concatenate([a, a + (1.0 - keep) * length])
        length *= keep
    x = np.sort(np.concatenate([a, a + length]))
    pts = np.zeros((len(x), n))
    pts[:, 0] = x
    meta = {"generator": "cantor", "ratio": ratio, "depth": depth, "sampling_scale": length}
    return PointCloud(pts, meta)


def circle_cloud(m: int, radius: float = 1.0, n: int = 2) -> PointCloud:
    """``m`` equispaced points on a circle in the first coordinate plane."""
    t = 2.0 * np.pi * np.arange(m) / m
    pts = np.zeros((m, n))
    pts[:, 0] = radius * np.cos(t)
    pts[:, 1] = radius * np.sin(t)
    meta = {"generator": "circle", "m": m, "radius": radius, "sampling_scale": 2 * np.pi * radius / m}
    return PointCloud(pts, meta)


def segment_cloud(m: int, length: float = 1.0, n: int = 2) -> PointCloud:
    """``m`` equispaced points on ``[0, length] e1``."""
    pts = np.zeros((m, n))
    pts[:, 0] = np.linspace(0.0, length, m)
    meta = {"generator": "segment", "m": m, "length": length, "sampling_scale": length / (m - 1)}
    return PointCloud(pts, meta)


def ball_cloud(m: int, n: int = 2, radius: float = 1.0, seed: int = 0) -> PointCloud:
    """``m`` uniform random points in the closed ball of the given radius."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((m, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, m) ** (1.0 / n)
    pts = v * r[:, None]
    meta = {
        "generator": "ball",
        "m": m,
        "radius": radius,
        "seed": seed,
        "sampling_scale": radius * m ** (-1.0 / n),
    }
    return PointCloud(pts, meta)
