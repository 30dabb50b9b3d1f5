"""Discrete n-modulus of curve families on lattice discretisations.

The continuous problem ``inf ∫ rho^p dm`` over densities giving every curve
of ``Δ(E, F; V)`` rho-length at least 1 is replaced by a node-weighted lattice
problem: ``rho`` lives on the free nodes, the energy is ``Σ m_i rho_i^p`` with
``m_i`` the (boundary-clipped) cell volume, and the rho-length of a lattice
path is the trapezoidal sum ``Σ |e| (rho_u + rho_v) / 2`` over its edges.
Edges that cross into a plate are clipped at the plate boundary using the
plate's signed distance function, which gives sub-cell accuracy for smooth
plates.

The solver is a cutting-plane (constraint generation) loop: an active set of
paths is kept, the restricted convex program is solved through its smooth
dual, and the shortest rho-weighted path found by Dijkstra is added while it
is shorter than ``1 - tol``.
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass, field
from functools import reduce
from itertools import product
from typing import Sequence

import numba
import numpy as np
from scipy import sparse
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .sphere import chordal_isometry_to_origin, chordal_radius_to_euclidean, sphere_surface_area

logger = logging.getLogger(__name__)

__all__ = [
    "Grid",
    "GridCondenser",
    "DensityField",
    "CapacityResult",
    "ModulusConvergenceError",
    "PlatesTouchError",
    "Ball",
    "Exterior",
    "Segment",
    "Polyline",
    "Ray",
    "PointSet",
    "BallDomain",
    "HalfSpaceDomain",
    "BoxMinusCloudDomain",
    "stencil_offsets",
    "solve_modulus",
    "rasterize_condenser",
    "ring_capacity",
    "spherical_ring_capacity",
    "tau_estimate",
    "teichmuller_normal_form",
    "condenser_capacity",
    "thickness",
    "quasihyperbolic_distance",
    "capacity_to_modulus",
    "modulus_to_capacity",
    "shortest_path_length",
]

DEFAULT_TOL = 1e-3
MAX_OUTER_ROUNDS = 200
MAX_INNER_ITER = 10_000
# coarsest grid used by the coarse-to-fine warm start
MIN_LEVEL_RESOLUTION = 32
# half-width of the grid box, in outer radii, when a plate contains infinity
EXTERIOR_BOX_FACTOR = 3.0
THIN_OFFSET = 0.25


class PlatesTouchError(ValueError):
    """The plates are lattice neighbours: no curve separates them."""


class ModulusConvergenceError(RuntimeError):
    """Constraint generation did not converge; ``best`` holds the last iterate."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


def capacity_to_modulus(capacity: float, n: int) -> float:
    """``(capacity / omega_{n-1}) ** (1 / (1 - n))``; infinite for zero capacity."""
    if capacity <= 0:
        return math.inf
    return (capacity / sphere_surface_area(n)) ** (1.0 / (1 - n))


def modulus_to_capacity(modulus: float, n: int) -> float:
    return sphere_surface_area(n) * modulus ** (1 - n)


# --------------------------------------------------------------------------- grid


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid of nodes ``origin + h * index``."""

    origin: np.ndarray
    h: float
    shape: tuple[int, ...]

    @classmethod
    def from_box(cls, lo, hi, resolution: int) -> "Grid":
        """Grid with ``resolution`` cells along the longest box axis."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("box must satisfy lo < hi on every axis")
        if resolution < 2:
            raise ValueError("resolution must be at least 2")
        h = float(np.max(hi - lo)) / resolution
        cells = np.maximum(np.ceil((hi - lo) / h - 1e-9).astype(int), 1)
        centre = 0.5 * (lo + hi)
        origin = centre - 0.5 * cells * h
        return cls(origin, h, tuple(int(c) + 1 for c in cells))

    @property
    def n(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def resolution(self) -> int:
        return max(self.shape) - 1

    @property
    def lo(self) -> np.ndarray:
        return self.origin

    @property
    def hi(self) -> np.ndarray:
        return self.origin + self.h * (np.asarray(self.shape) - 1)

    def coords(self) -> np.ndarray:
        axes = [self.origin[k] + self.h * np.arange(s) for k, s in enumerate(self.shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def face_factor(self) -> np.ndarray:
        """Fraction of each node's cell lying inside the box."""
        f = np.ones(self.shape)
        for k, s in enumerate(self.shape):
            idx = [slice(None)] * self.n
            for end in (0, s - 1):
                idx[k] = end
                f[tuple(idx)] *= 0.5
        return f.ravel()

    def nearest_node(self, x) -> int:
        idx = np.rint((np.asarray(x, float) - self.origin) / self.h).astype(int)
        idx = np.clip(idx, 0, np.asarray(self.shape) - 1)
        return int(np.ravel_multi_index(tuple(idx), self.shape))


def stencil_offsets(n: int, reach: int) -> np.ndarray:
    """Primitive lattice vectors with max-norm <= ``reach``, one per +/- pair."""
    out = []
    for v in product(range(-reach, reach + 1), repeat=n):
        if not any(v):
            continue
        if reduce(math.gcd, (abs(c) for c in v)) != 1:
            continue
        first = next(c for c in v if c != 0)
        if first > 0:
            out.append(v)
    return np.array(out, dtype=int)


def _resolve_stencil(n: int, stencil) -> np.ndarray:
    if isinstance(stencil, np.ndarray):
        return stencil
    if stencil == "axis":
        return np.eye(n, dtype=int)
    if stencil == "box":
        return stencil_offsets(n, 1)
    if stencil == "wide":
        return stencil_offsets(n, 2)
    if stencil == "auto":
        return stencil_offsets(n, 2)
    raise ValueError(f"unknown stencil {stencil!r}")


def _offset_pairs(shape: Sequence[int], offset: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    ids = np.arange(int(np.prod(shape)), dtype=np.int64).reshape(shape)
    src, dst = [], []
    for s, o in zip(shape, offset):
        src.append(slice(max(0, -o), s - max(0, o)))
        dst.append(slice(max(0, o), s - max(0, -o)))
    return ids[tuple(src)].ravel(), ids[tuple(dst)].ravel()


# ---------------------------------------------------------------------- condenser


@dataclass
class GridCondenser:
    """Lattice discretisation of the curve family ``Δ(E, F; V)``.

    ``plate_E``/``plate_F``/``domain_mask`` are boolean arrays over the grid
    nodes (flattened, C order).  Optional signed distance arrays (positive
    away from the plate) give sub-cell plate boundaries.
    """

    grid: Grid
    plate_E: np.ndarray
    plate_F: np.ndarray
    domain_mask: np.ndarray | None = None
    sdf_E: np.ndarray | None = None
    sdf_F: np.ndarray | None = None

    def __post_init__(self):
        N = self.grid.size
        self.plate_E = np.asarray(self.plate_E, bool).ravel()
        self.plate_F = np.asarray(self.plate_F, bool).ravel()
        if self.domain_mask is None:
            self.domain_mask = np.ones(N, bool)
        self.domain_mask = np.asarray(self.domain_mask, bool).ravel()
        for name in ("plate_E", "plate_F", "domain_mask"):
            if getattr(self, name).shape != (N,):
                raise ValueError(f"{name} has wrong size")
        if not self.plate_E.any() or not self.plate_F.any():
            raise ValueError("plates must be non-empty")
        if np.any(self.plate_E & self.plate_F):
            raise PlatesTouchError("plates overlap")
        if np.any((self.plate_E | self.plate_F) & ~self.domain_mask):
            raise ValueError("plates must lie inside the domain mask")

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def free(self) -> np.ndarray:
        return self.domain_mask & ~self.plate_E & ~self.plate_F


@dataclass
class DensityField:
    """Node weights rho on the grid (zero on plates and outside the domain)."""

    grid: Grid
    rho: np.ndarray

    def energy(self, masses: np.ndarray, p: float) -> float:
        return float(np.sum(masses * self.rho**p))

    def to_bytes(self) -> bytes:
        """Flat binary export.

        Layout: a 32-byte little-endian header ``magic(4s) n(u32) shape(3 u32)
        reserved(u32) h(f64)``, then the origin as ``n`` float64 values, then
        ``rho`` as float64 in C order.
        """
        shape = list(self.grid.shape) + [0] * (3 - self.grid.n)
        head = struct.pack("<4sI3IId", b"RHO1", self.grid.n, *shape, 0, self.grid.h)
        return head + self.grid.origin.astype("<f8").tobytes() + self.rho.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "DensityField":
        magic, n, s0, s1, s2, _, h = struct.unpack_from("<4sI3IId", data, 0)
        if magic != b"RHO1":
            raise ValueError("not a density field file")
        shape = tuple([s0, s1, s2][:n])
        origin = np.frombuffer(data, "<f8", count=n, offset=32).copy()
        rho = np.frombuffer(data, "<f8", offset=32 + 8 * n).copy()
        return cls(Grid(origin, h, shape), rho)


@dataclass
class CapacityResult:
    capacity: float
    modulus: float
    iterations: int
    certified_slack: float
    lower_bound: float = 0.0
    n_paths: int = 0
    n: int = 2
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def clean(v):
            return None if isinstance(v, float) and not math.isfinite(v) else v

        return {
            "capacity": clean(self.capacity),
            "modulus": clean(self.modulus),
            "iterations": self.iterations,
            "certified_slack": clean(self.certified_slack),
            "lower_bound": clean(self.lower_bound),
            "n_paths": self.n_paths,
            "n": self.n,
            "info": self.info,
        }


def _zero_result(n: int, reason: str) -> CapacityResult:
    return CapacityResult(0.0, math.inf, 0, math.inf, 0.0, 0, n, {"reason": reason})


# ------------------------------------------------------------------------ graph


class _LatticeGraph:
    """Free nodes plus the plate nodes adjacent to them, with clipped edges."""

    def __init__(self, cond: GridCondenser, offsets: np.ndarray):
        grid = cond.grid
        h = grid.h
        E, F, dom = cond.plate_E, cond.plate_F, cond.domain_mask
        free = cond.free
        axis_like = np.abs(offsets).sum(axis=1) == 1

        us, vs, cus, cvs = [], [], [], []
        for off, is_axis in zip(offsets, axis_like):
            a, b = _offset_pairs(grid.shape, off)
            keep = dom[a] & dom[b]
            a, b = a[keep], b[keep]
            fa, fb = free[a], free[b]
            cross = (E[a] & F[b]) | (F[a] & E[b])
            if cross.any() and is_axis:
                raise PlatesTouchError("plates are adjacent lattice nodes")
            keep = fa | fb
            a, b, fa, fb = a[keep], b[keep], fa[keep], fb[keep]
            length = h * float(np.linalg.norm(off))
            ca = np.where(fa, 0.5 * length, 0.0)
            cb = np.where(fb, 0.5 * length, 0.0)
            # free -> plate edges: the free node carries the clipped length
            ia = fa & ~fb
            ib = fb & ~fa
            ca[ia] = length * self._fraction(cond, a[ia], b[ia])
            cb[ib] = length * self._fraction(cond, b[ib], a[ib])
            us.append(a)
            vs.append(b)
            cus.append(ca)
            cvs.append(cb)

        u = np.concatenate(us)
        v = np.concatenate(vs)
        cu = np.concatenate(cus)
        cv = np.concatenate(cvs)

        used = np.zeros(grid.size, bool)
        used[u] = True
        used[v] = True
        self.nodes = np.flatnonzero(used)
        local = -np.ones(grid.size, dtype=np.int64)
        local[self.nodes] = np.arange(len(self.nodes))
        self.local = local
        self.u = local[u].astype(np.int32)
        self.v = local[v].astype(np.int32)
        self.cu = cu
        self.cv = cv
        self.is_free = free[self.nodes]
        self.is_E = E[self.nodes]
        self.is_F = F[self.nodes]
        nloc = len(self.nodes)
        order = np.arange(len(u), dtype=float)
        coo = sparse.coo_matrix((order + 1.0, (self.u, self.v)), shape=(nloc, nloc))
        self.csr = coo.tocsr()
        self.csr.sort_indices()
        self.perm = (self.csr.data - 1.0).astype(np.int64)

        # masses of free nodes in local numbering
        frac = grid.face_factor()[self.nodes]
        for sdf in (cond.sdf_E, cond.sdf_F):
            if sdf is not None:
                frac = frac * np.clip(0.5 + sdf[self.nodes] / h, 0.0, 1.0)
        self.mass = np.where(self.is_free, frac * h**grid.n, 0.0)

        # F nodes entered from a free node are path terminals
        self.sources = np.flatnonzero(self.is_E)
        self.targets = np.flatnonzero(self.is_F)
        self._nloc = nloc

    @staticmethod
    def _fraction(cond, free_nodes, plate_nodes):
        if cond.sdf_E is None and cond.sdf_F is None:
            return np.full(len(free_nodes), 0.5)
        out = np.full(len(free_nodes), 0.5)
        for plate, sdf in ((cond.plate_E, cond.sdf_E), (cond.plate_F, cond.sdf_F)):
            if sdf is None:
                continue
            sel = plate[plate_nodes]
            phi_u = np.maximum(sdf[free_nodes[sel]], 1e-300)
            phi_v = np.minimum(sdf[plate_nodes[sel]], 0.0)
            out[sel] = np.clip(phi_u / (phi_u - phi_v), 0.0, 1.0)
        return out

    def weights(self, rho_local: np.ndarray) -> np.ndarray:
        return self.cu * rho_local[self.u] + self.cv * rho_local[self.v]

    def shortest(self, rho_local: np.ndarray, reverse: bool = False):
        self.csr.data = self.weights(rho_local)[self.perm]
        dist, pred, _ = dijkstra(
            self.csr,
            directed=False,
            indices=self.targets if reverse else self.sources,
            min_only=True,
            return_predecessors=True,
        )
        return dist, pred

    def trace(self, pred: np.ndarray, targets: np.ndarray):
        """Return (row, node, coefficient) triples for the paths to ``targets``."""
        csr = self.csr
        return _trace_paths(
            pred.astype(np.int64),
            np.asarray(targets, dtype=np.int64),
            csr.indptr.astype(np.int64),
            csr.indices.astype(np.int64),
            self.perm,
            self.cu,
            self.cv,
        )

    def through_paths(self, rho_local: np.ndarray, nodes: np.ndarray):
        """Shortest plate-to-plate paths forced through each of ``nodes``."""
        _, pred_e = self.shortest(rho_local)
        _, pred_f = self.shortest(rho_local, reverse=True)
        r1, c1, v1 = self.trace(pred_e, nodes)
        r2, c2, v2 = self.trace(pred_f, nodes)
        return np.concatenate([r1, r2]), np.concatenate([c1, c2]), np.concatenate([v1, v2])


@numba.njit(cache=True)
def _edge_position(indptr, indices, row, col):
    lo = indptr[row]
    hi = indptr[row + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        if indices[mid] < col:
            lo = mid + 1
        else:
            hi = mid
    if lo < indptr[row + 1] and indices[lo] == col:
        return lo
    return -1


@numba.njit(cache=True)
def _trace_paths(pred, targets, indptr, indices, perm, cu, cv):
    total = 0
    for i in range(targets.shape[0]):
        cur = targets[i]
        while pred[cur] >= 0:
            total += 2
            cur = pred[cur]
    rows = np.empty(total, np.int64)
    cols = np.empty(total, np.int64)
    vals = np.empty(total)
    t = 0
    for i in range(targets.shape[0]):
        cur = targets[i]
        while pred[cur] >= 0:
            prev = pred[cur]
            pos = _edge_position(indptr, indices, prev, cur)
            if pos >= 0:
                e = perm[pos]
                cp, cc = cu[e], cv[e]
            else:
                e = perm[_edge_position(indptr, indices, cur, prev)]
                cp, cc = cv[e], cu[e]
            rows[t] = i
            cols[t] = prev
            vals[t] = cp
            rows[t + 1] = i
            cols[t + 1] = cur
            vals[t + 1] = cc
            t += 2
            cur = prev
    return rows, cols, vals


@numba.njit(cache=True)
def _row_hashes(indptr, indices, data):
    out = np.empty(indptr.shape[0] - 1, np.uint64)
    prime = np.uint64(1099511628211)
    for i in range(out.shape[0]):
        hsh = np.uint64(14695981039346656037)
        for t in range(indptr[i], indptr[i + 1]):
            hsh = (hsh ^ np.uint64(indices[t])) * prime
            hsh = (hsh ^ np.uint64(np.int64(np.round(data[t] * 1e12)))) * prime
        out[i] = hsh
    return out


# ----------------------------------------------------------------------- solver


@numba.njit(cache=True)
def _path_length(s, e, indices, data, w, a, inv, delta):
    """Length of path ``k`` and its derivative after a step ``delta`` in its multiplier."""
    ell = 0.0
    slope = 0.0
    for t in range(s, e):
        j = indices[t]
        x = (a[j] + data[t] * delta) * (w[t] / data[t]) if data[t] > 0.0 else 0.0
        if x <= 0.0:
            continue
        if inv == 0.5:
            r = math.sqrt(x)
        else:
            r = x**inv
        ell += data[t] * r
        slope += data[t] * w[t] * inv * r / x
    return ell, slope


@numba.njit(cache=True)
def _coordinate_ascent(indptr, indices, data, w, curv, lam, a, p, gtol, max_sweeps):
    """Cyclic coordinate ascent on the dual of the restricted problem.

    Each step moves one path multiplier so that the path gets length 1, or
    clamps the multiplier at 0.  ``w`` holds ``c / (p m)`` per entry and
    ``curv`` the per-path sum of ``c w`` (the exact curvature when p = 2).
    Returns (sweeps, worst gradient).
    """
    m = lam.shape[0]
    inv = 1.0 / (p - 1.0)
    quadratic = p == 2.0
    worst = 0.0
    for sweep in range(max_sweeps):
        worst = 0.0
        for k in range(m):
            s = indptr[k]
            e = indptr[k + 1]
            if quadratic:
                ell = 0.0
                for t in range(s, e):
                    ell += w[t] * a[indices[t]]
                g = 1.0 - ell
            else:
                ell, slope = _path_length(s, e, indices, data, w, a, inv, 0.0)
                g = 1.0 - ell
            if lam[k] <= 0.0 and g <= 0.0:
                continue
            if abs(g) > worst:
                worst = abs(g)
            if abs(g) <= 0.1 * gtol:
                continue
            if quadratic:
                # the path length is affine in the step while multipliers stay >= 0
                delta = g / curv[k]
                if lam[k] + delta < 0.0:
                    delta = -lam[k]
            else:
                delta = _solve_step(s, e, indices, data, w, a, inv, lam[k], g, slope)
            for t in range(s, e):
                j = indices[t]
                a[j] += data[t] * delta
                if a[j] < 0.0:
                    a[j] = 0.0
            lam[k] += delta
            if lam[k] < 0.0:
                lam[k] = 0.0
        if worst <= gtol:
            return sweep + 1, worst
    return max_sweeps, worst


@numba.njit(cache=True)
def _solve_step(s, e, indices, data, w, a, inv, lam_k, g, slope):
    """Safeguarded Newton solve of ``length(delta) = 1`` with ``delta >= -lam_k``."""
    lo = -lam_k
    if g < 0.0:
        ell_lo, _s = _path_length(s, e, indices, data, w, a, inv, lo)
        if ell_lo >= 1.0:
            return lo
        hi = 0.0
    else:
        lo = 0.0
        hi = g / slope if slope > 0.0 else 1.0
        for _ in range(200):
            ell_hi, _s = _path_length(s, e, indices, data, w, a, inv, hi)
            if ell_hi >= 1.0:
                break
            lo = hi
            hi *= 2.0
    delta = 0.5 * (lo + hi)
    for _ in range(60):
        ell, slope = _path_length(s, e, indices, data, w, a, inv, delta)
        f = ell - 1.0
        if abs(f) <= 1e-12:
            break
        if f > 0.0:
            hi = delta
        else:
            lo = delta
        step = delta - f / slope if slope > 0.0 else 0.5 * (lo + hi)
        if step <= lo or step >= hi:
            step = 0.5 * (lo + hi)
        delta = step
        if hi - lo <= 1e-15 * (1.0 + abs(delta)):
            break
    return delta


class _RestrictedProblem:
    """``min Σ m rho^p`` s.t. ``N rho >= 1`` over the active paths, via its dual."""

    def __init__(self, mass: np.ndarray, p: float, max_paths: int = 20_000):
        self.free_idx = np.flatnonzero(mass > 0)
        self.mass = mass[self.free_idx]
        self.p = p
        self.max_paths = max_paths
        self.keys: list[int] = []
        self.keyset: set[int] = set()
        self.N = sparse.csr_matrix((0, len(self.free_idx)))
        self.lam = np.zeros(0)
        self.idle = np.zeros(0, dtype=int)
        col = -np.ones(len(mass), dtype=np.int64)
        col[self.free_idx] = np.arange(len(self.free_idx))
        self.col = col

    def add_paths(self, rows, cols, vals, n_paths) -> int:
        c = self.col[cols]
        ok = c >= 0
        block = sparse.csr_matrix(
            (vals[ok], (rows[ok], c[ok])), shape=(n_paths, len(self.free_idx))
        )
        block.sum_duplicates()
        block.sort_indices()
        hashes = _row_hashes(block.indptr.astype(np.int64), block.indices.astype(np.int64), block.data)
        empty = np.diff(block.indptr) == 0
        fresh = []
        for i, key in enumerate(hashes.tolist()):
            if empty[i] or key in self.keyset:
                continue
            self.keyset.add(key)
            self.keys.append(key)
            fresh.append(i)
        if fresh:
            self.N = sparse.vstack([self.N, block[fresh]], format="csr")
            self.lam = np.concatenate([self.lam, np.zeros(len(fresh))])
            self.idle = np.concatenate([self.idle, np.zeros(len(fresh), dtype=int)])
        return len(fresh)

    def prune(self, always: bool = False, patience: int = 5):
        """Drop paths whose multiplier has been zero for ``patience`` rounds."""
        self.idle = np.where(self.lam > 0, 0, self.idle + 1)
        if len(self.lam) <= self.max_paths and not always:
            return
        keep = np.flatnonzero(self.idle < patience)
        if len(keep) == len(self.lam):
            return
        self.N = self.N[keep]
        self.lam = self.lam[keep]
        self.idle = self.idle[keep]
        self.keys = [self.keys[i] for i in keep]
        self.keyset = set(self.keys)

    def primal(self, lam: np.ndarray) -> np.ndarray:
        a = self.N.T @ lam
        return (np.maximum(a, 0.0) / (self.p * self.mass)) ** (1.0 / (self.p - 1.0))

    def solve(self, gtol: float, max_sweeps: int = MAX_INNER_ITER) -> tuple[int, float]:
        N = self.N
        a = np.asarray(N.T @ self.lam, dtype=float)
        indices = N.indices.astype(np.int64)
        data = N.data.astype(float)
        w = data / (self.p * self.mass[indices])
        curv = np.add.reduceat(data * w, N.indptr[:-1]) if len(data) else np.zeros(0)
        curv = np.where(np.diff(N.indptr) > 0, curv, 1.0)
        return _coordinate_ascent(
            N.indptr.astype(np.int64), indices, data, w, curv, self.lam, a, float(self.p), gtol, max_sweeps
        )

    def dual_value(self) -> float:
        rho = self.primal(self.lam)
        return float(np.sum(self.lam)) - (self.p - 1.0) * float(np.sum(self.mass * rho**self.p))

    def rho_local(self, n_local: int) -> np.ndarray:
        out = np.zeros(n_local)
        out[self.free_idx] = self.primal(self.lam)
        return out


def solve_modulus(
    cond: GridCondenser,
    p: float | None = None,
    tol: float = DEFAULT_TOL,
    stencil="auto",
    max_rounds: int = MAX_OUTER_ROUNDS,
    max_new_paths: int = 4000,
    prune_each_round: bool = True,
    seed_paths: int = 2000,
    inner_sweeps: int = 30,
    warm_start: "DensityField | None" = None,
) -> tuple[CapacityResult, DensityField]:
    """Discrete p-modulus of the lattice curve family of ``cond``.

    Parameters
    ----------
    cond : GridCondenser
    p : float, optional
        Exponent, defaults to the dimension (the conformal case).
    tol : float
        Paths shorter than ``1 - tol`` are violated constraints.
    stencil : {"auto", "axis", "box", "wide"} or ndarray
        Lattice neighbourhood.  "axis" is 2n-connectivity, "box" the primitive
        vectors of max-norm 1 (8 neighbours in the plane, 26 in space); "wide"
        and "auto" those of max-norm 2 (16 and 98 neighbours).

    Returns
    -------
    result : CapacityResult
        ``capacity`` is the energy of the returned (exactly feasible)
        density, an upper bound for the discrete modulus; ``lower_bound`` is
        the dual value of the last restricted problem.
    density : DensityField
    """
    n = cond.n
    p = float(n if p is None else p)
    if not (0 < tol < 0.1):
        raise ValueError("tol must lie in (0, 0.1)")
    if p <= 1:
        raise ValueError("exponent p must exceed 1")
    graph = _LatticeGraph(cond, _resolve_stencil(n, stencil))
    nloc = len(graph.nodes)
    empty = DensityField(cond.grid, np.zeros(cond.grid.size))
    if len(graph.sources) == 0 or len(graph.targets) == 0:
        return _zero_result(n, "no lattice path between plates"), empty

    rho = np.where(graph.is_free, 1.0, 0.0)
    if warm_start is not None:
        rho = _transfer_density(warm_start, cond.grid.coords()[graph.nodes], graph.is_free)
    dist, pred = graph.shortest(rho)
    reach = dist[graph.targets]
    if not np.isfinite(reach).any():
        return _zero_result(n, "no lattice path between plates"), empty
    rho /= reach[np.isfinite(reach)].min()

    problem = _RestrictedProblem(graph.mass, p)
    gtol = tol / 10.0
    rounds = 0
    # best feasible density so far (scaled to shortest length 1) and its energy
    incumbent = rho / 1.0
    upper = float(np.sum(graph.mass * incumbent**p))
    lower = 0.0
    lmin = 1.0
    for rounds in range(1, max_rounds + 1):
        seeding = len(problem.lam) == 0
        if seeding:
            query = rho
            dist, pred = graph.shortest(query)
            dq = float(np.min(dist[graph.targets]))
            if dq > 0:
                energy = float(np.sum(graph.mass * (query / dq) ** p))
                if energy < upper:
                    upper, incumbent = energy, query / dq
        else:
            # in-out stabilisation: search the segment between the incumbent
            # and the restricted optimum for the best feasible rescaling, and
            # separate at that point rather than at the optimum itself
            theta, energy, dist, pred = _segment_search(graph, incumbent, rho, p)
            query = theta * rho + (1.0 - theta) * incumbent
            if energy < upper:
                upper = energy
                incumbent = query / float(np.min(dist[graph.targets]))
        if not seeding:
            lower = max(lower, problem.dual_value())
            if upper - lower <= p * tol * upper:
                break
        cand = graph.targets
        if not seeding:
            dr, pr = graph.shortest(rho)
            lmin = float(np.min(dr[graph.targets]))
            if lmin > 0:
                energy = float(np.sum(graph.mass * (rho / lmin) ** p))
                if energy < upper:
                    upper, incumbent = energy, rho / lmin
            if lmin >= 1.0 - tol:
                break
        rows, cols, vals = graph.trace(pred, cand)
        added = 0
        if seeding:
            added += problem.add_paths(rows, cols, vals, len(cand))
            # paths through a spread of free nodes, so that no region starts uncovered
            free = np.flatnonzero(graph.is_free)
            step = max(1, len(free) // seed_paths)
            via = free[::step]
            r2, c2, v2 = graph.through_paths(rho, via)
            added += problem.add_paths(r2, c2, v2, len(via))
        else:
            # keep the paths found at the query point that the restricted optimum violates
            length = np.bincount(rows, vals * rho[cols], minlength=len(cand))
            keep = np.flatnonzero(length < 1.0 - tol)
            keep = keep[np.argsort(length[keep], kind="stable")][:max_new_paths]
            sel = np.isin(rows, keep)
            remap = np.full(len(cand), -1)
            remap[keep] = np.arange(len(keep))
            added += problem.add_paths(remap[rows[sel]], cols[sel], vals[sel], len(keep))
            # violated paths through a spread of nodes, not only one per target
            back, pb = graph.shortest(rho, reverse=True)
            total = dr + back
            repaired = _repair(rho, total)
            energy = float(np.sum(graph.mass * repaired**p))
            if energy < upper:
                upper, incumbent = energy, repaired
            via = np.flatnonzero(graph.is_free & (total < 1.0 - tol))
            step = max(1, -(-len(via) // max_new_paths))
            via = via[::step]
            r1, c1, v1 = graph.trace(pr, via)
            r2, c2, v2 = graph.trace(pb, via)
            added += problem.add_paths(
                np.concatenate([r1, r2]), np.concatenate([c1, c2]), np.concatenate([v1, v2]), len(via)
            )
        logger.debug(
            "round %d: shortest %.5f, bounds [%.6g, %.6g], %d new paths",
            rounds, lmin, lower, upper, added,
        )
        if added == 0:
            gtol /= 10.0
            if gtol < 1e-12:
                break
        # inexact inner solves while the outer loop is still far from feasible
        sweeps, worst = problem.solve(max(gtol, 0.01 * (1.0 - lmin)), max_sweeps=inner_sweeps)
        logger.debug("  inner: %d sweeps, residual %.2e, %d paths", sweeps, worst, len(problem.lam))
        rho = problem.rho_local(nloc)
        problem.prune(always=prune_each_round)
    else:
        raise ModulusConvergenceError(
            f"no convergence in {max_rounds} rounds (bounds {lower:.6g}, {upper:.6g})",
            _finish(graph, cond, incumbent, lower, rounds, p, len(problem.lam)),
        )
    return _finish(graph, cond, incumbent, lower, rounds, p, len(problem.lam))


def _repair(rho: np.ndarray, through: np.ndarray) -> np.ndarray:
    """Make ``rho`` feasible by scaling each node by its shortest through-path length.

    A path of length ``l < 1`` passes only through nodes whose shortest
    through-path is at most ``l``, so after dividing every node by
    ``min(through, 1)`` each path has length at least 1.
    """
    scale = np.minimum(np.where(np.isfinite(through), through, 1.0), 1.0)
    return np.where(rho > 0, rho / np.maximum(scale, 1e-300), 0.0)


def _segment_search(graph, inner, outer, p, evaluations: int = 8):
    """Golden-section search for the mix of two densities of least scaled energy.

    Returns ``(theta, energy, dist, pred)`` for the mix ``theta * outer +
    (1 - theta) * inner`` rescaled to shortest length 1, with the shortest-path
    data of the best point.
    """
    cache = {}

    def value(theta):
        if theta not in cache:
            q = theta * outer + (1.0 - theta) * inner
            dist, pred = graph.shortest(q)
            lmin = float(np.min(dist[graph.targets]))
            e = float(np.sum(graph.mass * q**p)) / lmin**p if lmin > 0 else np.inf
            cache[theta] = (e, dist, pred)
        return cache[theta][0]

    golden = 0.5 * (math.sqrt(5.0) - 1.0)
    a, b = 0.0, 1.0
    c, d = b - golden * (b - a), a + golden * (b - a)
    for _ in range(evaluations):
        if value(c) <= value(d):
            b, d = d, c
            c = b - golden * (b - a)
        else:
            a, c = c, d
            d = a + golden * (b - a)
    theta = min(cache, key=lambda t: cache[t][0])
    e, dist, pred = cache[theta]
    return theta, e, dist, pred


def _transfer_density(field: "DensityField", points: np.ndarray, free: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of a density onto ``points``, ignoring plate nodes."""
    g = field.grid
    axes = tuple(g.origin[k] + g.h * np.arange(m) for k, m in enumerate(g.shape))
    vals = field.rho.reshape(g.shape)
    support = (vals > 0).astype(float)
    kw = dict(method="linear", bounds_error=False, fill_value=0.0)
    num = RegularGridInterpolator(axes, vals, **kw)(points)
    den = RegularGridInterpolator(axes, support, **kw)(points)
    fallback = float(field.rho[field.rho > 0].mean()) if np.any(field.rho > 0) else 1.0
    out = np.where(den > 1e-9, num / np.maximum(den, 1e-9), fallback)
    return np.where(free, out, 0.0)


def _finish(graph, cond, rho, lower, rounds, p, n_paths):
    n = cond.n
    capacity = float(np.sum(graph.mass * rho**p))
    if not math.isfinite(capacity):
        raise ModulusConvergenceError("degenerate density", None)
    full = np.zeros(cond.grid.size)
    full[graph.nodes] = rho
    dist, _ = graph.shortest(rho)
    lmin = float(np.min(dist[graph.targets]))
    result = CapacityResult(
        capacity=capacity,
        modulus=capacity_to_modulus(capacity, n),
        iterations=rounds,
        certified_slack=lmin - 1.0,
        lower_bound=max(lower, 0.0),
        n_paths=n_paths,
        n=n,
        info={"h": cond.grid.h, "shape": list(cond.grid.shape), "p": p},
    )
    return result, DensityField(cond.grid, full)


def shortest_path_length(cond: GridCondenser, density: DensityField, stencil="auto") -> float:
    """Independent feasibility check: shortest rho-length of a plate-to-plate path."""
    graph = _LatticeGraph(cond, _resolve_stencil(cond.n, stencil))
    dist, _ = graph.shortest(density.rho[graph.nodes])
    return float(np.min(dist[graph.targets]))


# ------------------------------------------------------------------- primitives


class _Primitive:
    thin = False

    def sdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bounds(self):
        """Axis-aligned bounding box, or None when unbounded."""
        return None


@dataclass
class Ball(_Primitive):
    """Closed Euclidean ball."""

    center: Sequence[float]
    radius: float

    def sdf(self, x):
        return np.linalg.norm(x - np.asarray(self.center, float), axis=1) - self.radius

    def bounds(self):
        c = np.asarray(self.center, float)
        return c - self.radius, c + self.radius


@dataclass
class Exterior(_Primitive):
    """Closed complement ``{|x - center| >= radius}`` (contains infinity)."""

    center: Sequence[float]
    radius: float

    def sdf(self, x):
        return self.radius - np.linalg.norm(x - np.asarray(self.center, float), axis=1)

    def bounds(self):
        c = np.asarray(self.center, float)
        return c - self.radius, c + self.radius


def _segment_distance(x, a, b):
    ab = b - a
    L2 = float(ab @ ab)
    if L2 == 0:
        return np.linalg.norm(x - a, axis=1)
    t = np.clip((x - a) @ ab / L2, 0.0, 1.0)
    return np.linalg.norm(x - (a + t[:, None] * ab), axis=1)


@dataclass
class Segment(_Primitive):
    a: Sequence[float]
    b: Sequence[float]
    thin = True

    def sdf(self, x):
        return _segment_distance(x, np.asarray(self.a, float), np.asarray(self.b, float))

    def bounds(self):
        a, b = np.asarray(self.a, float), np.asarray(self.b, float)
        return np.minimum(a, b), np.maximum(a, b)


@dataclass
class Polyline(_Primitive):
    vertices: np.ndarray
    thin = True

    def sdf(self, x):
        v = np.asarray(self.vertices, float)
        if len(v) == 1:
            return np.linalg.norm(x - v[0], axis=1)
        return np.min([_segment_distance(x, v[i], v[i + 1]) for i in range(len(v) - 1)], axis=0)

    def bounds(self):
        v = np.asarray(self.vertices, float)
        return v.min(axis=0), v.max(axis=0)


@dataclass
class Ray(_Primitive):
    """``{start + t * direction : t >= 0}``, truncated by the grid box."""

    start: Sequence[float]
    direction: Sequence[float]
    thin = True

    def sdf(self, x):
        a = np.asarray(self.start, float)
        d = np.asarray(self.direction, float)
        d = d / np.linalg.norm(d)
        t = np.maximum((x - a) @ d, 0.0)
        return np.linalg.norm(x - (a + t[:, None] * d), axis=1)


@dataclass
class PointSet(_Primitive):
    """Finite point set, optionally dilated by ``dilation`` (default: half a cell)."""

    points: np.ndarray
    dilation: float | None = None

    @property
    def thin(self):
        return self.dilation is None

    def sdf(self, x):
        tree = cKDTree(np.asarray(self.points, float))
        d, _ = tree.query(x)
        return d - (self.dilation or 0.0)

    def bounds(self):
        p = np.asarray(self.points, float)
        r = self.dilation or 0.0
        return p.min(axis=0) - r, p.max(axis=0) + r


def _as_list(prims) -> list:
    if isinstance(prims, _Primitive):
        return [prims]
    return list(prims)


def _plate(prims: list, coords: np.ndarray, h: float):
    """Node mask and signed distance of a union of primitives."""
    sdf = np.full(len(coords), np.inf)
    mask = np.zeros(len(coords), bool)
    for prim in prims:
        d = prim.sdf(coords)
        if prim.thin:
            # thin primitives catch nodes within half a cell; their distance is
            # offset so that edge clipping still sees where they end in a cell
            mask |= d <= 0.5 * h
            d = d - THIN_OFFSET * h
        else:
            mask |= d <= 0.0
        sdf = np.minimum(sdf, d)
    return mask, sdf


def rasterize_condenser(
    E,
    F,
    grid: Grid,
    domain_mask: np.ndarray | None = None,
) -> GridCondenser:
    coords = grid.coords()
    eprims, fprims = _as_list(E), _as_list(F)
    mE, sE = _plate(eprims, coords, grid.h)
    mF, sF = _plate(fprims, coords, grid.h)
    if domain_mask is not None:
        mE &= domain_mask
        mF &= domain_mask
    if np.any(mE & mF):
        raise PlatesTouchError("plates overlap after rasterisation")
    return GridCondenser(grid, mE, mF, domain_mask, sE, sF)


def _auto_box(prims: list, n: int, pad: float):
    lows, highs = [], []
    for prim in prims:
        b = prim.bounds()
        if b is not None:
            lows.append(np.asarray(b[0], float))
            highs.append(np.asarray(b[1], float))
    if not lows:
        raise ValueError("cannot size a grid box from unbounded primitives; pass box=")
    lo, hi = np.min(lows, axis=0), np.max(highs, axis=0)
    size = float(np.max(hi - lo))
    return lo - pad * size, hi + pad * size


def ring_capacity(
    E,
    F,
    n: int = 2,
    resolution: int = 128,
    box=None,
    p: float | None = None,
    tol: float = DEFAULT_TOL,
    stencil="auto",
    pad: float | None = None,
    multilevel: bool = True,
) -> CapacityResult:
    """Capacity of the condenser with plates ``E`` and ``F`` (geometric primitives).

    Without an explicit ``box`` the grid box is the bounding box of all
    bounded primitives.  If a plate contains a neighbourhood of infinity
    (an :class:`Exterior`), the box is centred on its sphere with half-width
    three radii; otherwise the bounding box is padded by ``pad`` times its size
    (default 1) on every side, and curves leaving it are not counted.
    """
    eprims, fprims = _as_list(E), _as_list(F)
    if box is None:
        closed = any(isinstance(q, Exterior) for q in eprims + fprims)
        if pad is None:
            pad = 0.0 if closed else 1.0
        if closed:
            # a box three times the size of the outer sphere, centred on it
            ext = [q for q in eprims + fprims if isinstance(q, Exterior)][0]
            c = np.asarray(ext.center, dtype=float)
            lo, hi = c - EXTERIOR_BOX_FACTOR * ext.radius, c + EXTERIOR_BOX_FACTOR * ext.radius
        else:
            lo, hi = _auto_box(eprims + fprims, n, pad)
    else:
        lo, hi = (np.full(n, box[0], float), np.full(n, box[1], float)) if np.isscalar(box[0]) else box
    grid = Grid.from_box(lo, hi, resolution)
    cond = rasterize_condenser(eprims, fprims, grid)
    warm = _coarse_density(eprims, fprims, grid.lo, grid.hi, resolution, p, tol, stencil) if multilevel else None
    result, _ = solve_modulus(cond, p=p, tol=tol, stencil=stencil, warm_start=warm)
    result.info["box"] = [list(map(float, grid.lo)), list(map(float, grid.hi))]
    return result


def _ring_solve(eprims, fprims, lo, hi, resolution, p, tol, stencil):
    grid = Grid.from_box(lo, hi, resolution)
    cond = rasterize_condenser(eprims, fprims, grid)
    return solve_modulus(cond, p=p, tol=tol, stencil=stencil, warm_start=_coarse_density(eprims, fprims, lo, hi, resolution, p, tol, stencil))


def _coarse_density(eprims, fprims, lo, hi, resolution, p, tol, stencil):
    """Density solved at half the resolution, or None if that grid cannot hold the plates."""
    if resolution < 2 * MIN_LEVEL_RESOLUTION:
        return None
    try:
        _, warm = _ring_solve(eprims, fprims, lo, hi, resolution // 2, p, tol, stencil)
    except (PlatesTouchError, ModulusConvergenceError, ValueError):
        return None
    return warm


def spherical_ring_capacity(r: float, R: float, n: int = 2, resolution: int = 128, **kw) -> CapacityResult:
    """Discrete capacity of the round ring ``{r < |x| < R}``."""
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    centre = np.zeros(n)
    return ring_capacity(Ball(centre, r), Exterior(centre, R), n=n, resolution=resolution, **kw)


# ---------------------------------------------------------------- teichmuller


def teichmuller_normal_form(s: float) -> float:
    """Half-gap ``t`` of the symmetric ring with plates ``[-1, -t]`` and ``[t, 1]``.

    The Möbius map fixing the real axis that carries ``(-1, 0, s, inf)`` onto
    ``(-1, -t, t, 1)`` exists because both quadruples have the same
    cross-ratio ``(1 + t)^2 / (4 t) = 1 + 1/s``.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    q = 1.0 + 1.0 / s
    b = 2.0 * q - 1.0
    # smaller root of t^2 - 2 b t + 1 = 0, computed stably
    return 1.0 / (b + math.sqrt(b * b - 1.0))


def tau_estimate(
    s: float,
    n: int = 2,
    resolution: int = 256,
    box_factor: float = 20.0,
    method: str = "normal",
    tol: float = DEFAULT_TOL,
    stencil="auto",
    multilevel: bool = True,
) -> CapacityResult:
    """Discrete estimate of the Teichmüller capacity tau_n(s).

    ``method="direct"`` rasterises ``[-e1, 0]`` against the ray ``[s e1, inf)``
    truncated by a box of half-width ``box_factor * max(1, s)``.
    ``method="normal"`` (default) first moves the ring by a Möbius map to the
    symmetric two-segment form ``[-e1, -t e1]``, ``[t e1, e1]``, which keeps
    both plates resolvable for every ``s``; the box half-width is then
    ``box_factor`` (in units of the unit plate extent).
    """
    if s <= 0:
        raise ValueError("s must be positive")
    e1 = np.zeros(n)
    e1[0] = 1.0
    if method == "direct":
        W = box_factor * max(1.0, s)
        E = Segment(-e1, 0 * e1)
        F = Ray(s * e1, e1)
    elif method == "normal":
        W = box_factor
        t = teichmuller_normal_form(s)
        E = Segment(-e1, -t * e1)
        F = Segment(t * e1, e1)
    else:
        raise ValueError(f"unknown method {method!r}")
    lo, hi = np.full(n, -W), np.full(n, W)
    if multilevel:
        result, _ = _ring_solve([E], [F], lo, hi, resolution, None, tol, stencil)
    else:
        cond = rasterize_condenser(E, F, Grid.from_box(lo, hi, resolution))
        result, _ = solve_modulus(cond, tol=tol, stencil=stencil)
    result.info.update({"s": s, "method": method, "box_half_width": W})
    return result


# ------------------------------------------------------------------ condensers


def condenser_capacity(
    x,
    E: np.ndarray,
    r: float,
    resolution: int = 96,
    tol: float = DEFAULT_TOL,
    stencil="auto",
    dilation: float | None = None,
) -> CapacityResult:
    """``capac(B(x, 2r), closure(B(x, r)) ∩ E)`` for a finite point set ``E``.

    The intersected points are dilated by one grid cell (override with
    ``dilation``).  Empty intersections and single points give capacity 0.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    x = np.asarray(x, float)
    n = x.shape[0]
    pts = np.atleast_2d(np.asarray(E, float))
    inside = pts[np.linalg.norm(pts - x, axis=1) <= r * (1 + 1e-12)]
    if len(inside) == 0:
        return _zero_result(n, "E does not meet the closed ball")
    if np.ptp(inside, axis=0).max() <= 1e-12:
        return _zero_result(n, "single-point plate is polar")
    W = 2.0 * r * (1.0 + 3.0 / resolution)
    grid = Grid.from_box(x - W, x + W, resolution)
    coords = grid.coords()
    dom = np.linalg.norm(coords - x, axis=1) <= 2.0 * r + 2.0 * grid.h
    dil = grid.h if dilation is None else dilation
    cond = rasterize_condenser(PointSet(inside, dil), Exterior(x, 2.0 * r), grid, dom)
    result, _ = solve_modulus(cond, tol=tol, stencil=stencil)
    result.info.update({"x": x.tolist(), "r": r, "points": int(len(inside))})
    return result


def thickness(
    E: np.ndarray,
    x,
    r: float,
    t: float | None = None,
    resolution: int = 96,
    tol: float = DEFAULT_TOL,
    stencil="auto",
) -> CapacityResult:
    """Metric thickness ``m_t(E, r, x) = M(Δ(∂B_chi(x, t), E ∩ B_chi(x, r)))``.

    ``x`` is first moved to the origin by a chordal isometry; chordal balls
    about the origin are Euclidean balls, so the curve family becomes the
    condenser family of ``B(0, rho_t)`` relative to the recentred set inside
    ``B(0, rho_r)``.  Defaults to ``t = 2 r``.
    """
    t = 2.0 * r if t is None else t
    if not 0 < r < t < 1:
        raise ValueError("need 0 < r < t < 1")
    x = np.asarray(x, float)
    n = x.shape[0]
    iso = chordal_isometry_to_origin(x)
    pts = iso(np.atleast_2d(np.asarray(E, float)))
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    rho_r = float(chordal_radius_to_euclidean(r))
    rho_t = float(chordal_radius_to_euclidean(t))
    inside = pts[np.linalg.norm(pts, axis=1) <= rho_r * (1 + 1e-12)]
    if len(inside) == 0:
        return _zero_result(n, "E does not meet the chordal ball")
    if np.ptp(inside, axis=0).max() <= 1e-12:
        return _zero_result(n, "single-point plate is polar")
    W = rho_t * (1.0 + 3.0 / resolution)
    grid = Grid.from_box(np.full(n, -W), np.full(n, W), resolution)
    coords = grid.coords()
    origin = np.zeros(n)
    dom = np.linalg.norm(coords, axis=1) <= rho_t + 2.0 * grid.h
    cond = rasterize_condenser(PointSet(inside, grid.h), Exterior(origin, rho_t), grid, dom)
    result, _ = solve_modulus(cond, tol=tol, stencil=stencil)
    result.info.update({"r": r, "t": t, "points": int(len(inside))})
    return result


# -------------------------------------------------------------- quasihyperbolic


@dataclass
class BallDomain:
    center: Sequence[float]
    radius: float

    def boundary_distance(self, x):
        return self.radius - np.linalg.norm(x - np.asarray(self.center, float), axis=1)

    def box(self):
        c = np.asarray(self.center, float)
        return c - self.radius, c + self.radius


@dataclass
class HalfSpaceDomain:
    """``{x : x[axis] > offset}``, discretised inside ``extent``."""

    axis: int = 0
    offset: float = 0.0
    extent: tuple | None = None

    def boundary_distance(self, x):
        return x[:, self.axis] - self.offset

    def box(self):
        if self.extent is None:
            raise ValueError("half-space domains need an explicit extent box")
        return np.asarray(self.extent[0], float), np.asarray(self.extent[1], float)


@dataclass
class BoxMinusCloudDomain:
    """Open box with a finite obstacle cloud removed."""

    lo: Sequence[float]
    hi: Sequence[float]
    obstacles: np.ndarray

    def boundary_distance(self, x):
        lo, hi = np.asarray(self.lo, float), np.asarray(self.hi, float)
        d_box = np.minimum(x - lo, hi - x).min(axis=1)
        if len(self.obstacles):
            d_obs, _ = cKDTree(np.asarray(self.obstacles, float)).query(x)
            return np.minimum(d_box, d_obs)
        return d_box

    def box(self):
        return np.asarray(self.lo, float), np.asarray(self.hi, float)


def quasihyperbolic_distance(domain, a, b, resolution: int = 256, stencil="auto") -> float:
    """Grid approximation of the quasihyperbolic distance ``k_G(a, b)``.

    Shortest path in the lattice graph with edge weight ``|e|`` times the mean
    of ``1 / d(., ∂G)`` at the endpoints.  ``a`` and ``b`` are joined to the
    corners of their grid cells by straight edges weighted the same way.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if np.array_equal(a, b):
        return 0.0
    n = a.shape[0]
    lo, hi = domain.box()
    grid = Grid.from_box(lo, hi, resolution)
    h = grid.h
    for name, q in (("a", a), ("b", b)):
        dq = float(domain.boundary_distance(q[None, :])[0])
        if dq <= h:
            raise ValueError(f"point {name} is outside the domain or within one cell of its boundary")
    coords = grid.coords()
    dist_b = domain.boundary_distance(coords)
    inside = dist_b > 0
    dens = np.where(inside, 1.0 / np.where(inside, dist_b, 1.0), 0.0)

    us, vs, ws = [], [], []
    for off in _resolve_stencil(n, stencil):
        i, j = _offset_pairs(grid.shape, off)
        keep = inside[i] & inside[j]
        i, j = i[keep], j[keep]
        L = h * float(np.linalg.norm(off))
        us.append(i)
        vs.append(j)
        ws.append(L * 0.5 * (dens[i] + dens[j]))
    N = grid.size
    extra = {}
    for k, q in enumerate((a, b)):
        node = N + k
        base = np.floor((q - grid.origin) / h).astype(int)
        corners = []
        for c in product((0, 1), repeat=n):
            idx = np.clip(base + np.array(c), 0, np.asarray(grid.shape) - 1)
            corners.append(int(np.ravel_multi_index(tuple(idx), grid.shape)))
        corners = np.unique(corners)
        corners = corners[inside[corners]]
        dq = 1.0 / float(domain.boundary_distance(q[None, :])[0])
        L = np.linalg.norm(coords[corners] - q, axis=1)
        us.append(np.full(len(corners), node))
        vs.append(corners)
        ws.append(np.maximum(L * 0.5 * (dq + dens[corners]), 1e-300))
        extra[k] = node
    u = np.concatenate(us)
    v = np.concatenate(vs)
    w = np.concatenate(ws)
    G = sparse.coo_matrix((w, (u, v)), shape=(N + 2, N + 2)).tocsr()
    d = dijkstra(G, directed=False, indices=extra[0])
    out = float(d[extra[1]])
    if not math.isfinite(out):
        raise ValueError("points lie in different components of the domain")
    return out
