"""Built-in uniformly quasiregular maps, orbit classification and Julia sampling.

Planar families act on complex numbers; points are also accepted as real
arrays of shape ``(m, 2)``.  The Zorich power family acts on R^3.

Zorich map
----------
``Z(x1, x2, x3) = exp(x3) * H(x1, x2)`` on the beam ``[-1, 1]^2 x R``, where
``H`` maps the square radially onto the unit disk (max-norm rescaled to the
Euclidean norm) and the disk onto the closed upper hemisphere by sending
radius ``t`` to polar angle ``t * pi / 2``.  Both steps are bi-Lipschitz, so
``Z`` is quasiregular.  Across a beam face the domain is reflected and the
image is reflected in the plane ``x3 = 0``.

The power map is ``f = Z o A o Z^{-1}`` with ``A(x) = d (x - c) + c`` and
``c = (1, 1, 0)`` a beam corner.  Scaling about a corner conjugates the deck
group of ``Z`` into itself for every integer ``d``, so ``f`` does not depend
on the choice of preimage, and ``|f(y)| = |y|^d`` holds exactly.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import qmc

from .cloud import PointCloud

logger = logging.getLogger(__name__)

__all__ = [
    "Family",
    "Method",
    "Orbit",
    "MapDescriptor",
    "OrbitClassification",
    "PRESETS",
    "get_preset",
    "apply",
    "iterate",
    "composed_power",
    "zorich",
    "zorich_inverse",
    "ZorichChart",
    "classify_orbit",
    "classify_points",
    "sample_julia",
    "holder_scaling_probe",
    "dilatation_probe",
    "DilatationReport",
]

PLANAR_ESCAPE = 4.0
ZORICH_ESCAPE = math.exp(4.0)
TRANSIENT = 20
BISECTION_TOL = 1e-6
CORNER = np.array([1.0, 1.0, 0.0])


class Family(enum.Enum):
    PLANAR_POWER = "power"
    PLANAR_CHEBYSHEV = "chebyshev"
    QUADRATIC = "quadratic"
    ZORICH_POWER = "zorich"


class Method(enum.Enum):
    INVERSE_ITERATION = "inverse"
    RAY_BISECTION = "bisection"


class Orbit(enum.Enum):
    ESCAPED = "escaped"
    BOUNDED = "bounded"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class MapDescriptor:
    """A built-in map.

    Attributes
    ----------
    name : str
        Preset name such as ``"power2"`` or ``"quad:-1"``.
    family : Family
    degree : int
    c : complex
        Parameter of the quadratic family (unused otherwise).
    sampling_scale : float
        Net spacing used when the Julia cloud is thinned for analysis.
    """

    name: str
    family: Family
    degree: int = 2
    c: complex = 0j
    sampling_scale: float = 0.01

    @property
    def n(self) -> int:
        return 3 if self.family is Family.ZORICH_POWER else 2

    @property
    def planar(self) -> bool:
        return self.n == 2

    @property
    def escape_radius(self) -> float:
        return ZORICH_ESCAPE if self.family is Family.ZORICH_POWER else PLANAR_ESCAPE

    @property
    def trap_radius(self) -> float:
        """Orbits inside this radius are attracted to 0 (power families only)."""
        if self.family in (Family.PLANAR_POWER, Family.ZORICH_POWER):
            return 1.0 / self.escape_radius
        return 0.0

    @property
    def dilatation_bound(self) -> float:
        """Declared K: 1 for holomorphic maps, a measured ceiling for Zorich maps."""
        if self.planar:
            return 1.0
        return _zorich_declared_k()

    @property
    def inner_dilatation(self) -> float:
        if self.planar:
            return 1.0
        return _zorich_declared_k()

    @property
    def holder_alpha(self) -> float:
        return self.inner_dilatation ** (1.0 / (1.0 - self.n))

    @property
    def default_method(self) -> Method:
        return Method.INVERSE_ITERATION if self.planar else Method.RAY_BISECTION

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "family": self.family.value,
            "degree": self.degree,
            "c": [self.c.real, self.c.imag],
            "n": self.n,
            "dilatation_bound": self.dilatation_bound,
            "holder_alpha": self.holder_alpha,
        }


def _quad(c: float, scale: float) -> MapDescriptor:
    return MapDescriptor(f"quad:{c:g}", Family.QUADRATIC, 2, complex(c), scale)


PRESETS: dict[str, MapDescriptor] = {
    "power2": MapDescriptor("power2", Family.PLANAR_POWER, 2, 0j, 0.01),
    "power3": MapDescriptor("power3", Family.PLANAR_POWER, 3, 0j, 0.01),
    "cheb3": MapDescriptor("cheb3", Family.PLANAR_CHEBYSHEV, 3, 0j, 0.005),
    "quad:0": _quad(0, 0.01),
    "quad:-1": _quad(-1, 0.01),
    "quad:-2": _quad(-2, 0.01),
    "quad:-10": _quad(-10, 1e-4),
    "quad:0.25": _quad(0.25, 0.01),
    "zorich2": MapDescriptor("zorich2", Family.ZORICH_POWER, 2, 0j, 0.05),
}


def get_preset(name: str) -> MapDescriptor:
    """Look up a preset; ``quad:<c>`` accepts any real ``c``."""
    if name in PRESETS:
        return PRESETS[name]
    if name.startswith("quad:"):
        try:
            c = float(name[5:])
        except ValueError:
            raise KeyError(f"unknown map preset {name!r}") from None
        return _quad(c, 0.01)
    raise KeyError(f"unknown map preset {name!r}")


# ------------------------------------------------------------------ evaluation


def _to_complex(x) -> tuple[np.ndarray, bool]:
    a = np.asarray(x)
    if np.iscomplexobj(a) or a.ndim == 0:
        return np.asarray(a, dtype=complex), False
    if a.shape[-1] != 2:
        raise ValueError("planar points need two coordinates")
    return a[..., 0] + 1j * a[..., 1], True


def _from_complex(z: np.ndarray, as_real: bool):
    if as_real:
        return np.stack([z.real, z.imag], axis=-1)
    return z


def _chebyshev(z: np.ndarray, d: int) -> np.ndarray:
    # three-term recurrence for the normalised Chebyshev polynomial
    t0, t1 = np.ones_like(z), z
    for _ in range(d - 1):
        t0, t1 = t1, 2 * z * t1 - t0
    return t1 if d >= 1 else t0


def apply(m: MapDescriptor, x):
    """Evaluate the map at ``x`` (complex scalar/array, or real array ``(..., n)``)."""
    if m.family is Family.ZORICH_POWER:
        return _zorich_power(np.asarray(x, dtype=float), m.degree)
    z, as_real = _to_complex(x)
    with np.errstate(over="ignore", invalid="ignore"):
        if m.family is Family.PLANAR_POWER:
            w = z**m.degree
        elif m.family is Family.PLANAR_CHEBYSHEV:
            w = _chebyshev(z, m.degree)
        else:
            w = z * z + m.c
    return _from_complex(w, as_real)


def iterate(m: MapDescriptor, x, k: int):
    """The ``k``-th iterate, by repeated application."""
    for _ in range(k):
        x = apply(m, x)
    return x


def composed_power(m: MapDescriptor, x, k: int):
    """The ``k``-th iterate of a Zorich power map in one step, ``Z o A^k o Z^{-1}``.

    ``A^k`` is scaling by ``d^k`` about the same corner, so this checks the
    chart bookkeeping of :func:`iterate` independently.
    """
    if m.family is not Family.ZORICH_POWER:
        raise ValueError("composed_power is defined for the Zorich family")
    return _zorich_power(np.asarray(x, dtype=float), m.degree**k)


# ---------------------------------------------------------------------- zorich


def _square_to_disk(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = np.hypot(a, b)
    m = np.maximum(np.abs(a), np.abs(b))
    s = np.divide(m, r, out=np.zeros_like(r), where=r > 0)
    return a * s, b * s


def _disk_to_square(p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = np.hypot(p, q)
    m = np.maximum(np.abs(p), np.abs(q))
    s = np.divide(r, m, out=np.zeros_like(r), where=m > 0)
    return p * s, q * s


def _hemisphere(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    p, q = _square_to_disk(a, b)
    t = np.minimum(np.hypot(p, q), 1.0)
    theta = 0.5 * np.pi * t
    # sin(theta)/t, continuous at t = 0
    s = np.where(t > 0, np.sin(theta) / np.where(t > 0, t, 1.0), 0.5 * np.pi)
    return np.stack([p * s, q * s, np.cos(theta)], axis=-1)


def _hemisphere_inverse(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # u on the closed upper hemisphere
    rho = np.hypot(u[..., 0], u[..., 1])
    theta = np.arctan2(rho, np.clip(u[..., 2], 0.0, None))
    t = theta / (0.5 * np.pi)
    s = np.divide(t, rho, out=np.zeros_like(rho), where=rho > 0)
    return _disk_to_square(u[..., 0] * s, u[..., 1] * s)


def _fold(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reflect ``t`` into ``[-1, 1]``; returns (folded value, beam index)."""
    j = np.floor((t + 1.0) / 2.0)
    local = t - 2.0 * j
    odd = np.mod(j, 2) == 1
    return np.where(odd, -local, local), j.astype(np.int64)


def zorich(x) -> np.ndarray:
    """The Zorich map ``R^3 -> R^3 \\ {0}``."""
    x = np.asarray(x, dtype=float)
    a, j = _fold(x[..., 0])
    b, k = _fold(x[..., 1])
    u = _hemisphere(a, b)
    flip = np.mod(j + k, 2) == 1
    u[..., 2] = np.where(flip, -u[..., 2], u[..., 2])
    return np.exp(x[..., 2])[..., None] * u


@dataclass(frozen=True)
class ZorichChart:
    """A preimage of a point under the Zorich map.

    ``beam`` identifies the reflected copy of the fundamental beam and
    ``local`` holds coordinates in ``[-1, 1]^2 x R``.
    """

    beam: tuple[int, int]
    local: tuple[float, float, float]

    def embed(self) -> np.ndarray:
        """The preimage as a point of R^3."""
        out = np.empty(3)
        for i, (j, t) in enumerate(zip(self.beam, self.local[:2])):
            out[i] = 2.0 * j + (-t if j % 2 else t)
        out[2] = self.local[2]
        return out


def _zorich_preimage(y: np.ndarray) -> np.ndarray:
    """Canonical preimages (vectorised): beam (0, 0) above the equator, (1, 0) below."""
    r = np.linalg.norm(y, axis=-1)
    u = y / r[..., None]
    lower = u[..., 2] < 0
    v = u.copy()
    v[..., 2] = np.abs(v[..., 2])
    a, b = _hemisphere_inverse(v)
    x1 = np.where(lower, 2.0 - a, a)
    return np.stack([x1, b, np.log(r)], axis=-1)


def zorich_inverse(y) -> ZorichChart:
    """A chart for one preimage of ``y`` under the Zorich map."""
    y = np.asarray(y, dtype=float)
    if y.shape != (3,):
        raise ValueError("zorich_inverse takes a single point of R^3")
    r = float(np.linalg.norm(y))
    if r == 0.0 or not math.isfinite(r):
        raise ValueError("0 and infinity have no preimage under the Zorich map")
    x = _zorich_preimage(y[None])[0]
    lower = y[2] < 0
    beam = (1, 0) if lower else (0, 0)
    local = (2.0 - x[0] if lower else x[0], x[1], x[2])
    return ZorichChart(beam, tuple(float(v) for v in local))


def _zorich_power(y: np.ndarray, d: int) -> np.ndarray:
    single = y.ndim == 1
    y = np.atleast_2d(y)
    out = np.zeros_like(y)
    r = np.linalg.norm(y, axis=1)
    ok = (r > 0) & np.isfinite(r)
    out[~np.isfinite(r)] = np.inf
    if ok.any():
        x = _zorich_preimage(y[ok])
        with np.errstate(over="ignore", under="ignore"):
            out[ok] = zorich(d * (x - CORNER) + CORNER)
    return out[0] if single else out


# ----------------------------------------------------------------- dilatation


def _jacobian(func, x: np.ndarray, h: float) -> np.ndarray:
    """Central-difference Jacobians of ``func`` at the rows of ``x``."""
    m, n = x.shape
    J = np.empty((m, n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        J[:, :, i] = (func(x + e) - func(x - e)) / (2 * h)
    return J


def _dilatations(J: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Outer and inner dilatation per Jacobian, with a mask of usable samples."""
    n = J.shape[-1]
    sv = np.linalg.svd(J, compute_uv=False)
    det = np.abs(np.linalg.det(J))
    ok = (sv[:, -1] > 1e-9 * np.maximum(sv[:, 0], 1e-300)) & (det > 0)
    k_outer = np.where(ok, sv[:, 0] ** n / np.where(ok, det, 1.0), np.inf)
    k_inner = np.where(ok, det / np.where(ok, sv[:, -1], 1.0) ** n, np.inf)
    return k_outer, k_inner, ok


@lru_cache(maxsize=None)
def _zorich_declared_k() -> float:
    """Declared dilatation ceiling for the Zorich power maps.

    The iterates ``Z o A^k o Z^{-1}`` have outer dilatation at most
    ``K_O(Z) K_I(Z)`` and inner dilatation at most the same product, since
    ``A`` is conformal.  Both factors are measured on a dense grid of the
    fundamental beam (the map is invariant under ``x3`` translation up to
    scale) and the product is rounded up by 10%.
    """
    g = np.linspace(-0.995, 0.995, 81)
    a, b = np.meshgrid(g, g, indexing="ij")
    x = np.stack([a.ravel(), b.ravel(), np.zeros(a.size)], axis=1)
    # skip the lines where the square-to-disk map has a crease
    crease = np.abs(np.abs(x[:, 0]) - np.abs(x[:, 1])) < 0.02
    x = x[~crease]
    J = _jacobian(zorich, x, 1e-6)
    ko, ki, ok = _dilatations(J)
    k = float(np.max(ko[ok])) * float(np.max(ki[ok]))
    return math.ceil(1.1 * k * 100.0) / 100.0


@dataclass
class DilatationReport:
    """Empirical dilatation of a map over sample points.

    ``k`` is the largest of the outer and inner dilatation over the usable
    samples; samples with a singular Jacobian (branch set) are listed in
    ``skipped``.
    """

    k: float
    k_outer: float
    k_inner: float
    n_samples: int
    skipped: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "k_outer": self.k_outer,
            "k_inner": self.k_inner,
            "n_samples": self.n_samples,
            "skipped": [list(map(float, s)) for s in self.skipped],
        }


def _branch_distance(m: MapDescriptor, x: np.ndarray) -> np.ndarray:
    """Distance-like measure from the branch set (inf where the map is smooth)."""
    if m.family is Family.ZORICH_POWER:
        pre = _zorich_preimage(x)
        a, _ = _fold(pre[:, 0])
        b, _ = _fold(pre[:, 1])
        # beam edges map to branch lines; the square-to-disk crease is a
        # Lipschitz seam, harmless for the dilatation
        return np.minimum(1.0 - np.abs(a), 1.0 - np.abs(b))
    z = x[:, 0] + 1j * x[:, 1]
    if m.family is Family.PLANAR_CHEBYSHEV:
        crit = np.cos(np.pi * np.arange(1, m.degree) / m.degree)
        return np.min(np.abs(z[:, None] - crit[None, :]), axis=1)
    return np.abs(z)


def dilatation_probe(m: MapDescriptor, points, h: float = 1e-6, margin: float = 1e-3) -> DilatationReport:
    """Finite-difference dilatation of ``m`` at ``points``.

    Samples within ``margin`` of the branch set, or with a numerically
    singular Jacobian, are skipped and reported.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if x.shape[1] != m.n:
        raise ValueError(f"points must have {m.n} coordinates")
    near = _branch_distance(m, x) < margin
    # seam of the square-to-disk map: one-sided derivatives differ
    if m.family is Family.ZORICH_POWER:
        pre = _zorich_preimage(x)
        a, _ = _fold(pre[:, 0])
        b, _ = _fold(pre[:, 1])
        near |= np.abs(np.abs(a) - np.abs(b)) < max(margin, 1e3 * h)
        near |= np.hypot(a, b) < max(margin, 1e3 * h)
    skipped = [tuple(p) for p in x[near]]
    use = x[~near]
    if len(use) == 0:
        return DilatationReport(float("nan"), float("nan"), float("nan"), 0, skipped)
    J = _jacobian(lambda y: _real_apply(m, y), use, h)
    ko, ki, ok = _dilatations(J)
    skipped += [tuple(p) for p in use[~ok]]
    if not ok.any():
        return DilatationReport(float("nan"), float("nan"), float("nan"), 0, skipped)
    if skipped:
        logger.info("dilatation probe skipped %d samples near the branch set", len(skipped))
    k_o, k_i = float(ko[ok].max()), float(ki[ok].max())
    return DilatationReport(max(k_o, k_i), k_o, k_i, int(ok.sum()), skipped)


def _real_apply(m: MapDescriptor, x: np.ndarray) -> np.ndarray:
    if m.planar:
        return apply(m, x)
    return _zorich_power(x, m.degree)


# ------------------------------------------------------------ classification


@dataclass(frozen=True)
class OrbitClassification:
    label: Orbit
    iterations_used: int
    final_point: tuple

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "iterations_used": self.iterations_used,
            "final_point": [float(v) for v in self.final_point],
        }


def _norm(m: MapDescriptor, x: np.ndarray) -> np.ndarray:
    if m.planar:
        return np.abs(x)
    return np.linalg.norm(x, axis=-1)


def classify_points(m: MapDescriptor, x, max_iter: int = 100, escape_R: float | None = None):
    """Vectorised escape test.

    Returns ``(escaped, iterations)``: a boolean array and the iteration at
    which each escaped orbit first left the disk/ball of radius ``escape_R``
    (``max_iter`` for orbits that never did).
    """
    R = m.escape_radius if escape_R is None else float(escape_R)
    if m.planar:
        z, _ = _to_complex(x)
        z = np.atleast_1d(z).astype(complex)
    else:
        z = np.atleast_2d(np.asarray(x, dtype=float)).copy()
    escaped = np.zeros(len(z), bool)
    steps = np.full(len(z), max_iter, dtype=np.int64)
    trap = m.trap_radius
    r = _norm(m, z)
    escaped |= ~(r <= R)
    steps[escaped] = 0
    active = ~escaped & (r >= trap)
    for k in range(1, max_iter + 1):
        if not active.any():
            break
        z[active] = apply(m, z[active])
        r = _norm(m, z)
        out = active & ~(r <= R)
        escaped |= out
        steps[out] = k
        # orbits that fell into the basin of 0 are bounded
        active &= ~out & (r >= trap)
    return escaped, steps


def classify_orbit(m: MapDescriptor, x, max_iter: int = 100, escape_R: float | None = None) -> OrbitClassification:
    """ESCAPED once the orbit leaves radius ``escape_R``, else BOUNDED.

    Power maps report BOUNDED as soon as the orbit enters the basin of 0
    (radius below ``1 / escape_R``); other families iterate the full budget.
    """
    R = m.escape_radius if escape_R is None else float(escape_R)
    if m.planar:
        z, _ = _to_complex(x)
        z = complex(z)
    else:
        z = np.asarray(x, dtype=float)
    trap = m.trap_radius
    for k in range(max_iter + 1):
        r = float(_norm(m, np.asarray(z)))
        if not (r <= R):
            return OrbitClassification(Orbit.ESCAPED, k, _point_tuple(z))
        if r < trap:
            # inside the basin of the attracting fixed point 0
            return OrbitClassification(Orbit.BOUNDED, k, _point_tuple(z))
        if k < max_iter:
            z = apply(m, z)
            if m.planar:
                z = complex(z)
    return OrbitClassification(Orbit.BOUNDED, max_iter, _point_tuple(z))


def _point_tuple(z) -> tuple:
    if isinstance(z, complex):
        return (z.real, z.imag)
    return tuple(float(v) for v in np.ravel(z))


# -------------------------------------------------------------------- sampling


def _repelling_fixed_point(m: MapDescriptor) -> complex:
    if m.family is Family.QUADRATIC:
        disc = np.sqrt(complex(1 - 4 * m.c))
        roots = [(1 + disc) / 2, (1 - disc) / 2]
        # the fixed point with the larger multiplier |2 z| lies on J
        return max(roots, key=lambda z: (abs(2 * z), z.real))
    return 1.0 + 0j


def _inverse_step(m: MapDescriptor, z: np.ndarray, branch: np.ndarray) -> np.ndarray:
    d = m.degree
    roots = np.exp(2j * np.pi * branch / d)
    if m.family is Family.PLANAR_POWER:
        return z ** (1.0 / d) * roots
    if m.family is Family.QUADRATIC:
        w = np.sqrt(z - m.c)
        return np.where(branch % 2 == 0, w, -w)
    # Chebyshev: z = (w + 1/w)/2, take a d-th root of w, map back
    w = z + np.sqrt(z - 1) * np.sqrt(z + 1)
    v = w ** (1.0 / d) * roots
    return 0.5 * (v + 1.0 / v)


def _inverse_iteration(m: MapDescriptor, budget: int, rng: np.random.Generator, walkers: int) -> np.ndarray:
    start = _repelling_fixed_point(m)
    z = np.full(walkers, start, dtype=complex)
    branches = 2 if m.family is Family.QUADRATIC else m.degree
    for _ in range(TRANSIENT):
        z = _inverse_step(m, z, rng.integers(0, branches, walkers))
    steps = -(-budget // walkers)
    out = np.empty((steps, walkers), dtype=complex)
    for s in range(steps):
        z = _inverse_step(m, z, rng.integers(0, branches, walkers))
        out[s] = z
    # step-major order: every prefix of the cloud is a union of whole steps
    flat = out.ravel()[:budget]
    return np.stack([flat.real, flat.imag], axis=1)


def _random_directions(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """Scrambled Sobol directions: seeded, prefix-stable and evenly spread."""
    with warnings.catch_warnings():
        # counts that are not powers of two only lose the balance property
        warnings.simplefilter("ignore", UserWarning)
        u = qmc.Sobol(d=n - 1, scramble=True, seed=rng).random(count)
    if n == 2:
        t = 2.0 * np.pi * u[:, 0]
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    # area-preserving map of the unit square onto S^2
    z = 1.0 - 2.0 * u[:, 0]
    phi = 2.0 * np.pi * u[:, 1]
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


def _ray_bisection(m: MapDescriptor, budget: int, rng: np.random.Generator, max_iter: int) -> np.ndarray:
    if m.family not in (Family.PLANAR_POWER, Family.ZORICH_POWER):
        raise ValueError("ray bisection needs a power family (attracting 0 and infinity)")
    u = _random_directions(rng, budget, m.n)
    lo = np.full(budget, 0.5)
    hi = np.full(budget, 2.0)
    while np.max(hi - lo) > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        pts = u * mid[:, None]
        x = pts[:, 0] + 1j * pts[:, 1] if m.planar else pts
        escaped, _ = classify_points(m, x, max_iter)
        hi = np.where(escaped, mid, hi)
        lo = np.where(escaped, lo, mid)
    return u * (0.5 * (lo + hi))[:, None]


def sample_julia(
    m: MapDescriptor | str,
    budget: int,
    method: Method | str | None = None,
    seed: int = 0,
    walkers: int = 64,
    max_iter: int = 200,
) -> PointCloud:
    """Sample points of the Julia set.

    INVERSE_ITERATION runs ``walkers`` random backward orbits from a
    repelling fixed point, drops a transient of 20 steps and emits the
    orbits step by step.  RAY_BISECTION bisects along scrambled Sobol
    directions between a bounded and an escaping radius to within 1e-6.  In both cases
    the cloud for a smaller budget is a prefix of the cloud for a larger one
    (same seed).
    """
    if isinstance(m, str):
        m = get_preset(m)
    if budget < 2:
        raise ValueError("budget must be at least 2")
    method = m.default_method if method is None else Method(method)
    rng = np.random.default_rng(seed)
    if method is Method.INVERSE_ITERATION:
        if not m.planar:
            raise ValueError("inverse iteration is available for planar families only")
        pts = _inverse_iteration(m, budget, rng, walkers)
    else:
        pts = _ray_bisection(m, budget, rng, max_iter)
    meta = {
        "generator": "julia",
        "map": m.name,
        "method": method.value,
        "budget": int(budget),
        "depth": int(budget),
        "seed": int(seed),
        "sampling_scale": m.sampling_scale,
    }
    return PointCloud(pts, meta)


# ---------------------------------------------------------------------- holder


def _sphere_points(n: int, count: int) -> np.ndarray:
    if n == 2:
        t = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    # Fibonacci lattice on S^2
    i = np.arange(count) + 0.5
    phi = np.arccos(1 - 2 * i / count)
    theta = np.pi * (1 + 5**0.5) * i
    return np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=1)


def holder_scaling_probe(m: MapDescriptor, center, radii, samples: int = 2000) -> tuple[float, np.ndarray]:
    """Fitted exponent of ``diam f(B(center, r))`` against ``r``.

    The image diameter is measured on the boundary sphere (the map is open,
    so the boundary of the image lies in the image of the boundary).

    Returns
    -------
    slope : float
    diameters : ndarray
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) < 2 or np.any(np.diff(radii) >= 0) or np.any(radii <= 0):
        raise ValueError("radii must be positive and strictly decreasing")
    c = np.asarray(center, dtype=float)
    dirs = _sphere_points(m.n, samples)
    diam = np.empty(len(radii))
    from scipy.spatial.distance import pdist

    for i, r in enumerate(radii):
        img = _real_apply(m, c + r * dirs)
        diam[i] = pdist(img).max()
    slope = np.polyfit(np.log(radii), np.log(diam), 1)[0]
    return float(slope), diam
