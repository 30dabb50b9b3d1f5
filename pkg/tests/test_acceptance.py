"""Acceptance suite: one test per acceptance criterion, tolerances pinned.

Run alone with ``pytest tests/test_acceptance.py -v``; each line of the
verbose output is the pass/fail verdict of one criterion.
"""

import math
import time

import numpy as np
import pytest

from uniperf.cli import PLANAR_DEPTH, VERIFY_PRESETS, ZORICH_DEPTH, main
from uniperf.dimension import content_lower_bound_check, fit_dimension
from uniperf.dynamics import (
    apply,
    dilatation_probe,
    get_preset,
    holder_scaling_probe,
    sample_julia,
)
from uniperf.generators import cantor_cloud
from uniperf.modulus import (
    BallDomain,
    quasihyperbolic_distance,
    spherical_ring_capacity,
    tau_estimate,
    thickness,
)
from uniperf.perfectness import (
    TauTable,
    analyze,
    disjoint_continua_check,
    random_polyline_pair,
    random_two_plate_condenser,
    two_plate_capacity_check,
)
from uniperf.sphere import Metric, RoundRing, chordal_ring_modulus, euclidean_ring_modulus, sphere_surface_area

# pinned tolerances
FORMULA_TOL = 1e-12
FORMULA_CASES = 100
FORMULA_SECONDS = 1.0
RINGS = [(1.0, math.e), (1.0, 4.0), (0.5, 8.0)]
RING_SETUP = {2: (256, 0.05), 3: (96, 0.10)}
RING_SECONDS = 300.0
TAU_S = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0]
TAU_RATIO = 3.0
TAU_BOX_TOL = 0.02
INEQUALITY_TRIALS = 50
INEQUALITY_SLACK = 0.9
ALPHA_REL_TOL = 0.10
ALPHA_MAX = 5.0
JULIA_SECONDS = 600.0
CIRCLE_TOL = 1e-5
SEGMENT_TOL = 1e-4
SPHERE_TOL = 1e-5
RADIAL_TOL = 1e-9
RADIAL_POINTS = 1000
DILATATION_SLACK = 1.1
HOLDER_TOL = 0.1
CANTOR_DIM = math.log(2) / math.log(3)
CANTOR_DIM_TOL = 0.05
SEGMENT_DIM_TOL = 0.1
DIM_MIN = 0.3
R2_MIN = 0.98
CONTENT_SPREAD_MAX = 4.0
QH_R = 0.9
QH_TOL = 0.05


@pytest.fixture(scope="module")
def tau_table():
    # resolution 64, box factor 4, tolerance 3e-3, shared by the Teichmüller and inequality suites
    return TauTable()


def test_closed_form_ring_moduli():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(FORMULA_CASES):
        c = rng.normal(size=rng.choice([2, 3]))
        u, w = np.sort(rng.uniform(1e-3, 50.0, 2))
        hand = math.log(w / u)
        worst = max(worst, abs(euclidean_ring_modulus(RoundRing(c, u, w)) - hand))
        u, w = np.sort(rng.uniform(1e-3, 0.999, 2))
        hand = math.log((w / u) * math.sqrt((1 - u * u) / (1 - w * w)))
        got = chordal_ring_modulus(RoundRing(c, u, w, Metric.CHORDAL))
        worst = max(worst, abs(got - hand))
        if (1 - u * u) / (1 - w * w) >= 0.25:
            assert got >= math.log(w / (2 * u)) - FORMULA_TOL
    elapsed = time.perf_counter() - start
    assert chordal_ring_modulus(RoundRing(np.zeros(2), 0.1, 0.5, Metric.CHORDAL)) == pytest.approx(
        math.log(5 * math.sqrt(0.99 / 0.75)), abs=FORMULA_TOL
    )
    assert euclidean_ring_modulus(RoundRing(np.zeros(2), 0.5, 9.5)) == pytest.approx(math.log(19), abs=FORMULA_TOL)
    assert worst <= FORMULA_TOL
    assert elapsed < FORMULA_SECONDS


def test_solver_matches_round_ring_capacity():
    start = time.perf_counter()
    errors = {}
    for n, (res, tol) in RING_SETUP.items():
        for r, R in RINGS:
            exact = sphere_surface_area(n) * math.log(R / r) ** (1 - n)
            got = spherical_ring_capacity(r, R, n=n, resolution=res, tol=1e-3).capacity
            errors[(n, r, R)] = (got - exact) / exact
    elapsed = time.perf_counter() - start
    bad = {k: v for k, v in errors.items() if abs(v) > RING_SETUP[k[0]][1]}
    assert not bad, f"relative errors out of tolerance: {bad}"
    assert elapsed < RING_SECONDS


def test_teichmuller_capacity_qualitative(tau_table):
    taus = [tau_table.value(s) for s in TAU_S]
    failures = []
    if not all(t > 0 for t in taus):
        failures.append(f"non-positive values {taus}")
    if not all(a > b for a, b in zip(taus, taus[1:])):
        failures.append(f"not strictly decreasing {taus}")
    # same mesh width on a box twice as wide
    wide = tau_estimate(1.0, resolution=128, box_factor=8.0, tol=tau_table.tol).capacity
    sensitivity = abs(wide - tau_table.value(1.0)) / tau_table.value(1.0)
    if sensitivity >= TAU_BOX_TOL:
        failures.append(f"box sensitivity {sensitivity:.4f}")
    if not taus[-1] < taus[0] / TAU_RATIO:
        failures.append(f"tau(64) = {taus[-1]:.4f} not below tau(0.5) / 3 = {taus[0] / TAU_RATIO:.4f}")
    assert not failures, "; ".join(failures)


def test_modulus_inequality_suites(tau_table):
    report = {}
    suites = (
        ("two_plate", random_two_plate_condenser, two_plate_capacity_check, 1000),
        ("disjoint_continua", random_polyline_pair, disjoint_continua_check, 2000),
    )
    for name, make, check, offset in suites:
        violations = []
        for k in range(INEQUALITY_TRIALS):
            E, F = make(np.random.default_rng(offset + k))
            c = check(E, F, slack=INEQUALITY_SLACK, resolution=32, tol=1e-2, table=tau_table)
            if not c.holds:
                violations.append((k, c.lhs, c.rhs))
        report[name] = violations
    assert report == {"two_plate": [], "disjoint_continua": []}


def test_julia_sets_uniformly_perfect():
    start = time.perf_counter()
    bad = {}
    for name in VERIFY_PRESETS:
        m = get_preset(name)
        D = PLANAR_DEPTH if m.planar else ZORICH_DEPTH
        big = sample_julia(m, 2 * D, seed=0)
        a1 = analyze(big.prefix(D)).alpha_hat
        a2 = analyze(big).alpha_hat
        rel = abs(a2 - a1) / a1
        if not (rel <= ALPHA_REL_TOL and max(a1, a2) <= ALPHA_MAX):
            bad[name] = (a1, a2)
    assert not bad
    assert time.perf_counter() - start < JULIA_SECONDS


def test_julia_set_geometry():
    circle = sample_julia("power2", 20000, seed=0).points
    assert np.max(np.abs(np.linalg.norm(circle, axis=1) - 1)) <= CIRCLE_TOL
    seg = sample_julia("quad:-2", 20000, seed=0).points
    assert np.max(np.abs(seg[:, 1])) <= SEGMENT_TOL
    assert np.max(np.abs(seg[:, 0])) <= 2 + SEGMENT_TOL
    sphere = sample_julia("zorich2", 5000, seed=0).points
    assert np.max(np.abs(np.linalg.norm(sphere, axis=1) - 1)) <= SPHERE_TOL


def test_zorich_power_map_properties():
    m = get_preset("zorich2")
    rng = np.random.default_rng(7)
    y = rng.normal(size=(RADIAL_POINTS, 3))
    y *= rng.uniform(0.2, 3.0, (RADIAL_POINTS, 1)) / np.linalg.norm(y, axis=1, keepdims=True)
    r = np.linalg.norm(y, axis=1)
    assert np.max(np.abs(np.linalg.norm(apply(m, y), axis=1) - r**m.degree) / r**m.degree) <= RADIAL_TOL
    probe = dilatation_probe(m, y[r > 0.5])
    assert probe.k <= DILATATION_SLACK * m.dilatation_bound
    for base in ([0.3, 0.5, 0.7], [0.1, -0.4, 0.2], [0.9, 0.9, -0.3]):
        slope, _ = holder_scaling_probe(m, base, 2.0 ** -np.arange(4, 10))
        # the Hölder exponent bounds local scaling exponents from below
        assert slope >= m.holder_alpha - HOLDER_TOL


def test_box_dimension_and_content():
    cantor = cantor_cloud(10)
    fit = fit_dimension(cantor)
    assert abs(fit.slope - CANTOR_DIM) <= CANTOR_DIM_TOL
    chk = content_lower_bound_check(cantor, fit.slope)
    assert chk.min_ratio > 0 and chk.spread <= CONTENT_SPREAD_MAX
    seg = fit_dimension(sample_julia("quad:-2", 2 * PLANAR_DEPTH, seed=0))
    assert abs(seg.slope - 1.0) <= SEGMENT_DIM_TOL
    for name in VERIFY_PRESETS:
        m = get_preset(name)
        cloud = sample_julia(m, 2 * (PLANAR_DEPTH if m.planar else ZORICH_DEPTH), seed=0)
        fit = fit_dimension(cloud)
        assert fit.slope >= DIM_MIN and fit.r2 >= R2_MIN, name
        chk = content_lower_bound_check(cloud, min(fit.slope, cloud.n))
        assert chk.min_ratio > 0 and chk.spread <= CONTENT_SPREAD_MAX, name


def test_quasihyperbolic_and_thickness_probes():
    d = quasihyperbolic_distance(BallDomain(np.zeros(2), 1.0), [0.0, 0.0], [QH_R, 0.0], resolution=256)
    assert d == pytest.approx(math.log(1 / (1 - QH_R)), rel=QH_TOL)
    pts = cantor_cloud(8).points
    caps = [
        thickness(pts, pts[i], r, resolution=48, tol=1e-2).capacity
        for i in (0, 37, 100, 200, 511)
        for r in (0.2, 0.05, 0.0125)
    ]
    delta = min(caps)
    assert delta > 0


def test_verify_is_deterministic(tmp_path):
    argv = ["verify", "--preset", "power2", "--preset", "zorich2", "--depth", "4000", "--grid", "32",
            "--tau-s", "1,2", "--trials", "2", "--seed", "5"]
    outputs = []
    for k in range(2):
        path = tmp_path / "verify.json"
        main(argv + ["--out", str(path)])
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
