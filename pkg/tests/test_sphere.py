"""Chordal geometry and closed-form ring moduli."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from uniperf.sphere import (
    INFINITY,
    DegenerateRingError,
    Metric,
    MoebiusInversion,
    RoundRing,
    chordal_diameter,
    chordal_distance,
    chordal_distance_matrix,
    chordal_isometry_to_origin,
    chordal_ring_modulus,
    euclidean_ring_modulus,
    invert,
    modulus_monotonicity_check,
    ring_modulus,
    sphere_surface_area,
    stereographic_lift,
    stereographic_project,
)

coord = st.floats(-50, 50, allow_nan=False)
point2 = st.tuples(coord, coord).map(np.array)


def _chi(x, y):
    # independent oracle: chord between stereographic images on the sphere of diameter 1
    x, y = np.asarray(x, float), np.asarray(y, float)
    return np.linalg.norm(x - y) / math.sqrt((1 + x @ x) * (1 + y @ y))


def _circumcircle(p):
    (ax, ay), (bx, by), (cx, cy) = p
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
    c = np.array([ux, uy])
    return c, float(np.linalg.norm(p[0] - c))


def _euclidean_circle_of_chordal_sphere(x, r):
    """Three points with chi(., x) = r found by root finding along rays, then their circumcircle."""
    pts = []
    for ang in (0.1, 2.2, 4.3):
        v = np.array([math.cos(ang), math.sin(ang)])
        f = lambda t: _chi(x + t * v, x) - r  # noqa: E731
        hi = 1.0
        while f(hi) < 0:
            hi *= 2
        pts.append(x + brentq(f, 0.0, hi, xtol=1e-15, rtol=1e-15) * v)
    return _circumcircle(np.array(pts))


def test_chordal_distance_basic_values():
    assert chordal_distance([0, 0], INFINITY) == pytest.approx(1.0)
    assert chordal_distance([1, 0], [-1, 0]) == pytest.approx(1.0)
    assert chordal_distance([3, 4], [3, 4]) == 0.0
    assert chordal_distance([1.0, 0.0], INFINITY) == pytest.approx(1 / math.sqrt(2))


@given(point2, point2)
def test_chordal_distance_matches_oracle(x, y):
    assert chordal_distance(x, y) == pytest.approx(_chi(x, y), rel=1e-10, abs=1e-14)


@given(point2, point2, point2)
def test_chordal_metric_axioms(x, y, z):
    dxy, dyz, dxz = chordal_distance(x, y), chordal_distance(y, z), chordal_distance(x, z)
    assert 0 <= dxy <= 1 + 1e-12
    assert dxy == pytest.approx(chordal_distance(y, x), abs=1e-14)
    assert dxz <= dxy + dyz + 1e-12


def test_distance_matrix_and_diameter():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(7, 2))
    D = chordal_distance_matrix(a)
    for i in range(7):
        for j in range(7):
            assert D[i, j] == pytest.approx(_chi(a[i], a[j]), abs=1e-14)
    assert chordal_diameter(a) == pytest.approx(D.max())


def test_stereographic_round_trip_and_distance():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(50, 3)) * 3
    s = stereographic_lift(x)
    np.testing.assert_allclose(stereographic_project(s), x, rtol=1e-10, atol=1e-12)
    # the lift lands on the unit sphere (diameter 2), so chords are twice the chordal metric
    i, j = 3, 17
    assert np.linalg.norm(s[i] - s[j]) == pytest.approx(2 * _chi(x[i], x[j]), rel=1e-10)


def test_inversion_is_involution_and_sends_pole_to_infinity():
    g = MoebiusInversion(np.array([0.5, -0.25]))
    assert invert(g, [0.5, -0.25]) is INFINITY
    rng = np.random.default_rng(2)
    y = rng.normal(size=(20, 2))
    back = g.apply_array(g.apply_array(y))
    np.testing.assert_allclose(back, y, atol=1e-10)


def test_isometry_to_origin_preserves_chordal_distance():
    rng = np.random.default_rng(3)
    x = np.array([1.5, -0.7])
    iso = chordal_isometry_to_origin(x)
    pts = rng.normal(size=(30, 2)) * 2
    img = iso(np.vstack([x, pts]))
    assert np.linalg.norm(img[0]) < 1e-12
    for k in range(1, 10):
        for m in range(k + 1, 12):
            assert _chi(img[k], img[m]) == pytest.approx(_chi(pts[k - 1], pts[m - 1]), rel=1e-9, abs=1e-13)


def test_surface_area_values():
    assert sphere_surface_area(2) == pytest.approx(2 * math.pi)
    assert sphere_surface_area(3) == pytest.approx(4 * math.pi)


def test_euclidean_modulus_hand_values():
    assert euclidean_ring_modulus(RoundRing(np.zeros(2), 1.0, math.e)) == pytest.approx(1.0, abs=1e-15)
    assert euclidean_ring_modulus(RoundRing(np.zeros(3), 0.5, 8.0)) == pytest.approx(math.log(16), abs=1e-15)


@given(st.floats(0.01, 10), st.floats(1.01, 10), st.floats(1.01, 10))
def test_euclidean_modulus_is_additive_over_concentric_splitting(u, a, b):
    c = np.zeros(2)
    v, w = u * a, u * a * b
    whole = euclidean_ring_modulus(RoundRing(c, u, w))
    parts = euclidean_ring_modulus(RoundRing(c, u, v)) + euclidean_ring_modulus(RoundRing(c, v, w))
    assert parts == pytest.approx(whole, rel=1e-12)


def test_chordal_modulus_equals_log_of_euclidean_radii():
    # chordal balls about 0 are Euclidean balls of radius u / sqrt(1 - u^2)
    rng = np.random.default_rng(4)
    for _ in range(50):
        u, w = np.sort(rng.uniform(0.01, 0.99, 2))
        ring = RoundRing(np.zeros(2), u, w, Metric.CHORDAL)
        ref = math.log((w / math.sqrt(1 - w * w)) / (u / math.sqrt(1 - u * u)))
        assert chordal_ring_modulus(ring) == pytest.approx(ref, abs=1e-12)


def test_chordal_modulus_off_center_matches_circle_pair_oracle():
    # modulus of the region between nested circles (radii a < b, centre offset d)
    # is arccosh((a^2 + b^2 - d^2) / (2ab))
    rng = np.random.default_rng(5)
    for _ in range(5):
        x = rng.normal(size=2)
        # keep both spheres bounded: radii below the chordal distance from x to infinity
        top = 0.9 / math.sqrt(1 + x @ x)
        u, w = np.sort(rng.uniform(0.05 * top, top, 2))
        ring = RoundRing(x, u, w, Metric.CHORDAL)
        ca, a = _euclidean_circle_of_chordal_sphere(x, u)
        cb, b = _euclidean_circle_of_chordal_sphere(x, w)
        d = np.linalg.norm(ca - cb)
        ref = math.acosh((a * a + b * b - d * d) / (2 * a * b))
        assert ring_modulus(ring) == pytest.approx(ref, rel=1e-8)


def test_degenerate_and_invalid_rings():
    with pytest.raises((DegenerateRingError, ValueError)):
        euclidean_ring_modulus(RoundRing(np.zeros(2), 2.0, 1.0))
    with pytest.raises(ValueError):
        chordal_ring_modulus(RoundRing(np.zeros(2), 0.5, 1.0, Metric.CHORDAL))


def test_ring_contains_and_round_trip():
    ring = RoundRing(np.array([1.0, 0.0]), 0.5, 2.0)
    inside = ring.contains(np.array([[2.0, 0.0], [1.0, 0.0], [4.0, 0.0]]))
    assert inside.tolist() == [True, False, False]
    again = RoundRing.from_dict(ring.to_dict())
    assert again.inner == ring.inner and again.outer == ring.outer
    np.testing.assert_array_equal(again.center, ring.center)


@settings(max_examples=50)
@given(st.floats(0.01, 1), st.floats(1.01, 5), st.floats(0.0, 0.5), st.floats(0.0, 0.5))
def test_modulus_monotone_under_nesting(r, k, shrink_in, shrink_out):
    outer = RoundRing(np.zeros(2), r, r * k)
    inner_r = r + shrink_in * (r * k - r) / 2
    outer_r = r * k - shrink_out * (r * k - r) / 2
    if inner_r >= outer_r:
        return
    assert modulus_monotonicity_check(RoundRing(np.zeros(2), inner_r, outer_r), outer)


def test_monotonicity_rejects_non_nested():
    with pytest.raises(ValueError):
        modulus_monotonicity_check(RoundRing(np.zeros(2), 0.1, 5.0), RoundRing(np.zeros(2), 1.0, 2.0))
