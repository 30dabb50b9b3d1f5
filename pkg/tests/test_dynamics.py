"""Built-in maps, orbit classification and Julia sampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uniperf.dynamics import (
    PRESETS,
    Family,
    Method,
    Orbit,
    apply,
    classify_orbit,
    classify_points,
    composed_power,
    dilatation_probe,
    get_preset,
    holder_scaling_probe,
    iterate,
    sample_julia,
    zorich,
    zorich_inverse,
)


def _random_space_points(count, seed, lo=0.3, hi=3.0):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(count, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.uniform(lo, hi, count)[:, None]


# --------------------------------------------------------------------- presets


def test_presets_and_parametric_quadratic():
    assert get_preset("power2").family is Family.PLANAR_POWER
    assert get_preset("zorich2").n == 3
    m = get_preset("quad:0.3")
    assert m.family is Family.QUADRATIC and m.c == 0.3
    with pytest.raises(KeyError):
        get_preset("nosuch")
    with pytest.raises(KeyError):
        get_preset("quad:abc")


def test_descriptor_dict_and_planar_dilatation():
    d = get_preset("cheb3").to_dict()
    assert d["degree"] == 3 and d["dilatation_bound"] == 1.0 and d["holder_alpha"] == 1.0


def test_apply_planar_hand_values():
    assert apply(get_preset("power2"), 1 + 1j) == pytest.approx(2j)
    assert apply(get_preset("quad:-1"), 2.0) == pytest.approx(3.0)
    # normalised Chebyshev T_3(x) = 4x^3 - 3x
    assert apply(get_preset("cheb3"), 0.5) == pytest.approx(4 * 0.125 - 1.5)
    out = apply(get_preset("power2"), np.array([[0.0, 2.0]]))
    np.testing.assert_allclose(out, [[-4.0, 0.0]])


def test_iterate_composes():
    m = get_preset("power2")
    assert iterate(m, 1.1, 3) == pytest.approx(1.1**8)


# ----------------------------------------------------------------- classification


def test_classify_orbit_hand_values():
    m = get_preset("power2")
    esc = classify_orbit(m, 1.5)
    # 1.5 -> 2.25 -> 5.06 leaves radius 4 at step 2
    assert esc.label is Orbit.ESCAPED and esc.iterations_used == 2
    assert classify_orbit(m, 0.5).label is Orbit.BOUNDED
    assert classify_orbit(get_preset("quad:-2"), 0.3, max_iter=50).label is Orbit.BOUNDED
    z = get_preset("zorich2")
    # radii 2 -> 4 -> 16 -> 256 > e^4
    r = classify_orbit(z, [0.0, 0.0, 2.0])
    assert r.label is Orbit.ESCAPED and r.iterations_used == 3
    assert classify_orbit(z, [0.3, 0.0, 0.0]).label is Orbit.BOUNDED
    assert r.to_dict()["label"] == Orbit.ESCAPED.value


def test_classify_points_matches_scalar_version():
    m = get_preset("quad:-1")
    rng = np.random.default_rng(0)
    z = rng.uniform(-2, 2, 60) + 1j * rng.uniform(-1.5, 1.5, 60)
    escaped, steps = classify_points(m, z, max_iter=60)
    for k in range(60):
        c = classify_orbit(m, z[k], max_iter=60)
        assert escaped[k] == (c.label is Orbit.ESCAPED)
        if escaped[k]:
            assert steps[k] == c.iterations_used


# ------------------------------------------------------------------- sampling


@pytest.mark.parametrize("name", ["power2", "power3", "quad:0"])
def test_circle_julia_sets(name):
    cloud = sample_julia(name, 4000, seed=3)
    r = np.linalg.norm(cloud.points, axis=1)
    assert np.max(np.abs(r - 1)) < 1e-5


def test_chebyshev_and_segment_julia_sets():
    cheb = sample_julia("cheb3", 3000, seed=1).points
    assert np.max(np.abs(cheb[:, 1])) < 1e-6 and np.max(np.abs(cheb[:, 0])) <= 1 + 1e-6
    seg = sample_julia("quad:-2", 3000, seed=1).points
    assert np.max(np.abs(seg[:, 1])) < 1e-4 and np.max(np.abs(seg[:, 0])) <= 2 + 1e-4


def test_samples_are_backward_invariant():
    # points of J map into J: |f(z)| stays 1 on the unit circle
    m = get_preset("power2")
    pts = sample_julia(m, 2000, seed=5).points
    img = apply(m, pts)
    assert np.max(np.abs(np.linalg.norm(img, axis=1) - 1)) < 1e-5


def test_quadratic_samples_do_not_escape():
    m = get_preset("quad:-1")
    pts = sample_julia(m, 2000, seed=2).points
    escaped, steps = classify_points(m, pts, max_iter=30)
    # points of J never escape; tiny sampling error can only leave after many steps
    assert np.all(~escaped | (steps > 10))


def test_sampling_is_seeded_and_prefix_stable():
    a = sample_julia("quad:-1", 3000, seed=4)
    b = sample_julia("quad:-1", 3000, seed=4)
    c = sample_julia("quad:-1", 1000, seed=4)
    np.testing.assert_array_equal(a.points, b.points)
    np.testing.assert_array_equal(a.points[:1000], c.points)
    assert a.metadata["seed"] == 4 and a.metadata["method"] == "inverse"
    assert not np.array_equal(sample_julia("quad:-1", 3000, seed=5).points, a.points)


def test_bisection_prefix_stable_and_on_circle():
    a = sample_julia("power2", 500, method="bisection", seed=0)
    b = sample_julia("power2", 200, method="bisection", seed=0)
    np.testing.assert_array_equal(a.points[:200], b.points)
    assert np.max(np.abs(np.linalg.norm(a.points, axis=1) - 1)) < 1e-5


def test_sampling_errors():
    with pytest.raises(ValueError):
        sample_julia("zorich2", 100, method=Method.INVERSE_ITERATION)
    with pytest.raises(ValueError):
        sample_julia("quad:-1", 100, method="bisection")
    with pytest.raises(ValueError):
        sample_julia("power2", 1)


def test_zorich_julia_set_is_unit_sphere():
    pts = sample_julia("zorich2", 1000, seed=0).points
    assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 1)) < 1e-5


# ---------------------------------------------------------------------- zorich


def test_zorich_modulus_is_exponential_of_height():
    rng = np.random.default_rng(1)
    x = rng.uniform(-5, 5, (200, 3))
    np.testing.assert_allclose(np.linalg.norm(zorich(x), axis=1), np.exp(x[:, 2]), rtol=1e-12)


def test_zorich_symmetries():
    rng = np.random.default_rng(2)
    x = rng.uniform(-1, 1, (100, 3))
    # period 4 in each horizontal direction
    np.testing.assert_allclose(zorich(x + [4, 0, 0]), zorich(x), atol=1e-12)
    np.testing.assert_allclose(zorich(x + [0, 4, 0]), zorich(x), atol=1e-12)
    # reflection across a beam face reflects the image in the equatorial plane
    refl = x.copy()
    refl[:, 0] = 2 - x[:, 0]
    img, img_r = zorich(x), zorich(refl)
    np.testing.assert_allclose(img_r[:, :2], img[:, :2], atol=1e-12)
    np.testing.assert_allclose(img_r[:, 2], -img[:, 2], atol=1e-12)


def test_zorich_inverse_round_trip():
    for y in _random_space_points(200, 3):
        chart = zorich_inverse(y)
        np.testing.assert_allclose(zorich(chart.embed()), y, atol=1e-12 * max(1, np.linalg.norm(y)))
    with pytest.raises(ValueError):
        zorich_inverse([0.0, 0.0, 0.0])


def test_zorich_power_radial_invariant_and_semigroup():
    m = get_preset("zorich2")
    y = _random_space_points(500, 4, 0.5, 1.5)
    np.testing.assert_allclose(np.linalg.norm(apply(m, y), axis=1), np.linalg.norm(y, axis=1) ** 2, rtol=1e-9)
    two = iterate(m, y, 2)
    one_step = composed_power(m, y, 2)
    np.testing.assert_allclose(two, one_step, rtol=1e-8, atol=1e-10)
    with pytest.raises(ValueError):
        composed_power(get_preset("power2"), y, 2)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2))
def test_zorich_power_maps_spheres_to_spheres(a, b, c):
    y = np.array([a, b, c])
    r = np.linalg.norm(y)
    if r < 1e-3:
        return
    out = apply(get_preset("zorich2"), y)
    assert np.linalg.norm(out) == pytest.approx(r**2, rel=1e-9)


def test_dilatation_planar_holomorphic_is_conformal():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1.5, 1.5, (200, 2))
    rep = dilatation_probe(get_preset("quad:-1"), pts)
    assert rep.k == pytest.approx(1.0, abs=1e-4)
    assert rep.n_samples > 150


def test_dilatation_zorich_below_declared_bound():
    m = get_preset("zorich2")
    rep = dilatation_probe(m, _random_space_points(1000, 6, 0.5, 2.0))
    assert rep.n_samples > 500
    assert 1.0 < rep.k <= 1.1 * m.dilatation_bound
    assert len(rep.skipped) + rep.n_samples == 1000
    with pytest.raises(ValueError):
        dilatation_probe(m, np.zeros((3, 2)))


def test_holder_probe_on_smooth_points():
    m = get_preset("zorich2")
    slope, diam = holder_scaling_probe(m, [0.3, 0.5, 0.7], 2.0 ** -np.arange(4, 10))
    assert slope >= m.holder_alpha - 0.1
    assert np.all(np.diff(diam) < 0)
    # holomorphic maps are locally Lipschitz away from critical points
    s2, _ = holder_scaling_probe(get_preset("power2"), [0.7, 0.2], 2.0 ** -np.arange(4, 10))
    assert s2 == pytest.approx(1.0, abs=0.02)
    with pytest.raises(ValueError):
        holder_scaling_probe(m, [0, 0, 1], [0.1, 0.2])


def test_holder_alpha_formula():
    m = get_preset("zorich2")
    assert m.holder_alpha == pytest.approx(m.inner_dilatation ** (1 / (1 - 3)))
    assert 0 < m.holder_alpha < 1


def test_all_presets_sample():
    for name in PRESETS:
        cloud = sample_julia(name, 256, seed=0)
        assert len(cloud) > 200 and np.all(np.isfinite(cloud.points))
        assert math.isfinite(cloud.metadata["sampling_scale"])
