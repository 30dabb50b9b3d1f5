"""Box counting, dimension fits and Hausdorff-content checks."""

import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from uniperf.dimension import (
    BoxCountingDimension,
    box_count,
    content_estimate,
    content_lower_bound_check,
    default_window,
    fit_dimension,
    sampling_scale,
)
from uniperf.generators import ball_cloud, cantor_cloud, circle_cloud, segment_cloud

CANTOR_DIM = math.log(2) / math.log(3)


def _brute_force_count(pts, eps):
    """Smallest number of closed boxes over every assignment of face points."""
    choices = []
    for p in pts:
        axes = []
        for u in p / eps:
            k = math.floor(u)
            axes.append((k - 1, k) if u == k else (k,))
        choices.append(list(product(*axes)))
    return min(len(set(pick)) for pick in product(*choices))


# ---------------------------------------------------------------- box counts


def test_box_count_hand_values():
    assert box_count(np.zeros((1, 2)), 0.1) == 1
    # the closed interval [0, 1] covered by closed boxes of side 1/4
    assert box_count(segment_cloud(101), 0.25) == 4
    # a grid corner shared by four boxes needs one box
    assert box_count(np.array([[1.0, 1.0], [0.5, 0.5]]), 1.0) == 1
    with pytest.raises(ValueError):
        box_count(np.zeros((3, 2)), 0.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=6))
def test_box_count_matches_brute_force_on_face_points(raw):
    # half-integer coordinates put points on faces and corners
    pts = np.array(raw, dtype=float) / 2
    assert box_count(pts, 1.0) == _brute_force_count(pts, 1.0)


def test_box_count_generic_points_equals_half_open_count():
    pts = np.random.default_rng(0).uniform(-3, 3, (500, 2))
    for eps in (0.7, 0.3, 0.11):
        assert box_count(pts, eps) == len(np.unique(np.floor(pts / eps), axis=0))


def test_box_count_is_monotone_in_scale():
    c = cantor_cloud(8)
    counts = [box_count(c, e) for e in 2.0 ** -np.arange(1, 10)]
    assert all(a <= b for a, b in zip(counts, counts[1:]))


# ------------------------------------------------------------------- windows


def test_sampling_scale_prefers_metadata():
    assert sampling_scale(segment_cloud(11)) == pytest.approx(0.1)
    bare = np.column_stack([np.arange(5.0) * 0.3, np.zeros(5)])
    assert sampling_scale(bare) == pytest.approx(0.3)


def test_default_window_bounds():
    c = cantor_cloud(10)
    w = default_window(c)
    assert len(w) >= 4
    assert np.all(np.diff(w) < 0)
    assert w.min() >= sampling_scale(c)
    np.testing.assert_allclose(w[:-1] / w[1:], 2.0)


def test_fit_rejects_bad_windows():
    c = cantor_cloud(6)
    with pytest.raises(ValueError):
        fit_dimension(c, [0.1, 0.05, 0.02])
    with pytest.raises(ValueError):
        fit_dimension(c, [0.1, 0.2, 0.05, 0.02])
    with pytest.raises(ValueError):
        fit_dimension(c, 2.0 ** -np.arange(2, 14))


# ---------------------------------------------------------------- dimensions


def test_segment_and_disk_dimensions():
    seg = fit_dimension(segment_cloud(4097))
    assert seg.slope == pytest.approx(1.0, abs=0.02) and seg.ok
    disk = fit_dimension(ball_cloud(40000, seed=1), 2.0 ** -np.arange(1, 6))
    assert disk.slope == pytest.approx(2.0, abs=0.1)


def test_cantor_dimension():
    fit = fit_dimension(cantor_cloud(10))
    assert fit.slope == pytest.approx(CANTOR_DIM, abs=0.05)
    assert fit.r2 >= 0.98


def test_circle_dimension():
    assert fit_dimension(circle_cloud(20000)).slope == pytest.approx(1.0, abs=0.05)


def test_fit_dict_and_estimator():
    c = cantor_cloud(9)
    d = fit_dimension(c).to_dict()
    assert d["label"] == "box dimension" and len(d["counts"]) == len(d["epsilons"])
    est = clone(BoxCountingDimension(sampling_scale=c.metadata["sampling_scale"]))
    est.fit(c.points)
    assert est.dimension_ == pytest.approx(d["slope"])
    assert est.score() == est.r2_
    assert est.n_features_in_ == 2


# ------------------------------------------------------------------ content


def test_content_of_single_point_is_one_smallest_box():
    est = content_estimate(np.zeros((1, 2)), 0.5, [0, 0], 1.0, finest=1 / 64)
    # one box of side 1/64 charged as a ball of radius sqrt(2) / 2 times the side
    assert est.content_hat == pytest.approx((math.sqrt(2) / 2 / 64) ** 0.5)


def test_content_is_at_most_one_covering_ball():
    seg = segment_cloud(1025)
    est = content_estimate(seg, 1.0, [0.5, 0.0], 0.45)
    # the subset lies in [0.05, 0.95], inside the dyadic box [0, 1)^2
    assert 0 < est.content_hat <= math.sqrt(2) / 2 + 1e-12


def test_content_empty_ball_is_zero():
    assert content_estimate(segment_cloud(11), 1.0, [5.0, 5.0], 0.1).content_hat == 0.0


def test_cantor_content_ratios_positive_and_stable():
    chk = content_lower_bound_check(cantor_cloud(10), CANTOR_DIM)
    assert chk.min_ratio > 0
    assert chk.spread < 4
    assert len(chk.radii) >= 4


def test_content_lower_bound_validation():
    c = cantor_cloud(6)
    with pytest.raises(ValueError):
        content_lower_bound_check(c, 0.0)
    with pytest.raises(ValueError):
        content_lower_bound_check(c, 3.0)
    with pytest.raises(ValueError):
        content_lower_bound_check(c, 0.5, radii=[c.metadata["sampling_scale"]])


def test_content_check_is_seeded():
    c = cantor_cloud(8)
    a = content_lower_bound_check(c, CANTOR_DIM, seed=1)
    b = content_lower_bound_check(c, CANTOR_DIM, seed=1)
    np.testing.assert_array_equal(a.ratios, b.ratios)
