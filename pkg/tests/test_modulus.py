"""Discrete modulus solver, capacities and quasihyperbolic distance."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uniperf.modulus import (
    Ball,
    BallDomain,
    BoxMinusCloudDomain,
    DensityField,
    Exterior,
    Grid,
    GridCondenser,
    HalfSpaceDomain,
    PlatesTouchError,
    Segment,
    capacity_to_modulus,
    condenser_capacity,
    modulus_to_capacity,
    quasihyperbolic_distance,
    rasterize_condenser,
    ring_capacity,
    shortest_path_length,
    solve_modulus,
    spherical_ring_capacity,
    stencil_offsets,
    tau_estimate,
    teichmuller_normal_form,
    thickness,
)


def test_grid_from_box_covers_box():
    g = Grid.from_box([0, 0], [2, 1], 8)
    assert g.h == pytest.approx(0.25)
    assert g.shape == (9, 5)
    np.testing.assert_allclose(g.lo, [0, 0])
    np.testing.assert_allclose(g.hi, [2, 1])
    assert g.coords().shape == (45, 2)
    assert g.face_factor().reshape(g.shape)[0, 0] == 0.25


def test_grid_rejects_bad_box():
    with pytest.raises(ValueError):
        Grid.from_box([0, 0], [0, 1], 8)


@pytest.mark.parametrize("n,reach,count", [(2, 1, 4), (2, 2, 8), (3, 1, 13)])
def test_stencil_offsets_are_primitive_half_sets(n, reach, count):
    off = stencil_offsets(n, reach)
    assert len(off) == count
    for v in off:
        assert math.gcd(*map(abs, v)) == 1
        assert not any((off == -v).all(axis=1))


@given(st.floats(1e-3, 1e3), st.sampled_from([2, 3]))
def test_capacity_modulus_round_trip(cap, n):
    assert modulus_to_capacity(capacity_to_modulus(cap, n), n) == pytest.approx(cap, rel=1e-12)


def test_capacity_to_modulus_zero_is_infinite():
    assert capacity_to_modulus(0.0, 2) == math.inf


def test_density_field_bytes_round_trip():
    g = Grid.from_box([-1, -1], [1, 1], 4)
    rho = np.arange(g.size, dtype=float) / 7
    back = DensityField.from_bytes(DensityField(g, rho).to_bytes())
    np.testing.assert_array_equal(back.rho, rho)
    assert back.grid.shape == g.shape and back.grid.h == g.h
    with pytest.raises(ValueError):
        DensityField.from_bytes(b"XXXX" + bytes(40))


def test_condenser_validation():
    g = Grid.from_box([0, 0], [1, 1], 4)
    e = np.zeros(g.size, bool)
    with pytest.raises(ValueError):
        GridCondenser(g, e, e)
    e[0] = True
    with pytest.raises(PlatesTouchError):
        GridCondenser(g, e, e.copy())


def test_plates_touching_after_rasterisation():
    g = Grid.from_box([-2, -2], [2, 2], 8)
    with pytest.raises(PlatesTouchError):
        rasterize_condenser(Ball([0, 0], 1.0), Ball([0.5, 0], 1.0), g)


def test_solution_is_feasible_and_bracketed():
    g = Grid.from_box([-3, -3], [3, 3], 32)
    cond = rasterize_condenser(Ball([0, 0], 1.0), Exterior([0, 0], 2.5), g)
    res, dens = solve_modulus(cond, tol=1e-3)
    # every lattice path has rho-length at least one (up to the stopping tolerance)
    assert shortest_path_length(cond, dens) >= 1 - 1e-3
    assert res.lower_bound <= res.capacity * (1 + 1e-9)
    assert res.lower_bound > 0.95 * res.capacity


def test_annulus_capacity_coarse():
    # log(R/r) oracle: capacity 2 pi / log(R/r)
    res = spherical_ring_capacity(1.0, math.e, n=2, resolution=64, tol=1e-3)
    assert res.capacity == pytest.approx(2 * math.pi, rel=0.06)
    assert res.modulus == pytest.approx(1.0, rel=0.06)


def test_capacity_decreases_with_outer_radius():
    caps = [spherical_ring_capacity(1.0, R, n=2, resolution=48, tol=1e-2).capacity for R in (2.0, 4.0, 8.0)]
    assert caps[0] > caps[1] > caps[2] > 0


def test_capacity_is_translation_invariant():
    a = ring_capacity(Ball([0, 0], 0.3), Ball([1, 0], 0.3), resolution=32, tol=1e-2)
    b = ring_capacity(Ball([5, -2], 0.3), Ball([6, -2], 0.3), resolution=32, tol=1e-2)
    # the lattice sits differently relative to the plates after translating
    assert a.capacity == pytest.approx(b.capacity, rel=1e-2)


def test_p_modulus_in_the_plane_matches_radial_oracle():
    # for p != n the extremal density of an annulus is radial, giving
    # 2 pi k^(p - 1) / (R^k - r^k)^(p - 1) with k = (p - 2) / (p - 1)
    p, r, R = 3.0, 1.0, 2.5
    k = (p - 2) / (p - 1)
    exact = 2 * math.pi * k ** (p - 1) / (R**k - r**k) ** (p - 1)
    res = ring_capacity(Ball([0, 0], r), Exterior([0, 0], R), n=2, resolution=64, p=p, tol=1e-3)
    assert res.capacity == pytest.approx(exact, rel=0.08)


def test_teichmuller_normal_form_preserves_cross_ratio():
    for s in (0.01, 0.5, 1.0, 7.0, 1e4):
        t = teichmuller_normal_form(s)
        assert 0 < t < 1
        assert (1 + t) ** 2 / (4 * t) == pytest.approx((1 + s) / s, rel=1e-12)


def test_teichmuller_normal_form_monotone():
    ts = [teichmuller_normal_form(s) for s in (0.1, 1, 10, 100)]
    assert all(a < b for a, b in zip(ts, ts[1:]))


def test_tau_direct_and_normal_agree_roughly():
    a = tau_estimate(1.0, resolution=48, box_factor=4.0, tol=1e-2).capacity
    b = tau_estimate(1.0, resolution=48, box_factor=4.0, method="direct", tol=1e-2).capacity
    # exact value is 2; both discretisations are biased upward a little
    assert 1.8 < a < 2.8 and 1.8 < b < 2.8


def test_tau_rejects_nonpositive_s():
    with pytest.raises(ValueError):
        tau_estimate(0.0)


def test_quasihyperbolic_ball_radial_oracle():
    d = quasihyperbolic_distance(BallDomain([0, 0], 1.0), [0, 0], [0.5, 0], resolution=128)
    assert d == pytest.approx(math.log(2), rel=0.05)


def test_quasihyperbolic_halfspace_normal_oracle():
    dom = HalfSpaceDomain(0, 0.0, ([0, -4], [4, 4]))
    d = quasihyperbolic_distance(dom, [0.5, 0], [2.0, 0], resolution=128)
    assert d == pytest.approx(math.log(4), rel=0.05)


def test_quasihyperbolic_zero_and_boundary():
    dom = BallDomain([0, 0], 1.0)
    assert quasihyperbolic_distance(dom, [0.1, 0.1], [0.1, 0.1]) == 0.0
    with pytest.raises(ValueError):
        quasihyperbolic_distance(dom, [0, 0], [0.999, 0], resolution=32)


def test_quasihyperbolic_obstacles_increase_distance():
    free = BoxMinusCloudDomain([-1, -1], [1, 1], np.zeros((0, 2)))
    blocked = BoxMinusCloudDomain([-1, -1], [1, 1], np.array([[0.0, y] for y in np.linspace(-0.9, 0.9, 7)]))
    a, b = [-0.5, 0.05], [0.5, 0.05]
    assert quasihyperbolic_distance(blocked, a, b, 64) > quasihyperbolic_distance(free, a, b, 64)


def test_condenser_capacity_single_point_is_zero():
    res = condenser_capacity([0, 0], np.array([[0.1, 0.0]]), 0.5)
    assert res.capacity == 0.0 and res.modulus == math.inf


def test_thickness_of_segment_is_positive_and_of_point_is_zero():
    seg = np.column_stack([np.linspace(-0.1, 0.1, 41), np.zeros(41)])
    assert thickness(seg, [0, 0], 0.1, resolution=48, tol=1e-2).capacity > 0.5
    assert thickness(np.array([[0.0, 0.0]]), [0, 0], 0.1).capacity == 0.0


def test_segment_plates_in_space():
    e1 = np.array([1.0, 0, 0])
    res = ring_capacity(Segment(-e1, -0.2 * e1), Segment(0.2 * e1, e1), n=3, resolution=24, tol=1e-2)
    assert res.capacity > 0 and math.isfinite(res.modulus)


@settings(max_examples=5, deadline=None)
@given(st.floats(0.2, 0.6), st.floats(1.5, 3.0))
def test_coarse_ring_capacity_within_a_quarter_of_exact(r, k):
    res = spherical_ring_capacity(r, r * k, n=2, resolution=32, tol=1e-2)
    exact = 2 * math.pi / math.log(k)
    assert 0.8 * exact < res.capacity < 1.25 * exact
