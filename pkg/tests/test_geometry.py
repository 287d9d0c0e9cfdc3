import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import strip_blocked
from sortplan.geometry import (
    TWO_PI,
    AngularInterval,
    Disc,
    blocked_interval,
    free_gaps,
    measure,
    normalize_angle,
    union_covers_circle,
)

T = Disc(0, (0.0, 0.0), 0.15)


def iv(start, extent):
    return AngularInterval(start, extent)


def test_disc_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        Disc(1, (0, 0), 0.0)


def test_far_blocker_blocks_only_a_narrow_arc():
    # the approach strip is unbounded, so even a distant disc shadows a sliver
    arc = blocked_interval(T, Disc(1, (10.0, 0.0), 0.15), 0.05)
    assert arc.extent / 2 == pytest.approx(math.asin(0.35 / 10.0))
    angles = np.linspace(0.0, TWO_PI, 1_000_000, endpoint=False)
    hit = strip_blocked(0.15, (10.0, 0.0), 0.15, 0.05, angles)
    assert abs(hit.mean() - arc.extent / TWO_PI) < 1e-5


def test_disc_behind_the_strip_start_never_blocks_the_far_side():
    arc = blocked_interval(T, Disc(1, (2.0, 0.0), 0.15), 0.05)
    assert not arc.contains(math.pi)


def test_tangent_blocker_blocks_half_plane():
    arc = blocked_interval(T, Disc(1, (0.35, 0.0), 0.15), 0.05)
    assert arc.extent == pytest.approx(math.pi)
    assert arc.contains(0.0) and not arc.contains(math.pi)


def test_blocker_at_twice_reach():
    arc = blocked_interval(T, Disc(1, (0.70, 0.0), 0.15), 0.05)
    assert arc.extent / 2 == pytest.approx(math.pi / 6)
    assert arc.contains(0.0)


def test_half_angle_matches_ray_casting_fraction():
    angles = np.linspace(0.0, TWO_PI, 1_000_000, endpoint=False)
    hit = strip_blocked(0.15, (0.70, 0.0), 0.15, 0.05, angles)
    arc = blocked_interval(T, Disc(1, (0.70, 0.0), 0.15), 0.05)
    assert abs(hit.mean() - arc.extent / TWO_PI) < 1e-3


def test_near_blocker_wider_than_half_plane():
    # touching discs also clip the strip's end cap
    arc = blocked_interval(T, Disc(1, (0.3, 0.0), 0.15), 0.05)
    assert arc.extent > math.pi
    angles = np.linspace(0.0, TWO_PI, 200_000, endpoint=False)
    hit = strip_blocked(0.15, (0.3, 0.0), 0.15, 0.05, angles)
    assert abs(hit.mean() - arc.extent / TWO_PI) < 1e-3


def test_blocked_interval_errors():
    with pytest.raises(ValueError):
        blocked_interval(T, Disc(0, (1, 0), 0.1), 0.05)
    with pytest.raises(ValueError):
        blocked_interval(T, Disc(1, (0, 0), 0.1), 0.05)
    with pytest.raises(ValueError):
        blocked_interval(T, Disc(1, (1, 0), 0.1), -0.01)


def test_interval_wraps_and_normalizes():
    a = iv(-0.5, 1.0)
    assert a.start == pytest.approx(TWO_PI - 0.5)
    assert a.contains(0.2) and a.contains(TWO_PI - 0.2) and not a.contains(1.0)
    assert len(a.pieces()) == 2
    with pytest.raises(ValueError):
        iv(0.0, 0.0)


def test_union_examples():
    assert not union_covers_circle([])
    assert union_covers_circle([iv(0.0, TWO_PI)])
    assert union_covers_circle([iv(0.0, math.pi), iv(math.pi - 0.1, math.pi + 0.2)])
    assert not union_covers_circle([iv(0.0, math.pi), iv(math.pi + 0.01, math.pi - 0.02)])


def test_union_example_by_discretization():
    arcs = [iv(0.0, math.pi), iv(math.pi - 0.1, math.pi + 0.2)]
    grid = np.arange(0.0, TWO_PI, 1e-4)
    assert all(any(a.contains(x) for a in arcs) for x in grid[::50])


def test_free_gaps_examples():
    assert free_gaps([]) == [iv(0.0, TWO_PI)]
    assert free_gaps([iv(0.0, TWO_PI)]) == []
    (gap,) = free_gaps([iv(0.0, math.pi)])
    assert gap.start == pytest.approx(math.pi) and gap.extent == pytest.approx(math.pi)


def test_free_gap_through_zero_is_one_arc():
    (gap,) = free_gaps([iv(1.0, 4.0)])
    assert gap.start == pytest.approx(5.0)
    assert gap.extent == pytest.approx(TWO_PI - 4.0)


arcs_st = st.lists(
    st.tuples(st.floats(0.0, TWO_PI, allow_nan=False), st.floats(0.01, TWO_PI)).map(lambda t: iv(*t)),
    max_size=8,
)


@given(arcs_st)
@settings(max_examples=200, deadline=None)
def test_gaps_and_union_partition_circle(arcs):
    gaps = free_gaps(arcs)
    assert measure(arcs) + sum(g.extent for g in gaps) == pytest.approx(TWO_PI, abs=1e-6)
    assert (gaps == []) == union_covers_circle(arcs)
    starts = [g.start for g in gaps]
    assert starts == sorted(starts)
    for g in gaps:
        mid = g.start + g.extent / 2
        assert not any(a.contains_open(mid) for a in arcs)


@given(arcs_st, st.floats(0.0, TWO_PI))
@settings(max_examples=200, deadline=None)
def test_coverage_is_rotation_invariant(arcs, shift):
    rotated = [iv(a.start + shift, a.extent) for a in arcs]
    assert measure(rotated) == pytest.approx(measure(arcs), abs=1e-6)


@given(st.floats(-100, 100, allow_nan=False))
def test_normalize_angle_range(a):
    n = normalize_angle(a)
    assert 0.0 <= n < TWO_PI
    assert math.isclose(math.cos(n), math.cos(a), abs_tol=1e-6)


@given(
    st.floats(0.05, 0.3),
    st.floats(0.05, 0.3),
    st.floats(0.0, 1.5),
    st.floats(0.0, TWO_PI),
    st.floats(0.0, 0.1),
)
@settings(max_examples=150, deadline=None)
def test_blocked_interval_agrees_with_ray_casting(rt, rb, slack, phi, corridor):
    d = rt + rb + slack + 1e-3
    blocker = Disc(1, (d * math.cos(phi), d * math.sin(phi)), rb)
    target = Disc(0, (0.0, 0.0), rt)
    arc = blocked_interval(target, blocker, corridor)
    angles = np.linspace(0.0, TWO_PI, 4000, endpoint=False)
    hit = strip_blocked(rt, blocker.center, rb, corridor, angles)
    mine = np.array([arc is not None and arc.contains(a) for a in angles])
    assert (hit == mine).mean() >= 0.998
