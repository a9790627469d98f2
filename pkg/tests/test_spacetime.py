import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcausal.errors import DimensionError, PreconditionError
from qcausal.spacetime import (
    Event, Interval, Region, WorldLine, causal_past_events, in_backward_lightcone,
    in_forward_lightcone, interval_type, linear_extensions, region_precedes,
    regions_spacelike_separated, spacelike, stable_topological_order,
)

coord = st.integers(-6, 6)


@pytest.mark.parametrize("e1,e2,kind", [
    (Event(0, 0), Event(2, 1), Interval.TIMELIKE),
    (Event(0, 0), Event(1, 2), Interval.SPACELIKE),
    (Event(0, 0), Event(1, 1), Interval.LIGHTLIKE),
    (Event(0, 0), Event(-1, 1), Interval.LIGHTLIKE),
    (Event(3, 2), Event(3, 2), Interval.COINCIDENT),
    (Event(1, -1), Event(1, 1), Interval.SPACELIKE),
    (Event(0, (0, 0)), Event(5, (3, 4)), Interval.LIGHTLIKE),
])
def test_interval_type(e1, e2, kind):
    assert interval_type(e1, e2) is kind
    assert interval_type(e2, e1) is kind


def test_lightcone_is_closed():
    assert in_backward_lightcone(Event(0, 0), Event(1, 1))
    assert in_forward_lightcone(Event(1, 1), Event(0, 0))
    assert not in_backward_lightcone(Event(1, 1), Event(0, 0))
    assert in_backward_lightcone(Event(2, 2), Event(2, 2))


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        interval_type(Event(0, 0), Event(0, (0, 0)))


@given(coord, coord, coord, coord)
def test_interval_symmetry(t1, x1, t2, x2):
    a, b = Event(t1, x1), Event(t2, x2)
    assert interval_type(a, b) is interval_type(b, a)
    if spacelike(a, b):
        assert not in_backward_lightcone(a, b) and not in_backward_lightcone(b, a)


@given(coord, coord, coord, coord, coord, coord)
def test_backward_cone_transitive(t1, x1, t2, x2, t3, x3):
    a, b, c = Event(t1, x1), Event(t2, x2), Event(t3, x3)
    if in_backward_lightcone(a, b) and in_backward_lightcone(b, c):
        assert in_backward_lightcone(a, c)


def _box_grid(r, n=5):
    axes = [np.linspace(lo, hi, n) for lo, hi in r.bounds()]
    return [Event.from_coords(c) for c in itertools.product(*axes)]


@settings(max_examples=60, deadline=None)
@given(st.integers(-4, 4), st.integers(-6, 6), st.integers(-4, 4), st.integers(-6, 6),
       st.sampled_from([0.25, 0.5, 1.0]), st.sampled_from([0.25, 0.5, 1.0]))
def test_region_separation_matches_grid(t1, x1, t2, x2, h1, h2):
    r1 = Region(Event(t1, x1), (h1, h1))
    r2 = Region(Event(t2, x2), (h2, h2))
    brute = all(spacelike(p, q) for p in _box_grid(r1) for q in _box_grid(r2))
    assert regions_spacelike_separated(r1, r2) == brute


def test_region_precedes_matches_grid():
    r = Region(Event(0, 0), (0.5, 0.5))
    for t in np.arange(-1, 3.01, 0.25):
        for x in np.arange(-3, 3.01, 0.25):
            p = Event(t, x)
            brute = any(in_backward_lightcone(q, p) for q in _box_grid(r, 9))
            assert region_precedes(r, p) == brute


def test_region_contains_and_inclusion():
    big = Region(Event(0, 1), (0.25, 1.5))
    small = Region(Event(0, 0), (0.25, 0.5))
    assert big.contains(Event(0, 2.5))
    assert not big.contains(Event(0.3, 0))
    assert big.contains_region(small)
    assert not small.contains_region(big)
    assert len(big.corners()) == 4
    with pytest.raises(ValueError):
        Region(Event(0, 0), (0.0, 1.0))
    with pytest.raises(DimensionError):
        Region(Event(0, 0), (1.0,))


def test_worldline_validation():
    WorldLine((Event(0, 0), Event(1, 0.5), Event(3, 2.5)), "ok")
    with pytest.raises(ValueError):
        WorldLine((Event(0, 0), Event(1, 3)))
    with pytest.raises(ValueError):
        WorldLine((Event(1, 0), Event(1, 0)))


def test_causal_past_fig4_layout():
    events = [(Event(1, -1), "A"), (Event(1, 1), "B")]
    past = causal_past_events(Event(3, 0), events)
    assert [pe.payload for pe in past] == ["A", "B"]
    assert past[0].unordered_with == {1} and past[1].unordered_with == {0}
    past = causal_past_events(Event(2, 1), events)
    assert [pe.payload for pe in past] == ["B"]


def test_causal_past_orders_past_first():
    events = [(Event(3, 0), "late"), (Event(1, 0), "early"), (Event(1, 5), "far")]
    past = causal_past_events(Event(4, 0), events)
    assert [pe.payload for pe in past] == ["early", "late"]


def test_linear_extensions_counts():
    a, b, c = Event(1, -1), Event(1, 1), Event(3, 0)
    assert linear_extensions([a, b]) == [[0, 1], [1, 0]]
    assert linear_extensions([c, a, b]) == [[1, 2, 0], [2, 1, 0]]
    spread = [Event(0, 3 * k) for k in range(4)]
    assert len(linear_extensions(spread)) == math.factorial(4)
    with pytest.raises(PreconditionError):
        linear_extensions(spread, limit=10)


def test_topological_order_tie_breaks():
    evs = [Event(1, -1), Event(1, 1), Event(0, 0)]
    assert stable_topological_order(evs) == [2, 0, 1]
    assert stable_topological_order(evs, prefer_last=True) == [2, 1, 0]
