"""Minkowski geometry in natural units (c = 1), signature (+, -, ..., -).

Events carry a time coordinate and one or more spatial coordinates; the
default is one spatial dimension. Light cones are closed: a lightlike
separated event lies in the cone.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, PreconditionError


class Interval(enum.Enum):
    TIMELIKE = "timelike"
    SPACELIKE = "spacelike"
    LIGHTLIKE = "lightlike"
    COINCIDENT = "coincident"


def _coords(x) -> tuple[float, ...]:
    if isinstance(x, (int, float, np.integer, np.floating)):
        return (float(x),)
    return tuple(float(c) for c in x)


@dataclass(frozen=True)
class Event:
    """A spacetime point ``(t, x)``; ``x`` may be a scalar or a sequence."""

    t: float
    x: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", _coords(self.x))
        if not math.isfinite(self.t) or not all(math.isfinite(c) for c in self.x):
            raise ValueError(f"non-finite event coordinates {self!r}")

    @property
    def spatial_dims(self) -> int:
        return len(self.x)

    def coords(self) -> tuple[float, ...]:
        return (self.t, *self.x)

    @classmethod
    def from_coords(cls, coords: Sequence[float]) -> "Event":
        if len(coords) < 2:
            raise DimensionError("an event needs a time and at least one spatial coordinate")
        return cls(coords[0], tuple(coords[1:]))


def _check_dims(e1: Event, e2: Event) -> None:
    if e1.spatial_dims != e2.spatial_dims:
        raise DimensionError(
            f"events have {e1.spatial_dims} and {e2.spatial_dims} spatial coordinates"
        )


def interval_squared(e1: Event, e2: Event) -> float:
    """``dt^2 - |dx|^2``; positive for timelike separation."""
    _check_dims(e1, e2)
    dt = e2.t - e1.t
    dx2 = sum((b - a) ** 2 for a, b in zip(e1.x, e2.x))
    return dt * dt - dx2


def interval_type(e1: Event, e2: Event, tol: float = 0.0) -> Interval:
    """Classify the separation of two events.

    ``tol`` widens the lightlike shell: ``|dt^2 - dx^2| <= tol`` counts as
    lightlike. The default of zero is exact for integer coordinates.
    """
    s = interval_squared(e1, e2)
    if e1 == e2:
        return Interval.COINCIDENT
    if s > tol:
        return Interval.TIMELIKE
    if s < -tol:
        return Interval.SPACELIKE
    return Interval.LIGHTLIKE


def in_backward_lightcone(e: Event, p: Event, tol: float = 0.0) -> bool:
    """True iff ``e`` lies in the closed causal past of ``p``."""
    _check_dims(e, p)
    if e.t > p.t:
        return False
    return interval_type(e, p, tol) is not Interval.SPACELIKE


def in_forward_lightcone(e: Event, p: Event, tol: float = 0.0) -> bool:
    """True iff ``e`` lies in the closed causal future of ``p``."""
    return in_backward_lightcone(p, e, tol)


def spacelike(e1: Event, e2: Event) -> bool:
    return interval_type(e1, e2) is Interval.SPACELIKE


@dataclass(frozen=True)
class Region:
    """Axis-aligned closed box in spacetime.

    ``half_widths`` lists the time half-width first, then one half-width per
    spatial coordinate.
    """

    center: Event
    half_widths: tuple[float, ...]

    def __post_init__(self):
        hw = tuple(float(h) for h in self.half_widths)
        if len(hw) != 1 + self.center.spatial_dims:
            raise DimensionError(
                f"region needs {1 + self.center.spatial_dims} half-widths, got {len(hw)}"
            )
        if any(not (h > 0 and math.isfinite(h)) for h in hw):
            raise ValueError(f"half-widths must be positive and finite, got {hw}")
        object.__setattr__(self, "half_widths", hw)

    @property
    def spatial_dims(self) -> int:
        return self.center.spatial_dims

    def bounds(self) -> list[tuple[float, float]]:
        c = self.center.coords()
        return [(ci - h, ci + h) for ci, h in zip(c, self.half_widths)]

    def contains(self, e: Event) -> bool:
        if e.spatial_dims != self.spatial_dims:
            raise DimensionError("event and region dimensions differ")
        return all(lo <= v <= hi for v, (lo, hi) in zip(e.coords(), self.bounds()))

    def contains_region(self, other: "Region") -> bool:
        """Box inclusion ``other ⊆ self``."""
        if other.spatial_dims != self.spatial_dims:
            raise DimensionError("region dimensions differ")
        return all(
            lo <= olo and ohi <= hi
            for (lo, hi), (olo, ohi) in zip(self.bounds(), other.bounds())
        )

    def corners(self) -> list[Event]:
        return [Event.from_coords(c) for c in itertools.product(*self.bounds())]

    def sample(self, rng: np.random.Generator, n: int) -> list[Event]:
        lo, hi = np.array(self.bounds()).T
        pts = rng.uniform(lo, hi, size=(n, len(lo)))
        return [Event.from_coords(p) for p in pts]


def _interval_range(a: tuple[float, float], b: tuple[float, float]) -> tuple[float, float]:
    # range of (y - x) for x in a, y in b
    return b[0] - a[1], b[1] - a[0]


def regions_spacelike_separated(r1: Region, r2: Region) -> bool:
    """True iff every point of ``r1`` is spacelike to every point of ``r2``.

    The set of difference vectors between two boxes is itself a box, so the
    largest ``|dt|`` and the smallest ``|dx|`` are attained independently at
    its extremes. Separation holds iff ``max |dt| < min |dx|``.
    """
    if r1.spatial_dims != r2.spatial_dims:
        raise DimensionError("region dimensions differ")
    b1, b2 = r1.bounds(), r2.bounds()
    lo, hi = _interval_range(b1[0], b2[0])
    max_dt = max(abs(lo), abs(hi))
    min_dx2 = 0.0
    for a, b in zip(b1[1:], b2[1:]):
        lo, hi = _interval_range(a, b)
        if lo > 0:
            min_dx2 += lo * lo
        elif hi < 0:
            min_dx2 += hi * hi
    return max_dt * max_dt < min_dx2


def region_precedes(region: Region, p: Event) -> bool:
    """True iff some point of ``region`` lies in the closed causal past of ``p``."""
    if region.spatial_dims != p.spatial_dims:
        raise DimensionError("event and region dimensions differ")
    bounds = region.bounds()
    t_lo = bounds[0][0]
    if t_lo > p.t:
        return False
    d2 = 0.0
    for v, (lo, hi) in zip(p.x, bounds[1:]):
        if v < lo:
            d2 += (lo - v) ** 2
        elif v > hi:
            d2 += (v - hi) ** 2
    return d2 <= (p.t - t_lo) ** 2


@dataclass(frozen=True)
class WorldLine:
    """Piecewise causal trajectory through a list of events."""

    events: tuple[Event, ...]
    name: str = ""

    def __post_init__(self):
        evs = tuple(self.events)
        if not evs:
            raise ValueError("a world-line needs at least one event")
        for e1, e2 in zip(evs, evs[1:]):
            _check_dims(e1, e2)
            if not e2.t > e1.t:
                raise ValueError("world-line times must be strictly increasing")
            if interval_type(e1, e2) is Interval.SPACELIKE:
                raise ValueError(f"spacelike world-line segment {e1} -> {e2}")
        object.__setattr__(self, "events", evs)

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)


class PastEvent(NamedTuple):
    """Entry of :func:`causal_past_events`.

    ``unordered_with`` holds input indices of other returned events that are
    not causally ordered with this one (spacelike or coincident).
    """

    index: int
    event: Event
    payload: Any
    unordered_with: frozenset


def precedes(e1: Event, e2: Event) -> bool:
    """Strict causal precedence: ``e1`` in the closed past of ``e2`` and distinct."""
    return e1 != e2 and in_backward_lightcone(e1, e2)


def causal_past_events(p: Event, events: Iterable[tuple[Event, Any]]) -> list[PastEvent]:
    """Events in the closed backward light cone of ``p``, in causal order.

    Causally ordered pairs appear past-first. Unordered pairs keep their
    input order; the result is the stable topological sort that always
    emits the earliest-listed available event.
    """
    items = [(i, e, payload) for i, (e, payload) in enumerate(events)]
    inside = [it for it in items if in_backward_lightcone(it[1], p)]
    order = stable_topological_order([it[1] for it in inside])
    out = []
    for k in order:
        i, e, payload = inside[k]
        unordered = frozenset(
            inside[j][0]
            for j in range(len(inside))
            if j != k and not precedes(e, inside[j][1]) and not precedes(inside[j][1], e)
        )
        out.append(PastEvent(i, e, payload, unordered))
    return out


def stable_topological_order(events: Sequence[Event], prefer_last: bool = False) -> list[int]:
    """Linear extension of the causal order on ``events``.

    Ties between unordered events are broken by list position: earliest
    first by default, latest first with ``prefer_last``.
    """
    n = len(events)
    preds = [{j for j in range(n) if precedes(events[j], events[i])} for i in range(n)]
    done: list[int] = []
    remaining = list(range(n))
    while remaining:
        ready = [i for i in remaining if preds[i] <= set(done)]
        pick = ready[-1] if prefer_last else ready[0]
        done.append(pick)
        remaining.remove(pick)
    return done


def linear_extensions(events: Sequence[Event], limit: int | None = None) -> list[list[int]]:
    """All orderings of ``events`` compatible with causal precedence.

    Raises ``PreconditionError`` when more than ``limit`` extensions would be
    produced.
    """
    n = len(events)
    preds = [{j for j in range(n) if precedes(events[j], events[i])} for i in range(n)]
    result: list[list[int]] = []

    def walk(prefix: list[int], placed: set[int]):
        if len(prefix) == n:
            result.append(list(prefix))
            if limit is not None and len(result) > limit:
                raise PreconditionError(f"more than {limit} causal orderings")
            return
        for i in range(n):
            if i not in placed and preds[i] <= placed:
                prefix.append(i)
                placed.add(i)
                walk(prefix, placed)
                placed.remove(i)
                prefix.pop()

    walk([], set())
    return result
