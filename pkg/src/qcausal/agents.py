"""Light-cone-relative state assignment.

An agent at spacetime point ``p`` assigns the state obtained by applying, in
causal order, the update for every recorded measurement event in the closed
backward light cone of ``p``. Events that are not causally ordered
(spacelike or coincident) have no physically preferred order; an
:class:`OrderPolicy` fixes one, and the consistency checks compare them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from . import linalg as la
from .errors import DimensionError, PreconditionError, ZeroProbabilityOutcome
from .quantum import DensityOperator, MeasurementModel, update_state
from .spacetime import (
    Event,
    Region,
    WorldLine,
    causal_past_events,
    linear_extensions,
    precedes,
    region_precedes,
    stable_topological_order,
)

MAX_UNORDERED = 6


class OrderPolicy(enum.Enum):
    LEXICOGRAPHIC = "lexicographic"
    AS_LISTED = "as_listed"
    BOTH_ORDERS = "both_orders"


@dataclass(frozen=True, eq=False)
class MeasurementEvent:
    location: Event
    model: MeasurementModel
    outcome: Hashable
    setting_label: str = ""
    label: str = ""

    def __post_init__(self):
        if self.outcome not in self.model.outcomes:
            raise ValueError(
                f"event {self.label!r}: outcome {self.outcome!r} not in {self.model.outcomes}"
            )

    @property
    def name(self) -> str:
        return self.label or self.model.label

    def operator(self, dims: Sequence[int]) -> np.ndarray:
        return self.model.full_operator(self.outcome, dims)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Initial state, localized measurement events and agent world-lines."""

    initial_state: DensityOperator
    events: tuple[MeasurementEvent, ...]
    preparation_region: Region | None = None
    agents: Mapping[str, WorldLine] = field(default_factory=dict)

    def __post_init__(self):
        evs = tuple(self.events)
        object.__setattr__(self, "events", evs)
        object.__setattr__(self, "agents", dict(self.agents))
        dims = self.initial_state.dims
        labels = [e.name for e in evs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"event labels must be unique, got {labels}")
        for e in evs:
            e.operator(dims)  # target / size check
            if self.preparation_region is not None:
                if e.location.spatial_dims != self.preparation_region.spatial_dims:
                    raise DimensionError(f"event {e.name!r} has wrong spatial dimension")
                if not region_precedes(self.preparation_region, e.location):
                    raise PreconditionError(
                        f"event {e.name!r} is outside the forward light cone of the preparation"
                    )

    @property
    def dims(self) -> tuple[int, ...]:
        return self.initial_state.dims

    def event(self, label: str) -> MeasurementEvent:
        for e in self.events:
            if e.name == label:
                return e
        raise KeyError(label)

    def visible(self, p: Event) -> list[MeasurementEvent]:
        """Events in the closed backward light cone of ``p``, in input order."""
        return [pe.payload for pe in sorted(
            causal_past_events(p, [(e.location, e) for e in self.events]), key=lambda pe: pe.index)]


@dataclass
class AssignmentTrace:
    """Audit record of one state assignment.

    ``alternatives`` holds every causally admissible ordering evaluated under
    :attr:`OrderPolicy.BOTH_ORDERS`; ``spread`` is the largest trace distance
    between any of them and ``state``.
    """

    point: Event
    applied: tuple[str, ...]
    state: DensityOperator
    alternatives: list[tuple[tuple[str, ...], DensityOperator]] = field(default_factory=list)
    spread: float = 0.0


def _apply_sequence(scenario: Scenario, seq: Sequence[MeasurementEvent]) -> DensityOperator:
    rho = scenario.initial_state
    for ev in seq:
        try:
            rho = update_state(rho, ev.model, ev.outcome)
        except ZeroProbabilityOutcome as exc:
            raise ZeroProbabilityOutcome(
                f"event {ev.name!r}: {exc}", outcome=exc.outcome,
                probability=exc.probability, event=ev.name,
            ) from exc
    return rho


def _lexicographic_key(ev: MeasurementEvent):
    return (ev.location.t, ev.location.x, ev.name)


def _check_point(scenario: Scenario, p: Event) -> None:
    if scenario.preparation_region is not None and not region_precedes(scenario.preparation_region, p):
        raise PreconditionError(f"agent point {p} is outside the forward light cone of the preparation")


def _unordered_count(events: Sequence[MeasurementEvent]) -> int:
    locs = [e.location for e in events]
    return sum(
        1 for i, a in enumerate(locs)
        if any(j != i and not precedes(a, b) and not precedes(b, a) for j, b in enumerate(locs))
    )


def _extensions(events: Sequence[MeasurementEvent]) -> list[list[int]]:
    if _unordered_count(events) > MAX_UNORDERED:
        raise PreconditionError(
            f"more than {MAX_UNORDERED} causally unordered events; refusing to enumerate orderings"
        )
    return linear_extensions([e.location for e in events])


def assign_state(
    scenario: Scenario, p: Event, order_policy: OrderPolicy = OrderPolicy.LEXICOGRAPHIC
) -> AssignmentTrace:
    """State assigned at ``p`` from the events in its closed backward light cone.

    Causally ordered events are always applied past-first. Unordered ones
    follow ``order_policy``: coordinate-lexicographic ``(t, x, label)``,
    input order, or every admissible ordering (the first is returned, the
    rest are recorded in ``alternatives``).
    """
    _check_point(scenario, p)
    visible = scenario.visible(p)
    if order_policy is OrderPolicy.LEXICOGRAPHIC:
        ranked = sorted(visible, key=_lexicographic_key)
        order = [ranked[k] for k in stable_topological_order([e.location for e in ranked])]
    elif order_policy is OrderPolicy.AS_LISTED:
        order = [visible[k] for k in stable_topological_order([e.location for e in visible])]
    elif order_policy is OrderPolicy.BOTH_ORDERS:
        exts = _extensions(visible)
        results = []
        for ext in exts:
            seq = [visible[k] for k in ext]
            results.append((tuple(e.name for e in seq), _apply_sequence(scenario, seq)))
        names, state = results[0]
        spread = max(state.distance(s) for _, s in results)
        return AssignmentTrace(p, names, state, results, spread)
    else:
        raise ValueError(f"unknown order policy {order_policy!r}")
    state = _apply_sequence(scenario, order)
    return AssignmentTrace(p, tuple(e.name for e in order), state)


@dataclass
class ConsistencyResult:
    consistent: bool
    distance: float
    rho_ab: DensityOperator
    rho_ba: DensityOperator
    order_ab: tuple[str, ...]
    order_ba: tuple[str, ...]


def charlie_consistency(scenario: Scenario, p: Event, tol: float = 1e-10) -> ConsistencyResult:
    """Compare the two ways of folding unordered events into the state at ``p``.

    ``rho_ab`` resolves every tie by input order and ``rho_ba`` by reversed
    input order; for two spacelike events these are the two normalized
    sequential updates. ``distance`` is the largest trace distance between
    ``rho_ab`` and any admissible ordering (just ``rho_ba`` when the factorial
    guard forbids enumeration).

    Raises
    ------
    PreconditionError
        If ``p`` sees fewer than two mutually unordered events.
    """
    _check_point(scenario, p)
    visible = scenario.visible(p)
    if _unordered_count(visible) < 2:
        raise PreconditionError(f"point {p} sees no pair of causally unordered events")
    locs = [e.location for e in visible]
    seq_ab = [visible[k] for k in stable_topological_order(locs)]
    seq_ba = [visible[k] for k in stable_topological_order(locs, prefer_last=True)]
    rho_ab = _apply_sequence(scenario, seq_ab)
    rho_ba = _apply_sequence(scenario, seq_ba)
    distance = rho_ab.distance(rho_ba)
    if _unordered_count(visible) <= MAX_UNORDERED:
        for ext in linear_extensions(locs):
            distance = max(distance, rho_ab.distance(_apply_sequence(scenario, [visible[k] for k in ext])))
    return ConsistencyResult(
        distance <= tol, distance, rho_ab, rho_ba,
        tuple(e.name for e in seq_ab), tuple(e.name for e in seq_ba),
    )


@dataclass
class AuditEntry:
    point: Event
    spread: float
    passed: bool
    witness: tuple[str, str] | None = None
    witness_norm: float = 0.0


@dataclass
class AuditReport:
    passed: bool
    entries: list[AuditEntry]

    @property
    def violations(self) -> list[AuditEntry]:
        return [e for e in self.entries if not e.passed]


def _noncommuting_pair(scenario: Scenario, events: Sequence[MeasurementEvent], tol: float):
    dims = scenario.dims
    worst = (None, 0.0)
    for i, e1 in enumerate(events):
        for e2 in events[i + 1:]:
            if precedes(e1.location, e2.location) or precedes(e2.location, e1.location):
                continue
            for _, m1 in e1.model.full_operators(dims):
                for _, m2 in e2.model.full_operators(dims):
                    n = la.max_abs(la.commutator(m1, m2))
                    if n > tol and n > worst[1]:
                        worst = ((e1.name, e2.name), n)
    return worst


def order_independence_audit(
    scenario: Scenario, sample_points: Sequence[Event], tol: float = 1e-10
) -> AuditReport:
    """Check that every sampled agent point gets an ordering-independent state.

    A failing point is reported with the unordered event pair whose
    measurement operators fail to commute by the largest margin.
    """
    entries = []
    for p in sample_points:
        visible = scenario.visible(p)
        if _unordered_count(visible) < 2:
            entries.append(AuditEntry(p, 0.0, True))
            continue
        trace = assign_state(scenario, p, OrderPolicy.BOTH_ORDERS)
        lex = assign_state(scenario, p, OrderPolicy.LEXICOGRAPHIC).state
        spread = max(trace.spread, trace.state.distance(lex))
        if spread <= tol:
            entries.append(AuditEntry(p, spread, True))
        else:
            pair, norm = _noncommuting_pair(scenario, visible, 1e-10)
            entries.append(AuditEntry(p, spread, False, pair, norm))
    return AuditReport(all(e.passed for e in entries), entries)
