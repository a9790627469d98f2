"""Random states, measurement models and scenarios for property checks."""

from __future__ import annotations

import numpy as np

from .agents import MeasurementEvent, Scenario
from .quantum import DensityOperator, MeasurementModel, outcome_probability, update_state
from .spacetime import Event, Region, region_precedes


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density(rng: np.random.Generator, dims, rank: int | None = None) -> DensityOperator:
    """Random mixed state ``G G^dag / Tr`` with a Ginibre factor of given rank."""
    n = int(np.prod(dims))
    k = rank or n
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    rho = g @ g.conj().T
    return DensityOperator(rho / np.trace(rho).real, dims)


def random_pure(rng: np.random.Generator, dims) -> DensityOperator:
    n = int(np.prod(dims))
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return DensityOperator.from_ket(psi, dims)


def random_kraus_model(rng: np.random.Generator, d: int, n_outcomes: int, target=None,
                       label: str = "povm") -> MeasurementModel:
    """Random generalized measurement from a random isometry ``C^d -> C^(d k)``.

    The ``k`` blocks of the isometry are the measurement operators, so
    ``sum_i M_i^dag M_i = V^dag V = I``. They are generally not Hermitian.
    """
    u = random_unitary(rng, d * n_outcomes)
    v = u[:, :d]
    ops = tuple((i, v[i * d:(i + 1) * d, :]) for i in range(n_outcomes))
    return MeasurementModel(label, ops, target)


def random_projective_model(rng: np.random.Generator, d: int, target=None,
                            label: str = "proj") -> MeasurementModel:
    u = random_unitary(rng, d)
    ops = tuple((i, np.outer(u[:, i], u[:, i].conj())) for i in range(d))
    return MeasurementModel(label, ops, target)


def sample_outcome(rng: np.random.Generator, rho: DensityOperator, model: MeasurementModel):
    probs = np.array([outcome_probability(rho, model, o) for o in model.outcomes])
    probs = probs / probs.sum()
    return model.outcomes[int(rng.choice(len(probs), p=probs))]


def random_commuting_scenario(
    rng: np.random.Generator,
    n_qubits: int | None = None,
    n_events: int | None = None,
    spatial_dims: int = 1,
) -> Scenario:
    """Random scenario whose measurements act on pairwise disjoint qubits.

    Events are scattered over a spacetime patch after a preparation box at
    the origin, so some pairs are spacelike and some causally ordered.
    Outcomes are drawn by the Born rule along one causal ordering, which
    guarantees each has positive probability.
    """
    n_qubits = n_qubits or int(rng.integers(2, 4))
    n_events = n_events or int(rng.integers(2, n_qubits + 1))
    n_events = min(n_events, n_qubits)
    dims = [2] * n_qubits
    rho = random_density(rng, dims, rank=int(rng.integers(1, 3)))
    qubits = rng.permutation(n_qubits)[:n_events]
    prep = Region(Event(0.0, (0.0,) * spatial_dims), (0.5,) + (0.5,) * spatial_dims)
    locations = []
    for _ in range(n_events):
        t = float(rng.uniform(2.0, 6.0))
        # inside the preparation's forward cone: |x| <= t
        reach = min(4.0, t) / np.sqrt(spatial_dims)
        x = tuple(float(v) for v in rng.uniform(-reach, reach, size=spatial_dims))
        locations.append(Event(t, x))
    order = sorted(range(n_events), key=lambda k: locations[k].t)
    events: list[MeasurementEvent | None] = [None] * n_events
    state = rho
    for k in order:
        kind = rng.integers(3)
        q = int(qubits[k])
        if kind == 0:
            model = random_projective_model(rng, 2, target=q, label=f"P{k}")
        else:
            model = random_kraus_model(rng, 2, int(rng.integers(2, 4)), target=q, label=f"K{k}")
        outcome = sample_outcome(rng, state, model)
        state = update_state(state, model, outcome)
        events[k] = MeasurementEvent(locations[k], model, outcome, label=f"E{k}")
    return Scenario(rho, tuple(events), prep)


def random_agent_points(rng: np.random.Generator, n: int, spatial_dims: int = 1,
                        t_range=(1.0, 12.0), x_range=(-6.0, 6.0),
                        after: Region | None = None) -> list[Event]:
    """Uniform points in a box, rejecting any outside the causal future of ``after``."""
    pts = []
    while len(pts) < n:
        t = float(rng.uniform(*t_range))
        x = tuple(float(v) for v in rng.uniform(*x_range, size=spatial_dims))
        e = Event(t, x)
        if after is None or region_precedes(after, e):
            pts.append(e)
    return pts
