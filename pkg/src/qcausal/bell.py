"""EPR-Bell correlations for photon polarization pairs.

Alice measures the left photon (subsystem 0) along axis angle ``a``; Bob
measures the right photon (subsystem 1) along ``b``. Outcomes are ``"par"``
(parallel to the axis) and ``"perp"``.

Quantum probabilities are evaluated without any hidden variable. Hidden
variables only exist inside :class:`LHVModel`, where the factorization
conditions are evaluated per hidden value.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from . import kernels
from . import linalg as la
from .errors import DimensionError, ZeroProbabilityOutcome
from .quantum import (
    PAR,
    PERP,
    ZERO_PROB,
    DensityOperator,
    JointDistribution,
    born_probability,
    joint_distribution,
    polarization_measurement,
    polarization_projectors,
)

OUTCOMES = (PAR, PERP)
TSIRELSON = 2.0 * math.sqrt(2.0)


def make_phi_plus() -> DensityOperator:
    """``(|HH> + |VV>) / sqrt(2)`` as a density operator on ``[2, 2]``."""
    # built entrywise so the nonzero entries are exactly 1/2
    m = np.zeros((4, 4), dtype=complex)
    m[np.ix_([0, 3], [0, 3])] = 0.5
    return DensityOperator(m, [2, 2])


def polarization_state(theta: float) -> DensityOperator:
    """Single photon linearly polarized along ``theta``."""
    return DensityOperator(polarization_projectors(theta)[0], [2])


def make_product(theta1: float, theta2: float) -> DensityOperator:
    """Product of two linear polarization states."""
    m = la.tensor_product(polarization_projectors(theta1)[0], polarization_projectors(theta2)[0])
    return DensityOperator(m, [2, 2])


def _check_two_qubit(state: DensityOperator) -> None:
    if tuple(state.dims) != (2, 2):
        raise DimensionError(f"expected a two-photon state with dims (2, 2), got {state.dims}")


@dataclass(frozen=True, eq=False)
class LHVModel:
    """Finite local hidden-variable model.

    ``response_a(a, lam)`` and ``response_b(b, lam)`` return the pair
    ``(P(par), P(perp))`` for the local setting and hidden value.
    """

    lambda_values: tuple
    weights: tuple[float, ...]
    response_a: Callable[[float, object], Sequence[float]]
    response_b: Callable[[float, object], Sequence[float]]

    def __post_init__(self):
        lv = tuple(self.lambda_values)
        w = tuple(float(x) for x in self.weights)
        if len(lv) != len(w) or not lv:
            raise ValueError("lambda_values and weights must be non-empty and equally long")
        if min(w) < 0 or abs(sum(w) - 1.0) > 1e-12:
            raise ValueError("weights must be non-negative and sum to 1")
        object.__setattr__(self, "lambda_values", lv)
        object.__setattr__(self, "weights", w)

    def _local(self, fn, setting, lam) -> np.ndarray:
        p = np.asarray(fn(setting, lam), dtype=float)
        if p.shape != (2,) or p.min() < -1e-12 or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"response {p} is not a distribution over (par, perp)")
        return p

    def alice(self, a: float, lam) -> np.ndarray:
        return self._local(self.response_a, a, lam)

    def bob(self, b: float, lam) -> np.ndarray:
        return self._local(self.response_b, b, lam)

    def joint_given(self, a: float, b: float, lam) -> JointDistribution:
        return JointDistribution(OUTCOMES, OUTCOMES, np.outer(self.alice(a, lam), self.bob(b, lam)))

    def joint(self, a: float, b: float) -> JointDistribution:
        probs = sum(w * np.outer(self.alice(a, lam), self.bob(b, lam))
                    for lam, w in zip(self.lambda_values, self.weights))
        return JointDistribution(OUTCOMES, OUTCOMES, probs)

    @classmethod
    def from_tables(cls, weights, alice_settings, alice_par, bob_settings, bob_par) -> "LHVModel":
        """Model defined at finitely many settings.

        ``alice_par[k][s]`` is ``P(par)`` for hidden value ``k`` at
        ``alice_settings[s]``; likewise for Bob.
        """
        alice_par = np.asarray(alice_par, dtype=float)
        bob_par = np.asarray(bob_par, dtype=float)
        a_idx = {float(s): i for i, s in enumerate(alice_settings)}
        b_idx = {float(s): i for i, s in enumerate(bob_settings)}

        def resp_a(a, lam):
            p = alice_par[lam, a_idx[float(a)]]
            return (p, 1.0 - p)

        def resp_b(b, lam):
            p = bob_par[lam, b_idx[float(b)]]
            return (p, 1.0 - p)

        return cls(tuple(range(len(weights))), tuple(weights), resp_a, resp_b)

    @classmethod
    def malus(cls, hidden_axes: Sequence[float], weights: Sequence[float] | None = None) -> "LHVModel":
        """Each hidden value is a shared polarization axis; both photons obey Malus's law."""
        axes = tuple(float(x) for x in hidden_axes)
        if weights is None:
            weights = [1.0 / len(axes)] * len(axes)

        def resp(setting, lam):
            c = math.cos(setting - lam) ** 2
            return (c, 1.0 - c)

        return cls(axes, tuple(weights), resp, resp)


@dataclass(frozen=True, eq=False)
class BellScenario:
    """Two-photon preparation with one setting per side.

    When ``hidden_model`` is given, probabilities come from it and
    ``state`` may be ``None``.
    """

    state: DensityOperator | None
    setting_a: float
    setting_b: float
    hidden_model: LHVModel | None = None

    def __post_init__(self):
        if self.state is None and self.hidden_model is None:
            raise ValueError("a scenario needs a state or a hidden-variable model")
        if self.state is not None:
            _check_two_qubit(self.state)

    def joint(self, a: float | None = None, b: float | None = None) -> JointDistribution:
        a = self.setting_a if a is None else a
        b = self.setting_b if b is None else b
        if self.hidden_model is not None:
            return self.hidden_model.joint(a, b)
        return quantum_joint(self.state, a, b)

    def joints_given_lambda(self) -> list[JointDistribution]:
        """Per-hidden-value tables; a single unconditioned table for quantum states."""
        if self.hidden_model is None:
            return [self.joint()]
        m = self.hidden_model
        return [m.joint_given(self.setting_a, self.setting_b, lam) for lam in m.lambda_values]


def quantum_joint(state: DensityOperator, a: float, b: float) -> JointDistribution:
    """Born-rule outcome table for polarizers at ``a`` (left) and ``b`` (right)."""
    _check_two_qubit(state)
    return joint_distribution(
        state,
        polarization_measurement(a, target=0, label="alice"),
        polarization_measurement(b, target=1, label="bob"),
    )


def _factorizability_gap(j: JointDistribution) -> float:
    pa = j.probs.sum(axis=1)
    pb = j.probs.sum(axis=0)
    return float(np.max(np.abs(j.probs - np.outer(pa, pb))))


def _outcome_independence_gap(j: JointDistribution, eps: float = ZERO_PROB) -> float:
    pa = j.probs.sum(axis=1)
    pb = j.probs.sum(axis=0)
    for side, marg, outs in (("Bob", pb, j.outcomes_b), ("Alice", pa, j.outcomes_a)):
        for p, o in zip(marg, outs):
            if p <= eps:
                raise ZeroProbabilityOutcome(
                    f"{side}'s outcome {o!r} has probability {p:.3g}; conditional undefined",
                    outcome=o, probability=float(p),
                )
    a_given_b = j.probs / pb[None, :]
    b_given_a = j.probs / pa[:, None]
    return float(max(np.max(np.abs(a_given_b - pa[:, None])),
                     np.max(np.abs(b_given_a - pb[None, :]))))


def check_factorizability(s: BellScenario, tol: float = 1e-12) -> tuple[bool, float]:
    """``max |P(A,B) - P(A) P(B)|`` (per hidden value for LHV models)."""
    gap = max(_factorizability_gap(j) for j in s.joints_given_lambda())
    return gap <= tol, gap


def check_outcome_independence(s: BellScenario, tol: float = 1e-12) -> tuple[bool, float]:
    """``max |P(A|B) - P(A)|`` together with the symmetric ``B|A`` term.

    Raises
    ------
    ZeroProbabilityOutcome
        If a conditioning outcome has probability below 1e-12.
    """
    gap = max(_outcome_independence_gap(j) for j in s.joints_given_lambda())
    return gap <= tol, gap


def check_parameter_independence(
    s: BellScenario, settings_grid: Iterable[float], tol: float = 1e-12
) -> tuple[bool, float]:
    """Largest change of one side's marginal as the distant setting ranges over the grid."""
    grid = [float(x) for x in settings_grid]
    gap = 0.0
    if s.hidden_model is None:
        tables = {"a": [s.joint(b=b) for b in grid], "b": [s.joint(a=a) for a in grid]}
        groups = [tables]
    else:
        m = s.hidden_model
        groups = [
            {"a": [m.joint_given(s.setting_a, b, lam) for b in grid],
             "b": [m.joint_given(a, s.setting_b, lam) for a in grid]}
            for lam in m.lambda_values
        ]
    for tables in groups:
        alice = np.array([j.probs.sum(axis=1) for j in tables["a"]])
        bob = np.array([j.probs.sum(axis=0) for j in tables["b"]])
        gap = max(gap, float(np.ptp(alice, axis=0).max()), float(np.ptp(bob, axis=0).max()))
    return gap <= tol, gap


def correlator(source, a: float, b: float) -> float:
    """``E(a, b) = P(same) - P(different)`` from Born tables or an LHV model."""
    if isinstance(source, LHVModel):
        p = source.joint(a, b).probs
    else:
        p = quantum_joint(source, a, b).probs
    return float(p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0])


class ChshValue(NamedTuple):
    signed: float
    magnitude: float


def chsh_value(source, a: float, a2: float, b: float, b2: float) -> ChshValue:
    """``S = E(a,b) - E(a,b2) + E(a2,b) + E(a2,b2)``, evaluated through full outcome tables."""
    s = (correlator(source, a, b) - correlator(source, a, b2)
         + correlator(source, a2, b) + correlator(source, a2, b2))
    return ChshValue(s, abs(s))


def correlation_block(state: DensityOperator) -> np.ndarray:
    """``[[<ZZ>, <ZX>], [<XZ>, <XX>]]``.

    A polarizer at axis ``t`` has dichotomic observable
    ``cos 2t Z + sin 2t X``, so ``E(a, b) = c(a)^T T c(b)`` with
    ``c(t) = (cos 2t, sin 2t)``.
    """
    _check_two_qubit(state)
    axes = (la.SIGMA_Z, la.SIGMA_X)
    T = np.empty((2, 2))
    for i, p in enumerate(axes):
        for j, q in enumerate(axes):
            T[i, j] = np.real(np.trace(np.kron(p, q) @ state.matrix))
    return T


def correlator_table(state: DensityOperator, a_angles, b_angles) -> np.ndarray:
    """Closed-form ``E[i, j]`` over two angle grids."""
    T = correlation_block(state)
    a = np.asarray(a_angles, dtype=float)
    b = np.asarray(b_angles, dtype=float)
    ca = np.stack([np.cos(2 * a), np.sin(2 * a)], axis=1)
    cb = np.stack([np.cos(2 * b), np.sin(2 * b)], axis=1)
    return np.ascontiguousarray(ca @ T @ cb.T)


class LhvBound(NamedTuple):
    max_abs: float
    values: dict
    maximizers: list


def lhv_chsh_bound() -> LhvBound:
    """Enumerate all 16 deterministic local strategies.

    A strategy is ``(A(a), A(a2), B(b), B(b2))`` with entries in ``{+1, -1}``.
    Every LHV model is a mixture of these, so the maximum ``|S|`` bounds
    them all.
    """
    values = {}
    for st in itertools.product((1, -1), repeat=4):
        a0, a1, b0, b1 = st
        values[st] = a0 * b0 - a0 * b1 + a1 * b0 + a1 * b1
    best = max(abs(v) for v in values.values())
    return LhvBound(float(best), values, [st for st, v in values.items() if abs(v) == best])


def deterministic_lhv(strategy: Sequence[int], settings: Sequence[float]) -> LHVModel:
    """Single-hidden-value model realizing a deterministic strategy.

    ``settings`` is ``(a, a2, b, b2)``; ``+1`` maps to ``par``.
    """
    a0, a1, b0, b1 = (1.0 if s > 0 else 0.0 for s in strategy)
    a, a2, b, b2 = settings
    return LHVModel.from_tables([1.0], [a, a2], [[a0, a1]], [b, b2], [[b0, b1]])


def random_lhv(rng: np.random.Generator, settings: Sequence[float], n_lambda: int = 6) -> LHVModel:
    """Random mixture of stochastic local responses at the four settings."""
    w = rng.dirichlet(np.ones(n_lambda))
    a, a2, b, b2 = settings
    # deterministic vertices mixed with interior points
    alice = rng.uniform(size=(n_lambda, 2))
    bob = rng.uniform(size=(n_lambda, 2))
    det = rng.uniform(size=n_lambda) < 0.5
    alice[det] = np.round(alice[det])
    bob[det] = np.round(bob[det])
    return LHVModel.from_tables(w / w.sum(), [a, a2], alice, [b, b2], bob)


@dataclass
class ChshOptimum:
    value: float
    signed: float
    angles: tuple[float, float, float, float]
    grid_value: float
    grid_angles: tuple[float, float, float, float]


def optimize_chsh(state: DensityOperator, grid: int = 64, refine: bool = True) -> ChshOptimum:
    """Maximize ``|S|`` over polarizer angles.

    Exhaustive search on a ``grid^4`` lattice of angles in ``[0, pi)``,
    followed by a Nelder-Mead polish of the best lattice point.
    """
    angles = np.arange(grid) * (math.pi / grid)
    E = correlator_table(state, angles, angles)
    best, i, i2, j, j2 = kernels.chsh_grid_max(E)
    start = (float(angles[i]), float(angles[i2]), float(angles[j]), float(angles[j2]))
    T = correlation_block(state)

    def neg_abs_s(x):
        return -abs(float(kernels.chsh_batch(T, np.ascontiguousarray(x.reshape(1, 4)))[0]))

    x = np.array(start)
    if refine:
        res = minimize(neg_abs_s, x, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
        if -res.fun > best:
            x = res.x
    signed = float(kernels.chsh_batch(T, np.ascontiguousarray(x.reshape(1, 4)))[0])
    return ChshOptimum(abs(signed), signed, tuple(float(v) for v in x), float(best), start)


def random_chsh_scan(state: DensityOperator, n: int, rng: np.random.Generator) -> np.ndarray:
    """Signed ``S`` at ``n`` uniformly random angle quadruples."""
    T = correlation_block(state)
    angles = np.ascontiguousarray(rng.uniform(0.0, math.pi, size=(n, 4)))
    return kernels.chsh_batch(T, angles)


def default_alice_marginal(state: DensityOperator, a: float, b: float) -> np.ndarray:
    return quantum_joint(state, a, b).probs.sum(axis=1)


def default_bob_marginal(state: DensityOperator, a: float, b: float) -> np.ndarray:
    return quantum_joint(state, a, b).probs.sum(axis=0)


@dataclass
class NoSignallingReport:
    passed: bool
    max_gap: float
    alice_gap: float
    bob_gap: float
    worst: tuple = field(default_factory=tuple)


def verify_no_signalling(
    state: DensityOperator,
    a_grid: Iterable[float],
    b_grid: Iterable[float],
    tol: float = 1e-12,
    alice_marginal: Callable = default_alice_marginal,
    bob_marginal: Callable = default_bob_marginal,
) -> NoSignallingReport:
    """Each side's outcome distribution must not depend on the distant setting.

    For every local setting the marginal is compared across the whole distant
    grid and against the no-measurement reference obtained from the reduced
    state. The marginal rules are injectable so a harness can substitute a
    deliberately broken one.
    """
    _check_two_qubit(state)
    a_grid = [float(x) for x in a_grid]
    b_grid = [float(x) for x in b_grid]
    left, right = state.partial_trace(0), state.partial_trace(1)
    worst: tuple = ()
    gaps = {"alice": 0.0, "bob": 0.0}

    def reference(reduced, theta):
        p, q = polarization_projectors(theta)
        return np.array([born_probability(reduced, p), born_probability(reduced, q)])

    for a in a_grid:
        ref = reference(left, a)
        for b in b_grid:
            g = float(np.max(np.abs(np.asarray(alice_marginal(state, a, b)) - ref)))
            if g > gaps["alice"]:
                gaps["alice"] = g
                worst = ("alice", a, b)
    for b in b_grid:
        ref = reference(right, b)
        for a in a_grid:
            g = float(np.max(np.abs(np.asarray(bob_marginal(state, a, b)) - ref)))
            if g > gaps["bob"]:
                gaps["bob"] = g
                if g > gaps["alice"]:
                    worst = ("bob", a, b)
    gap = max(gaps.values())
    return NoSignallingReport(gap <= tol, gap, gaps["alice"], gaps["bob"], worst)


CSV_COLUMNS = (
    "a", "b", "P_par_par", "P_par_perp", "P_perp_par", "P_perp_perp",
    "P_A", "P_B", "cond", "fact_gap", "oi_gap", "pi_gap",
)


@dataclass
class CorrelationRow:
    a: float
    b: float
    joint: np.ndarray
    p_a: float
    p_b: float
    cond: float
    fact_gap: float
    oi_gap: float
    pi_gap: float

    def values(self) -> list[float]:
        return [self.a, self.b, *self.joint.reshape(-1).tolist(), self.p_a, self.p_b,
                self.cond, self.fact_gap, self.oi_gap, self.pi_gap]


@dataclass
class CorrelationReport:
    rows: list[CorrelationRow]

    @property
    def max_pi_gap(self) -> float:
        return max((r.pi_gap for r in self.rows), default=0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([fmt17(v) for v in r.values()])
        return buf.getvalue()


def fmt17(x: float) -> str:
    """Round-trip-safe decimal rendering."""
    return format(float(x), ".17g")


def correlation_report(state: DensityOperator, a_grid: Iterable[float], b_grid: Iterable[float]) -> CorrelationReport:
    """Joint, marginal and conditional tables with per-row gaps.

    ``cond`` is ``P(Alice par | Bob par)``. ``pi_gap`` compares each side's
    marginal against the one obtained when the other side does not measure.
    Undefined conditionals are reported as NaN.
    """
    _check_two_qubit(state)
    left, right = state.partial_trace(0), state.partial_trace(1)
    rows = []
    for a in a_grid:
        for b in b_grid:
            j = quantum_joint(state, a, b)
            pa, pb = j.probs.sum(axis=1), j.probs.sum(axis=0)
            cond = float(j.probs[0, 0] / pb[0]) if pb[0] > ZERO_PROB else float("nan")
            try:
                oi = _outcome_independence_gap(j)
            except ZeroProbabilityOutcome:
                oi = float("nan")
            ref_a = born_probability(left, polarization_projectors(a)[0])
            ref_b = born_probability(right, polarization_projectors(b)[0])
            pi = max(abs(pa[0] - ref_a), abs(pb[0] - ref_b))
            rows.append(CorrelationRow(float(a), float(b), j.probs.copy(), float(pa[0]), float(pb[0]),
                                       cond, _factorizability_gap(j), oi, float(pi)))
    return CorrelationReport(rows)
