"""Density operators, generalized measurements and the Born rule."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from . import linalg as la
from .errors import (
    CompatibilityError,
    CompletenessError,
    DimensionError,
    EffectError,
    HermiticityError,
    StateError,
    ZeroProbabilityOutcome,
)

STATE_TOL = 1e-10
ZERO_PROB = 1e-12
PROB_SLACK = 1e-12

PAR = "par"
PERP = "perp"


class DensityOperator:
    """Positive, unit-trace operator on a composite space.

    Parameters
    ----------
    matrix : array_like
        Square complex matrix.
    dims : sequence of int, optional
        Subsystem dimensions (defaults to a single system).
    tol : float
        Tolerance for the Hermiticity, trace and positivity checks.
    """

    __slots__ = ("_matrix", "_dims")

    def __init__(self, matrix, dims: Sequence[int] | None = None, tol: float = STATE_TOL):
        m = la.as_matrix(matrix)
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        dims = (m.shape[0],) if dims is None else tuple(int(d) for d in dims)
        if int(np.prod(dims)) != m.shape[0]:
            raise DimensionError(f"dims {dims} do not match matrix size {m.shape[0]}")
        if not la.is_hermitian(m, tol):
            raise StateError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > tol:
            raise StateError(f"density matrix has trace {tr.real:.12g}, expected 1")
        if np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))) < -tol:
            raise StateError("density matrix has a negative eigenvalue")
        m = m.copy()
        m.setflags(write=False)
        self._matrix = m
        self._dims = dims

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dims(self) -> tuple[int, ...]:
        return self._dims

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def __repr__(self):
        return f"DensityOperator(dims={self.dims})"

    @classmethod
    def from_ket(cls, psi, dims: Sequence[int] | None = None) -> "DensityOperator":
        psi = la.as_vector(psi)
        psi = psi / np.linalg.norm(psi)
        return cls(la.ket_to_dm(psi), dims)

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityOperator":
        n = int(np.prod(dims))
        return cls(np.eye(n, dtype=complex) / n, dims)

    def partial_trace(self, keep) -> "DensityOperator":
        if isinstance(keep, (int, np.integer)):
            keep = [int(keep)]
        keep = sorted(set(keep))
        red = la.partial_trace(self._matrix, self._dims, keep)
        return DensityOperator(red, [self._dims[k] for k in keep] or [1])

    def distance(self, other: "DensityOperator") -> float:
        return la.trace_norm_distance(self._matrix, other._matrix)


def product_state(*states: DensityOperator) -> DensityOperator:
    """Tensor product of density operators."""
    mat = la.tensor_product(*(s.matrix for s in states))
    dims = [d for s in states for d in s.dims]
    return DensityOperator(mat, dims)


def _normalize_target(target, n_sys: int | None = None):
    if target is None:
        return None
    if isinstance(target, (int, np.integer)):
        target = (int(target),)
    target = tuple(int(t) for t in target)
    if len(set(target)) != len(target):
        raise DimensionError(f"repeated subsystem in target {target}")
    if n_sys is not None and any(not 0 <= t < n_sys for t in target):
        raise DimensionError(f"target {target} out of range for {n_sys} subsystems")
    return target


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """Indexed measurement operators ``{M_i}`` with ``sum_i M_i^dag M_i = I``.

    ``target`` names the subsystem(s) the operators act on, or ``None`` for
    the full space. Operators are stored at target dimension and embedded
    with identities when applied to a particular state.
    """

    label: str
    operators: tuple[tuple[Hashable, np.ndarray], ...]
    target: tuple[int, ...] | None = None

    def __post_init__(self):
        ops = []
        seen = set()
        for oid, m in self.operators:
            if oid in seen:
                raise ValueError(f"duplicate outcome id {oid!r} in {self.label!r}")
            seen.add(oid)
            m = la.as_matrix(m).copy()
            m.setflags(write=False)
            ops.append((oid, m))
        if not ops:
            raise ValueError("a measurement model needs at least one operator")
        n = ops[0][1].shape
        if n[0] != n[1] or any(m.shape != n for _, m in ops):
            raise DimensionError("measurement operators must be square and equally sized")
        total = sum(m.conj().T @ m for _, m in ops)
        gap = la.max_abs(total - np.eye(n[0]))
        if gap > STATE_TOL:
            raise CompletenessError(
                f"{self.label!r}: sum of effects differs from identity by {gap:.3g}"
            )
        object.__setattr__(self, "operators", tuple(ops))
        object.__setattr__(self, "target", _normalize_target(self.target))

    @property
    def dim(self) -> int:
        return self.operators[0][1].shape[0]

    @property
    def outcomes(self) -> list[Hashable]:
        return [oid for oid, _ in self.operators]

    def operator(self, outcome) -> np.ndarray:
        for oid, m in self.operators:
            if oid == outcome:
                return m
        raise KeyError(f"{self.label!r} has no outcome {outcome!r}")

    def effects(self) -> list[tuple[Hashable, np.ndarray]]:
        return [(oid, m.conj().T @ m) for oid, m in self.operators]

    def full_operator(self, outcome, dims: Sequence[int]) -> np.ndarray:
        """``M_outcome`` embedded into a space with subsystem ``dims``."""
        return _lift(self.operator(outcome), self.target, dims)

    def full_operators(self, dims: Sequence[int]) -> list[tuple[Hashable, np.ndarray]]:
        return [(oid, _lift(m, self.target, dims)) for oid, m in self.operators]

    def with_target(self, target) -> "MeasurementModel":
        return MeasurementModel(self.label, self.operators, target)


def _lift(op: np.ndarray, target, dims: Sequence[int]) -> np.ndarray:
    n = int(np.prod(dims))
    if target is None:
        if op.shape != (n, n):
            raise DimensionError(f"operator of size {op.shape[0]} on a space of size {n}")
        return op
    _normalize_target(target, len(dims))
    return la.embed(op, dims, target)


@dataclass(frozen=True, eq=False)
class Observable:
    """Named Hermitian operator."""

    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = la.as_matrix(self.matrix)
        if not la.is_hermitian(m):
            raise HermiticityError(f"observable {self.name!r} is not Hermitian")
        object.__setattr__(self, "matrix", m)


def polarization_projectors(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto ``(cos t, sin t)`` and ``(-sin t, cos t)``."""
    c, s = np.cos(theta), np.sin(theta)
    par = np.array([c, s], dtype=complex)
    perp = np.array([-s, c], dtype=complex)
    return np.outer(par, par), np.outer(perp, perp)


def polarization_measurement(theta: float, target=None, label: str | None = None) -> MeasurementModel:
    """Ideal linear-polarization measurement along axis angle ``theta``."""
    p, q = polarization_projectors(theta)
    return MeasurementModel(label or f"pol({theta:.6g})", ((PAR, p), (PERP, q)), target)


def _check_effect(effect: np.ndarray, tol: float = STATE_TOL) -> None:
    if not la.is_hermitian(effect, tol):
        raise EffectError("effect is not Hermitian")
    w = np.linalg.eigvalsh(0.5 * (effect + effect.conj().T))
    if w[0] < -tol or w[-1] > 1 + tol:
        raise EffectError(f"effect eigenvalues outside [0, 1]: [{w[0]:.3g}, {w[-1]:.3g}]")


def born_probability(rho: DensityOperator, effect, target=None) -> float:
    """``Tr(E rho)`` for an effect ``0 <= E <= I``, clamped to ``[0, 1]``."""
    e = la.as_matrix(effect)
    _check_effect(e)
    e = _lift(e, _normalize_target(target), rho.dims)
    p = float(np.real(np.trace(e @ rho.matrix)))
    if p < -PROB_SLACK or p > 1 + PROB_SLACK:
        raise EffectError(f"Born probability {p} outside [0, 1]")
    return min(1.0, max(0.0, p))


def outcome_probability(rho: DensityOperator, model: MeasurementModel, outcome) -> float:
    """``Tr[M_i rho M_i^dag]``."""
    m = model.full_operator(outcome, rho.dims)
    p = float(np.real(np.trace(m @ rho.matrix @ m.conj().T)))
    return min(1.0, max(0.0, p))


def outcome_distribution(rho: DensityOperator, model: MeasurementModel) -> dict:
    return {oid: outcome_probability(rho, model, oid) for oid in model.outcomes}


def apply_operator(rho: DensityOperator, m: np.ndarray, eps: float = ZERO_PROB, outcome=None) -> DensityOperator:
    """``M rho M^dag / Tr[M rho M^dag]`` for a full-space operator ``M``."""
    unnorm = m @ rho.matrix @ m.conj().T
    p = float(np.real(np.trace(unnorm)))
    if p <= eps:
        raise ZeroProbabilityOutcome(
            f"outcome {outcome!r} has probability {p:.3g} <= {eps:g}; update undefined",
            outcome=outcome,
            probability=p,
        )
    out = unnorm / p
    out = 0.5 * (out + out.conj().T)
    return DensityOperator(out, rho.dims)


def update_state(
    rho: DensityOperator, model: MeasurementModel, outcome, eps: float = ZERO_PROB
) -> DensityOperator:
    """Post-measurement state for ``outcome`` of ``model``.

    Raises
    ------
    ZeroProbabilityOutcome
        If the outcome probability is at most ``eps``.
    """
    m = model.full_operator(outcome, rho.dims)
    return apply_operator(rho, m, eps, outcome)


def spectral_measurement(obs: Observable | np.ndarray, target=None, label: str | None = None) -> MeasurementModel:
    """Ideal projective measurement built from an observable's spectral projectors.

    Outcome ids are the (degeneracy-merged) eigenvalues.
    """
    if not isinstance(obs, Observable):
        obs = Observable(la.as_matrix(obs))
    values, projs = la.hermitian_eigensystem(obs.matrix)
    ops = tuple((float(v), p) for v, p in zip(values, projs))
    return MeasurementModel(label or obs.name or "spectral", ops, target)


class JointDistribution:
    """Outcome table ``P(i, j)`` for two compatible measurements.

    ``probs[k, l]`` is the probability of ``outcomes_a[k]`` together with
    ``outcomes_b[l]``.
    """

    def __init__(self, outcomes_a, outcomes_b, probs):
        self.outcomes_a = list(outcomes_a)
        self.outcomes_b = list(outcomes_b)
        self.probs = np.asarray(probs, dtype=float)
        if self.probs.shape != (len(self.outcomes_a), len(self.outcomes_b)):
            raise DimensionError("probability table shape does not match outcome lists")

    def __getitem__(self, key) -> float:
        i, j = key
        return float(self.probs[self.outcomes_a.index(i), self.outcomes_b.index(j)])

    def as_dict(self) -> dict:
        return {
            (i, j): float(self.probs[k, l])
            for k, i in enumerate(self.outcomes_a)
            for l, j in enumerate(self.outcomes_b)
        }

    def marginal_a(self) -> dict:
        return dict(zip(self.outcomes_a, self.probs.sum(axis=1).tolist()))

    def marginal_b(self) -> dict:
        return dict(zip(self.outcomes_b, self.probs.sum(axis=0).tolist()))


def _disjoint(ta, tb) -> bool:
    return ta is not None and tb is not None and not set(ta) & set(tb)


def joint_distribution(rho: DensityOperator, model_a: MeasurementModel, model_b: MeasurementModel) -> JointDistribution:
    """Generalized Born rule for measurements on disjoint subsystems.

    ``P(i, j) = Tr[(E_i^A ⊗ E_j^B) rho]`` with each effect embedded on its
    own target.
    """
    if not _disjoint(model_a.target, model_b.target):
        raise CompatibilityError(
            f"{model_a.label!r} and {model_b.label!r} do not act on disjoint subsystems"
        )
    ea = [(i, _lift(e, model_a.target, rho.dims)) for i, e in model_a.effects()]
    eb = [(j, _lift(e, model_b.target, rho.dims)) for j, e in model_b.effects()]
    probs = np.empty((len(ea), len(eb)))
    for k, (_, a) in enumerate(ea):
        for l, (_, b) in enumerate(eb):
            probs[k, l] = np.real(np.trace(a @ b @ rho.matrix))
    probs = np.clip(probs, 0.0, 1.0)
    return JointDistribution([i for i, _ in ea], [j for j, _ in eb], probs)


def conditional_probability(joint: JointDistribution, *, given_a=None, given_b=None, eps: float = ZERO_PROB) -> dict:
    """Distribution of one side given an outcome on the other.

    Pass exactly one of ``given_a`` / ``given_b``; returns the conditional
    table of the opposite side, ``P(x | y) = P(x, y) / P(y)``.
    """
    if (given_a is None) == (given_b is None):
        raise ValueError("pass exactly one of given_a, given_b")
    if given_b is not None:
        col = joint.probs[:, joint.outcomes_b.index(given_b)]
        labels, given = joint.outcomes_a, given_b
    else:
        col = joint.probs[joint.outcomes_a.index(given_a), :]
        labels, given = joint.outcomes_b, given_a
    p = float(col.sum())
    if p <= eps:
        raise ZeroProbabilityOutcome(
            f"conditioning outcome {given!r} has probability {p:.3g}", outcome=given, probability=p
        )
    return dict(zip(labels, (col / p).tolist()))


def sample_joint(joint: JointDistribution, rng: np.random.Generator, size: int = 1) -> list[tuple]:
    """Draw outcome pairs from a joint table."""
    flat = joint.probs.reshape(-1)
    flat = flat / flat.sum()
    idx = rng.choice(flat.size, size=size, p=flat)
    nb = len(joint.outcomes_b)
    return [(joint.outcomes_a[k // nb], joint.outcomes_b[k % nb]) for k in idx]

