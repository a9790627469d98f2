"""Conditioning versus intervention on the Bell-experiment variables.

Variables:

``Lambda``
    preparation (which state was prepared, or the hidden value of an LHV model)
``a``, ``b``
    Alice's and Bob's polarizer settings
``X``
    Bob's outcome, 0 for ``par`` and 1 for ``perp``
``Y``
    Alice's outcome, coded the same way

``Lambda``, ``a`` and ``b`` are exogenous. The outcomes hang off a single
joint kernel ``P(X, Y | Lambda, a, b)``. There is no edge between ``X`` and
``Y``, so ``do(X = x)`` replaces ``X``'s share of the kernel by a point mass
and leaves ``Y`` with its marginal kernel ``P(Y | Lambda, a, b)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .bell import LHVModel, quantum_joint
from .errors import ZeroProbabilityOutcome
from .quantum import ZERO_PROB, DensityOperator

VARIABLES = ("Lambda", "a", "b", "X", "Y")
EXOGENOUS = ("Lambda", "a", "b")
OUTCOME_VARS = ("X", "Y")


class Distribution:
    """Discrete joint distribution over named variables."""

    def __init__(self, names: Sequence[str], domains: Mapping[str, Sequence], probs):
        self.names = tuple(names)
        self.domains = {n: list(domains[n]) for n in self.names}
        self.p = np.asarray(probs, dtype=float)
        if self.p.shape != tuple(len(self.domains[n]) for n in self.names):
            raise ValueError("probability array does not match variable domains")
        if self.p.size and self.p.min() < 0:
            raise ValueError("negative probability")

    def _axis(self, var: str) -> int:
        try:
            return self.names.index(var)
        except ValueError:
            raise KeyError(f"no variable {var!r} in {self.names}") from None

    def _index(self, var: str, value) -> int:
        dom = self.domains[var]
        for k, v in enumerate(dom):
            if v == value:
                return k
        raise KeyError(f"{value!r} is not in the domain of {var!r}: {dom}")

    def total(self) -> float:
        return float(self.p.sum())

    def marginal(self, *vars: str) -> "Distribution":
        keep = [self._axis(v) for v in vars]
        drop = tuple(i for i in range(len(self.names)) if i not in keep)
        p = self.p.sum(axis=drop) if drop else self.p
        # sum keeps remaining axes in original order; reorder to `vars`
        remaining = [self.names[i] for i in range(len(self.names)) if i in keep]
        p = np.transpose(p, [remaining.index(v) for v in vars])
        return Distribution(vars, self.domains, p)

    def table(self, var: str) -> dict:
        m = self.marginal(var)
        return dict(zip(self.domains[var], m.p.tolist()))

    def prob(self, **assignment) -> float:
        d = self.marginal(*assignment) if assignment else self
        idx = tuple(self._index(v, val) for v, val in assignment.items())
        return float(d.p[idx]) if assignment else d.total()

    def given(self, var: str, value, eps: float = ZERO_PROB) -> "Distribution":
        """Bayesian conditioning; the conditioned variable is dropped."""
        ax = self._axis(var)
        sl = np.take(self.p, self._index(var, value), axis=ax)
        z = float(sl.sum())
        if z <= eps:
            raise ZeroProbabilityOutcome(
                f"P({var} = {value!r}) = {z:.3g}; conditioning undefined",
                outcome=value, probability=z,
            )
        names = [n for n in self.names if n != var]
        return Distribution(names, self.domains, sl / z)


@dataclass(frozen=True)
class InterventionSpec:
    target: str
    value: Hashable

    def __post_init__(self):
        if self.target not in VARIABLES:
            raise ValueError(f"unknown variable {self.target!r}")


@dataclass(frozen=True, eq=False)
class CausalModel:
    """Exogenous priors plus the joint outcome kernel.

    ``kernel[l, i, j, x, y] = P(X = x, Y = y | Lambda_l, a_i, b_j)``.
    """

    lambda_values: tuple
    lambda_prior: np.ndarray
    a_values: tuple
    a_prior: np.ndarray
    b_values: tuple
    b_prior: np.ndarray
    kernel: np.ndarray
    factorized: bool = False

    def __post_init__(self):
        for name in ("lambda_prior", "a_prior", "b_prior"):
            pr = np.asarray(getattr(self, name), dtype=float)
            if pr.min() < 0 or abs(pr.sum() - 1) > 1e-12:
                raise ValueError(f"{name} is not a probability vector")
            object.__setattr__(self, name, pr)
        k = np.asarray(self.kernel, dtype=float)
        shape = (len(self.lambda_values), len(self.a_values), len(self.b_values), 2, 2)
        if k.shape != shape:
            raise ValueError(f"kernel shape {k.shape}, expected {shape}")
        if np.max(np.abs(k.sum(axis=(3, 4)) - 1.0)) > 1e-10:
            raise ValueError("kernel rows are not normalized")
        object.__setattr__(self, "kernel", k)

    @property
    def domains(self) -> dict:
        return {"Lambda": list(self.lambda_values), "a": list(self.a_values),
                "b": list(self.b_values), "X": [0, 1], "Y": [0, 1]}

    def _priors(self):
        return self.lambda_prior, self.a_prior, self.b_prior

    def joint(self) -> Distribution:
        pl, pa, pb = self._priors()
        p = pl[:, None, None, None, None] * pa[None, :, None, None, None] \
            * pb[None, None, :, None, None] * self.kernel
        return Distribution(VARIABLES, self.domains, p)


def _as_list(v) -> list:
    if isinstance(v, (int, float, np.floating, np.integer)):
        return [float(v)]
    return [float(x) for x in v]


def _uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def build_model(
    preparations: DensityOperator | Mapping[str, DensityOperator],
    a,
    b,
    prior: Mapping[str, float] | None = None,
) -> CausalModel:
    """Causal model of the polarization experiment from quantum states.

    ``preparations`` is one state or a mapping from preparation label to
    state; ``a`` and ``b`` are a single setting or lists of settings (uniform
    priors).
    """
    if isinstance(preparations, DensityOperator):
        preparations = {"state": preparations}
    labels = list(preparations)
    av, bv = _as_list(a), _as_list(b)
    K = np.empty((len(labels), len(av), len(bv), 2, 2))
    for l, lab in enumerate(labels):
        for i, ai in enumerate(av):
            for j, bj in enumerate(bv):
                # quantum_joint rows are Alice (Y), columns Bob (X)
                K[l, i, j] = quantum_joint(preparations[lab], ai, bj).probs.T
    pl = np.array([prior[k] for k in labels], dtype=float) if prior else _uniform(len(labels))
    return CausalModel(tuple(labels), pl, tuple(av), _uniform(len(av)), tuple(bv), _uniform(len(bv)), K)


def build_lhv_model(model: LHVModel, a, b) -> CausalModel:
    """Causal model whose ``Lambda`` is the hidden variable of ``model``."""
    av, bv = _as_list(a), _as_list(b)
    lv = model.lambda_values
    K = np.empty((len(lv), len(av), len(bv), 2, 2))
    for l, lam in enumerate(lv):
        for i, ai in enumerate(av):
            for j, bj in enumerate(bv):
                K[l, i, j] = np.outer(model.bob(bj, lam), model.alice(ai, lam))
    return CausalModel(tuple(lv), np.array(model.weights), tuple(av), _uniform(len(av)),
                       tuple(bv), _uniform(len(bv)), K, factorized=True)


def condition(model: CausalModel | Distribution, var: str, value, eps: float = ZERO_PROB) -> Distribution:
    """Distribution of the remaining variables given ``var = value``."""
    dist = model.joint() if isinstance(model, CausalModel) else model
    return dist.given(var, value, eps)


def intervene(model: CausalModel, spec: InterventionSpec) -> Distribution:
    """Truncated factorization for ``do(target = value)``.

    The forced variable is dropped from the result. Forcing an outcome
    marginalizes it out of the joint kernel; forcing an exogenous variable
    replaces its prior by a point mass.
    """
    dom = model.domains
    var = spec.target
    names = [n for n in VARIABLES if n != var]
    idx = Distribution(VARIABLES, dom, np.zeros([len(dom[n]) for n in VARIABLES]))._index(var, spec.value)
    pl, pa, pb = model._priors()
    K = model.kernel
    if var in EXOGENOUS:
        priors = {"Lambda": pl, "a": pa, "b": pb}
        priors[var] = np.eye(len(dom[var]))[idx]
        p = priors["Lambda"][:, None, None, None, None] * priors["a"][None, :, None, None, None] \
            * priors["b"][None, None, :, None, None] * K
        p = np.take(p, idx, axis=VARIABLES.index(var))
    else:
        other = K.sum(axis=3 if var == "X" else 4)
        p = pl[:, None, None, None] * pa[None, :, None, None] * pb[None, None, :, None] * other
    return Distribution(names, dom, p)


@dataclass
class StabilityRow:
    cause: str
    effect: str
    context: tuple
    value: int
    conditional: tuple[float, float]
    interventional: tuple[float, float]

    @property
    def gap(self) -> float:
        return max(abs(c - d) for c, d in zip(self.conditional, self.interventional))


@dataclass
class StabilityReport:
    """``P(effect | cause = c)`` against ``P(effect | do(cause = c))``.

    Both are taken within each exogenous context ``(Lambda, a, b)`` of
    positive probability. Interventions on outcomes are labelled conceptual:
    the comparison is meaningful only as a counterfactual test.
    """

    rows: list[StabilityRow]
    stable: dict[tuple[str, str], bool]
    tol: float
    label: str = "conceptual"
    max_gap: dict[tuple[str, str], float] = field(default_factory=dict)

    def verdict(self, cause: str, effect: str) -> str:
        return "causal-stable" if self.stable[(cause, effect)] else "not causal-stable"


def _contexts(model: CausalModel):
    for l, lam in enumerate(model.lambda_values):
        for i, a in enumerate(model.a_values):
            for j, b in enumerate(model.b_values):
                if model.lambda_prior[l] * model.a_prior[i] * model.b_prior[j] > 0:
                    yield (l, i, j), (lam, a, b)


def stability_report(model: CausalModel, pair: tuple[str, str] = ("X", "Y"),
                     tol: float = 1e-12) -> StabilityReport:
    """Compare conditioning with intervention in both directions of ``pair``."""
    rows: list[StabilityRow] = []
    stable, gaps = {}, {}
    for cause, effect in (pair, pair[::-1]):
        do_dists = {c: intervene(model, InterventionSpec(cause, c)) for c in (0, 1)}
        joint = model.joint()
        worst = 0.0
        for (l, i, j), ctx in _contexts(model):
            local = joint.given("Lambda", ctx[0]).given("a", ctx[1]).given("b", ctx[2])
            for c in (0, 1):
                if local.prob(**{cause: c}) <= ZERO_PROB:
                    continue
                cond = local.given(cause, c).table(effect)
                d = do_dists[c].given("Lambda", ctx[0]).given("a", ctx[1]).given("b", ctx[2]).table(effect)
                row = StabilityRow(cause, effect, ctx, c, (cond[0], cond[1]), (d[0], d[1]))
                worst = max(worst, row.gap)
                rows.append(row)
        stable[(cause, effect)] = worst <= tol
        gaps[(cause, effect)] = worst
    return StabilityReport(rows, stable, tol, max_gap=gaps)


@dataclass
class CommonCauseResult:
    is_common_cause: bool
    joint_delta: float
    correlation_delta: float
    marginal_delta_x: float
    marginal_delta_y: float


def _correlation(d: Distribution) -> float:
    p = d.marginal("X", "Y").p
    return float(p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0])


def common_cause_test(model: CausalModel, first, second, tol: float = 1e-12) -> CommonCauseResult:
    """Compare outcome statistics under ``do(Lambda = first)`` and ``do(Lambda = second)``.

    Settings stay at their priors. ``Lambda`` is flagged a common cause of
    the outcomes when the joint outcome table changes.
    """
    d1 = intervene(model, InterventionSpec("Lambda", first))
    d2 = intervene(model, InterventionSpec("Lambda", second))
    j1, j2 = d1.marginal("X", "Y").p, d2.marginal("X", "Y").p
    jd = float(np.max(np.abs(j1 - j2)))
    return CommonCauseResult(
        jd > tol, jd, abs(_correlation(d1) - _correlation(d2)),
        float(np.max(np.abs(j1.sum(axis=1) - j2.sum(axis=1)))),
        float(np.max(np.abs(j1.sum(axis=0) - j2.sum(axis=0)))),
    )


def setting_sweep(model: CausalModel, setting: str = "b") -> dict:
    """Distant outcome marginal under ``do(setting = s)`` for each value.

    For ``setting="b"`` this is Alice's ``P(Y)``; for ``"a"`` Bob's ``P(X)``.
    """
    out_var = "Y" if setting == "b" else "X"
    return {
        s: tuple(intervene(model, InterventionSpec(setting, s)).table(out_var).values())
        for s in model.domains[setting]
    }


def cross_setting_gap(model: CausalModel) -> float:
    """Largest dependence of an outcome on the distant setting, per context.

    Zero means the kernel has no ``a -> X`` or ``b -> Y`` edge.
    """
    K = model.kernel
    py = K.sum(axis=3)  # [l, i, j, y]
    px = K.sum(axis=4)  # [l, i, j, x]
    return float(max(np.ptp(py, axis=2).max(), np.ptp(px, axis=1).max()))
