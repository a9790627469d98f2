"""Commutation checks for measurement operators and a toy lattice net.

The lattice net places one finite-dimensional system at each site. The
algebra of a spacetime region is the full matrix algebra of the sites whose
static world-lines pass through the region.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from . import linalg as la
from .agents import Scenario
from .errors import DimensionError, PreconditionError
from .quantum import DensityOperator
from .spacetime import Event, Region, regions_spacelike_separated, spacelike

COMMUTATOR_TOL = 1e-10
MAX_NET_DIM = 64


@dataclass
class Violation:
    events: tuple[str, str]
    outcomes: tuple
    commutator_norm: float
    anticommuting: bool


@dataclass
class StrongMicrocausalityResult:
    holds: bool
    violations: list[Violation]

    @property
    def anticommuting_pairs(self) -> set[tuple[str, str]]:
        """Violating event pairs whose operators all pairwise anticommute."""
        by_pair: dict[tuple[str, str], bool] = {}
        for v in self.violations:
            by_pair[v.events] = by_pair.get(v.events, True) and v.anticommuting
        return {k for k, ok in by_pair.items() if ok}

    @property
    def excused_by_anticommutation(self) -> bool:
        return bool(self.violations) and {v.events for v in self.violations} == self.anticommuting_pairs


def check_strong_microcausality(scenario: Scenario, tol: float = COMMUTATOR_TOL) -> StrongMicrocausalityResult:
    """All measurement operators of spacelike separated events must commute.

    Every cross pair of (embedded) operators is checked, not only the
    recorded outcomes. Each violation also records whether the pair
    anticommutes instead.
    """
    dims = scenario.dims
    violations = []
    evs = scenario.events
    for i, e1 in enumerate(evs):
        for e2 in evs[i + 1:]:
            if not spacelike(e1.location, e2.location):
                continue
            for o1, m1 in e1.model.full_operators(dims):
                for o2, m2 in e2.model.full_operators(dims):
                    n = la.max_abs(la.commutator(m1, m2))
                    if n > tol:
                        anti = la.max_abs(la.anticommutator(m1, m2)) <= tol
                        violations.append(Violation((e1.name, e2.name), (o1, o2), n, anti))
    return StrongMicrocausalityResult(not violations, violations)


@dataclass(frozen=True)
class LocalizedOperatorSet:
    region: Region
    operators: tuple[np.ndarray, ...]
    site_support: frozenset[int]

    def __post_init__(self):
        ops = tuple(la.as_matrix(m) for m in self.operators)
        if ops and any(m.shape != ops[0].shape or m.shape[0] != m.shape[1] for m in ops):
            raise DimensionError("localized operators must be square and equally sized")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "site_support", frozenset(self.site_support))


class LatticeNet:
    """Net of local algebras over a finite set of static sites.

    Parameters
    ----------
    sites : sequence of Event or float
        Spatial site positions (the time coordinate of an Event is ignored).
    site_dim : int
        Local Hilbert-space dimension.
    support_overrides : mapping Region -> iterable of int, optional
        Explicit site supports replacing the geometric rule. Used to build
        deliberately mislabeled nets.
    """

    def __init__(self, sites: Sequence, site_dim: int = 2,
                 support_overrides: Mapping[Region, Sequence[int]] | None = None):
        pos = []
        for s in sites:
            pos.append(s.x if isinstance(s, Event) else Event(0.0, s).x)
        if len({len(p) for p in pos}) > 1:
            raise DimensionError("sites have inconsistent spatial dimension")
        self.positions: list[tuple[float, ...]] = pos
        self.site_dim = int(site_dim)
        if self.dim > MAX_NET_DIM:
            raise DimensionError(f"net dimension {self.dim} exceeds {MAX_NET_DIM}")
        self._overrides = {r: frozenset(v) for r, v in (support_overrides or {}).items()}

    @property
    def n_sites(self) -> int:
        return len(self.positions)

    @property
    def dims(self) -> list[int]:
        return [self.site_dim] * self.n_sites

    @property
    def dim(self) -> int:
        return self.site_dim ** self.n_sites

    def site_support(self, region: Region) -> frozenset[int]:
        if region in self._overrides:
            return self._overrides[region]
        t = region.center.t
        return frozenset(
            i for i, x in enumerate(self.positions) if region.contains(Event(t, x))
        )

    def generators(self, region: Region) -> list[tuple[int, tuple[int, int], np.ndarray]]:
        """Matrix units ``|k><l|`` on each supported site, embedded in the full space."""
        d = self.site_dim
        out = []
        for s in sorted(self.site_support(region)):
            for k, l in itertools.product(range(d), repeat=2):
                unit = np.zeros((d, d), dtype=complex)
                unit[k, l] = 1.0
                out.append((s, (k, l), la.embed(unit, self.dims, s)))
        return out

    def localized(self, region: Region) -> LocalizedOperatorSet:
        return LocalizedOperatorSet(region, tuple(g for *_, g in self.generators(region)),
                                    self.site_support(region))


@dataclass
class AlgebraicMicrocausality:
    """Outcome of :func:`check_algebraic_microcausality`; truthy iff it holds."""

    applicable: bool
    holds: bool
    max_commutator: float = 0.0
    witness: tuple | None = None

    def __bool__(self):
        return self.holds


def check_algebraic_microcausality(net: LatticeNet, r1: Region, r2: Region,
                                   tol: float = COMMUTATOR_TOL) -> AlgebraicMicrocausality:
    """``[A, B] = 0`` for all ``A`` in the algebra of ``r1`` and ``B`` in that of ``r2``.

    Checking the matrix-unit generators suffices by bilinearity. For regions
    that are not spacelike separated the result has ``applicable=False``.
    """
    if not regions_spacelike_separated(r1, r2):
        return AlgebraicMicrocausality(False, False)
    worst, witness = 0.0, None
    for s1, u1, g1 in net.generators(r1):
        for s2, u2, g2 in net.generators(r2):
            n = la.max_abs(la.commutator(g1, g2))
            if n > worst:
                worst, witness = n, ((s1, u1), (s2, u2))
    return AlgebraicMicrocausality(True, worst <= tol, worst, witness if worst > tol else None)


def check_isotony(net: LatticeNet, r1: Region, r2: Region) -> bool:
    """For ``r1 ⊆ r2`` the algebra of ``r1`` must lie inside that of ``r2``.

    Raises
    ------
    PreconditionError
        If ``r1`` is not contained in ``r2``.
    """
    if not r2.contains_region(r1):
        raise PreconditionError("isotony check needs nested regions r1 ⊆ r2")
    return net.site_support(r1) <= net.site_support(r2)


def _dichotomic(theta: float, phi: float) -> np.ndarray:
    """``U sigma_z U^dag`` with Bloch direction ``(theta, phi)``."""
    n = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
    return n[0] * la.SIGMA_X + n[1] * la.SIGMA_Y + n[2] * la.SIGMA_Z


def net_bell_correlation(net: LatticeNet, r1: Region, r2: Region, state: DensityOperator,
                         restarts: int = 8, seed: int = 0) -> float:
    """Best ``|S|`` over dichotomic observables local to two spacelike regions.

    Each observable is a product of single-site ``U sigma_z U^dag`` factors
    over the region's sites (so it has spectrum ``±1``). The search is a
    seeded multi-start Nelder-Mead; the result is a lower bound on the
    supremum over the full local algebras.
    """
    if net.site_dim != 2:
        raise DimensionError("net_bell_correlation supports qubit sites only")
    if tuple(state.dims) != tuple(net.dims) and state.dim != net.dim:
        raise DimensionError("state does not live on the net's Hilbert space")
    if not regions_spacelike_separated(r1, r2):
        raise PreconditionError("regions are not spacelike separated")
    s1, s2 = sorted(net.site_support(r1)), sorted(net.site_support(r2))
    if not s1 or not s2:
        raise PreconditionError("each region must support at least one site")
    if set(s1) & set(s2):
        raise PreconditionError("regions share a site")
    keep = sorted(s1 + s2)
    reduced = la.partial_trace(state.matrix, net.dims, keep)
    rdims = [2] * len(keep)
    t1 = [keep.index(s) for s in s1]
    t2 = [keep.index(s) for s in s2]
    n1, n2 = len(s1), len(s2)

    def observable(params, targets):
        ops = [_dichotomic(params[2 * k], params[2 * k + 1]) for k in range(len(targets))]
        return la.embed(la.tensor_product(*ops), rdims, targets)

    def value(x):
        k1, k2 = 2 * n1, 2 * n2
        A = observable(x[:k1], t1)
        A2 = observable(x[k1:2 * k1], t1)
        B = observable(x[2 * k1:2 * k1 + k2], t2)
        B2 = observable(x[2 * k1 + k2:], t2)
        E = lambda P, Q: float(np.real(np.trace(P @ Q @ reduced)))
        return E(A, B) - E(A, B2) + E(A2, B) + E(A2, B2)

    rng = np.random.default_rng(seed)
    dim = 4 * (n1 + n2)
    best = 0.0
    for _ in range(restarts):
        x0 = rng.uniform(0.0, 2 * math.pi, size=dim)
        res = minimize(lambda x: -abs(value(x)), x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400 * dim})
        best = max(best, -float(res.fun))
    return best
