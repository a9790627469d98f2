import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from qcausal import bell
from qcausal.causal import (
    Distribution, InterventionSpec, build_lhv_model, build_model, common_cause_test, condition,
    cross_setting_gap, intervene, setting_sweep, stability_report,
)
from qcausal.sampling import random_density


@pytest.fixture
def same_model(phi_plus):
    return build_model(phi_plus, 0.0, 0.0)


def test_joint_normalized(same_model):
    j = same_model.joint()
    assert j.total() == pytest.approx(1.0)
    assert j.prob(X=0, Y=0) == pytest.approx(0.5)
    assert j.prob(X=0, Y=1) == pytest.approx(0.0)


def test_condition_vs_intervene_on_outcome(same_model):
    cond = condition(same_model, "X", 0).table("Y")
    do = intervene(same_model, InterventionSpec("X", 0)).table("Y")
    assert cond[0] == 1.0
    assert do[0] == 0.5
    assert "X" not in intervene(same_model, InterventionSpec("X", 0)).names


def test_stability_report_both_directions(same_model):
    rep = stability_report(same_model)
    assert rep.verdict("X", "Y") == "not causal-stable"
    assert rep.verdict("Y", "X") == "not causal-stable"
    assert rep.max_gap[("X", "Y")] == pytest.approx(0.5)
    assert rep.label == "conceptual"


def test_product_state_is_stable():
    rep = stability_report(build_model(bell.make_product(0.3, 1.2), 0.1, 0.7))
    assert all(rep.stable.values())


def test_exogenous_intervention_is_point_mass(phi_plus):
    m = build_model(phi_plus, [0.0, 0.5], [0.0, 1.0])
    d = intervene(m, InterventionSpec("b", 1.0))
    assert "b" not in d.names
    assert d.total() == pytest.approx(1.0)
    direct = bell.quantum_joint(phi_plus, 0.5, 1.0).probs
    # Alice (Y) at a=0.5, Bob (X) at b=1.0
    got = d.given("a", 0.5).marginal("X", "Y").p
    assert_allclose(got, direct.T, atol=1e-15)


def test_setting_sweep_constant(phi_plus):
    m = build_model(phi_plus, 0.2, list(np.linspace(0, math.pi, 9)))
    col = [v[0] for v in setting_sweep(m, "b").values()]
    assert max(col) - min(col) <= 1e-12
    assert cross_setting_gap(m) <= 1e-12


def test_common_cause(phi_plus):
    m = build_model({"phi": phi_plus, "prod": bell.make_product(0.0, math.pi / 4)}, 0.0, 0.0)
    cc = common_cause_test(m, "phi", "prod")
    assert cc.is_common_cause
    assert cc.correlation_delta == pytest.approx(1.0)
    same = build_model({"p1": phi_plus, "p2": phi_plus}, 0.0, 0.0)
    assert not common_cause_test(same, "p1", "p2").is_common_cause


def test_distribution_validation():
    with pytest.raises(ValueError):
        Distribution(("A",), {"A": [0, 1]}, [0.5, 0.25, 0.25])
    with pytest.raises(ValueError):
        Distribution(("A",), {"A": [0, 1]}, [1.5, -0.5])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_lhv_condition_equals_intervene(seed):
    rng = np.random.default_rng(seed)
    settings_ = tuple(rng.uniform(0, math.pi, 4))
    lhv = bell.random_lhv(rng, settings_)
    m = build_lhv_model(lhv, list(settings_[:2]), list(settings_[2:]))
    rep = stability_report(m)
    assert all(rep.stable.values())
    assert max(rep.max_gap.values()) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_quantum_do_outcome_leaves_marginal(seed):
    rng = np.random.default_rng(seed)
    m = build_model(random_density(rng, [2, 2]), float(rng.uniform(0, 3)), float(rng.uniform(0, 3)))
    marg = m.joint().table("Y")
    for c in (0, 1):
        d = intervene(m, InterventionSpec("X", c)).table("Y")
        assert max(abs(d[k] - marg[k]) for k in marg) <= 1e-12
