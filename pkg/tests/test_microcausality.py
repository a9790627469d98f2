import itertools
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcausal import bell
from qcausal import linalg as la
from qcausal.agents import MeasurementEvent, Scenario
from qcausal.errors import DimensionError, PreconditionError
from qcausal.microcausality import (
    LatticeNet, check_algebraic_microcausality, check_isotony, check_strong_microcausality,
    net_bell_correlation,
)
from qcausal.quantum import PAR, DensityOperator, MeasurementModel, polarization_measurement
from qcausal.spacetime import Event, Region, regions_spacelike_separated

PREP = Region(Event(0, 0), (0.5, 0.5))


def _site_region(x, ht=0.25, hx=0.5, t=0.0):
    return Region(Event(t, x), (ht, hx))


@pytest.fixture
def net4():
    return LatticeNet([0, 2, 4, 6])


def _one_qubit_pair(op_a, op_b, loc_b=Event(1, 1)):
    rho = DensityOperator(np.eye(2) / 2)
    return Scenario(rho, (
        MeasurementEvent(Event(1, -1), MeasurementModel("A", (("a", op_a),), 0), "a", label="A"),
        MeasurementEvent(loc_b, MeasurementModel("B", (("b", op_b),), 0), "b", label="B"),
    ), PREP)


def test_fig4_operators_commute(phi_plus):
    sc = Scenario(phi_plus, (
        MeasurementEvent(Event(1, -1), polarization_measurement(0.0, 0), PAR, label="A"),
        MeasurementEvent(Event(1, 1), polarization_measurement(0.4, 1), PAR, label="B"),
    ), PREP)
    assert check_strong_microcausality(sc).holds


def test_sigma_x_sigma_z_violation():
    res = check_strong_microcausality(_one_qubit_pair(la.SIGMA_X, la.SIGMA_Z))
    assert not res.holds
    (v,) = res.violations
    assert v.events == ("A", "B")
    assert v.commutator_norm == pytest.approx(2.0)
    assert v.anticommuting and res.excused_by_anticommutation


def test_noncommuting_not_excused():
    h = (la.SIGMA_X + la.SIGMA_Z) / math.sqrt(2)
    res = check_strong_microcausality(_one_qubit_pair(la.SIGMA_X, h))
    assert not res.holds and not res.excused_by_anticommutation
    assert res.anticommuting_pairs == set()


def test_timelike_pair_vacuous():
    res = check_strong_microcausality(_one_qubit_pair(la.SIGMA_X, la.SIGMA_Z, loc_b=Event(4, -1)))
    assert res.holds


def test_site_support(net4):
    assert net4.site_support(_site_region(2)) == {1}
    assert net4.site_support(_site_region(1, hx=1.5)) == {0, 1}
    assert net4.site_support(_site_region(1)) == frozenset()
    assert net4.dim == 16


def test_net_dimension_guard():
    with pytest.raises(DimensionError):
        LatticeNet(range(7))


def test_generators_are_matrix_units(net4):
    gens = net4.generators(_site_region(4))
    assert len(gens) == 4
    site, (k, l), g = gens[1]
    unit = np.zeros((2, 2))
    unit[k, l] = 1
    assert site == 2
    assert_allclose(g, la.embed(unit, [2] * 4, 2))


def test_exhaustive_spacelike_pairs(net4):
    # every sub-box of the site layout that is spacelike to another
    regions = [_site_region(x, hx=hx) for x in (0, 1, 2, 3, 4, 5, 6) for hx in (0.5, 1.5)]
    checked = 0
    for r1, r2 in itertools.combinations(regions, 2):
        if not regions_spacelike_separated(r1, r2):
            assert not check_algebraic_microcausality(net4, r1, r2).applicable
            continue
        if net4.site_support(r1) & net4.site_support(r2):
            continue
        res = check_algebraic_microcausality(net4, r1, r2, tol=1e-12)
        assert res.applicable and res.holds and res.max_commutator == 0.0
        checked += 1
    assert checked > 10


def test_mislabeled_net_fails():
    r0, r1 = _site_region(0), _site_region(2)
    bad = LatticeNet([0, 2, 4, 6], support_overrides={r1: [0]})
    res = check_algebraic_microcausality(bad, r0, r1)
    assert res.applicable and not res
    assert res.max_commutator == pytest.approx(1.0)
    assert res.witness[0][0] == 0


def test_isotony(net4):
    small, big = _site_region(0), _site_region(1, hx=1.5)
    assert check_isotony(net4, small, big)
    with pytest.raises(PreconditionError):
        check_isotony(net4, big, small)
    broken = LatticeNet([0, 2, 4, 6], support_overrides={big: [1]})
    assert not check_isotony(broken, small, big)


def _phi_plus_on_first_two():
    h = la.ket_to_dm(la.KET_H)
    return DensityOperator(la.tensor_product(bell.make_phi_plus().matrix, h, h), [2] * 4)


def test_net_bell_value(net4):
    s = net_bell_correlation(net4, _site_region(0), _site_region(2), _phi_plus_on_first_two())
    assert 2.8 <= s <= bell.TSIRELSON + 1e-9


def test_net_bell_uncorrelated_sites(net4):
    s = net_bell_correlation(net4, _site_region(4), _site_region(6), _phi_plus_on_first_two(),
                             restarts=3)
    assert s <= 2.0 + 1e-9


def test_net_bell_requires_spacelike(net4):
    with pytest.raises(PreconditionError):
        net_bell_correlation(net4, _site_region(0), _site_region(2, ht=2.0),
                             _phi_plus_on_first_two())
