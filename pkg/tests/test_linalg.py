import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from qcausal import linalg as la
from qcausal.errors import DimensionError, HermiticityError


def _rand_matrix(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def _ptrace_loop(rho, dims, keep):
    # explicit index summation oracle
    n = len(dims)
    keep = sorted(keep)
    traced = [k for k in range(n) if k not in keep]
    kd = [dims[k] for k in keep]
    out = np.zeros((int(np.prod(kd)), int(np.prod(kd))), dtype=complex)
    t = rho.reshape(list(dims) * 2)
    for ki in itertools.product(*[range(d) for d in kd]):
        for kj in itertools.product(*[range(d) for d in kd]):
            s = 0
            for tr in itertools.product(*[range(dims[k]) for k in traced]):
                row = [0] * n
                col = [0] * n
                for pos, k in enumerate(keep):
                    row[k], col[k] = ki[pos], kj[pos]
                for pos, k in enumerate(traced):
                    row[k] = col[k] = tr[pos]
                s += t[tuple(row + col)]
            out[np.ravel_multi_index(ki, kd), np.ravel_multi_index(kj, kd)] = s
    return out


def test_basis_and_paulis():
    assert_allclose(la.KET_H, [1, 0])
    assert_allclose(la.KET_V, [0, 1])
    for p in la.PAULIS:
        assert_allclose(p @ p, np.eye(2))
    assert_allclose(la.SIGMA_X @ la.SIGMA_Y, 1j * la.SIGMA_Z)


def test_tensor_product_ordering():
    hv = la.tensor_product(la.KET_H.reshape(2, 1), la.KET_V.reshape(2, 1))
    assert_allclose(hv.ravel(), [0, 1, 0, 0])
    assert la.tensor_product(np.eye(2), np.eye(3)).shape == (6, 6)


@pytest.mark.parametrize("dims,keep", [
    ([2, 2], [0]), ([2, 2], [1]), ([2, 3], [1]), ([2, 2, 2], [0, 2]),
    ([3, 2, 2], [1]), ([2, 2, 2], [2, 0]),
])
def test_partial_trace_matches_loop(rng, dims, keep):
    n = int(np.prod(dims))
    rho = _rand_matrix(rng, n)
    assert_allclose(la.partial_trace(rho, dims, keep), _ptrace_loop(rho, dims, keep), atol=1e-12)


def test_partial_trace_of_product():
    a = np.array([[0.7, 0.1], [0.1, 0.3]])
    b = np.array([[0.4, 0.2j], [-0.2j, 0.6]])
    ab = la.tensor_product(a, b)
    assert_allclose(la.partial_trace(ab, [2, 2], 0), a)
    assert_allclose(la.partial_trace(ab, [2, 2], 1), b)
    assert_allclose(la.partial_trace(ab, [2, 2], []), [[1.0]])


def test_partial_trace_bad_dims():
    with pytest.raises(DimensionError):
        la.partial_trace(np.eye(4), [2, 3], [0])


@pytest.mark.parametrize("targets", [0, 1, 2, [0, 2], [2, 0], [1, 0]])
def test_embed_against_explicit_kron(rng, targets):
    dims = [2, 2, 2]
    t = [targets] if isinstance(targets, int) else list(targets)
    op = _rand_matrix(rng, 2 ** len(t))
    big = la.embed(op, dims, targets)
    # oracle: act on basis vectors
    for col in range(8):
        idx = np.unravel_index(col, dims)
        sub_in = np.ravel_multi_index([idx[k] for k in t], [2] * len(t))
        for row in range(8):
            jdx = np.unravel_index(row, dims)
            same = all(idx[k] == jdx[k] for k in range(3) if k not in t)
            sub_out = np.ravel_multi_index([jdx[k] for k in t], [2] * len(t))
            expect = op[sub_out, sub_in] if same else 0
            assert abs(big[row, col] - expect) < 1e-12


def test_commutator_values():
    assert la.max_abs(la.commutator(la.SIGMA_X, la.SIGMA_Z)) == pytest.approx(2.0)
    assert la.max_abs(la.anticommutator(la.SIGMA_X, la.SIGMA_Z)) == 0.0
    assert la.max_abs(la.commutator(la.SIGMA_Z, la.SIGMA_Z)) == 0.0


def test_trace_norm_distance_orthogonal():
    h = la.ket_to_dm(la.KET_H)
    v = la.ket_to_dm(la.KET_V)
    assert la.trace_norm_distance(h, v) == pytest.approx(2.0)
    assert la.trace_norm_distance(h, h) == 0.0


def test_eigensystem_merges_degenerate():
    a = np.diag([1.0, 1.0 + 1e-10, -1.0])
    vals, projs = la.hermitian_eigensystem(a)
    assert len(vals) == 2
    assert_allclose(sum(projs), np.eye(3), atol=1e-12)
    assert_allclose(sum(v * p for v, p in zip(vals, projs)), a, atol=1e-9)


def test_eigensystem_rejects_nonhermitian():
    with pytest.raises(HermiticityError):
        la.hermitian_eigensystem(np.array([[0, 1], [0, 0]]))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([[2, 2], [2, 3], [3, 2], [2, 2, 2]]))
def test_partial_trace_preserves_trace_and_hermiticity(seed, dims):
    rng = np.random.default_rng(seed)
    g = _rand_matrix(rng, int(np.prod(dims)))
    rho = g @ g.conj().T
    for k in range(len(dims)):
        red = la.partial_trace(rho, dims, k)
        assert la.is_hermitian(red)
        assert abs(np.trace(red) - np.trace(rho)) < 1e-9 * abs(np.trace(rho))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_spectral_decomposition_reconstructs(seed):
    rng = np.random.default_rng(seed)
    g = _rand_matrix(rng, 4)
    h = g + g.conj().T
    vals, projs = la.hermitian_eigensystem(h)
    assert np.all(np.diff(vals) > 0)
    assert_allclose(sum(v * p for v, p in zip(vals, projs)), h, atol=1e-9)
    for p, q in itertools.combinations(projs, 2):
        assert la.max_abs(p @ q) < 1e-9
