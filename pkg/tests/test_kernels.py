import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_array_equal

from qcausal import _kernels_py, bell, kernels
from qcausal.sampling import random_density

try:
    from qcausal import _kernels as _kernels_c
except ImportError:  # pure install
    _kernels_c = None

needs_ext = pytest.mark.skipif(_kernels_c is None, reason="compiled extension not built")
backends = [_kernels_py] + ([_kernels_c] if _kernels_c is not None else [])


def _grid_max_oracle(E):
    n, m = E.shape
    best, arg = -1.0, None
    for i, i2 in itertools.product(range(n), repeat=2):
        for j, j2 in itertools.product(range(m), repeat=2):
            s = abs(((E[i, j] - E[i, j2]) + E[i2, j]) + E[i2, j2])
            if s > best:
                best, arg = s, (i, i2, j, j2)
    return (best, *arg)


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("impl", backends)
@pytest.mark.parametrize("shape", [(3, 3), (5, 4), (6, 6)])
def test_grid_max_matches_oracle(impl, shape, rng):
    E = np.ascontiguousarray(rng.uniform(-1, 1, size=shape))
    assert impl.chsh_grid_max(E) == _grid_max_oracle(E)


@pytest.mark.parametrize("impl", backends)
def test_batch_matches_born_tables(impl, phi_plus, rng):
    angles = np.ascontiguousarray(rng.uniform(0, math.pi, size=(20, 4)))
    T = bell.correlation_block(phi_plus)
    got = impl.chsh_batch(T, angles)
    for row, s in zip(angles, got):
        assert s == pytest.approx(bell.chsh_value(phi_plus, *row).signed, abs=1e-13)


@needs_ext
@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_backends_bit_identical(seed):
    rng = np.random.default_rng(seed)
    state = random_density(rng, [2, 2])
    angles = np.arange(16) * (math.pi / 16)
    E = bell.correlator_table(state, angles, angles)
    assert _kernels_c.chsh_grid_max(E) == _kernels_py.chsh_grid_max(E)
    quads = np.ascontiguousarray(rng.uniform(0, math.pi, size=(50, 4)))
    T = bell.correlation_block(state)
    assert_array_equal(_kernels_c.chsh_batch(T, quads), _kernels_py.chsh_batch(T, quads))


def test_env_forces_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, QCAUSAL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import qcausal; print(qcausal.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
