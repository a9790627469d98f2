"""Small dense complex linear algebra.

Everything here works on ``numpy.ndarray`` objects of dtype ``complex128``.
The systems in this package never exceed 64 dimensions, so dense storage is
used throughout.

Basis convention: ``|H> = (1, 0)`` and ``|V> = (0, 1)``; composite bases are
ordered left-factor-major (``HH, HV, VH, VV``), which is what ``numpy.kron``
produces.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DimensionError, HermiticityError

HERMITIAN_TOL = 1e-10
DEGENERACY_TOL = 1e-8

KET_H = np.array([1.0, 0.0], dtype=complex)
KET_V = np.array([0.0, 1.0], dtype=complex)

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite, non-empty 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"expected a non-empty matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_vector(v) -> np.ndarray:
    """Return ``v`` as a finite 1-D complex array."""
    x = np.asarray(v, dtype=complex).reshape(-1)
    if x.size == 0:
        raise DimensionError("empty vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite entries")
    return x


def _check_square(*mats: np.ndarray) -> int:
    n = mats[0].shape[0]
    for m in mats:
        if m.shape != (n, n):
            raise DimensionError(
                f"expected square matrices of equal size, got {[x.shape for x in mats]}"
            )
    return n


def ket_to_dm(psi) -> np.ndarray:
    """Projector ``|psi><psi|`` (not normalized)."""
    psi = as_vector(psi)
    return np.outer(psi, psi.conj())


def dagger(a) -> np.ndarray:
    return np.asarray(a).conj().T


def tensor_product(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors), left to right."""
    if not mats:
        raise DimensionError("tensor_product needs at least one operand")
    arrs = []
    for m in mats:
        a = np.asarray(m, dtype=complex)
        if a.size == 0:
            raise DimensionError("tensor_product of an empty operand")
        arrs.append(a)
    return reduce(np.kron, arrs)


def partial_trace(rho, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    rho : array_like
        Square matrix on the composite space.
    dims : sequence of int
        Subsystem dimensions; their product must equal ``rho``'s size.
    keep : int or sequence of int
        Subsystem index (or indices) to retain. The kept factors appear in
        ascending index order. An empty sequence traces out everything and
        returns a 1x1 matrix holding ``Tr(rho)``.
    """
    rho = as_matrix(rho)
    dims = [int(d) for d in dims]
    n = _check_square(rho)
    if int(np.prod(dims)) != n:
        raise DimensionError(f"subsystem dims {dims} do not match matrix size {n}")
    if np.isscalar(keep) or isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(set(int(k) for k in keep))
    for k in keep:
        if not 0 <= k < len(dims):
            raise DimensionError(f"subsystem index {k} out of range for dims {dims}")

    nsys = len(dims)
    traced = [i for i in range(nsys) if i not in keep]
    t = rho.reshape(dims + dims)
    # contract each traced pair (row axis i, column axis i + nsys)
    for removed, i in enumerate(traced):
        cur = nsys - removed
        ax = i - sum(1 for j in traced[:removed] if j < i)
        t = np.trace(t, axis1=ax, axis2=ax + cur)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def embed(op, dims: Sequence[int], targets) -> np.ndarray:
    """Lift an operator acting on ``targets`` to the full composite space.

    ``op`` acts on the tensor product of the target subsystems taken in the
    order listed in ``targets``; identities fill every other factor.
    """
    op = as_matrix(op)
    dims = [int(d) for d in dims]
    if isinstance(targets, (int, np.integer)):
        targets = [int(targets)]
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise DimensionError(f"repeated target subsystem in {targets}")
    for t in targets:
        if not 0 <= t < len(dims):
            raise DimensionError(f"target {t} out of range for dims {dims}")
    dt = int(np.prod([dims[t] for t in targets]))
    if op.shape != (dt, dt):
        raise DimensionError(
            f"operator shape {op.shape} does not match target dims "
            f"{[dims[t] for t in targets]}"
        )
    rest = [i for i in range(len(dims)) if i not in targets]
    if not rest and targets == sorted(targets):
        return op.copy()
    drest = int(np.prod([dims[i] for i in rest])) if rest else 1
    full = np.kron(op, np.eye(drest, dtype=complex))
    # axes of `full` are ordered (targets..., rest...); permute back to 0..n-1
    order = targets + rest
    nsys = len(dims)
    shaped = full.reshape([dims[i] for i in order] * 2)
    perm = [order.index(i) for i in range(nsys)]
    shaped = shaped.transpose(perm + [p + nsys for p in perm])
    n = int(np.prod(dims))
    return shaped.reshape(n, n)


def commutator(a, b) -> np.ndarray:
    """``AB - BA``."""
    a, b = as_matrix(a), as_matrix(b)
    _check_square(a, b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    """``AB + BA``."""
    a, b = as_matrix(a), as_matrix(b)
    _check_square(a, b)
    return a @ b + b @ a


def max_abs(a) -> float:
    """Largest entry modulus; the tolerance metric for commutators."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def trace_norm_distance(a, b) -> float:
    """Sum of the singular values of ``a - b``."""
    a, b = as_matrix(a), as_matrix(b)
    _check_square(a, b)
    return float(np.sum(np.linalg.svd(a - b, compute_uv=False)))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and max_abs(a - a.conj().T) <= tol


def hermitian_eigensystem(
    a, tol: float = HERMITIAN_TOL, merge_tol: float = DEGENERACY_TOL
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Spectral decomposition of a Hermitian matrix.

    Returns ascending distinct eigenvalues and the matching orthogonal
    projectors. Eigenvalues closer than ``merge_tol`` are treated as one
    degenerate eigenvalue (their mean) with a single projector.

    Raises
    ------
    HermiticityError
        If ``max|A - A^dag| > tol``.
    """
    a = as_matrix(a)
    _check_square(a)
    if not is_hermitian(a, tol):
        raise HermiticityError(
            f"matrix is not Hermitian (max |A - A^dag| = {max_abs(a - a.conj().T):.3g})"
        )
    h = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(h)
    groups: list[list[int]] = [[0]]
    for k in range(1, len(w)):
        if w[k] - w[groups[-1][-1]] <= merge_tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    values = np.array([float(np.mean(w[g])) for g in groups])
    projectors = []
    for g in groups:
        vg = v[:, g]
        projectors.append(vg @ vg.conj().T)
    return values, projectors
