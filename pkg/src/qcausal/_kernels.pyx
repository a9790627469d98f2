# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled CHSH search kernels.

Arithmetic is ordered exactly as in ``_kernels_py`` so both backends return
bit-identical results.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def chsh_grid_max(double[:, ::1] E):
    """Exhaustive max of |S| over index quadruples of a correlator table.

    ``E[i, j]`` is the correlator for Alice setting ``i`` and Bob setting
    ``j``. ``S = E[i,j] - E[i,j2] + E[i2,j] + E[i2,j2]``. Returns
    ``(best, i, i2, j, j2)``; ties keep the first quadruple in C order.
    """
    cdef Py_ssize_t n = E.shape[0], m = E.shape[1]
    cdef Py_ssize_t i, i2, j, j2
    cdef Py_ssize_t bi = 0, bi2 = 0, bj = 0, bj2 = 0
    cdef double best = -1.0, s, e_ij, e_i2j
    with nogil:
        for i in range(n):
            for i2 in range(n):
                for j in range(m):
                    e_ij = E[i, j]
                    e_i2j = E[i2, j]
                    for j2 in range(m):
                        s = fabs(((e_ij - E[i, j2]) + e_i2j) + E[i2, j2])
                        if s > best:
                            best = s
                            bi = i; bi2 = i2; bj = j; bj2 = j2
    return best, bi, bi2, bj, bj2


def chsh_batch(double[:, ::1] T, double[:, ::1] angles):
    """Signed S for many setting quadruples ``(a, a2, b, b2)``.

    ``T`` is the 2x2 block ``[[<ZZ>, <ZX>], [<XZ>, <XX>]]``; a polarizer at
    axis angle t has dichotomic observable ``cos 2t Z + sin 2t X``.
    """
    cdef Py_ssize_t k, n = angles.shape[0]
    # trig via numpy so both backends see the same inputs
    twice = 2.0 * np.asarray(angles)
    cdef double[:, ::1] c = np.ascontiguousarray(np.cos(twice))
    cdef double[:, ::1] s = np.ascontiguousarray(np.sin(twice))
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    cdef double ca, sa, ca2, sa2, cb, sb, cb2, sb2, e1, e2, e3, e4
    cdef double t00 = T[0, 0], t01 = T[0, 1], t10 = T[1, 0], t11 = T[1, 1]
    with nogil:
        for k in range(n):
            ca = c[k, 0]; sa = s[k, 0]
            ca2 = c[k, 1]; sa2 = s[k, 1]
            cb = c[k, 2]; sb = s[k, 2]
            cb2 = c[k, 3]; sb2 = s[k, 3]
            e1 = ca * (t00 * cb + t01 * sb) + sa * (t10 * cb + t11 * sb)
            e2 = ca * (t00 * cb2 + t01 * sb2) + sa * (t10 * cb2 + t11 * sb2)
            e3 = ca2 * (t00 * cb + t01 * sb) + sa2 * (t10 * cb + t11 * sb)
            e4 = ca2 * (t00 * cb2 + t01 * sb2) + sa2 * (t10 * cb2 + t11 * sb2)
            res[k] = ((e1 - e2) + e3) + e4
    return out
