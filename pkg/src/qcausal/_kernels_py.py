"""Pure numpy fallback for the compiled CHSH kernels."""

import numpy as np


def chsh_grid_max(E):
    E = np.ascontiguousarray(E, dtype=np.float64)
    n, m = E.shape
    best, arg = -1.0, (0, 0, 0, 0)
    for i in range(n):
        # axes (i2, j, j2)
        s = np.abs(
            ((E[i, :][None, :, None] - E[i, :][None, None, :]) + E[:, :, None]) + E[:, None, :]
        )
        k = int(np.argmax(s))
        if s.flat[k] > best:
            best = float(s.flat[k])
            i2, j, j2 = np.unravel_index(k, s.shape)
            arg = (i, int(i2), int(j), int(j2))
    return (best, *arg)


def chsh_batch(T, angles):
    T = np.asarray(T, dtype=np.float64)
    angles = np.asarray(angles, dtype=np.float64)
    t00, t01, t10, t11 = T[0, 0], T[0, 1], T[1, 0], T[1, 1]
    twice = 2.0 * angles
    c = np.cos(twice)
    s = np.sin(twice)
    ca, ca2, cb, cb2 = c.T
    sa, sa2, sb, sb2 = s.T
    e1 = ca * (t00 * cb + t01 * sb) + sa * (t10 * cb + t11 * sb)
    e2 = ca * (t00 * cb2 + t01 * sb2) + sa * (t10 * cb2 + t11 * sb2)
    e3 = ca2 * (t00 * cb + t01 * sb) + sa2 * (t10 * cb + t11 * sb)
    e4 = ca2 * (t00 * cb2 + t01 * sb2) + sa2 * (t10 * cb2 + t11 * sb2)
    return ((e1 - e2) + e3) + e4
