"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``."""

import math

import numpy as np


def jacobi_eigh(a_in, tol=1e-15, max_sweeps=100):
    """Cyclic Jacobi for a real symmetric matrix.

    Same contract as the compiled kernel: returns ``(w, V, sweeps,
    converged)`` with unsorted eigenvalues.
    """
    a = np.array(a_in, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    total = float(np.sum(a * a))
    if total == 0.0:
        return np.zeros(n), v, 0, True

    sweep = 0
    converged = False
    iu = np.triu_indices(n, 1)
    while sweep < max_sweeps:
        off = float(np.sum(a[iu] ** 2))
        if off <= tol * tol * total:
            converged = True
            break
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q]
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :]
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, sweep, converged
