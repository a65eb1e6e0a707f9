"""Random instance generators for tests, fixtures and benchmarks."""

from __future__ import annotations

import numpy as np

from .grsys import Realization
from .youla import random_points as random_polydisk_points  # noqa: F401


def _draw(rng, cplx):
    def draw(*shape):
        M = rng.standard_normal(shape)
        return M + 1j * rng.standard_normal(shape) if cplx else M
    return draw


def random_dims(rng, d, max_block=2):
    return [int(v) for v in rng.integers(1, max_block + 1, size=d)]


def random_stable_realization(dims, p, m, rng, radius=0.7, cplx=False):
    """Realization whose state matrix has norm ``radius`` (hence scaled stable)."""
    draw = _draw(rng, cplx)
    n = sum(dims)
    A = draw(n, n)
    if n:
        A *= radius / np.linalg.norm(A, 2)
    return Realization(dims, A, draw(n, m), draw(p, n), draw(p, m))


def constructed_plant(rng, dims, io, r=None, cplx=False):
    """Plant and controller whose closed loop is a strict contraction.

    A random closed-loop system matrix is drawn in controller-split form
    and scaled to norm ``r < 1``; the plant is recovered by absorbing the
    controller feedthrough.  Returns ``(G, K)``.
    """
    draw = _draw(rng, cplx)
    n = sum(dims)
    nw, nu, nz, ny = io
    B2, C2, D12, D21 = draw(n, nu), draw(ny, n), draw(nz, nu), draw(ny, nw)
    AK, BK, CK, DK = draw(n, n), draw(n, ny), draw(nu, n), draw(nu, ny)
    A1, B1, C1, D11 = draw(n, n), draw(n, nw), draw(nz, n), draw(nz, nw)
    M = np.block([[A1, B2 @ CK, B1], [BK @ C2, AK, BK @ D21], [C1, D12 @ CK, D11]])
    r = rng.uniform(0.5, 0.95) if r is None else r
    a = r / np.linalg.norm(M, 2)
    A1, B1, C1, D11, AK, CK, BK = [a * x for x in (A1, B1, C1, D11, AK, CK, BK)]
    A = A1 - B2 @ DK @ C2
    G = Realization(dims, A, np.hstack([B1 - B2 @ DK @ D21, B2]),
                    np.vstack([C1 - D12 @ DK @ C2, C2]),
                    np.block([[D11 - D12 @ DK @ D21, D12], [D21, np.zeros((ny, nu))]]), io)
    return G, Realization(dims, AK, BK, CK, DK)


def stabilizable_triple(rng, n, nu=1, ny=1, spread=2.0, cplx=False):
    """Random one-dimensional ``(A, B2, C2)``; generic data is stabilizable and detectable."""
    draw = _draw(rng, cplx)
    A = draw(n, n)
    A *= rng.uniform(0.5, spread) / max(np.max(np.abs(np.linalg.eigvals(A))), 1e-12)
    return A, draw(n, nu), draw(ny, n)


def contractive_scalar_realization(dims, rng, radius=0.9, cplx=True):
    """Scalar realization with system matrix of norm ``radius``."""
    draw = _draw(rng, cplx)
    n = sum(dims)
    M = draw(n + 1, n + 1)
    M *= radius / np.linalg.norm(M, 2)
    return Realization(dims, M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:])
