"""Instance generators shared by the test modules."""

import numpy as np

from ndhinf import numerics as nm


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def compressions(H, R, S):
    out = []
    for M in (R, S):
        K = nm.orth_kernel(M)
        out.append(np.linalg.eigvalsh(K.conj().T @ H @ K) if K.shape[1] else np.array([-np.inf]))
    return out


def finsler_instance(rng, negative=True, cplx=True):
    """Random ``(H, R, S)``.

    With ``negative`` both kernel compressions are below ``-1e-3 I``;
    otherwise the compression on ``ker R`` has an eigenvalue above
    ``1e-3``.
    """
    draw = (lambda *s: crandn(rng, *s)) if cplx else (lambda *s: rng.standard_normal(s))
    while True:
        n = int(rng.integers(2, 8))
        p = int(rng.integers(1, n))
        q = int(rng.integers(1, n))
        R, S = draw(p, n), draw(q, n)
        H0 = draw(n, n)
        H0 = H0 + H0.conj().T
        KR, KS = nm.orth_kernel(R), nm.orth_kernel(S)
        PR, PS = KR @ KR.conj().T, KS @ KS.conj().T
        cR, cS = compressions(H0, R, S)
        if negative:
            alpha = max(cR.max(), cS.max(), 0.0) + rng.uniform(2e-3, 1.0)
            H = H0 - alpha * (PR + PS)
        else:
            H = H0 + (abs(cR.min()) + rng.uniform(2e-3, 1.0)) * PR
        H = nm.herm(H)
        cR, cS = compressions(H, R, S)
        if negative and max(cR.max(), cS.max()) < -1e-3:
            return H, R, S
        if not negative and cR.max() > 1e-3:
            return H, R, S


def random_structure(rng, n):
    """Random partition of ``n`` into scalar and full blocks."""
    from ndhinf.lmi import ScalingStructure
    cuts = sorted(rng.choice(np.arange(1, n), size=int(rng.integers(0, min(n, 4))),
                             replace=False)) if n > 1 else []
    sizes = np.diff([0, *cuts, n])
    return ScalingStructure([(int(s), str(rng.choice(["scalar", "full"]))) for s in sizes])


def random_matrix_n(rng, nmax=8):
    n = int(rng.integers(1, nmax + 1))
    return crandn(rng, n, n) * rng.uniform(0.2, 2.0)
