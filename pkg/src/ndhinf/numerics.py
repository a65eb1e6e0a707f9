"""Dense complex matrix algebra.

Matrices are plain 2-D numpy arrays; real input is promoted to complex
where the operation is defined over the complex field.  The Hermitian
eigensolver is a cyclic Jacobi method run on the real embedding
``[[Re M, -Im M], [Im M, Re M]]``; its inner loop lives in the compiled
``_kernels`` extension when available and in ``_fallback`` otherwise.
Set ``NDHINF_PURE=1`` to force the fallback.
"""

import os
import warnings

import numpy as np
import scipy.linalg

from .errors import DimensionError, NonHermitian, NoConvergence, Singular
from . import _fallback

try:
    if os.environ.get("NDHINF_PURE", "") not in ("", "0"):
        raise ImportError("pure backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"

HERMITIAN_RTOL = 1e-12

_jacobi = (_compiled or _fallback).jacobi_eigh


def available_backends():
    return ["python"] + (["compiled"] if _compiled is not None else [])


def set_backend(name):
    """Select the Jacobi kernel (``"compiled"`` or ``"python"``)."""
    global _jacobi, BACKEND
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        _jacobi = _compiled.jacobi_eigh
    elif name == "python":
        _jacobi = _fallback.jacobi_eigh
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name


def as_matrix(M, dtype=complex):
    M = np.asarray(M, dtype=dtype)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {M.shape}")
    return M


def herm(M):
    """Hermitian part of ``M``."""
    return 0.5 * (M + M.conj().T)


def check_hermitian(M, rtol=HERMITIAN_RTOL):
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"square matrix required, got {M.shape}")
    nrm = np.linalg.norm(M)
    if np.linalg.norm(M - M.conj().T) > rtol * (1.0 + nrm):
        raise NonHermitian("matrix is not Hermitian within tolerance")
    return M


def herm_eig(M, tol=1e-15, max_sweeps=100):
    """Eigen-decomposition of a Hermitian matrix.

    Parameters
    ----------
    M : (n, n) array_like
        Hermitian matrix.
    tol : float
        Relative off-diagonal threshold for the Jacobi sweeps.

    Returns
    -------
    w : (n,) ndarray
        Real eigenvalues in ascending order.
    V : (n, n) ndarray
        Unitary matrix of eigenvectors, ``M @ V = V @ diag(w)``.
    """
    M = check_hermitian(M)
    n = M.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    M = herm(M)
    scale = np.linalg.norm(M)
    if not np.any(M.imag):
        w, V, _, ok = _jacobi(np.ascontiguousarray(M.real), tol, max_sweeps)
        if not ok:
            raise NoConvergence("Jacobi sweeps did not converge")
        order = np.argsort(w)
        return w[order], V[:, order].astype(complex)

    emb = np.block([[M.real, -M.imag], [M.imag, M.real]])
    w2, V2, _, ok = _jacobi(emb, tol, max_sweeps)
    if not ok:
        raise NoConvergence("Jacobi sweeps did not converge")
    order = np.argsort(w2)
    w2 = w2[order]
    V2 = V2[:, order]
    # each eigenvalue appears twice; (x, y) and (-y, x) map to x + iy
    cand = V2[:n] + 1j * V2[n:]
    gap = 1e-9 * max(scale, 1e-300)
    w = np.empty(n)
    V = np.empty((n, n), dtype=complex)
    i = 0
    col = 0
    while i < 2 * n:
        j = i + 1
        while j < 2 * n and w2[j] - w2[j - 1] <= gap:
            j += 1
        m = (j - i) // 2
        if m == 0:
            m = 1
        U, _, _ = np.linalg.svd(cand[:, i:j], full_matrices=False)
        take = min(m, n - col)
        w[col:col + take] = np.mean(w2[i:j])
        V[:, col:col + take] = U[:, :take]
        col += take
        i = j
        if col == n:
            break
    # re-orthonormalise across clusters and refine eigenvalues
    V, _ = np.linalg.qr(V)
    w = np.real(np.einsum("ij,ik,kj->j", V.conj(), M, V))
    order = np.argsort(w)
    return w[order], V[:, order]


def eigvalsh(M):
    return herm_eig(M)[0]


def min_eig(M):
    """Smallest eigenvalue of a Hermitian matrix."""
    M = as_matrix(M)
    if M.size == 0:
        return np.inf
    return float(herm_eig(M)[0][0])


def max_eig(M):
    M = as_matrix(M)
    if M.size == 0:
        return -np.inf
    return float(herm_eig(M)[0][-1])


def is_pd(M):
    return min_eig(M) > 0.0


def largest_singular_value(M):
    M = as_matrix(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[0])


def smallest_singular_value(M):
    M = as_matrix(M)
    if M.size == 0:
        return np.inf
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def spectral_radius(M):
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionError("spectral radius needs a square matrix")
    if M.size == 0:
        return 0.0
    try:
        lam = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return float(np.max(np.abs(lam)))


def solve_linear(M, rhs, *, return_cond=False, pivot_tol=1e-13):
    """Solve ``M X = rhs`` by LU with partial pivoting.

    Raises `Singular` when a pivot falls below ``pivot_tol * ||M||``.
    With ``return_cond=True`` a 1-norm condition estimate is returned as
    well.
    """
    M = as_matrix(M)
    rhs = np.asarray(rhs, dtype=complex)
    vec = rhs.ndim == 1
    rhs2 = rhs.reshape(-1, 1) if vec else rhs
    n = M.shape[0]
    if M.shape != (n, n) or rhs2.shape[0] != n:
        raise DimensionError(f"incompatible shapes {M.shape} and {rhs.shape}")
    if n == 0:
        X = np.zeros_like(rhs2)
        return (X, 1.0) if return_cond else X
    nrm = np.linalg.norm(M, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if nrm == 0.0 or pivots.min() <= pivot_tol * nrm:
        raise Singular("matrix is numerically singular", cond=np.inf)
    X = scipy.linalg.lu_solve((lu, piv), rhs2)
    if vec:
        X = X.ravel()
    if return_cond:
        inv_nrm = np.linalg.norm(scipy.linalg.lu_solve((lu, piv), np.eye(n)), 1)
        return X, float(nrm * inv_nrm)
    return X


def orth_kernel(M, rtol=1e-10):
    """Orthonormal basis (as columns) of the null space of ``M``."""
    M = as_matrix(M)
    q = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(q, dtype=complex)
    _, s, vh = np.linalg.svd(M)
    r = int(np.sum(s > rtol * max(1.0, s[0] if s.size else 0.0)))
    return vh[r:].conj().T


def row_space(M, rtol=1e-10):
    """Compact SVD ``M = W diag(s) Vh`` truncated to numerical rank."""
    M = as_matrix(M)
    if M.size == 0:
        return (np.zeros((M.shape[0], 0), complex), np.zeros(0),
                np.zeros((0, M.shape[1]), complex))
    W, s, Vh = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > rtol * max(1.0, s[0])))
    return W[:, :r], s[:r], Vh[:r]


def sqrtm_psd(M):
    w, V = np.linalg.eigh(herm(as_matrix(M)))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T
