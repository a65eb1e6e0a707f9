"""Strict feasibility of affine Hermitian matrix inequalities.

A problem is a list of unknowns (structured scalings, free Hermitian or
free rectangular matrices) and a list of affine constraints given as
Python callables.  The affine data ``F_0 + sum_i x_i F_i`` is extracted by
probing each callable on basis elements, so the callables may use any
matrix expression that is affine in the unknowns.

The feasibility question is answered by a phase-I problem

    minimize t  subject to  G_j(x) <= t I  for every constraint j,

with ``G_j = F_j`` for ``F_j < 0`` constraints and ``G_j = -F_j`` for
``F_j > 0`` and ``F_j >= 0`` constraints.  It is solved by a log-det
barrier method with damped Newton steps, restricted to the ball
``||x|| <= radius``.  Each constraint is divided by ``max(1, ||F_0||)``
before solving so that ``target_margin`` is a relative quantity.

Also provided: the two Finsler constructions and the bisection for the
D-scaling upper bound of the structured singular value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from . import numerics as nm
from .errors import DimensionError, Infeasible, NoConvergence, NonHermitian, SizeCap

SENSES = ("neg", "pos", "psd", "nsd")
DEFAULT_SIZE_CAP = 400
PSD_TOL = 1e-10


class ScalingStructure:
    """Block structure of an uncertainty set and its commutant.

    Parameters
    ----------
    blocks : sequence of (int, str)
        ``(dim, kind)`` with ``kind`` either ``"scalar"`` (a repeated
        scalar ``delta * I_dim``) or ``"full"`` (an unstructured
        ``dim x dim`` block).

    Notes
    -----
    Scalings that commute with every member are block diagonal.  A
    scalar-repeated block of size ``k`` admits a full ``k x k`` scaling
    block and a full block admits ``lambda * I_k``.  For a Givone-Roesser
    state space with block sizes ``(n_1, ..., n_d)`` the uncertainty is
    ``Z(z) = diag(z_k I_{n_k})`` so ``from_dims`` builds scalar blocks and
    the commutant consists of full blocks, as the Lyapunov-type
    inequalities require.
    """

    def __init__(self, blocks):
        clean = []
        for dim, kind in blocks:
            dim = int(dim)
            if dim < 0:
                raise DimensionError("block dimensions must be non-negative")
            if kind not in ("scalar", "full"):
                raise ValueError(f"unknown block kind {kind!r}")
            clean.append((dim, kind))
        self.blocks = tuple(clean)
        self.n = sum(d for d, _ in clean)

    @classmethod
    def from_dims(cls, dims):
        return cls([(d, "scalar") for d in dims])

    @classmethod
    def full(cls, n):
        return cls([(n, "full")])

    @classmethod
    def scalar(cls, n):
        return cls([(n, "scalar")])

    def __repr__(self):
        return f"ScalingStructure({list(self.blocks)!r})"

    def __eq__(self, other):
        return isinstance(other, ScalingStructure) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def offsets(self):
        out = [0]
        for d, _ in self.blocks:
            out.append(out[-1] + d)
        return out

    def commutant_basis(self):
        """Hermitian basis of the commutant.

        Returns a list of ``(matrix, is_imaginary)`` pairs; the
        imaginary-part directions are dropped when data are real.
        """
        basis = []
        off = self.offsets()
        for (d, kind), o in zip(self.blocks, off):
            if kind == "full":
                E = np.zeros((self.n, self.n), dtype=complex)
                E[o:o + d, o:o + d] = np.eye(d)
                basis.append((E, False))
            else:
                for M, imag in _hermitian_basis(d):
                    E = np.zeros((self.n, self.n), dtype=complex)
                    E[o:o + d, o:o + d] = M
                    basis.append((E, imag))
        return basis

    def project(self, X):
        """Orthogonal projection of a Hermitian matrix onto the commutant."""
        X = nm.herm(nm.as_matrix(X))
        out = np.zeros_like(X)
        for (d, kind), o in zip(self.blocks, self.offsets()):
            blk = X[o:o + d, o:o + d]
            if kind == "full":
                out[o:o + d, o:o + d] = np.trace(blk).real / max(d, 1) * np.eye(d)
            else:
                out[o:o + d, o:o + d] = blk
        return out


def _hermitian_basis(m):
    out = []
    for i in range(m):
        E = np.zeros((m, m), dtype=complex)
        E[i, i] = 1.0
        out.append((E, False))
    for i in range(m):
        for j in range(i + 1, m):
            E = np.zeros((m, m), dtype=complex)
            E[i, j] = E[j, i] = 1.0
            out.append((E, False))
            E = np.zeros((m, m), dtype=complex)
            E[i, j] = -1j
            E[j, i] = 1j
            out.append((E, True))
    return out


def _matrix_basis(p, q):
    out = []
    for i in range(p):
        for j in range(q):
            E = np.zeros((p, q), dtype=complex)
            E[i, j] = 1.0
            out.append((E, False))
            out.append((1j * E, True))
    return out


@dataclass
class _Unknown:
    name: str
    kind: str
    shape: tuple
    basis: list
    structure: ScalingStructure | None = None


@dataclass
class _Constraint:
    fn: Callable
    sense: str
    name: str


@dataclass
class LmiSolution:
    """A strictly feasible point.

    Attributes
    ----------
    assignment : dict
        Unknown name to matrix value.
    margin : float
        Smallest eigenvalue slack over the strict constraints, in the
        raw units of the constraints (over the PSD constraints when no
        strict constraint is present).
    slacks : dict
        Eigenvalue slack of each constraint by name.
    t : float
        Normalized phase-I value reached.
    """

    assignment: dict
    margin: float
    slacks: dict = field(default_factory=dict)
    t: float = float("nan")
    iterations: int = 0

    def __getitem__(self, name):
        return self.assignment[name]


class LmiProblem:
    """Container for unknowns, matrix inequalities and linear equalities.

    Examples
    --------
    >>> p = LmiProblem()
    >>> p.add_hermitian("X", 1)
    >>> p.add_constraint(lambda v: v["X"] - np.eye(1), "neg")
    >>> p.add_constraint(lambda v: v["X"], "pos")
    >>> sol = solve_feasibility(p)
    >>> bool(0 < sol["X"][0, 0].real < 1)
    True
    """

    def __init__(self, size_cap=DEFAULT_SIZE_CAP):
        self.unknowns: list[_Unknown] = []
        self.constraints: list[_Constraint] = []
        self.equalities: list[tuple[Callable, str]] = []
        self.size_cap = size_cap

    def _check_name(self, name):
        if any(u.name == name for u in self.unknowns):
            raise ValueError(f"duplicate unknown {name!r}")

    def add_structured(self, name, structure: ScalingStructure):
        """Unknown ranging over the Hermitian commutant of ``structure``."""
        self._check_name(name)
        self.unknowns.append(_Unknown(name, "structured", (structure.n, structure.n),
                                      structure.commutant_basis(), structure))

    def add_hermitian(self, name, m):
        self._check_name(name)
        self.unknowns.append(_Unknown(name, "hermitian", (m, m), _hermitian_basis(m)))

    def add_matrix(self, name, p, q):
        self._check_name(name)
        self.unknowns.append(_Unknown(name, "matrix", (p, q), _matrix_basis(p, q)))

    def add_constraint(self, fn, sense="neg", name=None):
        """Add ``fn(values) < 0`` (``"neg"``), ``> 0`` (``"pos"``),
        ``>= 0`` (``"psd"``) or ``<= 0`` (``"nsd"``)."""
        if sense not in SENSES:
            raise ValueError(f"sense must be one of {SENSES}")
        self.constraints.append(_Constraint(fn, sense, name or f"c{len(self.constraints)}"))

    def add_equality(self, fn, name=None):
        """Add the affine equality ``fn(values) == 0`` (any array shape)."""
        self.equalities.append((fn, name or f"e{len(self.equalities)}"))

    def n_params(self, real=False):
        return sum(sum(1 for _, im in u.basis if not (real and im)) for u in self.unknowns)

    def zero_assignment(self):
        return {u.name: np.zeros(u.shape, dtype=complex) for u in self.unknowns}

    def evaluate(self, assignment):
        """Hermitian value of each constraint at ``assignment``."""
        return [nm.herm(nm.as_matrix(c.fn(assignment))) for c in self.constraints]

    def slacks(self, assignment):
        """Signed eigenvalue slack of each constraint (positive = satisfied)."""
        out = {}
        for c, F in zip(self.constraints, self.evaluate(assignment)):
            if F.size == 0:
                out[c.name] = np.inf
            elif c.sense in ("neg", "nsd"):
                out[c.name] = -nm.max_eig(nm.herm(F))
            else:
                out[c.name] = nm.min_eig(nm.herm(F))
        return out


def _affine_data(problem: LmiProblem):
    """Probe constraint callables on basis elements."""
    params = []  # (unknown index, basis matrix, is_imag)
    for k, u in enumerate(problem.unknowns):
        for E, im in u.basis:
            params.append((k, E, im))
    zero = problem.zero_assignment()

    def probe(fns):
        base = [np.asarray(f(zero), dtype=complex) for f in fns]
        dirs = []
        for k, E, _ in params:
            val = dict(zero)
            val[problem.unknowns[k].name] = E
            dirs.append([np.asarray(f(val), dtype=complex) - b for f, b in zip(fns, base)])
        return base, dirs

    cons_base, cons_dirs = probe([c.fn for c in problem.constraints])
    eq_base, eq_dirs = probe([f for f, _ in problem.equalities])
    return params, cons_base, cons_dirs, eq_base, eq_dirs


def _is_real(a, scale=1.0):
    return np.all(np.abs(np.imag(a)) <= 1e-14 * max(scale, 1.0))


def solve_feasibility(problem: LmiProblem, target_margin=1e-7, *, radius=1e4,
                      stop="first", max_newton=2000, opt_tol=1e-9):
    """Find a strictly feasible point of ``problem``.

    Parameters
    ----------
    problem : LmiProblem
    target_margin : float
        Required slack of every strict constraint after normalization.
    radius : float
        Bound on the Euclidean norm of the real parameter vector.
    stop : {"first", "optimal"}
        ``"first"`` returns as soon as the margin is reached; ``"optimal"``
        keeps following the central path to the best margin in the ball,
        which gives better centered certificates.

    Returns
    -------
    LmiSolution

    Raises
    ------
    Infeasible
        When the phase-I lower bound proves that no point in the ball
        reaches the requested margin.
    SizeCap
        When the number of real parameters exceeds ``problem.size_cap``.
    """
    if not problem.constraints and not problem.equalities:
        sol = problem.zero_assignment()
        return LmiSolution(sol, np.inf, {}, -np.inf, 0)

    params, cons_base, cons_dirs, eq_base, eq_dirs = _affine_data(problem)
    n_all = len(params)
    if n_all > 2 * problem.size_cap:
        raise SizeCap(f"{n_all} parameters exceed the size cap {problem.size_cap}")

    # constraint matrices, Hermitian check
    F0s, Fis = [], []
    for j, (c, F0) in enumerate(zip(problem.constraints, cons_base)):
        F0 = nm.as_matrix(F0)
        if F0.shape[0] != F0.shape[1]:
            raise DimensionError(f"constraint {c.name} is not square")
        Fi = np.array([nm.as_matrix(d[j]) for d in cons_dirs]).reshape(n_all, *F0.shape)
        scale = 1.0 + np.linalg.norm(F0) + (np.abs(Fi).max() if n_all else 0.0)
        for M in [F0, *Fi]:
            if np.linalg.norm(M - M.conj().T) > 1e-10 * scale:
                raise NonHermitian(f"constraint {c.name} is not Hermitian")
        F0s.append(nm.herm(F0))
        Fis.append(0.5 * (Fi + np.conj(np.swapaxes(Fi, 1, 2))))

    eq0 = np.concatenate([np.ravel(e) for e in eq_base]) if eq_base else np.zeros(0, complex)
    eqi = (np.array([np.concatenate([np.ravel(e) for e in d]) for d in eq_dirs])
           if eq_base else np.zeros((n_all, 0), complex))

    # drop imaginary directions when the maps commute with conjugation;
    # then the real part of any feasible point is feasible
    real = all(_is_real(F0) for F0 in F0s) and _is_real(eq0)
    if real:
        for idx, (_, _, im) in enumerate(params):
            part = (lambda a: 1j * a) if im else (lambda a: a)
            if not (all(_is_real(part(Fi[idx])) for Fi in Fis) and _is_real(part(eqi[idx]))):
                real = False
                break
    keep = [i for i, (_, _, im) in enumerate(params) if not (real and im)]
    if len(keep) > problem.size_cap:
        raise SizeCap(f"{len(keep)} real unknowns exceed the size cap {problem.size_cap}")
    dtype = float if real else complex
    F0s = [F.real.copy() if real else F for F in F0s]
    Fis = [(Fi[keep].real.copy() if real else Fi[keep]) for Fi in Fis]
    eqi = eqi[keep]

    # eliminate equalities: x = xp + Nb y
    n = len(keep)
    xp = np.zeros(n)
    Nb = np.eye(n)
    eq_res = 0.0
    if eq0.size:
        Meq = np.vstack([eqi.T.real, eqi.T.imag]) if eqi.size else np.zeros((2 * eq0.size, n))
        beq = -np.concatenate([eq0.real, eq0.imag])
        if n:
            xp, *_ = np.linalg.lstsq(Meq, beq, rcond=None)
        eq_res = float(np.max(np.abs(Meq @ xp - beq))) if beq.size else 0.0
        eq_scale = 1.0 + np.max(np.abs(beq)) + (np.max(np.abs(Meq)) if Meq.size else 0.0)
        if eq_res > 1e-10 * eq_scale:
            raise Infeasible("linear equalities are inconsistent", best=np.inf,
                             diagnostic={"equality_residual": eq_res})
        Nb = nm.orth_kernel(Meq, rtol=1e-12).real if n else np.zeros((0, 0))

    G0s, Gis, scales, senses = [], [], [], []
    for c, F0, Fi in zip(problem.constraints, F0s, Fis):
        if F0.shape[0] == 0:
            continue
        sgn = 1.0 if c.sense in ("neg", "nsd") else -1.0
        G0 = sgn * (F0 + np.tensordot(xp, Fi, axes=1)) if n else sgn * F0
        Gi = sgn * np.tensordot(Nb.T, Fi, axes=1) if n else np.zeros((0, *F0.shape), dtype)
        s = max(1.0, np.linalg.norm(G0, 2))
        G0s.append(G0 / s)
        Gis.append(Gi / s)
        scales.append(s)
        senses.append(c.sense)

    strict = any(s in ("neg", "pos") for s in senses)
    target = target_margin if strict else -PSD_TOL
    y, t, iters = _phase1(G0s, Gis, Nb.shape[1], radius, target, stop, max_newton,
                          opt_tol, strict)
    x = xp + Nb @ y if n else xp

    # reassemble the assignment from the kept parameters
    full = np.zeros(n_all)
    full[keep] = x
    values = problem.zero_assignment()
    for coef, (k, E, _) in zip(full, params):
        if coef != 0.0:
            values[problem.unknowns[k].name] = values[problem.unknowns[k].name] + coef * E
    for u in problem.unknowns:
        if u.kind != "matrix":
            values[u.name] = nm.herm(values[u.name])
        if real:
            values[u.name] = values[u.name].real.astype(complex)

    sl = problem.slacks(values)
    strict_names = [c.name for c in problem.constraints if c.sense in ("neg", "pos")]
    names = strict_names or [c.name for c in problem.constraints]
    margin = min((sl[nme] for nme in names), default=np.inf)
    return LmiSolution(values, float(margin), sl, float(t), iters)


def _barrier_parts(y, t, G0s, Gis, radius, dtype_real):
    """Cholesky factors of each slack ``t I - G(y)``; None if infeasible."""
    facs = []
    for G0, Gi in zip(G0s, Gis):
        S = t * np.eye(G0.shape[0]) - G0
        if len(y):
            S = S - np.tensordot(y, Gi, axes=1)
        try:
            L = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(L)):
            return None
        facs.append(L)
    b = radius * radius - float(y @ y)
    if b <= 0.0:
        return None
    return facs, b


def _phi(c, t, parts):
    facs, b = parts
    val = c * t - np.log(b)
    for L in facs:
        val -= 2.0 * np.sum(np.log(np.abs(np.diag(L))))
    return val


def _phase1(G0s, Gis, N, radius, target, stop, max_newton, opt_tol, strict):
    y = np.zeros(N)
    if not G0s:
        return y, -np.inf, 0
    t = max(np.linalg.eigvalsh(G0)[-1] for G0 in G0s)
    if stop == "first" and t < -target:
        return y, t, 0
    t = t + max(1.0, abs(t))
    nu = sum(G0.shape[0] for G0 in G0s) + 1.0
    c = 1.0
    iters = 0
    real = all(np.isrealobj(G) for G in G0s)

    def done_first(t):
        return stop == "first" and t < -target

    if done_first(t):
        return y, t, 0

    while True:
        # centering
        for _ in range(100):
            parts = _barrier_parts(y, t, G0s, Gis, radius, real)
            facs, b = parts
            g = np.zeros(N + 1)
            H = np.zeros((N + 1, N + 1))
            g[N] = c
            for L, G0, Gi in zip(facs, G0s, Gis):
                m = G0.shape[0]
                Linv = scipy.linalg.solve_triangular(L, np.eye(m), lower=True)
                # dS/dy_i = -G_i, dS/dt = I
                W = np.empty((N + 1, m, m), dtype=Linv.dtype)
                if N:
                    W[:N] = -(Linv @ Gi @ Linv.conj().T)
                W[N] = Linv @ Linv.conj().T
                Wf = W.reshape(N + 1, -1)
                g -= np.real(np.einsum("kii->k", W))
                H += np.real(Wf.conj() @ Wf.T)
            g[:N] += 2.0 * y / b
            H[:N, :N] += 2.0 * np.eye(N) / b + 4.0 * np.outer(y, y) / (b * b)
            H = 0.5 * (H + H.T)
            try:
                cf = scipy.linalg.cho_factor(H)
                step = -scipy.linalg.cho_solve(cf, g)
            except (np.linalg.LinAlgError, ValueError):
                step = -np.linalg.lstsq(H, g, rcond=None)[0]
            dec = float(-g @ step)
            if dec < 1e-9:
                break
            f0 = _phi(c, t, parts)
            s = 1.0 / (1.0 + np.sqrt(max(dec, 0.0))) if dec > 0.25 else 1.0
            accepted = False
            for _ls in range(60):
                yn = y + s * step[:N]
                tn = t + s * step[N]
                pn = _barrier_parts(yn, tn, G0s, Gis, radius, real)
                if pn is not None and _phi(c, tn, pn) <= f0 - 0.25 * s * dec:
                    accepted = True
                    break
                s *= 0.5
            iters += 1
            if not accepted:
                break
            y, t = yn, tn
            if done_first(t):
                return y, t, iters
            if iters > max_newton:
                raise NoConvergence("barrier method exceeded its Newton step budget")
            if dec < 1e-3:
                break
        gap = nu / c
        lower = t - gap
        if strict:
            if lower > -target:
                raise Infeasible("no point reaches the requested margin", best=float(t),
                                 diagnostic={"lower_bound": float(lower)})
            if gap < opt_tol * max(1.0, abs(t)):
                if t < -target:
                    return y, t, iters
                raise Infeasible("optimal margin is below the target", best=float(t),
                                 diagnostic={"lower_bound": float(lower)})
        else:
            if t <= -target and (stop == "first" or gap < opt_tol):
                return y, t, iters
            if lower > -target:
                raise Infeasible("positive semidefinite constraints cannot be met",
                                 best=float(t), diagnostic={"lower_bound": float(lower)})
            if gap < opt_tol * 1e-3:
                if t <= -target:
                    return y, t, iters
                raise Infeasible("positive semidefinite constraints cannot be met",
                                 best=float(t), diagnostic={"lower_bound": float(lower)})
        c *= 8.0


# -- Finsler constructions ---------------------------------------------------

def _kernel_neg(H, K, tol=0.0):
    if K.shape[1] == 0:
        return True
    return nm.max_eig(nm.herm(K.conj().T @ H @ K)) < -tol


def finsler_scalar(R, H, *, max_doublings=40):
    """Scalar ``mu`` with ``mu R* R - H > 0``.

    Such ``mu`` exists iff the compression of ``H`` to the kernel of ``R``
    is negative definite; ``None`` is returned otherwise.

    Examples
    --------
    >>> finsler_scalar(np.eye(2), np.eye(2))
    2.0
    >>> finsler_scalar(np.array([[1.0, 0.0]]), np.diag([-1.0, 1.0])) is None
    True
    """
    R = nm.as_matrix(R)
    H = nm.check_hermitian(H)
    if R.shape[1] != H.shape[0]:
        raise DimensionError("R and H have incompatible sizes")
    H = nm.herm(H)
    _, s, Vh = nm.row_space(R)
    K = nm.orth_kernel(R)
    if not _kernel_neg(H, K):
        return None
    if s.size == 0:
        return 1.0
    H11 = Vh @ H @ Vh.conj().T
    if K.shape[1]:
        H12 = Vh @ H @ K
        H22 = K.conj().T @ H @ K
        H11 = H11 - H12 @ np.linalg.solve(H22, H12.conj().T)
    Si = np.diag(1.0 / s)
    lam = nm.max_eig(nm.herm(Si @ H11 @ Si))
    mu = 2.0 * lam if lam > 0 else 1.0
    RR = R.conj().T @ R
    for _ in range(max_doublings + 1):
        if nm.min_eig(mu * RR - H) > 0:
            return float(mu)
        mu *= 2.0
    return None


def finsler_complete(H, R, S, *, max_doublings=40):
    """Matrix ``J`` with ``H + R* J* S + S* J R < 0``.

    Parameters
    ----------
    H : (n, n) Hermitian
    R : (p, n)
    S : (q, n)

    Returns
    -------
    J : (q, p) ndarray or None
        ``None`` exactly when the compression of ``H`` to the kernel of
        ``R`` or to the kernel of ``S`` fails to be negative definite.

    Notes
    -----
    Both ``R`` and ``S`` are first reduced to orthonormal rows.  With
    ``rho`` from `finsler_scalar` applied to ``S`` the matrix
    ``Phi = (rho S* S - H)^{-1}`` is positive definite and

        J = -rho S Phi R* (R Phi R*)^{-1}

    solves the reduced problem.  ``rho`` is doubled until the strict
    inequality verifies.
    """
    H = nm.check_hermitian(H)
    H = nm.herm(H)
    R = nm.as_matrix(R)
    S = nm.as_matrix(S)
    n = H.shape[0]
    if R.shape[1] != n or S.shape[1] != n:
        raise DimensionError("R, S and H have incompatible sizes")
    p, q = R.shape[0], S.shape[0]
    if not _kernel_neg(H, nm.orth_kernel(R)) or not _kernel_neg(H, nm.orth_kernel(S)):
        return None
    WR, sR, Rh = nm.row_space(R)
    WS, sS, Sh = nm.row_space(S)
    if sR.size == 0 or sS.size == 0:
        return np.zeros((q, p), dtype=complex) if nm.max_eig(H) < 0 else None

    rho = finsler_scalar(Sh, H)
    if rho is None:
        return None

    def lift(Jh):
        return WS @ np.diag(1.0 / sS) @ Jh @ np.diag(1.0 / sR) @ WR.conj().T

    def check(J):
        M = H + R.conj().T @ J.conj().T @ S + S.conj().T @ J @ R
        return nm.max_eig(nm.herm(M)) < 0

    for _ in range(max_doublings + 1):
        Phi = np.linalg.inv(nm.herm(rho * Sh.conj().T @ Sh - H))
        Phi = nm.herm(Phi)
        Jh = -rho * Sh @ Phi @ Rh.conj().T @ np.linalg.inv(Rh @ Phi @ Rh.conj().T)
        J = lift(Jh)
        if check(J):
            return J
        rho *= 2.0
    return None


# -- D-scaling bound ---------------------------------------------------------

def structured_lyapunov(A, structure: ScalingStructure, target_margin=1e-7, stop="first",
                        radius=1e4):
    """Solve ``X > 0``, ``A X A* - X < 0`` with ``X`` in the commutant.

    Returns the `LmiSolution` or raises `Infeasible`.
    """
    A = nm.as_matrix(A)
    n = A.shape[0]
    if structure.n != n:
        raise DimensionError("structure does not match A")
    prob = LmiProblem()
    prob.add_structured("X", structure)
    prob.add_constraint(lambda v: v["X"], "pos", "X>0")
    prob.add_constraint(lambda v: A @ v["X"] @ A.conj().T - v["X"], "neg", "stein")
    return solve_feasibility(prob, target_margin, stop=stop, radius=radius)


def scaled_norm_bisect(A, structure: ScalingStructure, tol=1e-4):
    """D-scaling upper bound on the structured singular value.

    Bisects on ``gamma`` for the existence of ``X > 0`` in the commutant
    of ``structure`` with ``A X A* - gamma^2 X < 0``.

    Returns
    -------
    muhat : float
        Midpoint of the final bracket.
    X : ndarray
        Witness at the upper end of the bracket.  When the infimum is
        not attained only ``gamma > muhat`` have witnesses.
    """
    A = nm.as_matrix(A)
    if A.shape[0] != A.shape[1] or structure.n != A.shape[0]:
        raise DimensionError("structure does not match A")
    n = A.shape[0]
    sig = nm.largest_singular_value(A)
    if n == 0 or sig == 0.0:
        return 0.0, np.eye(n, dtype=complex)
    An = A / sig
    # rho(A) <= muhat for every structure, and no X exists at gamma = rho
    lo, hi = nm.spectral_radius(An), 1.0 + tol / sig
    X = np.eye(n, dtype=complex)
    tol_n = tol / sig
    it = 0
    while hi - lo > tol_n:
        it += 1
        if it > 200:
            raise NoConvergence("bisection did not terminate")
        mid = 0.5 * (lo + hi)
        try:
            sol = structured_lyapunov(An / mid, structure)
            hi = mid
            X = sol["X"]
        except Infeasible:
            lo = mid
    return float(0.5 * (lo + hi) * sig), X
