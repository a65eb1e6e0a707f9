"""Givone-Roesser realizations.

A realization over the structured space ``X = X_1 + ... + X_d`` has
transfer function ``G(z) = D + C (I - Z(z) A)^{-1} Z(z) B`` with
``Z(z) = diag(z_1 I_{n_1}, ..., z_d I_{n_d})``.  Inputs split as
``(w, u)`` and outputs as ``(z, y)``; the sizes are ``io = (nw, nu, nz, ny)``.

Composite realizations (closed loops, products, general interconnections)
keep the state ordered variable by variable: the ``k``-th block of the
result is the direct sum of the ``k``-th blocks of the parts.  This keeps
``Z(z)`` block diagonal and makes the scaling commutant of the composite a
plain block-diagonal structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import numerics as nm
from .errors import (D22NotZero, DimensionError, IllPosed, Infeasible, SchemaError, Singular,
                     SingularD, SingularPencil)
from .lmi import ScalingStructure, structured_lyapunov

GRID_CAP_K = 16


class StructuredSpace:
    """Block sizes ``(n_1, ..., n_d)`` of a Givone-Roesser state space."""

    __slots__ = ("dims",)

    def __init__(self, dims: Sequence[int]):
        dims = tuple(int(n) for n in dims)
        if len(dims) < 1:
            raise DimensionError("at least one variable is required")
        if any(n < 0 for n in dims):
            raise DimensionError("block dimensions must be non-negative")
        object.__setattr__(self, "dims", dims)

    def __setattr__(self, key, value):
        raise AttributeError("StructuredSpace is immutable")

    @property
    def d(self):
        return len(self.dims)

    @property
    def n(self):
        return sum(self.dims)

    def offsets(self):
        out = [0]
        for n in self.dims:
            out.append(out[-1] + n)
        return out

    def block(self, k):
        off = self.offsets()
        return slice(off[k], off[k + 1])

    def structure(self) -> ScalingStructure:
        """Uncertainty structure of ``Z(z)``; its commutant is the scaling set."""
        return ScalingStructure.from_dims(self.dims)

    def __eq__(self, other):
        return isinstance(other, StructuredSpace) and self.dims == other.dims

    def __hash__(self):
        return hash(self.dims)

    def __repr__(self):
        return f"StructuredSpace({list(self.dims)})"


def _as_space(space) -> StructuredSpace:
    return space if isinstance(space, StructuredSpace) else StructuredSpace(space)


class Realization:
    """Partitioned system matrix ``[[A, B1, B2], [C1, D11, D12], [C2, D21, D22]]``.

    Parameters
    ----------
    space : StructuredSpace or sequence of int
    A, B, C, D : array_like
        ``A`` is ``n x n``, ``B`` is ``n x (nw + nu)``, ``C`` is
        ``(nz + ny) x n`` and ``D`` is ``(nz + ny) x (nw + nu)``.
    io : tuple of int, optional
        ``(nw, nu, nz, ny)``.  Defaults to a single input/output block,
        ``(B.shape[1], 0, C.shape[0], 0)``.

    Instances are immutable; the stored arrays are read-only.
    """

    __slots__ = ("space", "A", "B", "C", "D", "io")

    def __init__(self, space, A, B, C, D, io=None):
        space = _as_space(space)
        n = space.n
        A = np.atleast_2d(np.asarray(A, dtype=complex)) if np.size(A) else np.zeros((n, n), complex)
        B = np.asarray(B, dtype=complex)
        C = np.asarray(C, dtype=complex)
        D = np.atleast_2d(np.asarray(D, dtype=complex))
        p, m = D.shape
        if B.size == 0:
            B = np.zeros((n, m), complex)
        if C.size == 0:
            C = np.zeros((p, n), complex)
        B = B.reshape(n, -1) if B.ndim != 2 else B
        C = C.reshape(-1, n) if C.ndim != 2 else C
        if A.shape != (n, n) or B.shape != (n, m) or C.shape != (p, n):
            raise DimensionError(
                f"incoherent shapes A{A.shape} B{B.shape} C{C.shape} D{D.shape} for n={n}")
        if io is None:
            io = (m, 0, p, 0)
        io = tuple(int(v) for v in io)
        if len(io) != 4 or min(io) < 0 or io[0] + io[1] != m or io[2] + io[3] != p:
            raise DimensionError(f"io split {io} does not match D of shape {D.shape}")
        for name, val in (("space", space), ("io", io)):
            object.__setattr__(self, name, val)
        for name, val in (("A", A), ("B", B), ("C", C), ("D", D)):
            val = np.array(val, dtype=complex, copy=True)
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    def __setattr__(self, key, value):
        raise AttributeError("Realization is immutable")

    def __repr__(self):
        return f"Realization(dims={list(self.space.dims)}, io={self.io})"

    # blocks
    @property
    def n(self):
        return self.space.n

    @property
    def n_in(self):
        return self.D.shape[1]

    @property
    def n_out(self):
        return self.D.shape[0]

    @property
    def B1(self):
        return self.B[:, :self.io[0]]

    @property
    def B2(self):
        return self.B[:, self.io[0]:]

    @property
    def C1(self):
        return self.C[:self.io[2], :]

    @property
    def C2(self):
        return self.C[self.io[2]:, :]

    @property
    def D11(self):
        return self.D[:self.io[2], :self.io[0]]

    @property
    def D12(self):
        return self.D[:self.io[2], self.io[0]:]

    @property
    def D21(self):
        return self.D[self.io[2]:, :self.io[0]]

    @property
    def D22(self):
        return self.D[self.io[2]:, self.io[0]:]

    def system_matrix(self):
        return np.block([[self.A, self.B], [self.C, self.D]])

    def with_io(self, io):
        return Realization(self.space, self.A, self.B, self.C, self.D, io)

    def as_single(self):
        """Same realization viewed as one input/output block."""
        return self.with_io(None)

    def block(self, rows, cols):
        """Sub-realization for output ``rows`` and input ``cols`` (index arrays or slices)."""
        return Realization(self.space, self.A, self.B[:, cols], self.C[rows, :],
                           self.D[rows, :][:, cols])

    def part(self, name):
        """``"11"``, ``"12"``, ``"21"`` or ``"22"`` transfer block."""
        nw, nu, nz, ny = self.io
        rows = {"1": slice(0, nz), "2": slice(nz, nz + ny)}[name[0]]
        cols = {"1": slice(0, nw), "2": slice(nw, nw + nu)}[name[1]]
        return self.block(rows, cols)

    def __call__(self, *z):
        if len(z) == 1 and np.ndim(z[0]) > 0:
            z = tuple(z[0])
        return eval_transfer(self, z)

    # serialization
    def to_dict(self):
        return realization_to_dict(self)

    @classmethod
    def from_dict(cls, data):
        return realization_from_dict(data)

    @classmethod
    def static(cls, D, d=1, io=None):
        """State-free realization with constant transfer ``D``."""
        D = np.atleast_2d(np.asarray(D, dtype=complex))
        return cls([0] * d, np.zeros((0, 0)), np.zeros((0, D.shape[1])),
                   np.zeros((D.shape[0], 0)), D, io)


@dataclass(frozen=True)
class PointPolydisk:
    """A point ``z = (z_1, ..., z_d)`` of ``C^d``."""

    z: tuple

    def __init__(self, z):
        object.__setattr__(self, "z", tuple(complex(v) for v in np.ravel(z)))

    @property
    def d(self):
        return len(self.z)

    def in_closed_polydisk(self, tol=0.0):
        return all(abs(v) <= 1.0 + tol for v in self.z)

    def in_open_polydisk(self):
        return all(abs(v) < 1.0 for v in self.z)


@dataclass(frozen=True)
class OperatorTuple:
    """A tuple of ``d`` square ``k x k`` matrices standing in for operators."""

    deltas: tuple

    def __init__(self, deltas):
        ds = tuple(nm.as_matrix(dl).copy() for dl in deltas)
        if not ds:
            raise DimensionError("an operator tuple needs at least one entry")
        k = ds[0].shape[0]
        for dl in ds:
            if dl.shape != (k, k):
                raise DimensionError("all operators must share one square size")
        if k > GRID_CAP_K:
            raise DimensionError(f"truncation size {k} exceeds the cap {GRID_CAP_K}")
        for dl in ds:
            dl.setflags(write=False)
        object.__setattr__(self, "deltas", ds)

    @property
    def d(self):
        return len(self.deltas)

    @property
    def k(self):
        return self.deltas[0].shape[0]

    def is_contractive(self, tol=1e-12):
        return all(nm.largest_singular_value(dl) <= 1.0 + tol for dl in self.deltas)

    @classmethod
    def scalar(cls, z, k):
        return cls([complex(v) * np.eye(k) for v in z])


def random_contractive_tuple(d, k, rng, radius=1.0):
    """Random tuple of ``d`` complex ``k x k`` matrices with norm ``radius * u``, ``u`` in (0, 1]."""
    ds = []
    for _ in range(d):
        M = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        ds.append(radius * rng.uniform(0.0, 1.0) ** 0.25 * M / nm.largest_singular_value(M))
    return OperatorTuple(ds)


def _point(z, d):
    z = np.array([complex(v) for v in (z.z if isinstance(z, PointPolydisk) else np.ravel(z))])
    if z.size != d:
        raise DimensionError(f"point has {z.size} coordinates, space has {d} variables")
    return z


def z_pencil(space, z):
    """``Z(z) = diag(z_1 I_{n_1}, ..., z_d I_{n_d})``."""
    space = _as_space(space)
    z = _point(z, space.d)
    return np.diag(np.repeat(z, space.dims)).astype(complex)


def eval_transfer(G: Realization, z):
    """Value ``D + C (I - Z(z) A)^{-1} Z(z) B`` at the point ``z``.

    Raises
    ------
    SingularPencil
        When ``I - Z(z) A`` is numerically singular.
    """
    Z = z_pencil(G.space, z)
    n = G.n
    if n == 0:
        return np.array(G.D, dtype=complex)
    M = np.eye(n) - Z @ G.A
    try:
        X, cond = nm.solve_linear(M, Z @ G.B, return_cond=True)
    except Singular as exc:
        raise SingularPencil("I - Z(z)A is singular", cond=exc.cond) from None
    if cond > 1e14:
        raise SingularPencil("I - Z(z)A is singular", cond=cond)
    return G.D + G.C @ X


def eval_nc(G: Realization, delta: OperatorTuple):
    """Evaluate the realization on an operator tuple.

    Computes ``D (x) I + (C (x) I)(I - Z(delta)(A (x) I))^{-1} Z(delta)(B (x) I)``
    with ``Z(delta) = diag(I_{n_j} (x) delta_j)``.
    """
    if not isinstance(delta, OperatorTuple):
        delta = OperatorTuple(delta)
    if delta.d != G.space.d:
        raise DimensionError("tuple length does not match the number of variables")
    k = delta.k
    Ik = np.eye(k)
    n = G.n
    Dk = np.kron(G.D, Ik)
    if n == 0:
        return Dk
    Z = np.zeros((n * k, n * k), dtype=complex)
    off = G.space.offsets()
    for j, nj in enumerate(G.space.dims):
        s = slice(off[j] * k, off[j + 1] * k)
        Z[s, s] = np.kron(np.eye(nj), delta.deltas[j])
    Ak = np.kron(G.A, Ik)
    M = np.eye(n * k) - Z @ Ak
    try:
        X, cond = nm.solve_linear(M, Z @ np.kron(G.B, Ik), return_cond=True)
    except Singular as exc:
        raise SingularPencil("I - Z(delta)(A x I) is singular", cond=exc.cond) from None
    if cond > 1e14:
        raise SingularPencil("I - Z(delta)(A x I) is singular", cond=cond)
    return Dk + np.kron(G.C, Ik) @ X


def nc_pencil_condition(A, space, delta: OperatorTuple):
    """Condition number of ``I - Z(delta)(A (x) I)``."""
    G = Realization(space, A, np.zeros((_as_space(space).n, 0)), np.zeros((0, _as_space(space).n)),
                    np.zeros((0, 0)))
    k = delta.k
    n = G.n
    Z = np.zeros((n * k, n * k), dtype=complex)
    off = G.space.offsets()
    for j, nj in enumerate(G.space.dims):
        s = slice(off[j] * k, off[j + 1] * k)
        Z[s, s] = np.kron(np.eye(nj), delta.deltas[j])
    M = np.eye(n * k) - Z @ np.kron(G.A, np.eye(k))
    return float(np.linalg.cond(M)) if n else 1.0


# -- composition ---------------------------------------------------------

def _common_d(blocks):
    ds = {b.space.d for b in blocks if b.n > 0}
    if len(ds) > 1:
        raise DimensionError("realizations have different numbers of variables")
    return ds.pop() if ds else max(b.space.d for b in blocks)


def _dims(G, d):
    if G.space.d == d:
        return G.space.dims
    if G.n == 0:
        return (0,) * d
    raise DimensionError("realizations have different numbers of variables")


def _interleave(blocks, d):
    """Permutation from stacked block states to variable-major order."""
    dims = [_dims(b, d) for b in blocks]
    starts = np.cumsum([0] + [b.n for b in blocks])
    order = []
    new_dims = []
    for k in range(d):
        cnt = 0
        for bi, dm in enumerate(dims):
            o = starts[bi] + sum(dm[:k])
            order.extend(range(o, o + dm[k]))
            cnt += dm[k]
        new_dims.append(cnt)
    return np.array(order, dtype=int), tuple(new_dims)


def interconnect(blocks, My, Me, Ny, Ne, io=None):
    """General linear interconnection of realizations.

    With all block outputs stacked as ``y`` and block inputs as ``u``,
    the wiring is ``u = My y + Me e`` and the external output is
    ``out = Ny y + Ne e``, where ``e`` is the external input.

    Raises
    ------
    IllPosed
        When the algebraic loop ``I - D My`` is singular.
    """
    d = _common_d(blocks)
    A = _blkdiag([b.A for b in blocks])
    B = _blkdiag([b.B for b in blocks])
    C = _blkdiag([b.C for b in blocks])
    D = _blkdiag([b.D for b in blocks])
    My = np.atleast_2d(np.asarray(My, dtype=complex)).reshape(D.shape[1], D.shape[0])
    Me = np.asarray(Me, dtype=complex).reshape(D.shape[1], -1)
    Ny = np.asarray(Ny, dtype=complex).reshape(-1, D.shape[0])
    Ne = np.asarray(Ne, dtype=complex).reshape(Ny.shape[0], Me.shape[1])
    p = D.shape[0]
    try:
        Phi = nm.solve_linear(np.eye(p) - D @ My, np.eye(p)) if p else np.zeros((0, 0))
    except Singular:
        raise IllPosed("interconnection is not well posed") from None
    yC = Phi @ C
    yE = Phi @ D @ Me
    Ac = A + B @ My @ yC
    Bc = B @ (My @ yE + Me)
    Cc = Ny @ yC
    Dc = Ny @ yE + Ne
    perm, dims = _interleave(blocks, d)
    return Realization(dims, Ac[np.ix_(perm, perm)], Bc[perm, :], Cc[:, perm], Dc, io)


def _blkdiag(mats):
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols), dtype=complex)
    r = c = 0
    for m in mats:
        out[r:r + m.shape[0], c:c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def series(G1: Realization, G2: Realization):
    """Realization of the product ``G1(z) G2(z)``."""
    if G1.n_in != G2.n_out:
        raise DimensionError("inner dimensions do not agree")
    p1, m1 = G1.D.shape
    p2, m2 = G2.D.shape
    My = np.zeros((m1 + m2, p1 + p2))
    My[:m1, p1:] = np.eye(p2)
    Me = np.zeros((m1 + m2, m2))
    Me[m1:, :] = np.eye(m2)
    Ny = np.zeros((p1, p1 + p2))
    Ny[:, :p1] = np.eye(p1)
    return interconnect([G1, G2], My, Me, Ny, np.zeros((p1, m2)))


def parallel(G1: Realization, G2: Realization, sign=1.0):
    """Realization of ``G1(z) + sign * G2(z)``."""
    if G1.D.shape != G2.D.shape:
        raise DimensionError("operands have different sizes")
    p, m = G1.D.shape
    My = np.zeros((2 * m, 2 * p))
    Me = np.vstack([np.eye(m), np.eye(m)])
    Ny = np.hstack([np.eye(p), sign * np.eye(p)])
    return interconnect([G1, G2], My, Me, Ny, np.zeros((p, m)))


def invert(G: Realization):
    """Realization of ``G(z)^{-1}``: ``{A - B D^-1 C, B D^-1, -D^-1 C, D^-1}``."""
    p, m = G.D.shape
    if p != m:
        raise SingularD("D must be square")
    try:
        Di, cond = nm.solve_linear(G.D, np.eye(m), return_cond=True) if m else (np.zeros((0, 0)), 1.0)
    except Singular as exc:
        raise SingularD("D is singular", cond=exc.cond) from None
    if cond > 1e13:
        raise SingularD("D is singular", cond=cond)
    return Realization(G.space, G.A - G.B @ Di @ G.C, G.B @ Di, -Di @ G.C, Di)


def scale(G: Realization, left=None, right=None):
    """Realization of ``left @ G(z) @ right`` for constant matrices."""
    B, C, D = G.B, G.C, G.D
    if left is not None:
        left = nm.as_matrix(left)
        C, D = left @ C, left @ D
    if right is not None:
        right = nm.as_matrix(right)
        B, D = B @ right, D @ right
    return Realization(G.space, G.A, B, C, D)


def stack(blocks_grid):
    """Block matrix ``[[G_11, G_12, ...], ...]`` of realizations."""
    rows = len(blocks_grid)
    cols = len(blocks_grid[0])
    flat = [blk for row in blocks_grid for blk in row]
    p = [blocks_grid[i][0].n_out for i in range(rows)]
    m = [blocks_grid[0][j].n_in for j in range(cols)]
    for i in range(rows):
        for j in range(cols):
            if blocks_grid[i][j].D.shape != (p[i], m[j]):
                raise DimensionError("block sizes are inconsistent")
    P, M = sum(p), sum(m)
    tot_in = sum(b.n_in for b in flat)
    tot_out = sum(b.n_out for b in flat)
    Me = np.zeros((tot_in, M))
    Ny = np.zeros((P, tot_out))
    ii = oo = 0
    for i in range(rows):
        for j in range(cols):
            b = blocks_grid[i][j]
            Me[ii:ii + b.n_in, sum(m[:j]):sum(m[:j + 1])] = np.eye(b.n_in)
            Ny[sum(p[:i]):sum(p[:i + 1]), oo:oo + b.n_out] = np.eye(b.n_out)
            ii += b.n_in
            oo += b.n_out
    return interconnect(flat, np.zeros((tot_in, tot_out)), Me, Ny, np.zeros((P, M)))


def lft(G: Realization, K: Realization, io=None):
    """Lower fractional map of ``G`` (with its ``io`` split) and ``K``.

    ``K`` maps the measurement ``y`` to the control ``u``.  Unlike
    `close_loop` a nonzero ``D22`` is allowed provided ``I - D22 D_K``
    is invertible.
    """
    nw, nu, nz, ny = G.io
    if K.n_in != ny or K.n_out != nu:
        raise DimensionError(f"controller must map {ny} measurements to {nu} controls")
    pg, mg = G.D.shape
    pk, mk = K.D.shape
    My = np.zeros((mg + mk, pg + pk))
    My[nw:mg, pg:] = np.eye(nu)          # u = K output
    My[mg:, nz:pg] = np.eye(ny)          # K input = y
    Me = np.zeros((mg + mk, nw))
    Me[:nw, :] = np.eye(nw)
    Ny = np.zeros((nz, pg + pk))
    Ny[:, :nz] = np.eye(nz)
    return interconnect([G, K], My, Me, Ny, np.zeros((nz, nw)), io)


def close_loop(G: Realization, K: Realization):
    """Closed loop of plant ``G`` and controller ``K`` (requires ``D22 = 0``).

    The system matrix is

        A_cl = [[A + B2 DK C2, B2 CK], [BK C2, AK]]
        B_cl = [[B1 + B2 DK D21], [BK D21]]
        C_cl = [C1 + D12 DK C2, D12 CK]
        D_cl = D11 + D12 DK D21

    with the state reordered so that block ``k`` is ``X_k + X_{K,k}``.
    """
    nw, nu, nz, ny = G.io
    if np.any(np.abs(G.D22) > 0.0):
        raise D22NotZero("closed-loop assembly requires D22 = 0")
    if K.n_in != ny or K.n_out != nu:
        raise DimensionError(f"controller must map {ny} measurements to {nu} controls")
    d = _common_d([G, K])
    AK, BK, CK, DK = K.A, K.B, K.C, K.D
    A, B1, B2, C1, C2 = G.A, G.B1, G.B2, G.C1, G.C2
    D11, D12, D21 = G.D11, G.D12, G.D21
    Acl = np.block([[A + B2 @ DK @ C2, B2 @ CK], [BK @ C2, AK]])
    Bcl = np.vstack([B1 + B2 @ DK @ D21, BK @ D21])
    Ccl = np.hstack([C1 + D12 @ DK @ C2, D12 @ CK])
    Dcl = D11 + D12 @ DK @ D21
    perm, dims = _interleave([G, K], d)
    return Realization(dims, Acl[np.ix_(perm, perm)], Bcl[perm, :], Ccl[:, perm], Dcl)


def torus_points(d, N):
    """All ``N ** d`` points ``exp(2 pi i k / N)`` of the distinguished boundary."""
    ang = np.exp(2j * np.pi * np.arange(N) / N)
    mesh = np.meshgrid(*([ang] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def torus_sup_norm(G: Realization, N=32, threads=1):
    """Largest singular value of ``G`` over the ``N ** d`` torus grid.

    Returns ``(sup, points, sigmas)``; singular pencils give ``inf``.
    """
    pts = torus_points(G.space.d, N)

    def sig(z):
        try:
            return nm.largest_singular_value(eval_transfer(G, z))
        except SingularPencil:
            return np.inf

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = np.array(list(ex.map(sig, pts)))
    else:
        vals = np.array([sig(z) for z in pts])
    return float(vals.max()) if vals.size else 0.0, pts, vals


# -- stability -------------------------------------------------------------

@dataclass(frozen=True)
class HautusVerdict:
    """Result of the sampled Hautus test.

    ``passed`` is a sampled verdict, not a certificate.  ``z`` is the
    worst point found and ``min_singular`` the smallest singular value of
    ``I - Z(z) A`` there; ``worst_mu`` is the largest modulus of the
    last-variable eigenvalues (failure when it reaches 1).
    """

    passed: bool
    z: tuple
    min_singular: float
    worst_mu: float

    @property
    def kind(self):
        return "PassGrid" if self.passed else "FailAt"

    def to_dict(self):
        return {"verdict": self.kind, "z": [[v.real, v.imag] for v in self.z],
                "min_singular": self.min_singular, "worst_mu": self.worst_mu}


def default_grid(d):
    return 64 if d <= 2 else (16 if d == 3 else 8)


def _disk_grid(N):
    radii = np.linspace(0.0, 1.0, N // 8 + 1)
    ang = np.exp(2j * np.pi * np.arange(N) / N)
    pts = np.concatenate([[0.0], (radii[1:, None] * ang[None, :]).ravel()])
    return pts


def hautus_stable_grid(A, space, grid_per_axis=None, tol=1e-12):
    """Sampled test that ``I - Z(z) A`` is invertible on the closed polydisk.

    The first ``d - 1`` variables range over a polar grid of the closed
    unit disk (``N // 8 + 1`` radii, ``N`` angles).  For each grid point
    the last variable is handled exactly: with ``M = I - Z'(z') A`` the
    pencil is singular iff ``1 / z_d`` is an eigenvalue of
    ``P A M^{-1} P^T`` where ``P`` selects the last block.  For ``d = 1``
    the test is exact (``rho(A) < 1``).

    Returns
    -------
    HautusVerdict
    """
    space = _as_space(space)
    A = nm.as_matrix(A)
    n = space.n
    if A.shape != (n, n):
        raise DimensionError("A does not match the space")
    d = space.d
    N = grid_per_axis or default_grid(d)
    if n == 0:
        return HautusVerdict(True, (0j,) * d, np.inf, 0.0)
    sl = space.block(d - 1)
    if d == 1:
        grid = np.zeros((1, 0), dtype=complex)
    else:
        g = _disk_grid(N)
        mesh = np.meshgrid(*([g] * (d - 1)), indexing="ij")
        grid = np.stack([m.ravel() for m in mesh], axis=1)
    zrep = np.repeat(grid, list(space.dims[:-1]), axis=1) if d > 1 else grid
    P = grid.shape[0]
    Zp = np.zeros((P, n), dtype=complex)
    off_last = space.offsets()[d - 1]
    Zp[:, :off_last] = zrep
    M0 = np.eye(n)[None] - Zp[:, :, None] * A[None]
    # singular grid points of the leading block fail immediately
    sv_min = np.linalg.svd(M0, compute_uv=False)[:, -1]
    bad = sv_min <= 1e-10 * max(1.0, np.linalg.norm(A, 2))
    worst_mu = np.zeros(P)
    mu_arg = np.zeros(P, dtype=complex)
    nd = space.dims[-1]
    good = ~bad
    if nd > 0 and np.any(good):
        rhs = np.broadcast_to(np.eye(n)[:, sl], (int(good.sum()), n, nd))
        Minv_cols = np.linalg.solve(M0[good], rhs)
        T = A[sl, :][None] @ Minv_cols
        lam = np.linalg.eigvals(T)
        idx = np.argmax(np.abs(lam), axis=1)
        best = lam[np.arange(lam.shape[0]), idx]
        worst_mu[good] = np.abs(best)
        mu_arg[good] = best
    worst_mu[bad] = np.inf
    i = int(np.argmax(worst_mu))
    mu = worst_mu[i]
    passed = bool(mu < 1.0 - tol)
    zl = grid[i]
    if bad[i]:
        zd = 0.0
    elif mu > 0:
        zd = 1.0 / mu_arg[i] if not passed else np.conj(mu_arg[i]) / abs(mu_arg[i])
    else:
        zd = 1.0
    zpt = tuple(complex(v) for v in zl) + (complex(zd),)
    Zf = z_pencil(space, zpt)
    smin = float(np.linalg.svd(np.eye(n) - Zf @ A, compute_uv=False)[-1])
    return HautusVerdict(passed, zpt, smin, float(mu))


def scaled_stable_solution(A, space, target_margin=1e-7, stop="first"):
    """`LmiSolution` of the scaled Stein inequality, or None."""
    space = _as_space(space)
    A = nm.as_matrix(A)
    if A.shape != (space.n, space.n):
        raise DimensionError("A does not match the space")
    if space.n == 0:
        return None
    try:
        return structured_lyapunov(A, space.structure(), target_margin, stop=stop)
    except Infeasible:
        return None


def scaled_stable(A, space, target_margin=1e-7):
    """Structured ``X > 0`` with ``A X A* - X < 0``, or None.

    ``X`` is block diagonal with full blocks matching ``space``.
    """
    space = _as_space(space)
    if space.n == 0:
        return np.zeros((0, 0), dtype=complex)
    sol = scaled_stable_solution(A, space, target_margin)
    return None if sol is None else sol["X"]


def is_scaled_contraction(A, X):
    """``sigma(Q^{-1} A Q) < 1`` for ``Q = X^{1/2}``."""
    Q = nm.sqrtm_psd(X)
    return nm.largest_singular_value(np.linalg.solve(Q, nm.as_matrix(A) @ Q)) < 1.0


# -- LFT uncertainty assembly ----------------------------------------------

LFT_KEYS = ("A_UU", "A_US", "A_SU", "A_SS", "B_U1", "B_U2", "B_S1", "B_S2",
            "C_1U", "C_1S", "C_2U", "C_2S", "D_11", "D_12", "D_21", "D_22")


def assemble_lft(parts, u_dims, s_dim, io):
    """Aggregate realization of an LFT-uncertain one-dimensional plant.

    Parameters
    ----------
    parts : dict
        Blocks keyed by ``LFT_KEYS``; missing blocks are zero.
    u_dims : sequence of int
        Block sizes of the uncertainty state ``X_U = X_U1 + ... + X_Ud``.
    s_dim : int
        Dimension of the shift state.
    io : (nw, nu, nz, ny)

    Returns
    -------
    Realization
        Over ``(u_dims..., s_dim)`` with system matrix
        ``[[A_UU, A_US, B_U1, B_U2], [A_SU, A_SS, B_S1, B_S2],
        [C_1U, C_1S, D_11, D_12], [C_2U, C_2S, D_21, D_22]]``; the shift is
        the last variable.
    """
    nU = int(sum(u_dims))
    nS = int(s_dim)
    nw, nu, nz, ny = io
    shapes = {"A_UU": (nU, nU), "A_US": (nU, nS), "A_SU": (nS, nU), "A_SS": (nS, nS),
              "B_U1": (nU, nw), "B_U2": (nU, nu), "B_S1": (nS, nw), "B_S2": (nS, nu),
              "C_1U": (nz, nU), "C_1S": (nz, nS), "C_2U": (ny, nU), "C_2S": (ny, nS),
              "D_11": (nz, nw), "D_12": (nz, nu), "D_21": (ny, nw), "D_22": (ny, nu)}
    unknown = set(parts) - set(LFT_KEYS)
    if unknown:
        raise DimensionError(f"unknown blocks {sorted(unknown)}")
    P = {}
    for key, shp in shapes.items():
        val = parts.get(key)
        if val is None:
            P[key] = np.zeros(shp, dtype=complex)
        else:
            val = np.asarray(val, dtype=complex)
            if val.size == 0 and 0 in shp:
                val = np.zeros(shp, dtype=complex)
            val = val.reshape(shp) if val.shape != shp and val.size == np.prod(shp) and val.ndim < 2 else val
            if val.shape != shp:
                raise DimensionError(f"block {key} has shape {val.shape}, expected {shp}")
            P[key] = val
    A = np.block([[P["A_UU"], P["A_US"]], [P["A_SU"], P["A_SS"]]])
    B = np.block([[P["B_U1"], P["B_U2"]], [P["B_S1"], P["B_S2"]]])
    C = np.block([[P["C_1U"], P["C_1S"]], [P["C_2U"], P["C_2S"]]])
    D = np.block([[P["D_11"], P["D_12"]], [P["D_21"], P["D_22"]]])
    return Realization(tuple(u_dims) + (nS,), A, B, C, D, io)


# -- JSON ----------------------------------------------------------------

def encode_matrix(M):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def decode_matrix(obj, shape=None, name="matrix"):
    try:
        if obj is None:
            raise SchemaError(f"{name} is missing")
        rows = []
        for row in obj:
            r = []
            for v in row:
                if isinstance(v, (list, tuple)):
                    if len(v) != 2:
                        raise SchemaError(f"{name}: complex entries are [re, im] pairs")
                    r.append(complex(float(v[0]), float(v[1])))
                else:
                    r.append(complex(float(v), 0.0))
            rows.append(r)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{name}: malformed entries ({exc})") from None
    if rows and len({len(r) for r in rows}) != 1:
        raise SchemaError(f"{name}: ragged rows")
    M = np.array(rows, dtype=complex).reshape(len(rows), len(rows[0]) if rows else 0)
    if shape is not None:
        if M.size == 0 and 0 in shape:
            return np.zeros(shape, dtype=complex)
        if M.shape != tuple(shape):
            raise SchemaError(f"{name}: expected shape {tuple(shape)}, got {M.shape}")
    return M


def realization_to_dict(G: Realization):
    nw, nu, nz, ny = G.io
    return {"dims": list(G.space.dims), "io": {"nw": nw, "nu": nu, "nz": nz, "ny": ny},
            "A": encode_matrix(G.A) if G.n else [],
            "B": encode_matrix(G.B) if G.B.size else [],
            "C": encode_matrix(G.C) if G.C.size else [],
            "D": encode_matrix(G.D) if G.D.size else []}


def realization_from_dict(data):
    if not isinstance(data, dict):
        raise SchemaError("realization must be a JSON object")
    if "dims" not in data or "io" not in data:
        raise SchemaError("realization needs 'dims' and 'io'")
    try:
        dims = [int(v) for v in data["dims"]]
        io_d = data["io"]
        io = (int(io_d["nw"]), int(io_d["nu"]), int(io_d["nz"]), int(io_d["ny"]))
    except (TypeError, ValueError, KeyError) as exc:
        raise SchemaError(f"bad dims/io ({exc})") from None
    if not dims or min(dims) < 0 or min(io) < 0:
        raise SchemaError("dims and io must be non-negative")
    n = sum(dims)
    m = io[0] + io[1]
    p = io[2] + io[3]
    A = decode_matrix(data.get("A"), (n, n), "A")
    B = decode_matrix(data.get("B"), (n, m), "B")
    C = decode_matrix(data.get("C"), (p, n), "C")
    D = decode_matrix(data.get("D"), (p, m), "D")
    try:
        return Realization(dims, A, B, C, D, io)
    except DimensionError as exc:
        raise SchemaError(str(exc)) from None


def dumps(G: Realization, **kw):
    return json.dumps(realization_to_dict(G), **kw)


def loads(text):
    return realization_from_dict(json.loads(text))
