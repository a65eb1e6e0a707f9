"""Fractional representations of stabilizing controllers.

Every rational matrix function is carried as a `TransferMap`, a thin
wrapper around a single-block `Realization`.  Products, sums, inverses
and feedback loops are formed at the realization level, so each identity
can be checked by pointwise evaluation.

Sign conventions follow positive feedback: the loop ``u = K y`` closes
around ``y = G22 u``, and the internal-stability map ``Theta(G, K)``
takes the disturbances ``(w, v1, v2)`` with ``u = K y + v1`` and
``y = G21 w + G22 u + v2`` to the signals ``(z, u, y)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grsys
from . import numerics as nm
from .errors import DimensionError, IllPosed, Singular, SingularD, VerificationFailed
from .grsys import Realization, close_loop, interconnect, scaled_stable
from .synth import GainPair, observer_controller


class TransferMap:
    """Rational matrix function backed by a realization.

    Parameters
    ----------
    realization : Realization
        Viewed as one input/output block.
    """

    __slots__ = ("realization",)

    def __init__(self, realization: Realization):
        if isinstance(realization, TransferMap):
            realization = realization.realization
        object.__setattr__(self, "realization", realization.as_single())

    def __setattr__(self, key, value):
        raise AttributeError("TransferMap is immutable")

    def __repr__(self):
        R = self.realization
        return f"TransferMap(shape={self.shape}, dims={list(R.space.dims)})"

    @property
    def shape(self):
        return self.realization.D.shape

    @property
    def d(self):
        return self.realization.space.d

    @property
    def A(self):
        return self.realization.A

    @property
    def space(self):
        return self.realization.space

    def __call__(self, *z):
        return self.realization(*z)

    @classmethod
    def from_matrices(cls, dims, A, B, C, D):
        return cls(Realization(dims, A, B, C, D))

    @classmethod
    def constant(cls, D, d=1):
        return cls(Realization.static(D, d))

    @classmethod
    def identity(cls, m, d=1):
        return cls.constant(np.eye(m), d)

    @classmethod
    def zeros(cls, p, m, d=1):
        return cls.constant(np.zeros((p, m)), d)

    def __matmul__(self, other):
        if isinstance(other, TransferMap):
            return TransferMap(grsys.series(self.realization, other.realization))
        return TransferMap(grsys.scale(self.realization, right=other))

    def __rmatmul__(self, other):
        return TransferMap(grsys.scale(self.realization, left=other))

    def __add__(self, other):
        other = _lift(other, self)
        return TransferMap(grsys.parallel(self.realization, other.realization))

    __radd__ = __add__

    def __sub__(self, other):
        other = _lift(other, self)
        return TransferMap(grsys.parallel(self.realization, other.realization, -1.0))

    def __rsub__(self, other):
        return _lift(other, self) - self

    def __neg__(self):
        return TransferMap(grsys.scale(self.realization, left=-np.eye(self.shape[0])))

    def inv(self):
        return TransferMap(grsys.invert(self.realization))

    def rows(self, sl):
        R = self.realization
        return TransferMap(R.block(sl, slice(None)))

    def cols(self, sl):
        R = self.realization
        return TransferMap(R.block(slice(None), sl))

    def sub(self, rows, cols):
        return TransferMap(self.realization.block(rows, cols))

    @staticmethod
    def block(grid):
        return TransferMap(grsys.stack([[b.realization for b in row] for row in grid]))

    def is_stable(self):
        """Certified stability: the state matrix is scaled stable."""
        return scaled_stable(self.A, self.space) is not None

    def hautus(self, grid_per_axis=None):
        return grsys.hautus_stable_grid(self.A, self.space, grid_per_axis)


def _lift(other, like: TransferMap):
    if isinstance(other, TransferMap):
        return other
    M = np.asarray(other, dtype=complex)
    if M.ndim == 0:
        M = M * np.eye(like.shape[0])
    return TransferMap.constant(M, like.d)


def _as_map(K, d=None):
    if isinstance(K, TransferMap):
        return K
    if isinstance(K, Realization):
        return TransferMap(K)
    return TransferMap.constant(K, d or 1)


# -- Theta -----------------------------------------------------------------

def _augmented(G: Realization):
    """Plant with inputs ``(w, v1, v2 | u_c)`` and outputs ``(z, u, y | y_m)``."""
    n = G.n
    nw, nu, nz, ny = G.io
    B1, B2, C1, C2 = G.B1, G.B2, G.C1, G.C2
    D11, D12, D21, D22 = G.D11, G.D12, G.D21, G.D22
    Iu, Iy = np.eye(nu), np.eye(ny)
    B = np.hstack([B1, B2, np.zeros((n, ny)), B2])
    C = np.vstack([C1, np.zeros((nu, n)), C2, C2])
    D = np.block([[D11, D12, np.zeros((nz, ny)), D12],
                  [np.zeros((nu, nw)), Iu, np.zeros((nu, ny)), Iu],
                  [D21, D22, Iy, D22],
                  [D21, D22, Iy, D22]])
    return Realization(G.space, G.A, B, C, D, (nw + nu + ny, nu, nz + nu + ny, ny))


def theta(G: Realization, K) -> TransferMap:
    """Realization of the nine-block map ``Theta(G, K)``.

    Rows are ``(z, u, y)`` and columns ``(w, v1, v2)``.

    Raises
    ------
    IllPosed
        When ``I - D22 D_K`` is singular.
    """
    K = _as_map(K, G.space.d)
    if K.shape != (G.io[1], G.io[3]):
        raise DimensionError("controller size does not match the plant")
    return TransferMap(grsys.lft(_augmented(G), K.realization))


def theta_blocks(G: Realization, Th: TransferMap):
    """Split ``Theta`` into a 3 x 3 nested list of `TransferMap`."""
    nw, nu, nz, ny = G.io
    r = [slice(0, nz), slice(nz, nz + nu), slice(nz + nu, nz + nu + ny)]
    c = [slice(0, nw), slice(nw, nw + nu), slice(nw + nu, nw + nu + ny)]
    return [[Th.sub(ri, ci) for ci in c] for ri in r]


def plant_from_g22(G22: TransferMap) -> Realization:
    """Plant with only the ``(u, y)`` channel."""
    R = G22.realization
    return Realization(R.space, R.A, R.B, R.C, R.D, (0, R.n_in, 0, R.n_out))


def uv_maps(G22, K):
    """``U = (I - G22 K)^-1``, ``V = K U``, ``Ut = (I - K G22)^-1``, ``Vt = Ut K``."""
    G22 = _as_map(G22)
    K = _as_map(K, G22.d)
    P = plant_from_g22(G22)
    Th = theta(P, K)
    nu, ny = K.shape
    U = Th.sub(slice(nu, nu + ny), slice(nu, nu + ny))
    V = Th.sub(slice(0, nu), slice(nu, nu + ny))
    Ut = Th.sub(slice(0, nu), slice(0, nu))
    Vt = V
    return U, V, Ut, Vt


def free_parameter_maps(G22, K_star):
    """``Lt = [Ut*, -Vt*]`` and ``L = [-V*; U*]`` for a stabilizing ``K_star``."""
    U, V, Ut, Vt = uv_maps(G22, K_star)
    Lt = TransferMap.block([[Ut, -Vt]])
    L = TransferMap.block([[-V], [U]])
    return Lt, L


def parametrize_all(G: Realization, K_star, Lambda) -> TransferMap:
    """Controller ``K = (V* + Q)(U* + G22 Q)^{-1}`` with ``Q = Lt Lambda L``.

    ``Lambda`` is a stable ``(nu + ny) x (nu + ny)`` parameter.  The
    realization is an interconnection of two copies of ``K_star``, one
    of ``G22`` and one of ``Lambda``: with ``b = Lambda a`` the control is
    ``u = K_star (y - b2) + b1`` and ``a = (q - u, y - G22 q)`` where
    ``q = b1 + K_star (G22 q - b2)``, so its dynamics are those of the
    stable loop ``(G22, K_star)`` and of ``Lambda``.

    Raises
    ------
    IllPosed
        When the interconnection is not well posed at ``z = 0``.
    """
    nw, nu, nz, ny = G.io
    d = G.space.d
    K_star = _as_map(K_star, d)
    Lam = _as_map(Lambda, d)
    if K_star.shape != (nu, ny) or Lam.shape != (nu + ny, nu + ny):
        raise DimensionError("parameter sizes do not match the plant")
    G22 = TransferMap(G.part("22"))
    blocks = [K_star.realization, G22.realization, K_star.realization, Lam.realization]
    # block outputs: k1 (nu), g (ny), k2 (nu), b = (b1 nu, b2 ny)
    ok = [0, nu, nu + ny, 2 * nu + ny]
    p_tot = 3 * nu + 2 * ny
    # block inputs: r1 (ny), q (nu), r3 (ny), a = (a1 nu, a2 ny)
    oi = [0, ny, ny + nu, 2 * ny + nu]
    m_tot = 2 * ny + nu + nu + ny
    My = np.zeros((m_tot, p_tot))
    Me = np.zeros((m_tot, ny))
    k1 = slice(ok[0], ok[0] + nu)
    g = slice(ok[1], ok[1] + ny)
    k2 = slice(ok[2], ok[2] + nu)
    b1 = slice(ok[3], ok[3] + nu)
    b2 = slice(ok[3] + nu, ok[3] + nu + ny)
    Iu, Iy = np.eye(nu), np.eye(ny)
    r1 = slice(oi[0], oi[0] + ny)
    q = slice(oi[1], oi[1] + nu)
    r3 = slice(oi[2], oi[2] + ny)
    a1 = slice(oi[3], oi[3] + nu)
    a2 = slice(oi[3] + nu, oi[3] + nu + ny)
    Me[r1] = Iy
    My[r1, b2] = -Iy
    My[q, k2] = Iu
    My[q, b1] = Iu
    My[r3, g] = Iy
    My[r3, b2] = -Iy
    My[a1, k2] = Iu
    My[a1, k1] = -Iu
    My[a2, g] = -Iy
    Me[a2] = Iy
    Ny = np.zeros((nu, p_tot))
    Ny[:, k1] = Iu
    Ny[:, b1] = Iu
    return TransferMap(interconnect(blocks, My, Me, Ny, np.zeros((nu, ny))))


def parametrize_formula(G: Realization, K_star, Lambda, z):
    """Pointwise value of both fraction formulas at ``z`` (for checks)."""
    nw, nu, nz, ny = G.io
    G22 = G.part("22")(z)
    Ks = _as_map(K_star)(z)
    Lam = _as_map(Lambda)(z)
    U = np.linalg.inv(np.eye(ny) - G22 @ Ks)
    V = Ks @ U
    Ut = np.linalg.inv(np.eye(nu) - Ks @ G22)
    Vt = Ut @ Ks
    Q = np.hstack([Ut, -Vt]) @ Lam @ np.vstack([-V, U])
    right = (V + Q) @ np.linalg.inv(U + G22 @ Q)
    left = np.linalg.inv(Ut + Q @ G22) @ (Vt + Q)
    return right, left


# -- coprime factors -------------------------------------------------------

@dataclass
class CoprimeFactors:
    """Doubly coprime factorization of ``G22``.

    ``G22 = D^{-1} N = Nt Dt^{-1}`` and
    ``[[D, -N], [-Yt, Xt]] [[X, Nt], [Y, Dt]] = I``.
    """

    D: TransferMap
    N: TransferMap
    X: TransferMap
    Y: TransferMap
    Dt: TransferMap
    Nt: TransferMap
    Xt: TransferMap
    Yt: TransferMap
    A: np.ndarray | None = None
    B2: np.ndarray | None = None
    C2: np.ndarray | None = None
    gains: GainPair | None = None
    space: grsys.StructuredSpace | None = None

    def bezout_residual(self, z):
        left = np.block([[self.D(z), -self.N(z)], [-self.Yt(z), self.Xt(z)]])
        right = np.block([[self.X(z), self.Nt(z)], [self.Y(z), self.Dt(z)]])
        return float(np.max(np.abs(left @ right - np.eye(left.shape[0]))))

    def factor_residual(self, G22, z):
        g = _as_map(G22)(z)
        r1 = np.max(np.abs(self.D(z) @ g - self.N(z)))
        r2 = np.max(np.abs(g @ self.Dt(z) - self.Nt(z)))
        return float(max(r1, r2))

    def maps(self):
        return {"D": self.D, "N": self.N, "X": self.X, "Y": self.Y,
                "Dt": self.Dt, "Nt": self.Nt, "Xt": self.Xt, "Yt": self.Yt}


def random_points(d, count, rng, radius=0.95):
    """Random points of the open polydisk of the given radius."""
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, size=(count, d)))
    return r * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size=(count, d)))


def coprime_from_gains(A, B2, C2, gains: GainPair, space, *, n_check=20, seed=0, tol=1e-8):
    """Doubly coprime factors from a stabilizing ``(F, L)`` pair.

    With ``AF = A + B2 F`` and ``AL = A + L C2``:

    ============  =====================
    ``Nt``        ``{AF, B2, C2, 0}``
    ``Dt``        ``{AF, B2, F, I}``
    ``Y``         ``{AF, -L, F, 0}``
    ``X``         ``{AF, -L, C2, I}``
    ``D``         ``{AL, L, C2, I}``
    ``N``         ``{AL, B2, C2, 0}``
    ``Xt``        ``{AL, -B2, F, I}``
    ``Yt``        ``{AL, -L, F, 0}``
    ============  =====================

    The Bezout identity and ``G22 = D^-1 N = Nt Dt^-1`` are checked at
    ``n_check`` random points before returning.

    Raises
    ------
    VerificationFailed
    """
    space = grsys._as_space(space)
    A = nm.as_matrix(A)
    n = A.shape[0]
    B2 = nm.as_matrix(B2).reshape(n, -1)
    C2 = nm.as_matrix(C2).reshape(-1, n)
    nu, ny = B2.shape[1], C2.shape[0]
    F = nm.as_matrix(gains.F).reshape(nu, n)
    L = nm.as_matrix(gains.L).reshape(n, ny)
    AF = A + B2 @ F
    AL = A + L @ C2
    dims = space.dims

    def tm(Ak, Bk, Ck, Dk):
        return TransferMap.from_matrices(dims, Ak, Bk, Ck, Dk)

    f = CoprimeFactors(
        D=tm(AL, L, C2, np.eye(ny)),
        N=tm(AL, B2, C2, np.zeros((ny, nu))),
        X=tm(AF, -L, C2, np.eye(ny)),
        Y=tm(AF, -L, F, np.zeros((nu, ny))),
        Dt=tm(AF, B2, F, np.eye(nu)),
        Nt=tm(AF, B2, C2, np.zeros((ny, nu))),
        Xt=tm(AL, -B2, F, np.eye(nu)),
        Yt=tm(AL, -L, F, np.zeros((nu, ny))),
        A=A, B2=B2, C2=C2, gains=gains, space=space)
    G22 = tm(A, B2, C2, np.zeros((ny, nu)))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for z in random_points(space.d, n_check, rng):
        worst = max(worst, f.bezout_residual(z), f.factor_residual(G22, z))
    if worst > tol:
        raise VerificationFailed("coprime factors fail the Bezout check", residual=worst)
    for name in ("AF", "AL"):
        M = AF if name == "AF" else AL
        if scaled_stable(M, space) is None:
            raise VerificationFailed(f"{name} is not scaled stable")
    return f


def _factor_data(factors: CoprimeFactors):
    if factors.A is None or factors.gains is None:
        raise ValueError("factors do not carry state-space data")
    return factors.A, factors.B2, factors.C2, factors.gains.F, factors.gains.L, factors.space


def youla_generator(factors: CoprimeFactors) -> Realization:
    """Realization ``J_K`` whose lower loop with ``Lambda`` gives the Youla controller.

    ``J_K = [[AF + L C2, -L, B2], [F, 0, I], [-C2, I, 0]]`` with inputs
    ``(y, q)`` and outputs ``(u, r)``; closing ``q = Lambda r`` yields
    ``K = (Y + Dt Lambda)(X + Nt Lambda)^{-1}``.
    """
    A, B2, C2, F, L, space = _factor_data(factors)
    n = A.shape[0]
    nu, ny = B2.shape[1], C2.shape[0]
    AK = A + B2 @ F + L @ C2
    B = np.hstack([-L, B2])
    C = np.vstack([F, -C2])
    D = np.block([[np.zeros((nu, ny)), np.eye(nu)], [np.eye(ny), np.zeros((ny, nu))]])
    return Realization(space, AK, B, C, D, (ny, nu, nu, ny))


def youla_controller(factors: CoprimeFactors, Lambda) -> TransferMap:
    """``K = (Y + Dt Lambda)(X + Nt Lambda)^{-1}`` for a stable ``nu x ny`` ``Lambda``.

    Raises
    ------
    IllPosed
        When ``X + Nt Lambda`` is singular at ``z = 0``.
    """
    J = youla_generator(factors)
    nu, ny = J.io[1], J.io[0]
    Lam = _as_map(Lambda, factors.space.d)
    if Lam.shape != (nu, ny):
        raise DimensionError("Lambda must be nu x ny")
    M0 = factors.X(np.zeros(factors.space.d)) + factors.Nt(np.zeros(factors.space.d)) @ Lam(
        np.zeros(factors.space.d))
    if abs(np.linalg.det(M0)) < 1e-12:
        raise IllPosed("X + Nt Lambda is singular at 0")
    return TransferMap(close_loop(J, Lam.realization))


def youla_formula(factors: CoprimeFactors, Lambda, z):
    """Right and left fraction values of the Youla controller at ``z``."""
    Lam = _as_map(Lambda)(z)
    f = factors
    right = (f.Y(z) + f.Dt(z) @ Lam) @ np.linalg.inv(f.X(z) + f.Nt(z) @ Lam)
    left = np.linalg.inv(f.Xt(z) + Lam @ f.N(z)) @ (f.Yt(z) + Lam @ f.D(z))
    return right, left


def model_matching_data(G: Realization, factors: CoprimeFactors, check=True):
    """Stable ``(Gt11, Gt12, Gt21)`` with ``T_zw = Gt11 + Gt12 Lambda Gt21``.

    ``Gt12 = G12 Dt`` is realized as ``{AF, B2, C1 + D12 F, D12}``,
    ``Gt21 = D G21`` as ``{AL, B1 + L D21, C2, D21}`` and ``Gt11`` is the
    closed loop of ``G`` with the central controller ``Y X^{-1}``.
    """
    A, B2, C2, F, L, space = _factor_data(factors)
    dims = space.dims
    AF = A + B2 @ F
    AL = A + L @ C2
    Gt12 = TransferMap.from_matrices(dims, AF, B2, G.C1 + G.D12 @ F, G.D12)
    Gt21 = TransferMap.from_matrices(dims, AL, G.B1 + L @ G.D21, C2, G.D21)
    K0 = observer_controller(A, B2, C2, factors.gains, space)
    Gt11 = TransferMap(close_loop(G, K0))
    if check:
        for name, Tm in (("Gt11", Gt11), ("Gt12", Gt12), ("Gt21", Gt21)):
            if Tm.realization.n and not Tm.is_stable():
                raise VerificationFailed(f"{name} is not stable")
    return Gt11, Gt12, Gt21

