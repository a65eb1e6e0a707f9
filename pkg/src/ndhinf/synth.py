"""Scaled stabilization and H-infinity synthesis for Givone-Roesser plants.

Scalings ``X`` and ``Y`` range over the commutant ``D`` of ``Z(z)``, i.e.
block-diagonal positive matrices with full blocks matching the state
partition.  All tests are LMI feasibility problems solved by
`ndhinf.lmi.solve_feasibility`; controllers are recovered from the
certificates with the matrix Finsler construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics as nm
from .errors import (ConstructionFailed, D22NotZero, DimensionError, Infeasible,
                     ReconstructionFailed)
from .grsys import Realization, StructuredSpace, _as_space, _interleave, close_loop
from .lmi import LmiProblem, LmiSolution, finsler_complete, solve_feasibility


def _ct(M):
    return M.conj().T


@dataclass
class GainPair:
    """State feedback ``F`` and output injection ``L``.

    ``Y`` certifies ``(A + B2 F) Y (A + B2 F)* < Y`` and ``X`` certifies
    ``(A + L C2)* X (A + L C2) < X``; both are structured.
    """

    F: np.ndarray
    L: np.ndarray
    Y: np.ndarray | None = None
    X: np.ndarray | None = None


@dataclass
class HinfCertificate:
    """Structured solution ``(X, Y)`` of the scaled H-infinity LMIs."""

    X: np.ndarray
    Y: np.ndarray
    margins: dict = field(default_factory=dict)
    perturbation: float = 0.0

    def to_dict(self):
        from .grsys import encode_matrix
        return {"X": encode_matrix(self.X), "Y": encode_matrix(self.Y),
                "margins": {k: float(v) for k, v in self.margins.items()},
                "perturbation": self.perturbation}


# -- stabilizability / detectability ---------------------------------------

def _kernel_cols(M):
    return nm.orth_kernel(nm.as_matrix(M))


def detectable_lmi(C2, A, space, form="completed", target_margin=1e-7):
    """Structured ``X > 0`` certifying scaled detectability, or None.

    ``form="completed"`` solves ``A* X A - X - C2* C2 < 0``;
    ``form="kernel"`` solves ``Cp* (A* X A - X) Cp < 0`` with ``Cp`` an
    orthonormal basis of ``ker C2``.  The two are equivalent.
    """
    space = _as_space(space)
    A = nm.as_matrix(A)
    C2 = nm.as_matrix(C2).reshape(-1, space.n)
    if A.shape != (space.n, space.n):
        raise DimensionError("A does not match the space")
    prob = LmiProblem()
    prob.add_structured("X", space.structure())
    prob.add_constraint(lambda v: v["X"], "pos", "X>0")
    if form == "completed":
        CC = _ct(C2) @ C2
        prob.add_constraint(lambda v: _ct(A) @ v["X"] @ A - v["X"] - CC, "neg", "detectability")
    elif form == "kernel":
        K = _kernel_cols(C2)
        if K.shape[1]:
            prob.add_constraint(lambda v: _ct(K) @ (_ct(A) @ v["X"] @ A - v["X"]) @ K, "neg",
                                "detectability")
    else:
        raise ValueError("form must be 'completed' or 'kernel'")
    if space.n == 0:
        return np.zeros((0, 0), dtype=complex)
    try:
        return solve_feasibility(prob, target_margin)["X"]
    except Infeasible:
        return None


def stabilizable_lmi(A, B2, space, form="completed", target_margin=1e-7):
    """Structured ``Y > 0`` certifying scaled stabilizability, or None.

    ``form="completed"`` solves ``A Y A* - Y - B2 B2* < 0``;
    ``form="kernel"`` solves ``Bp* (A Y A* - Y) Bp < 0`` with ``Bp`` an
    orthonormal basis of ``ker B2*``.
    """
    space = _as_space(space)
    A = nm.as_matrix(A)
    B2 = nm.as_matrix(B2).reshape(space.n, -1)
    if A.shape != (space.n, space.n):
        raise DimensionError("A does not match the space")
    prob = LmiProblem()
    prob.add_structured("Y", space.structure())
    prob.add_constraint(lambda v: v["Y"], "pos", "Y>0")
    if form == "completed":
        BB = B2 @ _ct(B2)
        prob.add_constraint(lambda v: A @ v["Y"] @ _ct(A) - v["Y"] - BB, "neg", "stabilizability")
    elif form == "kernel":
        K = _kernel_cols(_ct(B2))
        if K.shape[1]:
            prob.add_constraint(lambda v: _ct(K) @ (A @ v["Y"] @ _ct(A) - v["Y"]) @ K, "neg",
                                "stabilizability")
    else:
        raise ValueError("form must be 'completed' or 'kernel'")
    if space.n == 0:
        return np.zeros((0, 0), dtype=complex)
    try:
        return solve_feasibility(prob, target_margin)["Y"]
    except Infeasible:
        return None


def gain_from_certificate(A, B2, Y):
    """State feedback ``F`` with ``(A + B2 F) Y (A + B2 F)* - Y < 0``.

    Finsler data: ``H = [[-Y, A], [A*, -Y^-1]]``, ``S = [B2*, 0]``,
    ``R = [0, I]``.
    """
    A = nm.as_matrix(A)
    B2 = nm.as_matrix(B2).reshape(A.shape[0], -1)
    Y = nm.herm(nm.as_matrix(Y))
    n, m = B2.shape
    if m == 0:
        F = np.zeros((0, n), dtype=complex)
        if nm.max_eig(nm.herm(A @ Y @ _ct(A) - Y)) < 0:
            return F
        raise ConstructionFailed("certificate does not make A scaled stable")
    Yi = nm.herm(np.linalg.inv(Y))
    H = np.block([[-Y, A], [_ct(A), -Yi]])
    S = np.hstack([_ct(B2), np.zeros((m, n))])
    R = np.hstack([np.zeros((n, n)), np.eye(n)])
    F = finsler_complete(H, R, S)
    if F is None:
        raise ConstructionFailed("stabilizability certificate is not valid")
    AF = A + B2 @ F
    if nm.max_eig(nm.herm(AF @ Y @ _ct(AF) - Y)) >= 0:
        raise ConstructionFailed("state feedback failed verification")
    return F


def injection_from_certificate(C2, A, X):
    """Output injection ``L`` with ``(A + L C2)* X (A + L C2) - X < 0``.

    Finsler data: ``H = [[-X^-1, A], [A*, -X]]``, ``S = [I, 0]``,
    ``R = [0, C2]``.
    """
    A = nm.as_matrix(A)
    n = A.shape[0]
    C2 = nm.as_matrix(C2).reshape(-1, n)
    X = nm.herm(nm.as_matrix(X))
    p = C2.shape[0]
    if p == 0:
        if nm.max_eig(nm.herm(_ct(A) @ X @ A - X)) < 0:
            return np.zeros((n, 0), dtype=complex)
        raise ConstructionFailed("certificate does not make A scaled stable")
    Xi = nm.herm(np.linalg.inv(X))
    H = np.block([[-Xi, A], [_ct(A), -X]])
    S = np.hstack([np.eye(n), np.zeros((n, n))])
    R = np.hstack([np.zeros((p, n)), C2])
    L = finsler_complete(H, R, S)
    if L is None:
        raise ConstructionFailed("detectability certificate is not valid")
    AL = A + L @ C2
    if nm.max_eig(nm.herm(_ct(AL) @ X @ AL - X)) >= 0:
        raise ConstructionFailed("output injection failed verification")
    return L


def stabilizing_gains(A, B2, C2, space):
    """Gains making ``A + B2 F`` and ``A + L C2`` scaled stable.

    Raises
    ------
    Infeasible
        With ``diagnostic["lmi"]`` naming the failing test.
    """
    space = _as_space(space)
    Y = stabilizable_lmi(A, B2, space)
    if Y is None:
        raise Infeasible("plant is not scaled stabilizable", diagnostic={"lmi": "stabilizability"})
    X = detectable_lmi(C2, A, space)
    if X is None:
        raise Infeasible("plant is not scaled detectable", diagnostic={"lmi": "detectability"})
    F = gain_from_certificate(A, B2, Y)
    L = injection_from_certificate(C2, A, X)
    return GainPair(F, L, Y, X)


def observer_controller(A, B2, C2, gains: GainPair, space=None):
    """Observer-based controller ``{A + B2 F + L C2, -L, F, 0}``.

    The controller state space has the same block sizes as the plant.
    """
    A = nm.as_matrix(A)
    n = A.shape[0]
    B2 = nm.as_matrix(B2).reshape(n, -1)
    C2 = nm.as_matrix(C2).reshape(-1, n)
    F = nm.as_matrix(gains.F).reshape(B2.shape[1], n)
    L = nm.as_matrix(gains.L).reshape(n, C2.shape[0])
    space = _as_space(space if space is not None else [n])
    if space.n != n:
        raise DimensionError("space does not match A")
    AK = A + B2 @ F + L @ C2
    return Realization(space, AK, -L, F, np.zeros((B2.shape[1], C2.shape[0])))


def stabilize(G: Realization):
    """Gains and observer controller for the plant ``G``."""
    gains = stabilizing_gains(G.A, G.B2, G.C2, G.space)
    return gains, observer_controller(G.A, G.B2, G.C2, gains, G.space)


# -- scaled H-infinity -----------------------------------------------------

def _check_plant(G: Realization):
    if np.any(np.abs(G.D22) > 0.0):
        raise D22NotZero("synthesis requires D22 = 0")


def hinf_lmis(G: Realization, strict_coupling=True):
    """LMI problem in the structured unknowns ``X`` and ``Y``."""
    _check_plant(G)
    n = G.n
    nw, nu, nz, ny = G.io
    A, B1, B2, C1, C2 = G.A, G.B1, G.B2, G.C1, G.C2
    D11, D12, D21 = G.D11, G.D12, G.D21
    Nc = nm.orth_kernel(np.hstack([_ct(B2), _ct(D12)]))
    No = nm.orth_kernel(np.hstack([C2, D21]))
    Tc = nm.as_matrix(np.block([[Nc, np.zeros((n + nz, nw))],
                                [np.zeros((nw, Nc.shape[1])), np.eye(nw)]]))
    To = nm.as_matrix(np.block([[No, np.zeros((n + nw, nz))],
                                [np.zeros((nz, No.shape[1])), np.eye(nz)]]))
    st = G.space.structure()
    prob = LmiProblem()
    prob.add_structured("X", st)
    prob.add_structured("Y", st)

    def ylmi(v):
        Y = v["Y"]
        M = np.block([[A @ Y @ _ct(A) - Y, A @ Y @ _ct(C1), B1],
                      [C1 @ Y @ _ct(A), C1 @ Y @ _ct(C1) - np.eye(nz), D11],
                      [_ct(B1), _ct(D11), -np.eye(nw)]])
        return _ct(Tc) @ M @ Tc

    def xlmi(v):
        X = v["X"]
        M = np.block([[_ct(A) @ X @ A - X, _ct(A) @ X @ B1, _ct(C1)],
                      [_ct(B1) @ X @ A, _ct(B1) @ X @ B1 - np.eye(nw), _ct(D11)],
                      [C1, D11, -np.eye(nz)]])
        return _ct(To) @ M @ To

    prob.add_constraint(ylmi, "neg", "Y-LMI")
    prob.add_constraint(xlmi, "neg", "X-LMI")
    prob.add_constraint(lambda v: np.block([[v["X"], np.eye(n)], [np.eye(n), v["Y"]]]),
                        "pos" if strict_coupling else "psd", "coupling")
    prob.add_constraint(lambda v: v["X"], "pos", "X>0")
    prob.add_constraint(lambda v: v["Y"], "pos", "Y>0")
    return prob


def hinf_feasibility(G: Realization, target_margin=1e-7, centered=True):
    """Scaled H-infinity certificate ``(X, Y)`` or None.

    With ``centered=True`` the barrier method follows the central path
    to its end, which returns a well-conditioned certificate and makes
    the subsequent reconstruction robust.
    """
    prob = hinf_lmis(G)
    try:
        sol = solve_feasibility(prob, target_margin, stop="optimal" if centered else "first",
                                radius=1e3)
    except Infeasible:
        return None
    return HinfCertificate(sol["X"], sol["Y"], dict(sol.slacks))


def _perf_matrix(M, Pin, Pout):
    return nm.herm(Pout - M @ Pin @ _ct(M))


def hinf_reconstruct(G: Realization, cert: HinfCertificate, controller_space=None):
    """Controller ``K`` for which ``close_loop(G, K)`` has scaled performance.

    The closed-loop scaling in stacked ``(x, x_K)`` coordinates is
    ``P = [[Y, E], [E, E]]`` with ``E = Y - X^{-1}``; the controller
    system matrix ``J = [[AK, BK], [CK, DK]]`` then solves a matrix
    Finsler problem.  A sweep over the controller-coordinate scale is
    tried when the first attempt does not verify.

    Raises
    ------
    ReconstructionFailed
    """
    _check_plant(G)
    space = G.space
    cspace = _as_space(controller_space) if controller_space is not None else space
    if cspace != space:
        raise DimensionError("controller order must equal the plant order in every variable")
    n = G.n
    nw, nu, nz, ny = G.io
    A, B1, B2, C1, C2 = G.A, G.B1, G.B2, G.C1, G.C2
    D11, D12, D21 = G.D11, G.D12, G.D21
    X = nm.herm(nm.as_matrix(cert.X))
    Y = nm.herm(nm.as_matrix(cert.Y))
    diag = {"attempts": []}

    zeroK = Realization(cspace, np.zeros((n, n)), np.zeros((n, ny)), np.zeros((nu, n)),
                        np.zeros((nu, ny)))
    if not np.any(B2) and not np.any(C2):
        cl = close_loop(G, zeroK)
        if scaled_performance(cl) is not None:
            return zeroK

    E = nm.herm(Y - np.linalg.inv(X))
    eps = 0.0
    scale = max(1.0, np.trace(Y).real / max(n, 1))
    if n and nm.min_eig(E) <= 1e-9 * scale:
        eps = 1e-9 * scale
        while nm.min_eig(E + eps * np.eye(n)) <= 1e-9 * scale and eps < scale:
            eps *= 4.0
        Y = Y + eps * np.eye(n)
        E = nm.herm(Y - np.linalg.inv(X))
        cert.perturbation = eps
    diag["perturbation"] = eps

    M0 = np.block([[A, np.zeros((n, n)), B1],
                   [np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, nw))],
                   [C1, np.zeros((nz, n)), D11]])
    Bb = np.block([[np.zeros((n, n)), B2],
                   [np.eye(n), np.zeros((n, nu))],
                   [np.zeros((nz, n)), D12]])
    Cc = np.block([[np.zeros((n, n)), np.eye(n), np.zeros((n, nw))],
                   [C2, np.zeros((ny, n)), D21]])
    N1 = 2 * n + nz
    N2 = 2 * n + nw
    perm, _ = _interleave([G, zeroK], space.d)

    rhos = [1.0] + [r for r in np.logspace(-3, 3, 13) if r != 1.0]
    rhos.sort(key=lambda r: abs(np.log(r)))
    for rho in rhos:
        P = nm.herm(np.block([[Y, rho * E], [rho * E, rho * rho * E]]))
        Pout = _blk(P, np.eye(nz))
        Pin = _blk(P, np.eye(nw))
        try:
            Pin_inv = nm.herm(np.linalg.inv(Pin))
        except np.linalg.LinAlgError:
            diag["attempts"].append((rho, "singular scaling"))
            continue
        H = np.block([[-Pout, M0], [_ct(M0), -Pin_inv]])
        S = np.hstack([_ct(Bb), np.zeros((n + nu, N2))])
        R = np.hstack([np.zeros((n + ny, N1)), Cc])
        J = finsler_complete(H, R, S)
        if J is None:
            diag["attempts"].append((rho, "kernel compression not negative"))
            continue
        K = Realization(cspace, J[:n, :n], J[:n, n:], J[n:, :n], J[n:, n:])
        cl = close_loop(G, K)
        Pcl = P[np.ix_(perm, perm)]
        Mcl = cl.system_matrix()
        slack = nm.min_eig(_perf_matrix(Mcl, _blk(Pcl, np.eye(nw)), _blk(Pcl, np.eye(nz))))
        diag["attempts"].append((rho, slack))
        if slack > 1e-12 * max(1.0, np.linalg.norm(Pcl, 2)):
            return K
    raise ReconstructionFailed("controller reconstruction did not verify", diag)


def _blk(P, Q):
    n, m = P.shape[0], Q.shape[0]
    out = np.zeros((n + m, n + m), dtype=complex)
    out[:n, :n] = P
    out[n:, n:] = Q
    return out


def hinf_synthesize(G: Realization):
    """Certificate and controller, or raise `Infeasible`."""
    cert = hinf_feasibility(G)
    if cert is None:
        raise Infeasible("scaled H-infinity LMIs are infeasible", diagnostic={"lmi": "hinf"})
    return cert, hinf_reconstruct(G, cert)


def scaled_performance_problem(G: Realization):
    n = G.n
    p, m = G.D.shape
    M = G.system_matrix()
    prob = LmiProblem()
    prob.add_structured("X", G.space.structure())
    prob.add_constraint(lambda v: v["X"], "pos", "X>0")
    prob.add_constraint(lambda v: M @ _blk(v["X"], np.eye(m)) @ _ct(M) - _blk(v["X"], np.eye(p)),
                        "neg", "performance")
    return prob


def scaled_performance_solution(G: Realization, target_margin=1e-7, stop="first"):
    """`LmiSolution` for scaled performance of ``G``, or None."""
    if G.n == 0:
        s = 1.0 - nm.largest_singular_value(G.D)
        if s <= 0:
            return None
        return LmiSolution({"X": np.zeros((0, 0), complex)}, s,
                           {"performance": s}, -s, 0)
    try:
        return solve_feasibility(scaled_performance_problem(G), target_margin, stop=stop)
    except Infeasible:
        return None


def scaled_performance(G: Realization, target_margin=1e-7):
    """Structured ``X > 0`` with
    ``[A B; C D] diag(X, I) [A B; C D]* - diag(X, I) < 0``, or None."""
    sol = scaled_performance_solution(G, target_margin)
    return None if sol is None else sol["X"]
