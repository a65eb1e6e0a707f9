"""Nevanlinna-Pick interpolation on the polydisk.

Given points ``z_1, ..., z_N`` of the open polydisk and values ``w_i``,
an interpolant in the Schur-Agler class exists exactly when there are
positive semidefinite ``P^(1), ..., P^(d)`` with

    1 - w_i conj(w_j) = sum_k (1 - z_ik conj(z_jk)) P^(k)_ij.

For ``d = 1`` the decomposition is unique and ``P^(1)`` is the Pick
matrix.  Only scalar-valued data is handled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import numerics as nm
from .errors import DimensionError, Infeasible, SchemaError
from .grsys import PointPolydisk, Realization, decode_matrix, encode_matrix
from .lmi import LmiProblem, solve_feasibility
from .synth import scaled_performance_solution

PSD_TOL = 1e-9
RESIDUAL_TOL = 1e-8


class InterpolationData:
    """Scalar interpolation data on the open polydisk.

    Parameters
    ----------
    points : sequence of PointPolydisk or array_like
        ``N`` points with common dimension ``d``.
    values : sequence of complex
        Target values ``w_i``.
    """

    def __init__(self, points, values):
        pts = [p if isinstance(p, PointPolydisk) else PointPolydisk(p) for p in points]
        vals = np.asarray(values, dtype=complex).ravel()
        if len(pts) == 0:
            raise DimensionError("at least one interpolation point is required")
        if len(pts) != vals.size:
            raise DimensionError("points and values differ in number")
        d = pts[0].d
        if d == 0 or any(p.d != d for p in pts):
            raise DimensionError("points must share one positive dimension")
        if not all(p.in_open_polydisk() for p in pts):
            raise ValueError("points must lie in the open polydisk")
        Z = np.array([p.z for p in pts])
        for i in range(len(pts)):
            for j in range(i):
                if np.allclose(Z[i], Z[j], rtol=0.0, atol=1e-14):
                    raise ValueError(f"points {j} and {i} coincide")
        self.points = pts
        self.values = vals

    @property
    def N(self):
        return len(self.points)

    @property
    def d(self):
        return self.points[0].d

    def matrix(self):
        """``N x d`` array of point coordinates."""
        return np.array([p.z for p in self.points])

    def rotated(self, phase):
        """Same points with every value multiplied by ``phase``."""
        return InterpolationData(self.points, phase * self.values)

    def to_dict(self):
        return {"points": [[[v.real, v.imag] for v in p.z] for p in self.points],
                "values": [[float(w.real), float(w.imag)] for w in self.values]}

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "points" not in data or "values" not in data:
            raise SchemaError("interpolation data needs 'points' and 'values'")
        pts = decode_matrix(data["points"], name="points")
        vals = decode_matrix([data["values"]], name="values").ravel()
        try:
            return cls(list(pts), vals)
        except (ValueError, DimensionError) as exc:
            raise SchemaError(str(exc)) from None

    def dumps(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass
class AglerCertificate:
    """PSD kernels ``P[k]`` of an Agler decomposition."""

    P: list
    residual: float
    margin: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {"P": [encode_matrix(p) for p in self.P], "residual": self.residual,
                "margin": self.margin, "min_eigs": [nm.min_eig(p) for p in self.P]}


def pick_matrix(data: InterpolationData):
    """``(1 - w_i conj(w_j)) / (1 - z_i conj(z_j))`` for ``d = 1`` data."""
    if data.d != 1:
        raise DimensionError("the Pick matrix is defined for d = 1")
    z = data.matrix()[:, 0]
    w = data.values
    return (1.0 - np.outer(w, w.conj())) / (1.0 - np.outer(z, z.conj()))


def _kernels(data):
    Z = data.matrix()
    w = data.values
    lhs = 1.0 - np.outer(w, w.conj())
    weights = [1.0 - np.outer(Z[:, k], Z[:, k].conj()) for k in range(data.d)]
    return lhs, weights


def decomposition_residual(data: InterpolationData, P):
    lhs, weights = _kernels(data)
    rhs = sum(wk * pk for wk, pk in zip(weights, P))
    return float(np.max(np.abs(lhs - rhs)))


def _pd_projection(M):
    w, V = np.linalg.eigh(nm.herm(M))
    return (V * np.clip(w, 0.0, None)) @ V.conj().T


def _diagnostic(data):
    """Equality residual after projecting a least-squares solution onto the PSD cone."""
    lhs, weights = _kernels(data)
    N, d = data.N, data.d
    # per entry: lhs_ij = sum_k weights_k_ij P_k_ij; minimum-norm split
    tot = sum(np.abs(wk) ** 2 for wk in weights)
    P = [wk.conj() * lhs / tot for wk in weights]
    Pp = [_pd_projection(p) for p in P]
    return {"lmi": "agler", "max_equality_residual": decomposition_residual(data, Pp),
            "min_eig_least_squares": min(nm.min_eig(nm.herm(p)) for p in P)}


def agler_feasible(data: InterpolationData, psd_tol=PSD_TOL, method="auto"):
    """Agler decomposition of the data.

    Parameters
    ----------
    data : InterpolationData
    psd_tol : float
        Eigenvalue tolerance for the PSD verdict.
    method : {"auto", "pick", "sdp"}
        ``"auto"`` uses the Pick matrix for ``d = 1`` and the SDP otherwise.

    Returns
    -------
    AglerCertificate

    Raises
    ------
    Infeasible
        When no PSD decomposition exists.  ``diagnostic`` holds the
        equality residual of the PSD projection of a least-squares split.
    """
    lhs, weights = _kernels(data)
    N, d = data.N, data.d
    if method not in ("auto", "pick", "sdp"):
        raise ValueError(f"unknown method {method!r}")
    if method == "pick" or (method == "auto" and d == 1):
        P = pick_matrix(data)
        lam = nm.min_eig(nm.herm(P))
        if lam < -psd_tol:
            raise Infeasible("Pick matrix is not positive semidefinite", best=-lam,
                             diagnostic=_diagnostic(data))
        return AglerCertificate([nm.herm(P)], decomposition_residual(data, [P]), max(lam, 0.0))

    prob = LmiProblem()
    names = [f"P{k}" for k in range(d)]
    for nme in names:
        prob.add_hermitian(nme, N)

    def eq(v):
        return lhs - sum(wk * v[nme] for wk, nme in zip(weights, names))

    prob.add_equality(eq, "agler")
    for nme in names:
        prob.add_constraint(lambda v, nme=nme: v[nme], "psd", nme)
    try:
        sol = solve_feasibility(prob, stop="optimal")
    except Infeasible as exc:
        raise Infeasible("no Agler decomposition", best=exc.best,
                         diagnostic=_diagnostic(data)) from None
    P = [nm.herm(sol[nme]) for nme in names]
    res = decomposition_residual(data, P)
    lam = min(nm.min_eig(p) for p in P)
    if lam < -psd_tol or res > RESIDUAL_TOL:
        raise Infeasible("Agler decomposition failed verification", best=-lam,
                         diagnostic=_diagnostic(data))
    return AglerCertificate(P, res, max(lam, 0.0))


def schur_agler_member(G: Realization, target_margin=1e-7):
    """True when ``G`` has a scaled contractive realization.

    This certifies strict Schur-Agler membership of its transfer function.
    """
    return scaled_performance_solution(G.as_single(), target_margin) is not None


def sample_instance(G: Realization, points):
    """Interpolation data ``w_i = G(z_i)`` for a scalar transfer ``G``."""
    if G.D.shape != (1, 1):
        raise DimensionError("sample_instance needs a scalar transfer function")
    pts = [p if isinstance(p, PointPolydisk) else PointPolydisk(p) for p in points]
    vals = [G.as_single()(p.z)[0, 0] for p in pts]
    return InterpolationData(pts, vals)

