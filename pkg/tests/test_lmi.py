import numpy as np
import pytest
from numpy.testing import assert_allclose

from ndhinf import numerics as nm
from ndhinf.errors import DimensionError, Infeasible, SizeCap
from ndhinf.lmi import (LmiProblem, ScalingStructure, finsler_complete, finsler_scalar,
                        scaled_norm_bisect, solve_feasibility, structured_lyapunov)

from helpers import compressions, crandn, finsler_instance, random_structure


# -- structures ------------------------------------------------------------

def test_structure_commutant_sizes():
    s = ScalingStructure([(2, "scalar"), (3, "full")])
    assert s.n == 5
    assert len(s.commutant_basis()) == 4 + 1
    X = s.project(np.arange(25).reshape(5, 5))
    assert_allclose(X[2:, 2:], np.trace(np.arange(25).reshape(5, 5)[2:, 2:]) / 3 * np.eye(3))
    assert_allclose(X[:2, 2:], 0)


def test_structure_rejects_bad_blocks():
    with pytest.raises(ValueError):
        ScalingStructure([(2, "diagonal")])
    with pytest.raises(DimensionError):
        ScalingStructure([(-1, "full")])


# -- feasibility -----------------------------------------------------------

def test_trivial_scalar_feasible_at_zero():
    p = LmiProblem()
    p.add_hermitian("x", 1)
    p.add_constraint(lambda v: v["x"][0, 0] * np.eye(2) - np.eye(2), "neg")
    sol = solve_feasibility(p)
    assert_allclose(sol["x"], 0, atol=1e-12)
    assert sol.margin == pytest.approx(1.0)


def test_contradictory_constraints_infeasible():
    p = LmiProblem()
    p.add_hermitian("x", 1)
    p.add_constraint(lambda v: v["x"], "pos")
    p.add_constraint(lambda v: -v["x"], "pos")
    with pytest.raises(Infeasible):
        solve_feasibility(p)


def test_scalar_stein():
    sol = structured_lyapunov(np.array([[0.5]]), ScalingStructure.from_dims([1]))
    X = sol["X"][0, 0].real
    assert X > 0 and 0.25 * X - X < 0


def test_size_cap():
    p = LmiProblem(size_cap=10)
    p.add_hermitian("X", 5)
    p.add_constraint(lambda v: v["X"], "pos")
    with pytest.raises(SizeCap):
        solve_feasibility(p)


def test_equality_constraints():
    p = LmiProblem()
    p.add_hermitian("X", 2)
    p.add_equality(lambda v: v["X"][0, 0] - 3.0)
    p.add_constraint(lambda v: v["X"], "pos")
    p.add_constraint(lambda v: v["X"] - 4 * np.eye(2), "neg")
    sol = solve_feasibility(p)
    assert sol["X"][0, 0].real == pytest.approx(3.0, abs=1e-9)
    assert nm.min_eig(sol["X"]) > 0


def test_psd_only_problem():
    p = LmiProblem()
    p.add_hermitian("X", 2)
    p.add_equality(lambda v: v["X"] - np.diag([1.0, 0.0]))
    p.add_constraint(lambda v: v["X"], "psd")
    sol = solve_feasibility(p)
    assert_allclose(sol["X"], np.diag([1.0, 0.0]), atol=1e-12)


def test_solution_slacks_reverify(rng):
    for _ in range(10):
        A = crandn(rng, 3, 3)
        A *= 0.9 / nm.spectral_radius(A)
        try:
            sol = structured_lyapunov(A, ScalingStructure.from_dims([1, 2]))
        except Infeasible:
            continue
        X = sol["X"]
        assert nm.min_eig(X) >= sol.margin - 1e-9
        assert -nm.max_eig(A @ X @ A.conj().T - X) >= sol.margin - 1e-9


def test_optimal_stop_improves_margin(rng):
    A = crandn(rng, 3, 3)
    A *= 0.7 / nm.spectral_radius(A)
    s = ScalingStructure.full(3)
    first = structured_lyapunov(A, ScalingStructure.from_dims([3]), stop="first", radius=10)
    best = structured_lyapunov(A, ScalingStructure.from_dims([3]), stop="optimal", radius=10)
    assert best.margin >= first.margin - 1e-12
    assert s.n == 3


# -- Finsler ---------------------------------------------------------------

def test_finsler_scalar_examples():
    mu = finsler_scalar(np.eye(2), np.eye(2))
    assert mu is not None and nm.min_eig(mu * np.eye(2) - np.eye(2)) > 0
    mu = finsler_scalar(np.zeros((1, 2)), -np.eye(2))
    assert mu is not None
    assert finsler_scalar(np.array([[1.0, 0.0]]), np.diag([-1.0, 1.0])) is None


def _psi(H, R, S, J):
    return H + R.conj().T @ J.conj().T @ S + S.conj().T @ J @ R


def test_finsler_complete_identity():
    J = finsler_complete(np.eye(2), np.eye(2), np.eye(2))
    assert nm.max_eig(_psi(np.eye(2), np.eye(2), np.eye(2), J)) < 0


def test_finsler_complete_zero_data():
    J = finsler_complete(-np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)))
    assert_allclose(J, 0)
    assert finsler_complete(np.eye(2), np.zeros((1, 2)), np.zeros((1, 2))) is None


def test_finsler_complete_scalar_corrections():
    R = S = np.array([[1.0, 0.0]])
    H = np.diag([1.0, -1.0])
    J = finsler_complete(H, R, S)
    assert J is not None and 1 + 2 * J[0, 0].real < 0
    R = S = np.array([[0.0, 1.0]])
    H = np.diag([-1.0, 1.0])
    J = finsler_complete(H, R, S)
    assert J is not None and 1 + 2 * J[0, 0].real < 0


@pytest.mark.parametrize("cplx", [False, True])
def test_finsler_complete_random(cplx, rng):
    for _ in range(40):
        H, R, S = finsler_instance(rng, True, cplx)
        J = finsler_complete(H, R, S)
        assert J is not None
        assert nm.max_eig(nm.herm(_psi(H, R, S, J))) < 0
        H, R, S = finsler_instance(rng, False, cplx)
        assert finsler_complete(H, R, S) is None
        assert max(c.max() for c in compressions(H, R, S)) >= -1e-10


def test_finsler_scalar_matches_complete_with_equal_factors(rng):
    for _ in range(100):
        n = int(rng.integers(2, 6))
        R = crandn(rng, int(rng.integers(1, n)), n)
        H = crandn(rng, n, n)
        H = H + H.conj().T
        a = finsler_scalar(R, H) is not None
        b = finsler_complete(H, R, R) is not None
        assert a == b


# -- mu-hat ----------------------------------------------------------------

def test_muhat_zero():
    mu, _ = scaled_norm_bisect(np.zeros((2, 2)), ScalingStructure.full(2))
    assert mu == 0.0


def test_muhat_normal_full_block():
    mu, _ = scaled_norm_bisect(np.diag([0.5, 0.5]), ScalingStructure.full(2))
    assert mu == pytest.approx(0.5, abs=1e-4)


def test_muhat_nilpotent_scaled_away():
    A = np.array([[0.0, 2.0], [0.0, 0.0]])
    mu, X = scaled_norm_bisect(A, ScalingStructure([(1, "scalar"), (1, "scalar")]), tol=1e-4)
    assert mu <= 1e-4
    assert nm.min_eig(X) > 0


def test_muhat_sandwich_small(rng):
    for _ in range(8):
        A = crandn(rng, 3, 3)
        s = random_structure(rng, 3)
        mu, X = scaled_norm_bisect(A, s)
        assert nm.spectral_radius(A) - 1e-4 <= mu <= nm.largest_singular_value(A) + 1e-4
        g = mu + 1e-4
        assert nm.max_eig(A @ X @ A.conj().T - g * g * X) < 0



def test_complex_data_with_real_valued_compression():
    # a 1 x 1 compression is real for every Hermitian X even when A is
    # complex; here only complex X are feasible
    A = np.array([[-1.5398183818786286 - 2.061206001879859j, 2.16436857198713 + 0.3780098812834932j],
                  [-0.21236719348879443 - 0.8356725303106318j,
                   -0.3388633683022634 + 1.5032998842528433j]])
    C = np.array([[-0.7758961005461539 - 2.7224161043317197j,
                   0.41071644017052067 - 0.6733047987738846j]])
    k = nm.orth_kernel(C)
    p = LmiProblem()
    p.add_structured("X", ScalingStructure.from_dims([2]))
    p.add_constraint(lambda v: v["X"], "pos")
    p.add_constraint(lambda v: k.conj().T @ (A.conj().T @ v["X"] @ A - v["X"]) @ k, "neg")
    sol = solve_feasibility(p)
    X = sol["X"]
    assert np.abs(X.imag).max() > 0
    assert nm.min_eig(X) > 0
    assert nm.max_eig(k.conj().T @ (A.conj().T @ X @ A - X) @ k) < 0
