import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from ndhinf import grsys
from ndhinf import numerics as nm
from ndhinf.errors import (D22NotZero, DimensionError, IllPosed, SchemaError, SingularD,
                           SingularPencil)
from ndhinf.grsys import (OperatorTuple, Realization, StructuredSpace, assemble_lft, close_loop,
                          eval_nc, eval_transfer, hautus_stable_grid, lft, scaled_stable, z_pencil)
from ndhinf.testing import random_polydisk_points

from helpers import crandn


def random_realization(rng, dims, p, m, io=None, scale=0.8):
    n = sum(dims)
    A = crandn(rng, n, n)
    if n:
        A *= scale / np.linalg.norm(A, 2)
    return Realization(dims, A, crandn(rng, n, m), crandn(rng, p, n), crandn(rng, p, m), io)


def random_dims(rng, d, lo=0, hi=2):
    return [int(v) for v in rng.integers(lo, hi + 1, size=d)]


# -- construction ----------------------------------------------------------

def test_space_and_realization_validation():
    with pytest.raises(DimensionError):
        StructuredSpace([])
    with pytest.raises(DimensionError):
        Realization([2], np.zeros((2, 2)), np.zeros((2, 1)), np.zeros((1, 3)), np.zeros((1, 1)))
    with pytest.raises(DimensionError):
        Realization([1], [[0]], [[1]], [[1]], [[0]], io=(1, 1, 1, 0))
    G = Realization([1], [[0.5]], [[1.0]], [[1.0]], [[0.0]])
    with pytest.raises(AttributeError):
        G.A = 1
    with pytest.raises(ValueError):
        G.A[0, 0] = 2.0


def test_io_blocks():
    G = Realization([1], [[0.0]], [[1, 2]], [[3], [4]], [[5, 6], [7, 0]], io=(1, 1, 1, 1))
    assert_array_equal(G.B1, [[1]])
    assert_array_equal(G.B2, [[2]])
    assert_array_equal(G.C2, [[4]])
    assert_array_equal(G.D12, [[6]])
    assert_array_equal(G.part("21").D, [[7]])


# -- pencil and evaluation -------------------------------------------------

def test_z_pencil_examples():
    assert_array_equal(z_pencil([1, 1], (0, 0)), np.zeros((2, 2)))
    assert_array_equal(z_pencil([2, 1], (1, 1)), np.eye(3))
    assert_array_equal(z_pencil([1, 2], (1j, 0.5)), np.diag([1j, 0.5, 0.5]))
    with pytest.raises(DimensionError):
        z_pencil([1, 2], (1,))


def test_eval_transfer_examples(rng):
    G = random_realization(rng, [1, 2], 2, 3)
    assert_allclose(eval_transfer(G, (0, 0)), G.D)
    S = Realization([1], [[0.5]], [[1.0]], [[1.0]], [[0.0]])
    assert eval_transfer(S, (0.5,))[0, 0] == pytest.approx(2 / 3)
    Z = Realization([2], crandn(rng, 2, 2), crandn(rng, 2, 1), np.zeros((1, 2)), [[0.3]])
    assert_allclose(Z(0.4 + 0.1j), [[0.3]])


def test_eval_transfer_singular_pencil():
    G = Realization([1], [[1.0]], [[1.0]], [[1.0]], [[0.0]])
    with pytest.raises(SingularPencil):
        eval_transfer(G, (1.0,))


def test_eval_nc_examples(rng):
    G = random_realization(rng, [1, 2], 1, 2)
    z = (0.3 + 0.2j, -0.5)
    assert_allclose(eval_nc(G, OperatorTuple.scalar(z, 3)), np.kron(G(z), np.eye(3)),
                    atol=1e-13)
    zero = OperatorTuple([np.zeros((2, 2)), np.zeros((2, 2))])
    assert_allclose(eval_nc(G, zero), np.kron(G.D, np.eye(2)))
    S = Realization([1], [[1.0]], [[1.0]], [[1.0]], [[0.0]])
    shift = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert_allclose(eval_nc(S, OperatorTuple([shift])), shift)


def test_operator_tuple_cap():
    with pytest.raises(DimensionError):
        OperatorTuple([np.eye(17)])
    with pytest.raises(DimensionError):
        OperatorTuple([np.eye(2), np.eye(3)])


# -- composition -----------------------------------------------------------

def test_series_parallel_invert(rng):
    G = random_realization(rng, [1, 1], 2, 2)
    H = random_realization(rng, [2, 0], 2, 2)
    I = Realization.static(np.eye(2), 2)
    for z in random_polydisk_points(2, 10, rng):
        assert_allclose(grsys.series(G, I)(z), G(z), atol=1e-12)
        assert_allclose(grsys.series(G, H)(z), G(z) @ H(z), atol=1e-12)
        assert_allclose(grsys.parallel(G, G, -1.0)(z), 0, atol=1e-12)
    Dinv = grsys.invert(Realization.static(2 * np.eye(2)))
    assert_allclose(Dinv((0.3,)), 0.5 * np.eye(2))
    Gi = grsys.invert(G)
    z = (0.2, 0.3j)
    assert_allclose(Gi(z) @ G(z), np.eye(2), atol=1e-10)
    with pytest.raises(SingularD):
        grsys.invert(Realization.static(np.zeros((2, 2))))


def test_stack_and_scale(rng):
    G = random_realization(rng, [1], 1, 1)
    H = random_realization(rng, [2], 1, 2)
    S = grsys.stack([[G, H]])
    z = (0.3,)
    assert_allclose(S(z), np.hstack([G(z), H(z)]), atol=1e-13)
    assert_allclose(grsys.scale(G, left=2.0 * np.eye(1))(z), 2 * G(z))


def test_interconnect_ill_posed():
    G = Realization.static(np.eye(1))
    with pytest.raises(IllPosed):
        grsys.interconnect([G], np.eye(1), np.eye(1), np.eye(1), np.zeros((1, 1)))


# -- closed loop -----------------------------------------------------------

def lft_oracle(G, K, z):
    nw, nu, nz, ny = G.io
    g = G(z)
    k = K(z)
    G11, G12 = g[:nz, :nw], g[:nz, nw:]
    G21, G22 = g[nz:, :nw], g[nz:, nw:]
    return G11 + G12 @ k @ np.linalg.solve(np.eye(ny) - G22 @ k, G21)


def test_close_loop_zero_controller(rng):
    G = random_realization(rng, [1, 2], 3, 3, io=(2, 1, 2, 1))
    D = np.array(G.D)
    D[2:, 2:] = 0
    G = Realization(G.space, G.A, G.B, G.C, D, G.io)
    K = Realization.static(np.zeros((1, 1)), 2)
    T = close_loop(G, K)
    assert_allclose(T.A, G.A)
    assert_allclose(T.B, G.B1)
    assert_allclose(T.C, G.C1)
    assert_allclose(T.D, G.D11)


def test_close_loop_disconnected(rng):
    n = 2
    G = Realization([1, 1], crandn(rng, n, n), np.hstack([crandn(rng, n, 1), np.zeros((n, 1))]),
                    np.vstack([crandn(rng, 1, n), np.zeros((1, n))]), np.zeros((2, 2)),
                    (1, 1, 1, 1))
    K = random_realization(rng, [1, 1], 1, 1)
    T = close_loop(G, K)
    # interleaved order: (x1, xK1, x2, xK2)
    perm = [0, 2, 1, 3]
    blk = np.zeros((4, 4), complex)
    blk[:2, :2] = G.A
    blk[2:, 2:] = K.A
    assert_allclose(T.A, blk[np.ix_(perm, perm)])
    assert T.space.dims == (2, 2)


def test_close_loop_requires_zero_d22(rng):
    G = random_realization(rng, [1], 2, 2, io=(1, 1, 1, 1))
    K = random_realization(rng, [1], 1, 1)
    with pytest.raises(D22NotZero):
        close_loop(G, K)
    T = lft(G, K)
    z = (0.3 - 0.2j,)
    assert_allclose(T(z), lft_oracle(G, K, z), atol=1e-10)


def test_close_loop_lft_oracle(rng):
    for _ in range(50):
        d = int(rng.integers(1, 4))
        gd = random_dims(rng, d, 0, 2)
        kd = random_dims(rng, d, 0, 1)
        io = tuple(int(v) for v in rng.integers(1, 3, size=4))
        nw, nu, nz, ny = io
        G = random_realization(rng, gd, nz + ny, nw + nu, io)
        D = np.array(G.D)
        D[nz:, nw:] = 0
        G = Realization(G.space, G.A, G.B, G.C, D, io)
        K = random_realization(rng, kd, nu, ny)
        T = close_loop(G, K)
        T2 = lft(G, K)
        z = random_polydisk_points(d, 1, rng)[0]
        ref = lft_oracle(G, K, z)
        assert np.max(np.abs(T(z) - ref)) <= 1e-9 * max(1.0, np.abs(ref).max())
        assert np.max(np.abs(T2(z) - ref)) <= 1e-9 * max(1.0, np.abs(ref).max())


# -- stability -------------------------------------------------------------

def test_hautus_examples():
    assert hautus_stable_grid(np.zeros((2, 2)), [1, 1]).passed
    v = hautus_stable_grid([[1.0]], [1])
    assert v.kind == "FailAt"
    assert v.z[0] == pytest.approx(1.0)
    v = hautus_stable_grid(np.diag([0.5, 2.0]), [1, 1])
    assert not v.passed
    assert v.z[1] == pytest.approx(0.5)
    assert v.min_singular == pytest.approx(0.0, abs=1e-12)


def test_scaled_stable_examples(rng):
    X = scaled_stable(np.zeros((2, 2)), [1, 1])
    assert X is not None and nm.min_eig(X) > 0
    A = crandn(rng, 3, 3)
    A *= 0.9 / np.linalg.norm(A, 2)
    assert scaled_stable(A, [1, 2]) is not None
    A = np.array([[0.0, 3.0], [0.0, 0.5]])
    X = scaled_stable(A, [2])
    assert X is not None
    assert nm.max_eig(A @ X @ A.T - X) < 0
    assert scaled_stable(np.diag([0.5, 2.0]), [1, 1]) is None


def test_scaled_implies_hautus_and_contraction(rng):
    for _ in range(20):
        d = int(rng.integers(1, 4))
        dims = random_dims(rng, d, 1, 2)
        n = sum(dims)
        A = crandn(rng, n, n)
        A *= rng.uniform(0.5, 1.3) / nm.spectral_radius(A)
        X = scaled_stable(A, dims)
        if X is None:
            continue
        assert hautus_stable_grid(A, dims, 8).passed
        Q = nm.sqrtm_psd(X)
        assert nm.largest_singular_value(np.linalg.solve(Q, A @ Q)) < 1
        assert grsys.is_scaled_contraction(A, X)
        for _ in range(5):
            delta = grsys.random_contractive_tuple(d, int(rng.integers(1, 7)), rng)
            assert grsys.nc_pencil_condition(A, dims, delta) < 1e8


# -- LFT assembly ----------------------------------------------------------

def _lft_parts(rng, nU, nS, io):
    nw, nu, nz, ny = io
    shapes = {"A_UU": (nU, nU), "A_US": (nU, nS), "A_SU": (nS, nU), "A_SS": (nS, nS),
              "B_U1": (nU, nw), "B_U2": (nU, nu), "B_S1": (nS, nw), "B_S2": (nS, nu),
              "C_1U": (nz, nU), "C_1S": (nz, nS), "C_2U": (ny, nU), "C_2S": (ny, nS),
              "D_11": (nz, nw), "D_12": (nz, nu), "D_21": (ny, nw), "D_22": (ny, nu)}
    return {k: 0.4 * crandn(rng, *s) for k, s in shapes.items()}


def test_assemble_lft_nominal(rng):
    io = (1, 1, 1, 1)
    P = _lft_parts(rng, 0, 2, io)
    G = assemble_lft(P, [0], 2, io)
    nom = Realization([2], P["A_SS"], np.hstack([P["B_S1"], P["B_S2"]]),
                      np.vstack([P["C_1S"], P["C_2S"]]),
                      np.block([[P["D_11"], P["D_12"]], [P["D_21"], P["D_22"]]]), io)
    lam = 0.3 + 0.4j
    assert_allclose(G((0.7, lam)), nom((lam,)), atol=1e-13)


def test_assemble_lft_decoupled(rng):
    io = (1, 1, 1, 1)
    P = _lft_parts(rng, 2, 1, io)
    P["A_US"] = np.zeros((2, 1))
    P["A_SU"] = np.zeros((1, 2))
    P["B_U1"] = np.zeros((2, 1))
    P["B_U2"] = np.zeros((2, 1))
    G = assemble_lft(P, [2], 1, io)
    assert_allclose(G((0.1, 0.5)), G((-0.6j, 0.5)), atol=1e-13)


def test_assemble_lft_two_stage(rng):
    io = (1, 1, 2, 1)
    for _ in range(5):
        u_dims = [1, 2]
        P = _lft_parts(rng, 3, 2, io)
        G = assemble_lft(P, u_dims, 2, io)
        dU = np.array([0.3 + 0.1j, -0.4])
        lam = 0.2 - 0.5j
        # close the shift first, then the uncertainty
        inner_A = P["A_UU"] + P["A_US"] * lam @ np.linalg.solve(np.eye(2) - lam * P["A_SS"],
                                                                 P["A_SU"])
        BU = np.hstack([P["B_U1"], P["B_U2"]])
        BS = np.hstack([P["B_S1"], P["B_S2"]])
        CU = np.vstack([P["C_1U"], P["C_2U"]])
        CS = np.vstack([P["C_1S"], P["C_2S"]])
        Dn = np.block([[P["D_11"], P["D_12"]], [P["D_21"], P["D_22"]]])
        res = lam * np.linalg.solve(np.eye(2) - lam * P["A_SS"], np.eye(2))
        inner_B = BU + P["A_US"] @ res @ BS
        inner_C = CU + CS @ res @ P["A_SU"]
        inner_D = Dn + CS @ res @ BS
        Z = np.diag(np.repeat(dU, u_dims))
        ref = inner_D + inner_C @ np.linalg.solve(np.eye(3) - Z @ inner_A, Z @ inner_B)
        assert_allclose(G((*dU, lam)), ref, atol=1e-12)


def test_assemble_lft_rejects_unknown_block():
    with pytest.raises(DimensionError):
        assemble_lft({"A_XX": [[1]]}, [1], 1, (0, 0, 0, 0))


# -- serialization ---------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3), st.integers(1, 2), st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_json_round_trip_bit_faithful(n1, m, p, seed):
    rng = np.random.default_rng(seed)
    G = random_realization(rng, [n1, 1], p + 1, m + 1, io=(m, 1, p, 1))
    G2 = grsys.loads(grsys.dumps(G))
    for a, b in ((G.A, G2.A), (G.B, G2.B), (G.C, G2.C), (G.D, G2.D)):
        assert_array_equal(a, b)
    assert G2.io == G.io and G2.space == G.space


def test_json_schema_errors():
    with pytest.raises(SchemaError):
        grsys.realization_from_dict({"dims": [1]})
    bad = {"dims": [1], "io": {"nw": 1, "nu": 0, "nz": 1, "ny": 0},
           "A": [[1]], "B": [[1, 2]], "C": [[1]], "D": [[0]]}
    with pytest.raises(SchemaError):
        grsys.realization_from_dict(bad)
    bad["B"] = [[[1, 2, 3]]]
    with pytest.raises(SchemaError):
        grsys.realization_from_dict(bad)
    with pytest.raises(json.JSONDecodeError):
        grsys.loads("{")


def test_torus_sup_norm(rng):
    G = Realization([1], [[0.5]], [[1.0]], [[1.0]], [[0.0]])
    sup, pts, vals = grsys.torus_sup_norm(G, 16)
    assert sup == pytest.approx(2.0)
    assert pts.shape == (16, 1)
    sup2, _, _ = grsys.torus_sup_norm(G, 16, threads=3)
    assert sup2 == sup
