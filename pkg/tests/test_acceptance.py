"""Acceptance suite: one test per criterion at its stated counts and tolerances.

Each test prints a single ``[PASS]`` or ``[FAIL]`` line (visible with
``pytest -s`` or in the terminal summary via ``-rA``).
"""

import time

import numpy as np
import pytest

from helpers import crandn, finsler_instance, random_structure
from ndhinf import grsys, synth, youla
from ndhinf import interp
from ndhinf import numerics as nm
from ndhinf.errors import Infeasible
from ndhinf.grsys import Realization, close_loop
from ndhinf.interp import InterpolationData
from ndhinf.lmi import ScalingStructure, finsler_complete, scaled_norm_bisect
from ndhinf.testing import (constructed_plant, contractive_scalar_realization,
                            random_polydisk_points, random_stable_realization,
                            stabilizable_triple)

NC_SAMPLES, NC_K = 10, 4


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")


@pytest.fixture(scope="module")
def state_pool():
    """Every state matrix generated below, for the implication check."""
    return []


@pytest.fixture(scope="module")
def stabilization_runs(state_pool):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    loops = []
    for _ in range(100):
        n = int(rng.integers(1, 6))
        A, B2, C2 = stabilizable_triple(rng, n, cplx=bool(rng.integers(2)))
        G = Realization([n], A, B2, C2, np.zeros((1, 1)), (0, 1, 0, 1))
        _, K = synth.stabilize(G)
        loops.append(close_loop(G, K))
    elapsed = time.perf_counter() - t0
    state_pool.extend((cl.A, cl.space) for cl in loops)
    return loops, elapsed


@pytest.fixture(scope="module")
def hinf_runs(state_pool):
    rng = np.random.default_rng(105)
    runs = []
    for _ in range(30):
        d = int(rng.integers(1, 3))
        dims = [int(v) for v in rng.integers(1, 7 if d == 1 else 4, size=d)]
        io = tuple(int(v) for v in rng.integers(1, 3, size=4))
        G, _ = constructed_plant(rng, dims, io, cplx=bool(rng.integers(2)))
        try:
            _, K = synth.hinf_synthesize(G)
        except Infeasible:
            runs.append((G, None, None))
            continue
        cl = close_loop(G, K)
        runs.append((G, cl, synth.scaled_performance_solution(cl)))
        state_pool.append((cl.A, cl.space))
    return runs


# -- 1 ---------------------------------------------------------------------

def test_criterion_1_stabilization(capsys, stabilization_runs):
    loops, elapsed = stabilization_runs
    worst = max(nm.spectral_radius(cl.A) for cl in loops)
    ok = worst < 1 - 1e-6 and elapsed < 10.0
    report(capsys, 1, ok, f"100 triples, max rho(A_cl) = {worst:.6f}, {elapsed:.2f} s")
    assert worst < 1 - 1e-6
    assert elapsed < 10.0


# -- 2 ---------------------------------------------------------------------

def test_criterion_2_finsler(capsys):
    rng = np.random.default_rng(102)
    fail_neg = fail_ind = 0
    for _ in range(200):
        H, R, S = finsler_instance(rng, negative=True)
        J = finsler_complete(H, R, S)
        if J is None:
            fail_neg += 1
            continue
        M = H + R.conj().T @ J.conj().T @ S + S.conj().T @ J @ R
        fail_neg += not nm.min_eig(-nm.herm(M)) > 0
    for _ in range(200):
        H, R, S = finsler_instance(rng, negative=False)
        fail_ind += finsler_complete(H, R, S) is not None
    ok = fail_neg == 0 and fail_ind == 0
    report(capsys, 2, ok, f"failures: {fail_neg}/200 negative, {fail_ind}/200 indefinite")
    assert fail_neg == 0
    assert fail_ind == 0


# -- 3 ---------------------------------------------------------------------

def test_criterion_3_muhat_sandwich(capsys):
    rng = np.random.default_rng(103)
    bad = {"random": 0, "full": 0, "scalar": 0}
    worst = {"random": 0.0, "full": 0.0, "scalar": 0.0}
    for _ in range(100):
        n = int(rng.integers(1, 9))
        A = crandn(rng, n, n) * rng.uniform(0.2, 2.0)
        rho, sig = nm.spectral_radius(A), nm.largest_singular_value(A)
        mu, _ = scaled_norm_bisect(A, random_structure(rng, n))
        gap = max(rho - 1e-4 - mu, mu - sig - 1e-4)
        worst["random"] = max(worst["random"], gap)
        bad["random"] += gap > 0
        mu, _ = scaled_norm_bisect(A, ScalingStructure.full(n))
        worst["full"] = max(worst["full"], abs(mu - sig))
        bad["full"] += abs(mu - sig) > 1e-4
        mu, _ = scaled_norm_bisect(A, ScalingStructure([(n, "scalar")]))
        worst["scalar"] = max(worst["scalar"], abs(mu - rho))
        bad["scalar"] += abs(mu - rho) > 1e-3
    ok = sum(bad.values()) == 0
    report(capsys, 3, ok, f"violations {bad}; |mu-sigma| full <= {worst['full']:.1e}, "
                          f"|mu-rho| scalar <= {worst['scalar']:.1e}")
    assert ok


# -- 4 ---------------------------------------------------------------------

def test_criterion_4_kernel_completed(capsys, state_pool):
    rng = np.random.default_rng(104)
    disagree = 0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        dims = [int(v) for v in rng.integers(1, 3, size=d)]
        n = sum(dims)
        A = crandn(rng, n, n) * rng.uniform(0.3, 1.5)
        M = crandn(rng, 1, n) * (rng.uniform() < 0.8)
        det = [synth.detectable_lmi(M, A, dims, form) is not None for form in ("completed", "kernel")]
        stb = [synth.stabilizable_lmi(A, M.T, dims, form) is not None
               for form in ("completed", "kernel")]
        disagree += (det[0] != det[1]) + (stb[0] != stb[1])
        state_pool.append((A, grsys.StructuredSpace(dims)))
    report(capsys, 4, disagree == 0, f"100 instances, {disagree} verdict disagreements")
    assert disagree == 0


# -- 5 ---------------------------------------------------------------------

def test_criterion_5_hinf(capsys, hinf_runs):
    infeasible = sum(cl is None for _, cl, _ in hinf_runs)
    margins, sups = [], []
    for G, cl, sol in hinf_runs:
        if cl is None:
            continue
        margins.append(-np.inf if sol is None else sol.margin)
        sups.append(grsys.torus_sup_norm(cl, 32)[0])
    ok = infeasible == 0 and min(margins) > 1e-8 and max(sups) < 1
    report(capsys, 5, ok, f"30 plants, {infeasible} infeasible, min margin {min(margins):.2e}, "
                          f"max grid sup {max(sups):.4f}")
    assert infeasible == 0
    assert min(margins) > 1e-8
    assert max(sups) < 1


# -- 6 ---------------------------------------------------------------------

def test_criterion_6_youla(capsys, state_pool):
    rng = np.random.default_rng(106)
    worst_bezout = worst_identity = 0.0
    unstable = 0
    for _ in range(30):
        d = int(rng.integers(1, 3))
        dims = [int(v) for v in rng.integers(1, 3, size=d)]
        io = tuple(int(v) for v in rng.integers(1, 3, size=4))
        G, _ = constructed_plant(rng, dims, io, cplx=True)
        gains, _ = synth.stabilize(G)
        f = youla.coprime_from_gains(G.A, G.B2, G.C2, gains, G.space)
        pts = random_polydisk_points(d, 20, rng)
        worst_bezout = max(worst_bezout, max(f.bezout_residual(z) for z in pts))
        Gt11, Gt12, Gt21 = youla.model_matching_data(G, f)
        nw, nu, nz, ny = G.io
        for _ in range(10):
            Lam = youla.TransferMap(random_stable_realization(dims, nu, ny, rng, cplx=True))
            cl = close_loop(G, youla.youla_controller(f, Lam).realization)
            unstable += grsys.scaled_stable(cl.A, cl.space) is None
            state_pool.append((cl.A, cl.space))
            for z in pts[:5]:
                direct = cl(z)
                matched = Gt11(z) + Gt12(z) @ Lam(z) @ Gt21(z)
                worst_identity = max(worst_identity, float(np.max(np.abs(direct - matched))))
    ok = worst_bezout < 1e-8 and unstable == 0 and worst_identity < 1e-8
    report(capsys, 6, ok, f"Bezout {worst_bezout:.1e}, {unstable}/300 loops not scaled stable, "
                          f"model-matching residual {worst_identity:.1e}")
    assert worst_bezout < 1e-8
    assert unstable == 0
    assert worst_identity < 1e-8


# -- 7 ---------------------------------------------------------------------

def test_criterion_7_agler(capsys):
    rng = np.random.default_rng(107)
    t0 = time.perf_counter()
    mismatch = 0
    for _ in range(100):
        N = int(rng.integers(1, 6))
        z = 0.9 * np.sqrt(rng.uniform(size=N)) * np.exp(2j * np.pi * rng.uniform(size=N))
        w = rng.uniform(0, 1.1, size=N) * np.exp(2j * np.pi * rng.uniform(size=N))
        data = InterpolationData([[v] for v in z], w)
        pick_ok = np.linalg.eigvalsh(interp.pick_matrix(data)).min() >= -1e-8
        try:
            interp.agler_feasible(data, method="sdp")
            sdp_ok = True
        except Infeasible:
            sdp_ok = False
        mismatch += pick_ok != sdp_ok
    missed = 0
    for _ in range(30):
        d = int(rng.integers(1, 4))
        dims = [int(v) for v in rng.integers(1, 7 // d + 1, size=d)]
        G = contractive_scalar_realization(dims, rng, radius=rng.uniform(0.5, 0.95))
        pts = random_polydisk_points(d, int(rng.integers(1, 5)), rng, radius=0.9)
        try:
            interp.agler_feasible(interp.sample_instance(G, pts))
        except Infeasible:
            missed += 1
    elapsed = time.perf_counter() - t0
    ok = mismatch == 0 and missed == 0 and elapsed < 60
    report(capsys, 7, ok, f"{mismatch}/100 d=1 mismatches, {missed}/30 necessity failures, "
                          f"{elapsed:.2f} s")
    assert mismatch == 0
    assert missed == 0
    assert elapsed < 60


# -- 8 ---------------------------------------------------------------------

def test_criterion_8_nc_consistency(capsys, stabilization_runs, hinf_runs):
    rng = np.random.default_rng(108)
    loops, _ = stabilization_runs
    singular = contractive = 0
    checked = 0
    for cl in loops + [cl for _, cl, _ in hinf_runs if cl is not None]:
        hinf = cl.D.size > 0
        for _ in range(NC_SAMPLES):
            delta = grsys.random_contractive_tuple(cl.space.d, NC_K, rng)
            cond = grsys.nc_pencil_condition(cl.A, cl.space, delta)
            singular += not cond < 1e12
            if hinf:
                s = nm.largest_singular_value(grsys.eval_nc(cl, delta))
                contractive += not s < 1
            checked += 1
    ok = singular == 0 and contractive == 0
    report(capsys, 8, ok, f"{checked} evaluations, {singular} singular pencils, "
                          f"{contractive} non-contractive")
    assert singular == 0
    assert contractive == 0


# -- 9 ---------------------------------------------------------------------

def test_criterion_9_implication(capsys, state_pool, stabilization_runs, hinf_runs):
    # pull in every generator even when run in isolation
    if not any(len(space.dims) == 3 for _, space in state_pool):
        rng = np.random.default_rng(109)
        for _ in range(50):
            dims = [int(v) for v in rng.integers(1, 3, size=3)]
            n = sum(dims)
            state_pool.append((crandn(rng, n, n) * rng.uniform(0.3, 1.5),
                               grsys.StructuredSpace(dims)))
    violations = certified = 0
    for A, space in state_pool:
        if grsys.scaled_stable(A, space) is None:
            continue
        certified += 1
        violations += not grsys.hautus_stable_grid(A, space).passed
    report(capsys, 9, violations == 0, f"{len(state_pool)} instances, {certified} scaled stable, "
                                       f"{violations} with Hautus FailAt")
    assert violations == 0
