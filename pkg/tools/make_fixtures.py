"""Regenerate the bundled JSON fixtures (deterministic)."""

import json
from pathlib import Path

import numpy as np

from ndhinf import grsys
from ndhinf.interp import InterpolationData, sample_instance
from ndhinf.testing import (constructed_plant, contractive_scalar_realization,
                            random_stable_realization, stabilizable_triple)

OUT = Path(__file__).resolve().parents[1] / "src" / "ndhinf" / "fixtures"


def doc(kind, payload, name, seed):
    return {"kind": kind, "payload": payload, "metadata": {"name": name, "seed": seed}}


def write(fname, d):
    (OUT / fname).write_text(json.dumps(d, indent=1) + "\n")


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(20240101)
    S = random_stable_realization([2, 1], 2, 2, rng, radius=0.8)
    G = grsys.Realization(S.space, S.A, S.B, S.C, np.array([[0.1, 0.0], [0.2, 0.0]]), (1, 1, 1, 1))
    write("nominal-2d.json", doc("realization", G.to_dict(), "nominal-2d", 20240101))

    rng = np.random.default_rng(7)
    A, B2, C2 = stabilizable_triple(rng, 3, spread=1.8)
    B1 = rng.standard_normal((3, 1))
    C1 = rng.standard_normal((1, 3))
    G = grsys.Realization([3], A, np.hstack([B1, B2]), np.vstack([C1, C2]),
                          np.zeros((2, 2)), (1, 1, 1, 1))
    write("stabilizable-1d.json", doc("realization", G.to_dict(), "stabilizable-1d", 7))

    G = grsys.Realization([1], [[2.0]], np.zeros((1, 0)), np.zeros((0, 1)), np.zeros((0, 0)),
                          (0, 0, 0, 0))
    write("unstable-1d.json", doc("realization", G.to_dict(), "unstable-1d", 0))

    G = grsys.Realization([1], [[2.0]], [[1.0, 0.0]], [[1.0], [1.0]], np.zeros((2, 2)),
                          (1, 1, 1, 1))
    write("b2-zero-1d.json", doc("realization", G.to_dict(), "b2-zero-1d", 0))

    rng = np.random.default_rng(11)
    G, _ = constructed_plant(rng, [1, 1], (1, 1, 1, 1), r=0.8)
    write("hinf-2d.json", doc("realization", G.to_dict(), "hinf-2d", 11))

    rng = np.random.default_rng(3)
    pts = [[0.1, 0.2j], [-0.3, 0.4], [0.5j, -0.2 + 0.1j]]
    write("interp-zero.json",
          doc("interpolation", InterpolationData(pts, [0, 0, 0]).to_dict(), "interp-zero", 3))
    F = contractive_scalar_realization([2], rng, radius=0.9)
    data = sample_instance(F, [[0.1], [0.5j], [-0.4 + 0.2j], [0.7]])
    write("interp-pick-1d.json", doc("interpolation", data.to_dict(), "interp-pick-1d", 3))
    write("interp-infeasible.json",
          doc("interpolation", InterpolationData([[0.2, 0.1]], [1.5]).to_dict(),
              "interp-infeasible", 0))

    lft = {"io": {"nw": 1, "nu": 1, "nz": 1, "ny": 1}, "u_dims": [1], "s_dim": 1,
           "parts": {"A_UU": [[0.2]], "A_US": [[0.3]], "A_SU": [[0.1]], "A_SS": [[0.5]],
                     "B_U1": [[0.1]], "B_S2": [[1.0]], "C_1U": [[0.2]], "C_2S": [[1.0]],
                     "D_11": [[0.1]]}}
    write("lft-1d.json", doc("lft-assembly", lft, "lft-1d", 0))


if __name__ == "__main__":
    main()
