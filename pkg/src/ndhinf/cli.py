"""Command-line front end.

Every command reads JSON problem files and prints a JSON report on
stdout; human diagnostics go to stderr.  Exit codes: 0 success, 1 usage
or schema error, 2 analysis negative, 3 infeasible.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import grsys, interp, synth, youla
from . import numerics as nm
from .errors import (D22NotZero, DimensionError, IllPosed, Infeasible, NdHinfError,
                     ReconstructionFailed, SchemaError, SingularPencil)
from .grsys import Realization, decode_matrix, encode_matrix
from .lmi import scaled_norm_bisect

EXIT_OK, EXIT_USAGE, EXIT_NEGATIVE, EXIT_INFEASIBLE = 0, 1, 2, 3

TOLERANCES = {"target_margin": 1e-7, "hermitian_rtol": nm.HERMITIAN_RTOL,
              "muhat_tol": 1e-4, "bezout_tol": 1e-8, "psd_tol": interp.PSD_TOL}


class CliError(Exception):
    def __init__(self, msg, code=EXIT_USAGE):
        super().__init__(msg)
        self.code = code


def _threads():
    try:
        return max(1, int(os.environ.get("NDHINF_THREADS", "1")))
    except ValueError:
        return 1


# -- problem files ---------------------------------------------------------

def fixture_path(name):
    """Path of a bundled fixture (with or without ``.json``)."""
    name = name if name.endswith(".json") else name + ".json"
    return resources.files("ndhinf") / "fixtures" / name


def read_json(path):
    p = Path(path)
    if not p.exists():
        fp = fixture_path(p.name)
        if p.parent == Path(".") and fp.is_file():
            return json.loads(fp.read_text())
        raise CliError(f"no such file: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None


def _unwrap(doc):
    """Return ``(kind, payload, metadata)`` of a problem document."""
    if not isinstance(doc, dict):
        raise SchemaError("problem file must hold a JSON object")
    if "kind" in doc:
        kind = doc["kind"]
        if kind not in ("realization", "interpolation", "lft-assembly"):
            raise SchemaError(f"unknown kind {kind!r}")
        if "payload" not in doc:
            raise SchemaError("problem file needs a 'payload'")
        return kind, doc["payload"], doc.get("metadata", {})
    if "dims" in doc:
        return "realization", doc, {}
    if "points" in doc:
        return "interpolation", doc, {}
    raise SchemaError("cannot tell the problem kind")


def _lft_from_payload(payload):
    try:
        io_d = payload["io"]
        io = (int(io_d["nw"]), int(io_d["nu"]), int(io_d["nz"]), int(io_d["ny"]))
        u_dims = [int(v) for v in payload["u_dims"]]
        s_dim = int(payload["s_dim"])
        parts = {k: decode_matrix(v, name=k) for k, v in payload.get("parts", {}).items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad lft-assembly payload ({exc})") from None
    try:
        return grsys.assemble_lft(parts, u_dims, s_dim, io)
    except DimensionError as exc:
        raise SchemaError(str(exc)) from None


def load_realization(path):
    kind, payload, meta = _unwrap(read_json(path))
    if kind == "realization":
        return grsys.realization_from_dict(payload), meta
    if kind == "lft-assembly":
        return _lft_from_payload(payload), meta
    raise SchemaError(f"{path}: expected a realization, got {kind}")


def load_interpolation(path):
    kind, payload, meta = _unwrap(read_json(path))
    if kind != "interpolation":
        raise SchemaError(f"{path}: expected interpolation data, got {kind}")
    return interp.InterpolationData.from_dict(payload), meta


def problem_document(kind, payload, **metadata):
    return {"kind": kind, "payload": payload, "metadata": metadata}


def _write(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2))


def _report(args, command, body):
    out = {"tool": "ndhinf", "version": __version__, "command": command,
           "seed": args.seed, "tolerances": TOLERANCES, "backend": nm.BACKEND}
    out.update(body)
    return out


def _finite(x):
    return None if x is None or not np.isfinite(x) else float(x)


# -- commands --------------------------------------------------------------

def cmd_analyze(args):
    G, _ = load_realization(args.file)
    A, space = G.A, G.space
    hv = grsys.hautus_stable_grid(A, space, args.grid)
    sol = grsys.scaled_stable_solution(A, space) if G.n else None
    if G.n == 0:
        mu, scaled = 0.0, {"certified": True, "margin": None, "X": []}
    else:
        mu, _ = scaled_norm_bisect(A, space.structure(), TOLERANCES["muhat_tol"])
        scaled = {"certified": sol is not None,
                  "margin": None if sol is None else float(sol.margin),
                  "X": None if sol is None else encode_matrix(sol["X"])}
    body = {"dims": list(space.dims), "hautus_grid": hv.to_dict(), "scaled_stable": scaled,
            "muhat": float(mu), "spectral_radius": nm.spectral_radius(A) if G.n else 0.0,
            "norm": nm.largest_singular_value(A) if G.n else 0.0}
    if args.structure_check and sol is not None:
        X = sol["X"]
        body["structure_check"] = {
            "off_structure": float(np.max(np.abs(X - space.structure().project(X)), initial=0.0)),
            "min_eig_X": nm.min_eig(X)}
    stable = bool(scaled["certified"])
    body["stable"] = stable
    return body, EXIT_OK if stable else EXIT_NEGATIVE


def _closed_loop_summary(G, K):
    T = grsys.lft(G, K)
    d = G.space.d
    out = {"closed_loop_states": T.n,
           "scaled_stable": T.n == 0 or grsys.scaled_stable(T.A, T.space) is not None}
    if d == 1:
        out["spectral_radius"] = nm.spectral_radius(T.A) if T.n else 0.0
    return T, out


def cmd_synthesize(args):
    G, _ = load_realization(args.file)
    if np.any(G.D22 != 0):
        raise SchemaError("synthesis needs D22 = 0")
    try:
        if args.mode == "stabilize":
            gains, K = synth.stabilize(G)
            cert = {"kind": "stabilize", "F": encode_matrix(gains.F), "L": encode_matrix(gains.L),
                    "Y": encode_matrix(gains.Y) if gains.Y is not None else None,
                    "X": encode_matrix(gains.X) if gains.X is not None else None}
        else:
            c = synth.hinf_feasibility(G, args.margin)
            if c is None:
                raise Infeasible("scaled H-infinity LMIs are infeasible",
                                 diagnostic={"lmi": "hinf (Y-LMI, X-LMI, coupling)"})
            K = synth.hinf_reconstruct(G, c)
            cert = {"kind": "hinf", **c.to_dict()}
    except Infeasible as exc:
        lmi = (exc.diagnostic or {}).get("lmi", "unknown")
        raise CliError(f"infeasible: {exc} (failing LMI: {lmi})", EXIT_INFEASIBLE) from None
    except ReconstructionFailed as exc:
        raise CliError(f"controller reconstruction failed: {exc}", EXIT_INFEASIBLE) from None
    T, summary = _closed_loop_summary(G, K)
    if args.mode == "hinf":
        sol = synth.scaled_performance_solution(T.as_single())
        summary["scaled_performance_margin"] = None if sol is None else float(sol.margin)
    body = {"mode": args.mode, "summary": summary,
            "controller": grsys.realization_to_dict(K), "certificate": cert}
    if args.out:
        out = Path(args.out)
        cert_path = out.with_name(out.stem + ".cert.json")
        _write(out, problem_document("realization", grsys.realization_to_dict(K),
                                     name=f"controller for {Path(args.file).name}",
                                     mode=args.mode, seed=args.seed))
        _write(cert_path, cert)
        body["written"] = [str(out), str(cert_path)]
    return body, EXIT_OK


def cmd_parametrize(args):
    G, _ = load_realization(args.file)
    nw, nu, nz, ny = G.io
    if args.kstar:
        Ks, _ = load_realization(args.kstar)
        Ks = Ks.as_single()
        shape = (nu + ny, nu + ny)
    else:
        Ks = None
        shape = (nu, ny)
    if args.lam:
        Lam, _ = load_realization(args.lam)
        Lam = Lam.as_single()
    else:
        Lam = Realization.static(np.zeros(shape), G.space.d)
    if Lam.D.shape != shape:
        raise SchemaError(f"Lambda must be {shape[0]} x {shape[1]}")
    if Lam.n and grsys.scaled_stable(Lam.A, Lam.space) is None:
        raise CliError("Lambda is not scaled stable", EXIT_NEGATIVE)
    body = {}
    try:
        if Ks is None:
            gains, _ = synth.stabilize(G)
            f = youla.coprime_from_gains(G.A, G.B2, G.C2, gains, G.space, seed=args.seed)
            rng = np.random.default_rng(args.seed)
            pts = youla.random_points(G.space.d, 20, rng)
            body["bezout_residual"] = max(f.bezout_residual(z) for z in pts)
            K = youla.youla_controller(f, Lam)
            body["route"] = "youla"
        else:
            K = youla.parametrize_all(G, Ks, Lam)
            body["route"] = "parametrize_all"
    except Infeasible as exc:
        lmi = (exc.diagnostic or {}).get("lmi", "unknown")
        raise CliError(f"infeasible: {exc} (failing LMI: {lmi})", EXIT_INFEASIBLE) from None
    K = K.realization
    Th = youla.theta(G, K)
    stable = Th.is_stable()
    body.update({"theta_stable": stable, "controller": grsys.realization_to_dict(K)})
    if args.out:
        _write(args.out, problem_document("realization", grsys.realization_to_dict(K),
                                          seed=args.seed))
        body["written"] = [args.out]
    return body, EXIT_OK if stable else EXIT_NEGATIVE


def cmd_interpolate(args):
    data, _ = load_interpolation(args.file)
    try:
        cert = interp.agler_feasible(data)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return {"feasible": False, "class": "Schur-Agler", "diagnostic": exc.diagnostic}, \
            EXIT_INFEASIBLE
    return {"feasible": True, "class": "Schur-Agler", "certificate": cert.to_dict()}, EXIT_OK


def cmd_verify(args):
    G, _ = load_realization(args.plant)
    K, kmeta = load_realization(args.controller)
    K = K.as_single()
    require = args.require
    if require == "auto":
        require = "stability" if kmeta.get("mode") == "stabilize" else "performance"
    try:
        Th = youla.theta(G, K)
        T = grsys.lft(G, K)
    except (IllPosed, DimensionError) as exc:
        raise SchemaError(f"plant and controller do not fit: {exc}") from None
    threads = _threads()
    hv = grsys.hautus_stable_grid(Th.A, Th.space, args.grid)
    theta_stable = Th.realization.n == 0 or Th.is_stable()
    N = args.grid or (32 if G.space.d <= 2 else 8)
    sup, pts, vals = grsys.torus_sup_norm(T, N, threads)
    sol = synth.scaled_performance_solution(T.as_single())
    rng = np.random.default_rng(args.seed)
    nc_viol = 0
    nc_worst = 0.0
    for _ in range(args.nc_samples):
        delta = grsys.random_contractive_tuple(G.space.d, 4, rng)
        try:
            s = nm.largest_singular_value(grsys.eval_nc(T, delta))
        except SingularPencil:
            s = np.inf
        nc_worst = max(nc_worst, s)
        nc_viol += not s < 1.0
    checks = {"theta_scaled_stable": bool(theta_stable),
              "theta_hautus_grid": hv.passed,
              "grid_sup_below_one": bool(sup < 1.0),
              "scaled_performance": sol is not None,
              "nc_contractive": nc_viol == 0}
    body = {"checks": checks,
            "theta": {"blocks": "3x3", "scaled_stable": bool(theta_stable),
                      "hautus_grid": hv.to_dict()},
            "grid": {"per_axis": N, "points": int(len(vals)), "sup_sigma": _finite(sup)},
            "scaled_performance_margin": None if sol is None else float(sol.margin),
            "nc": {"samples": args.nc_samples, "k": 4, "violations": nc_viol,
                   "worst_sigma": _finite(nc_worst)},
            "require": require}
    gate = ("theta_scaled_stable", "theta_hautus_grid") if require == "stability" else checks
    body["passed"] = all(checks[k] for k in gate)
    if args.emit_plot:
        with open(args.emit_plot, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"theta{k + 1}" for k in range(G.space.d)] + ["sigma_max"])
            for z, v in zip(pts, vals):
                w.writerow([f"{np.angle(c) % (2 * np.pi):.12g}" for c in z] + [f"{v:.12g}"])
        body["plot"] = args.emit_plot
    return body, EXIT_OK if body["passed"] else EXIT_NEGATIVE


# -- parser ----------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="ndhinf", description="Multidimensional robust control: analysis, synthesis, "
                                   "parametrization and interpolation.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="stability analysis of a realization")
    p.add_argument("file")
    p.add_argument("--grid", type=int, default=None, help="Hautus grid points per axis")
    p.add_argument("--structure-check", action="store_true",
                   help="check that the witness lies in the scaling structure")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synthesize", help="synthesize a controller")
    p.add_argument("file")
    p.add_argument("--mode", choices=("stabilize", "hinf"), default="stabilize")
    p.add_argument("--margin", type=float, default=1e-7, help="target LMI margin")
    p.add_argument("--out", default=None, help="controller output path")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("parametrize", help="controller from a stable free parameter")
    p.add_argument("file")
    p.add_argument("--lambda", dest="lam", default=None, help="realization of Lambda")
    p.add_argument("--kstar", default=None,
                   help="stabilizing controller; without it coprime factors are used")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_parametrize)

    p = sub.add_parser("interpolate", help="Agler interpolation feasibility")
    p.add_argument("file")
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("verify", help="closed-loop verification of a controller")
    p.add_argument("plant")
    p.add_argument("controller")
    p.add_argument("--grid", type=int, default=None, help="torus grid points per axis")
    p.add_argument("--nc-samples", type=int, default=10,
                   help="random contractive 4x4 tuples to test")
    p.add_argument("--emit-plot", default=None, metavar="CSV",
                   help="write sigma_max over the torus grid")
    p.add_argument("--require", choices=("auto", "stability", "performance"), default="auto",
                   help="checks that decide the exit code; auto follows the synthesis mode "
                        "recorded in the controller file")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    try:
        body, code = args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (SchemaError, DimensionError, D22NotZero) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NdHinfError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    print(json.dumps(_report(args, args.command, body), indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
