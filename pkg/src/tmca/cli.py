"""``tmca`` command-line interface.

Exit codes: 0 on success, 1 on solver or internal errors, 2 on usage and
validation errors (bad files, shape mismatches, invalid parameters).
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from . import tensorfile as tf
from .codeopt import SurrogateObjective, init_params, optimize_codes
from .conditioning import conditioning_study, spectrum
from .core import MeasurementMatrix
from .errors import DivergenceError, SolverError, TMCAError
from .lightfield import DEFAULT_MAX_ENTRIES
from .metrics import evaluate
from .phantoms import KINDS as PHANTOM_KINDS, gen_phantom
from .recon import AdmmConfig, admm_tv
from .systems import System

log = logging.getLogger("tmca")

PATH_ARGS = {"scene", "aperture", "shutter", "out", "matrix", "snapshot", "trace", "summary",
             "reference", "estimate", "json", "csv", "out_aperture", "out_shutter", "func", "command"}
LF_LABELS = ["y", "x", "vy", "vx"]
HS_LABELS = ["y", "x", "band"]


class UsageError(TMCAError):
    pass


def _provenance(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in PATH_ARGS}


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_matrix(path, matrix: MeasurementMatrix, meta=None):
    info = {
        **matrix.meta,
        **(meta or {}),
        "sensor_shape": list(matrix.sensor_shape),
        "scene_shape": list(matrix.scene_shape),
        "scene_axes": list(matrix.scene_axes),
    }
    tf.write(path, matrix.entries, ["row", "col"], info, dtype="f64")


def read_matrix(path) -> MeasurementMatrix:
    arr, header = tf.read(path)
    meta = dict(header["meta"])
    if arr.ndim != 2:
        raise tf.TensorFormatError("matrix files must be 2-D", 0)
    sensor = tuple(meta.pop("sensor_shape", [arr.shape[0]]))
    scene = tuple(meta.pop("scene_shape", [arr.shape[1]]))
    axes = tuple(meta.pop("scene_axes", range(len(scene))))
    return MeasurementMatrix(arr, sensor, scene, axes, meta=meta)


def _add_noise(snapshot, sigma, seed):
    if sigma < 0:
        raise UsageError("noise sigma must be >= 0")
    if sigma == 0:
        return snapshot
    rng = np.random.default_rng(seed)
    return snapshot + sigma * rng.standard_normal(snapshot.shape)


def _system_from_codes(name, aperture, shutter, args, scene_dims=None):
    if name == "lf":
        if scene_dims is None:
            scene_dims = tuple(shutter.shape) + tuple(args.angular)
        return System("lf", scene_dims, args.step)
    if scene_dims is None:
        scene_dims = tuple(aperture.shape) + (args.bands,)
    return System("hs", scene_dims, args.step, tuple(args.kappa) if args.kappa else None)


def cmd_simulate(args, name):
    scene, _ = tf.read(args.scene)
    aperture = tf.read_codes(args.aperture, "aperture")
    shutter = tf.read_codes(args.shutter, "shutter")
    if name == "lf":
        if scene.ndim != 4:
            raise UsageError(f"light-field scene must be 4-D, got shape {scene.shape}")
        system = System("lf", scene.shape, args.step)
    else:
        if scene.ndim != 3:
            raise UsageError(f"spectral scene must be 3-D, got shape {scene.shape}")
        system = System("hs", scene.shape, args.step, tuple(args.kappa) if args.kappa else None)
    e = system.simulate(scene, aperture, shutter)
    e = _add_noise(e, args.noise_sigma, args.seed)
    tf.write(args.out, e, ["y", "x"], {"system": name, "num_slots": aperture.num_slots,
                                        "args": _provenance(args)})
    return 0


def cmd_assemble(args):
    aperture = tf.read_codes(args.aperture, "aperture")
    shutter = tf.read_codes(args.shutter, "shutter")
    system = _system_from_codes(args.system, aperture, shutter, args)
    matrix = system.assemble(aperture, shutter, max_entries=args.max_entries)
    write_matrix(args.out, matrix, {"args": _provenance(args)})
    return 0


def _eig_rows(system, k, seed, report):
    for i, value in enumerate(report.eigenvalues):
        yield (system, k, seed, i, value)


def cmd_spectrum(args):
    matrix = read_matrix(args.matrix)
    report = spectrum(matrix)
    system = matrix.meta.get("system", "matrix")
    k = matrix.meta.get("num_slots", "")
    _write_csv(args.out, ["system", "K", "seed", "eig_index", "value"],
               _eig_rows(system, k, "", report))
    if args.summary:
        s = report.summary()
        _write_csv(args.summary, ["system", "K"] + list(s), [[system, k] + list(s.values())])
    return 0


def cmd_study(args):
    result = conditioning_study(args.system, tuple(args.dims), tuple(args.k_list), args.num_seeds,
                                base_seed=args.seed, step=args.step,
                                open_shutter_k1=not args.random_k1_shutter)
    rows = []
    for (k, seed), report in sorted(result.reports.items()):
        rows.extend(_eig_rows(args.system, k, seed, report))
    _write_csv(args.out, ["system", "K", "seed", "eig_index", "value"], rows)
    if args.summary:
        summary = list(result.summary_rows())
        _write_csv(args.summary, list(summary[0]), [list(r.values()) for r in summary])
    return 0


def cmd_reconstruct(args):
    snapshot, _ = tf.read(args.snapshot)
    if args.matrix:
        matrix = read_matrix(args.matrix)
    else:
        if not (args.system and args.aperture and args.shutter):
            raise UsageError("reconstruct needs --matrix or --system with --aperture and --shutter")
        aperture = tf.read_codes(args.aperture, "aperture")
        shutter = tf.read_codes(args.shutter, "shutter")
        matrix = _system_from_codes(args.system, aperture, shutter, args).assemble(aperture, shutter)
    cfg = AdmmConfig(tv_weight=args.tau, rho=args.rho, max_iters=args.max_iters,
                     abs_tol=args.abs_tol, rel_tol=args.rel_tol)
    result = admm_tv(matrix, snapshot, cfg)
    labels = {4: LF_LABELS, 3: HS_LABELS}.get(result.estimate.ndim)
    tf.write(args.out, result.estimate, labels, {
        "iterations_used": result.iterations_used,
        "converged": result.converged,
        "tv_weight": result.tv_weight,
        "args": _provenance(args),
    })
    if args.trace:
        _write_csv(args.trace, ["iteration", "objective", "r_primal", "r_dual"],
                   [(i + 1, o, r[0], r[1]) for i, (o, r) in
                    enumerate(zip(result.objective_trace, result.residual_trace))])
    return 0


def cmd_optimize(args):
    system = System(args.system, tuple(args.dims), args.step)
    objective = SurrogateObjective(args.objective, args.binarization_weight)
    init = init_params(system, args.slots, seed=args.seed, beta=args.beta)
    result = optimize_codes(init, objective, system, steps=args.steps, learning_rate=args.lr,
                            momentum=args.momentum, mode=args.mode)
    meta = {"system": args.system, "dims": list(system.dims), "args": _provenance(args)}
    tf.write_codes(args.out_aperture, result.aperture, meta)
    tf.write_codes(args.out_shutter, result.shutter, meta)
    if args.trace:
        _write_csv(args.trace, ["step", "relaxed_obj", "quantized_obj"],
                   [(r.step, r.relaxed_obj, r.quantized_obj) for r in result.trace])
    return 0


def cmd_metrics(args):
    ref, _ = tf.read(args.reference)
    est, _ = tf.read(args.estimate)
    report = evaluate(ref, est, args.peak)
    line = report.to_json()
    print(line)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(line + "\n")
    if args.csv:
        d = report.as_dict()
        _write_csv(args.csv, list(d), [list(d.values())])
    return 0


def cmd_gen_phantom(args):
    scene = gen_phantom(args.kind, tuple(args.dims), seed=args.seed, num_values=args.num_values,
                        disparity=args.disparity)
    labels = LF_LABELS if scene.ndim == 4 else HS_LABELS
    tf.write(args.out, scene, labels, {"kind": args.kind, "args": _provenance(args)})
    return 0


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="cap on BLAS/OpenMP worker threads")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_code_system(p, required=True):
    p.add_argument("--system", choices=["lf", "hs"], required=required)
    p.add_argument("--aperture", required=required)
    p.add_argument("--shutter", required=required)
    p.add_argument("--angular", type=int, nargs=2, default=[3, 3], metavar=("UY", "UX"))
    p.add_argument("--bands", type=int, default=None)
    p.add_argument("--step", type=int, default=1, help="shear step (lf) or dispersion step (hs)")
    p.add_argument("--kappa", type=float, nargs="+", default=None, help="per-band sensor response")


def build_parser():
    parser = argparse.ArgumentParser(prog="tmca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("lf", "hs"):
        p = sub.add_parser(f"simulate-{name}", help=f"simulate a {name} snapshot")
        _add_common(p)
        p.add_argument("--scene", required=True)
        p.add_argument("--aperture", required=True)
        p.add_argument("--shutter", required=True)
        p.add_argument("--step", type=int, default=1)
        if name == "hs":
            p.add_argument("--kappa", type=float, nargs="+", default=None)
        p.add_argument("--noise-sigma", type=float, default=0.0)
        p.add_argument("--out", required=True)
        p.set_defaults(func=lambda a, n=name: cmd_simulate(a, n))

    p = sub.add_parser("assemble", help="assemble the dense measurement matrix")
    _add_common(p)
    _add_code_system(p)
    p.add_argument("--max-entries", type=int, default=DEFAULT_MAX_ENTRIES)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("spectrum", help="Gram eigenvalues of a matrix file")
    _add_common(p)
    p.add_argument("--matrix", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--summary", default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("study", help="conditioning study over random codes")
    _add_common(p)
    p.add_argument("--system", choices=["lf", "hs"], required=True)
    p.add_argument("--dims", type=int, nargs="+", required=True)
    p.add_argument("--k-list", type=int, nargs="+", default=[1, 8])
    p.add_argument("--num-seeds", type=int, default=20)
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--random-k1-shutter", action="store_true",
                   help="draw the K=1 shutter at random instead of leaving it open")
    p.add_argument("--out", required=True)
    p.add_argument("--summary", default=None)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("reconstruct", help="ADMM-TV reconstruction")
    _add_common(p)
    p.add_argument("--matrix", default=None)
    _add_code_system(p, required=False)
    p.add_argument("--snapshot", required=True)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--max-iters", type=int, default=300)
    p.add_argument("--abs-tol", type=float, default=1e-5)
    p.add_argument("--rel-tol", type=float, default=1e-5)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", default=None)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("optimize", help="optimize binary codes")
    _add_common(p)
    p.add_argument("--system", choices=["lf", "hs"], required=True)
    p.add_argument("--dims", type=int, nargs="+", required=True)
    p.add_argument("--slots", type=int, default=4)
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--objective", choices=["gram_identity", "coherence_softmax"], default="gram_identity")
    p.add_argument("--binarization-weight", type=float, default=0.0)
    p.add_argument("--mode", choices=["mismatch", "relaxed"], default="mismatch")
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--beta", type=float, default=4.0)
    p.add_argument("--out-aperture", required=True)
    p.add_argument("--out-shutter", required=True)
    p.add_argument("--trace", default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("metrics", help="quality metrics between two scene files")
    _add_common(p)
    p.add_argument("--reference", required=True)
    p.add_argument("--estimate", required=True)
    p.add_argument("--peak", type=float, default=None)
    p.add_argument("--json", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("gen-phantom", help="write a seeded synthetic scene")
    _add_common(p)
    p.add_argument("--kind", choices=PHANTOM_KINDS, required=True)
    p.add_argument("--dims", type=int, nargs="+", required=True)
    p.add_argument("--num-values", type=int, default=4)
    p.add_argument("--disparity", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_phantom)
    return parser


def _run(args):
    if args.threads is None:
        return args.func(args)
    from threadpoolctl import threadpool_limits
    with threadpool_limits(limits=args.threads):
        return args.func(args)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return _run(args)
    except (DivergenceError, SolverError) as exc:
        print(f"tmca: solver error: {exc}", file=sys.stderr)
        return 1
    except (TMCAError, ValueError, OSError) as exc:
        print(f"tmca: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
