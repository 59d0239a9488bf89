"""Command-line front end.

Subcommands: ``decompose``, ``generate {uniform,lowrank,matmul}``, ``bench``
and ``compress-image``.  Exit codes are 0 on success, 1 on runtime or I/O
failure and 2 on usage errors.
"""
import argparse
import csv
import io
import json
import math
import os
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from . import datagen
from .exceptions import FormatError, RankError, ShapeError, TnsParseError
from .io import format_tns, read_pgm, read_tns, write_pgm, write_tns
from .linalg import qrp_flops, svd_flops
from .report import RunReport, estimate_peak_memory
from .tensor import CooTensor
from .tucker import SOLVERS, DecompConfig, hooi_sparse, reconstruct

BENCH_COLUMNS = ("sparsity", "solver", "seed", "nnz", "iterations", "runtime_s",
                 "time_per_sweep_s", "fit", "kron_calls", "qrp_flops", "svd_flops")
BUNDLED_IMAGE = "angiogram_130x150.pgm"


class UsageError(Exception):
    """Bad arguments detected after parsing; maps to exit code 2."""


def _int_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("expected at least one value")
    return vals


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _str_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_decomp_flags(p, iters=50, tol=1e-6):
    p.add_argument("--ranks", type=_int_list, required=True, help="r1,r2,...")
    p.add_argument("--iters", type=int, default=iters, help="maximum sweeps")
    p.add_argument("--tol", type=float, default=tol,
                   help="relative fit-change threshold (0: run all sweeps)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--solver", choices=SOLVERS, default="qrp")
    p.add_argument("--batch-rows", type=int, default=32)


def _config(args, shape):
    if len(args.ranks) != len(shape):
        raise UsageError(
            f"--ranks has {len(args.ranks)} entries but the tensor has order {len(shape)}")
    try:
        return DecompConfig(tuple(args.ranks), max_iters=args.iters, tol=args.tol,
                            seed=args.seed, solver=args.solver,
                            batch_rows=args.batch_rows)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config_echo(cfg):
    return {"ranks": list(cfg.ranks), "max_iters": cfg.max_iters, "tol": cfg.tol,
            "seed": cfg.seed, "solver": cfg.solver, "batch_rows": cfg.batch_rows,
            "share_kron": cfg.share_kron}


def _run(x, cfg, command, source):
    try:
        model, rep = hooi_sparse(x, cfg)
    except RankError as exc:
        raise UsageError(str(exc)) from None
    shape = list(x.shape)
    report = RunReport(
        command=command, input=source, config=_config_echo(cfg), shape=shape,
        nnz=x.nnz, iterations=rep.iterations, converged=rep.converged,
        fits=list(rep.fits), rel_error=rep.rel_error, kron_calls=rep.kron_calls,
        kron_evaluations=rep.kron_evaluations, qrp_calls=rep.qrp_calls,
        compression_ratio=datagen.compression_ratio(x.shape, cfg.ranks),
        core_compression_ratio=datagen.core_compression_ratio(x.shape, cfg.ranks),
        peak_memory_bytes=estimate_peak_memory(x.shape, cfg.ranks, x.nnz),
        timings=dict(rep.timings), wall_time_s=rep.timings["total"])
    return model, report


def _emit(text, output):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _report_text(report, fmt):
    if fmt == "json":
        return report.to_json()
    d = report.to_dict()
    flat = {k: (json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v)
            for k, v in d.items()}
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
    w.writeheader()
    w.writerow(flat)
    return buf.getvalue()


def _load_input(path):
    p = Path(path)
    if p.suffix.lower() == ".pgm":
        return read_pgm(p)
    return read_tns(p)


def _write_model(model, directory):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    core = model.core
    # dense dump: every core entry, zeros included
    idx = np.argwhere(np.ones(core.shape, dtype=bool)) + 1
    lines = [" ".join(map(str, (core.ndim,) + core.shape + (core.size,)))]
    for row in idx:
        lines.append(" ".join(map(str, row)) + " " + repr(float(core[tuple(row - 1)])))
    (d / "core.tns").write_text("\n".join(lines) + "\n")
    paths = {"core": str(d / "core.tns")}
    for n, u in enumerate(model.factors):
        path = d / f"factor_{n + 1}.txt"
        np.savetxt(path, u, fmt="%.17g")
        paths[f"factor_{n + 1}"] = str(path)
    return paths


def cmd_decompose(args):
    x = _load_input(args.input)
    cfg = _config(args, x.shape)
    model, report = _run(x, cfg, "decompose", {"path": str(args.input)})
    if args.model_dir:
        report.outputs = _write_model(model, args.model_dir)
    _emit(_report_text(report, args.format), args.output)
    return 0


def cmd_generate(args):
    if args.kind == "uniform":
        if (args.sparsity is None) == (args.nnz is None):
            raise UsageError("give exactly one of --sparsity or --nnz")
        try:
            spec = datagen.GenSpec(tuple(args.shape), sparsity=args.sparsity,
                                   nnz=args.nnz, value_dist=args.values,
                                   seed=args.seed)
        except (ValueError, ShapeError) as exc:
            raise UsageError(str(exc)) from None
        t = datagen.gen_uniform_sparse(spec)
    elif args.kind == "lowrank":
        try:
            x = datagen.gen_exact_lowrank(tuple(args.shape), tuple(args.ranks),
                                          seed=args.seed, noise=args.noise)
        except (RankError, ShapeError) as exc:
            raise UsageError(str(exc)) from None
        t = CooTensor.from_dense(x)
    else:
        if min(args.m, args.k, args.n) < 1:
            raise UsageError("m, k and n must be >= 1")
        t = datagen.gen_matmul_tensor(args.m, args.k, args.n)
    if args.output in (None, "-"):
        sys.stdout.write(format_tns(t))
    else:
        write_tns(t, args.output)
    return 0


def _sweep_flops(shape, ranks):
    q = s = 0.0
    for n in range(len(shape)):
        width = math.prod(ranks) // ranks[n]
        m, k = max(shape[n], width), min(shape[n], width)
        q += qrp_flops(m, k)
        s += svd_flops(m, k)
    return q, s


def sweep_seconds(rep):
    """Time spent inside HOOI sweeps, excluding setup and the error check."""
    return sum(rep.timings[k] for k in ("power_iteration", "factor_update", "core"))


def _bench_one(shape, ranks, sparsity, solver, seed, iters, repeats, batch_rows):
    x = datagen.gen_uniform_sparse(datagen.GenSpec(shape, sparsity=sparsity, seed=seed))
    cfg = DecompConfig(ranks, max_iters=iters, tol=0.0, seed=seed, solver=solver,
                       batch_rows=batch_rows)
    hooi_sparse(x, cfg)  # warm-up, untimed
    runtimes, sweeps, rep = [], [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        _, rep = hooi_sparse(x, cfg)
        runtimes.append(time.perf_counter() - t0)
        sweeps.append(sweep_seconds(rep) / rep.iterations)
    runtime = statistics.median(runtimes)
    q, s = _sweep_flops(shape, ranks)
    return {
        "sparsity": sparsity, "solver": solver, "seed": seed, "nnz": x.nnz,
        "iterations": rep.iterations, "runtime_s": runtime,
        "time_per_sweep_s": statistics.median(sweeps), "fit": rep.fits[-1],
        "kron_calls": rep.kron_calls, "qrp_flops": q * rep.iterations,
        "svd_flops": s * rep.iterations,
    }


def _workers():
    raw = os.environ.get("STT_THREADS", "1").strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"STT_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise UsageError("STT_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def cmd_bench(args):
    shape = tuple(args.shape)
    if len(args.ranks) != len(shape):
        raise UsageError("--ranks must have one entry per mode of --shape")
    ranks = tuple(args.ranks)
    for s in args.solvers:
        if s not in SOLVERS:
            raise UsageError(f"unknown solver {s!r}")
    try:
        datagen.compression_ratio(shape, ranks)
        for sp in args.sparsities:
            datagen.GenSpec(shape, sparsity=sp)
    except (ValueError, ShapeError) as exc:
        raise UsageError(str(exc)) from None
    if args.repeats < 1 or args.iters < 1:
        raise UsageError("--repeats and --iters must be >= 1")
    jobs = [(shape, ranks, sp, so, se, args.iters, args.repeats, args.batch_rows)
            for sp in args.sparsities for so in args.solvers for se in args.seeds]
    workers = _workers()
    if workers == 1:
        rows = [_bench_one(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda j: _bench_one(*j), jobs))
    rows.sort(key=lambda r: (r["sparsity"], r["solver"], r["seed"]))
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        text = buf.getvalue()
    _emit(text, args.output)
    return 0


def bundled_image_path():
    return resources.files("sptucker").joinpath("data", BUNDLED_IMAGE)


def cmd_compress_image(args):
    if args.input is None:
        with resources.as_file(bundled_image_path()) as p:
            x = read_pgm(p)
        source = {"bundled": BUNDLED_IMAGE}
    else:
        x = read_pgm(args.input)
        source = {"path": str(args.input)}
    if x.order != 2:
        raise UsageError("image must be 2-D")
    cfg = _config(args, x.shape)
    model, report = _run(x, cfg, "compress-image", source)
    if args.output:
        write_pgm(reconstruct(model), args.output)
        report.outputs = {"image": str(args.output)}
    _emit(_report_text(report, args.format), args.report)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sptucker", description="Sparse Tucker decomposition by HOOI.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="decompose a .tns tensor or .pgm image")
    p.add_argument("input", help=".tns or .pgm file")
    _add_decomp_flags(p)
    p.add_argument("--output", default="-", help="report path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--model-dir", help="write core.tns and factor_<n>.txt here")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("generate", help="write a synthetic tensor as .tns")
    gsub = p.add_subparsers(dest="kind", required=True)
    g = gsub.add_parser("uniform", help="uniformly placed nonzeros")
    g.add_argument("--shape", type=_int_list, required=True)
    g.add_argument("--sparsity", type=float)
    g.add_argument("--nnz", type=int)
    g.add_argument("--values", choices=datagen.VALUE_DISTS, default="uniform")
    g.add_argument("--seed", type=int, default=0)
    g = gsub.add_parser("lowrank", help="exactly low multilinear rank (dense)")
    g.add_argument("--shape", type=_int_list, required=True)
    g.add_argument("--ranks", type=_int_list, required=True)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g = gsub.add_parser("matmul", help="binary matrix-multiplication tensor")
    for name in ("m", "k", "n"):
        g.add_argument(name, type=int)
    for g in gsub.choices.values():
        g.add_argument("--output", default="-", help="output path (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="runtime sweep over sparsities")
    p.add_argument("--shape", type=_int_list, default=[50, 50, 50])
    p.add_argument("--ranks", type=_int_list, default=[16, 16, 16])
    p.add_argument("--sparsities", type=_float_list, default=[1e-5, 1e-4, 1e-3, 1e-2])
    p.add_argument("--solvers", type=_str_list, default=["qrp"])
    p.add_argument("--seeds", type=_int_list, default=[0])
    p.add_argument("--iters", type=int, default=3, help="sweeps per run (tol is 0)")
    p.add_argument("--repeats", type=int, default=5, help="runs per point; median kept")
    p.add_argument("--batch-rows", type=int, default=32)
    p.add_argument("--output", default="-")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("compress-image", help="low-rank compression of a PGM image")
    p.add_argument("input", nargs="?", help="PGM file (default: bundled angiogram)")
    _add_decomp_flags(p)
    p.add_argument("--output", help="reconstructed PGM path")
    p.add_argument("--report", default="-", help="report path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_compress_image)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sptucker: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, FormatError, TnsParseError, ValueError, ArithmeticError,
            RuntimeError, IndexError) as exc:
        print(f"sptucker: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
