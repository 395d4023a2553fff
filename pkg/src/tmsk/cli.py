"""Command-line entry point: ``tmsk {grid,fit-predict,bench,debug}``."""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .basis import TensorHat
from .bench import ExperimentConfig, emit_report, run_experiment
from .designs import read_grid_csv, truncated_sg, write_grid_csv
from .errors import InputError, TMSKError
from .kernels import DomainMap, parse_kernel_spec
from .kriging import Dataset, NoiseModel, fit, predict_arrays, sample_stats
from .linalg import inv_tsg, sparsity_report, write_matrix_market


def _box(text, d):
    if text is None:
        return DomainMap.unit(d)
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise InputError(f"--box expects LO,HI, got {text!r}") from exc
    return DomainMap.box(lo, hi, d)


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _read_rows(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise InputError(f"{path}: empty file")
    return [h.strip() for h in rows[0]], rows[1:]


def _read_obs(path, n):
    """Parse long (point_id,rep_index,value) or summary (point_id,mean,variance,m) CSV."""
    header, body = _read_rows(path)
    try:
        if header[:3] == ["point_id", "rep_index", "value"]:
            reps = [[] for _ in range(n)]
            for r in body:
                reps[int(r[0])].append(float(r[2]))
            st = sample_stats(reps)
            return st.means, st.variances, st.reps, "long"
        if header[:4] == ["point_id", "mean", "variance", "m"]:
            means, var, m = np.zeros(n), np.zeros(n), np.zeros(n, np.int64)
            seen = np.zeros(n, bool)
            for r in body:
                k = int(r[0])
                means[k], var[k], m[k], seen[k] = float(r[1]), float(r[2]), int(r[3]), True
            if not seen.all():
                raise InputError(f"{path}: missing summary rows for {int((~seen).sum())} point(s)")
            return means, var, m, "summary"
    except IndexError as exc:
        raise InputError(f"{path}: point_id out of range or short row") from exc
    except ValueError as exc:
        raise InputError(f"{path}: malformed number: {exc}") from exc
    raise InputError(f"{path}: header must be point_id,rep_index,value or point_id,mean,variance,m")


def cmd_grid(args):
    grid = truncated_sg(args.dim, args.size, seed=args.seed)
    write_grid_csv(grid, args.out, None if args.box is None else _box(args.box, args.dim))
    print(f"wrote {grid.n} points (tau={grid.tau}, extra={grid.n_extra}) to {args.out}")
    return 0


def cmd_fit_predict(args):
    grid = read_grid_csv(args.design)
    d = grid.d
    dom = _box(args.box, d)
    tm = parse_kernel_spec(args.kernel, d)
    means, var, m, fmt = _read_obs(args.obs, grid.n)
    if args.noise == "known" and fmt == "long":
        raise InputError("known noise needs the summary format with a variance column")
    data = Dataset(grid, means, var, m, dom)
    model = fit(tm, data, NoiseModel.for_dataset(data, args.noise))
    header, body = _read_rows(args.pred)
    if len(header) != d:
        raise InputError(f"{args.pred}: expected {d} coordinate columns")
    X = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(-1, d)
    mean, mse = predict_arrays(model, X, parallelism=args.jobs)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x_{j + 1}" for j in range(d)] + ["mean", "mse"])
        for x, a, b in zip(X.tolist(), mean.tolist(), mse.tolist()):
            w.writerow([repr(v) for v in x] + [repr(a), repr(b)])
    return 0


def cmd_bench(args):
    cfg = ExperimentConfig(
        function=args.func, d=args.dim, budgets=tuple(args.budgets), zeta=args.zeta,
        m=args.reps_per_point, R=args.macro_reps, n_pred=args.pred_count, seed=args.seed,
        kernel=args.kernel, lattice_levels=args.lattice_levels, noise_law=args.noise_law,
        griewank_denominator=args.griewank_denominator, record_timing=args.record_timing,
        jobs=args.jobs,
    )
    report = run_experiment(cfg)
    emit_report(report, args.out)
    for r in report.rows:
        if not r.ok:
            print(f"budget={r.budget} rep={r.rep}: {r.error}", file=sys.stderr)
    return 1 if report.n_errors else 0


def cmd_debug_basis(args):
    l = _int_list(args.level)
    i = _int_list(args.index)
    tm = parse_kernel_spec(args.kernel, len(l))
    h = TensorHat(tm, tuple(l), tuple(i))
    axis = np.arange(1, args.mesh + 1) / (args.mesh + 1.0)
    mesh = np.meshgrid(*([axis] * tm.dim), indexing="ij")
    X = np.stack([g.ravel() for g in mesh], axis=1)
    vals = h(X)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow([f"x_{j + 1}" for j in range(tm.dim)] + ["phi"])
        for x, v in zip(X.tolist(), vals.tolist()):
            w.writerow([repr(c) for c in x] + [repr(v)])
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"# squared RKHS norm {h.rkhs_norm_sq!r}", file=sys.stderr)
    return 0


def cmd_debug_kinv(args):
    grid = truncated_sg(args.dim, args.size, seed=args.seed)
    tm = parse_kernel_spec(args.kernel, args.dim)
    kinv = inv_tsg(tm, grid)
    write_matrix_market(kinv, args.out)
    rep = sparsity_report(kinv)
    print(f"n={rep['n']} nnz={rep['nnz']} density={rep['density']:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tmsk", description="Kriging with tensor Markov kernels on sparse grids")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("grid", help="write a (randomized) truncated sparse grid")
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--size", type=int, required=True)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--box", default=None, help="LO,HI native box for the x columns")
    g.add_argument("--out", required=True)
    g.set_defaults(handler=cmd_grid)

    f = sub.add_parser("fit-predict", help="fit on a design and predict at given points")
    f.add_argument("--kernel", required=True)
    f.add_argument("--design", required=True)
    f.add_argument("--obs", required=True)
    f.add_argument("--pred", required=True)
    f.add_argument("--noise", choices=["none", "known", "estimated"], default="estimated")
    f.add_argument("--box", default=None, help="LO,HI native box of the prediction points")
    f.add_argument("--jobs", type=int, default=1)
    f.add_argument("--out", required=True)
    f.set_defaults(handler=cmd_fit_predict)

    b = sub.add_parser("bench", help="run the RMSE experiment and write a CSV report")
    b.add_argument("--func", choices=["schwefel222", "griewank"], required=True)
    b.add_argument("--dim", type=int, required=True)
    b.add_argument("--budgets", type=_int_list, required=True)
    b.add_argument("--zeta", type=float, default=0.1)
    b.add_argument("--reps-per-point", type=int, default=10)
    b.add_argument("--macro-reps", type=int, default=1)
    b.add_argument("--pred-count", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--kernel", default="laplace:1")
    b.add_argument("--lattice-levels", type=int, default=4)
    b.add_argument("--noise-law", choices=["zeta_y2", "zeta_abs_y", "unit"], default="zeta_y2")
    b.add_argument("--griewank-denominator", default="sqrt_j", help="sqrt_j or constant:c")
    b.add_argument("--record-timing", action="store_true",
                   help="fill the timing columns (makes the file run-dependent)")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", required=True)
    b.set_defaults(handler=cmd_bench)

    dbg = sub.add_parser("debug", help="diagnostic dumps")
    dsub = dbg.add_subparsers(dest="what", required=True)
    db = dsub.add_parser("basis", help="tabulate one hierarchical basis function on a mesh")
    db.add_argument("--kernel", default="laplace:1")
    db.add_argument("--level", required=True, help="comma-separated levels, one per dimension")
    db.add_argument("--index", required=True, help="comma-separated odd indices")
    db.add_argument("--mesh", type=int, default=63)
    db.add_argument("--out", default="-")
    db.set_defaults(handler=cmd_debug_basis)
    dk = dsub.add_parser("kinv", help="dump the sparse inverse kernel matrix (MatrixMarket)")
    dk.add_argument("--kernel", default="laplace:1")
    dk.add_argument("--dim", type=int, required=True)
    dk.add_argument("--size", type=int, required=True)
    dk.add_argument("--seed", type=int, default=None)
    dk.add_argument("--out", required=True)
    dk.set_defaults(handler=cmd_debug_kinv)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (TMSKError, OSError) as exc:
        print(f"tmsk: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
