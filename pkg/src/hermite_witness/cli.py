"""Command line interface: ``hermite-witness <subcommand> ...``.

Summaries go to stdout, data to files. Every file-producing run also writes
``<out>.manifest.json``; ``hermite-witness replay`` re-executes a manifest
and can verify that the outputs are bit-identical.

Exit codes: 0 success, 2 argument error, 3 data error, 4 resource error,
5 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, _accel
from .datagen import (
    ToySpec,
    gen_circle_ellipse,
    grid_queries,
    load_csv,
    ring_queries,
    write_dataset_csv,
    write_results,
)
from .errors import ArgumentError, DataError, WitnessError
from .hermite import FilterSpec, KernelConfig, kernel_value
from .quadrature import phi_bruteforce
from .significance import DEFAULT_NCAP, PermutationPlan, test_multiclass, test_two_class
from .witness import QuerySet, scale_dataset, suggest_degree

EXIT_IO = 5


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _point(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _add_common(p):
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker threads (default: $HERMITE_WITNESS_THREADS or CPU count)")


def _add_test_flags(p):
    p.add_argument("--data", required=True, help="labelled input CSV")
    p.add_argument("--label-col", default="label")
    p.add_argument("--zscore", action="store_true", help="z-score feature columns (sample std)")
    p.add_argument("--deg", type=_positive_int, required=True)
    p.add_argument("--A", dest="A", type=float, default=2.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--kernel", choices=("hermite", "gaussian"), default="hermite")
    p.add_argument("--filter", choices=("mollifier", "polynomial"), default="mollifier")
    p.add_argument("--query", choices=("ring", "grid", "data", "file"), default="ring")
    p.add_argument("--query-count", type=_positive_int, default=500)
    p.add_argument("--query-seed", type=int, default=None, help="defaults to --seed")
    p.add_argument("--ring-inner", type=float, default=None)
    p.add_argument("--ring-outer", type=float, default=None)
    p.add_argument("--grid-bounds", type=float, nargs=2, metavar=("LO", "HI"), default=None)
    p.add_argument("--grid-res", type=int, default=None)
    p.add_argument("--query-file", default=None)
    p.add_argument("--rho", type=float, default=None, help="override the minimal query separation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nmax", type=_positive_int, default=DEFAULT_NCAP, help="permutation cap")
    p.add_argument("--signed-null", action="store_true", help="rank signed permuted witnesses")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--out", required=True)
    _add_common(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hermite-witness", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-toy", help="circle vs ellipse toy data")
    p.add_argument("--rho-ellipse", type=float, default=0.0)
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.add_argument("--noise-std", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("test2", help="two-class witness with permutation test")
    _add_test_flags(p)
    p = sub.add_parser("testk", help="multi-class witness with permutation test")
    _add_test_flags(p)

    p = sub.add_parser("kernel", help="evaluate the kernel at point pairs")
    p.add_argument("--x", type=_point, help="inline point, comma separated")
    p.add_argument("--y", type=_point)
    p.add_argument("--pairs", help="CSV with x1..xq,y1..yq columns")
    p.add_argument("--deg", type=_positive_int, required=True)
    p.add_argument("--kernel", choices=("hermite", "gaussian"), default="hermite")
    p.add_argument("--filter", choices=("mollifier", "polynomial"), default="mollifier")
    p.add_argument("--oracle", action="store_true", help="cross-check against the brute-force sum")
    p.add_argument("--out", default=None)
    _add_common(p)

    p = sub.add_parser("suggest-deg", help="advisory degree from sample size")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--q", type=_positive_int, required=True)
    p.add_argument("--gamma", type=float, default=2.0)

    p = sub.add_parser("replay", help="re-run a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="write outputs here instead of the recorded path")
    p.add_argument("--verify", action="store_true", help="fail unless outputs match recorded digests")
    _add_common(p)
    return parser


def _queries(args, data, q):
    qseed = args.seed if args.query_seed is None else args.query_seed
    ring_flags = args.ring_inner is not None or args.ring_outer is not None
    grid_flags = args.grid_bounds is not None or args.grid_res is not None
    if args.query != "ring" and ring_flags:
        raise ArgumentError("--ring-inner/--ring-outer only apply to --query ring")
    if args.query != "grid" and grid_flags:
        raise ArgumentError("--grid-bounds/--grid-res only apply to --query grid")
    if (args.query == "file") != (args.query_file is not None):
        raise ArgumentError("--query-file is required with, and only with, --query file")
    sigma = args.sigma
    if args.query == "ring":
        if q != 2:
            raise ArgumentError(f"ring queries are two-dimensional; data has q={q}")
        inner = 0.5 if args.ring_inner is None else args.ring_inner
        outer = 1.8 if args.ring_outer is None else args.ring_outer
        Q = ring_queries(args.query_count, inner, outer, qseed, scale=sigma,
                         rho=None if args.rho is None else args.rho / sigma)
    elif args.query == "grid":
        lo, hi = args.grid_bounds if args.grid_bounds is not None else (-5.0, 5.0)
        res = 25 if args.grid_res is None else args.grid_res
        Q = grid_queries([(lo, hi)] * q, res, scale=sigma)
    elif args.query == "data":
        Q = QuerySet.from_points(data.points, None if args.rho is None else args.rho / sigma, coalesce=True)
    else:
        pts = load_csv(args.query_file, None).raw
        if pts.shape[1] != q:
            raise DataError(f"query file has {pts.shape[1]} columns, data has {q}")
        Q = QuerySet.from_points(pts / sigma, None if args.rho is None else args.rho / sigma)
    if args.rho is not None and args.query == "grid":
        Q = QuerySet(Q.points, args.rho / sigma)
    return Q


def _run_test(args, multiclass: bool) -> dict:
    if not args.sigma > 0:
        raise ArgumentError(f"--sigma must be positive, got {args.sigma}")
    csvdata = load_csv(args.data, args.label_col, zscore=args.zscore)
    C = csvdata.class_count
    if not multiclass and C != 2:
        raise DataError(f"test2 needs exactly 2 classes, found {C}: {csvdata.label_names}")
    data = scale_dataset(csvdata.raw, args.sigma, csvdata.labels, C, csvdata.label_names)
    cfg = KernelConfig(data.q, args.deg, args.kernel, FilterSpec(args.filter))
    Q = _queries(args, data, data.q)
    plan = PermutationPlan.build(Q.rho, cfg, alpha=args.alpha, A=args.A, seed=args.seed,
                                 ncap=args.nmax, signed_null=args.signed_null)
    run = test_multiclass if multiclass else test_two_class
    result = run(data, Q, cfg, plan)
    extra = {"data": csvdata.metadata(), "query_mode": args.query}
    write_results(result, args.out, args.format, coords=Q.points * args.sigma, metadata=extra)
    print(f"K={Q.K} M={data.M} classes={C} rho={Q.rho:.6g} p={plan.p:.10g}")
    print(f"permutations: N={plan.N} used={plan.Nused} cap_engaged={plan.cap_engaged}")
    print(f"fraction D=1: {result.D.mean():.6f} ({int(result.D.sum())}/{Q.K})")
    return {"inputs": [args.data] + ([args.query_file] if args.query_file else []),
            "outputs": [args.out], "seeds": {"permutation": args.seed,
                                             "query": args.seed if args.query_seed is None else args.query_seed}}


def cmd_gen_toy(args) -> dict:
    spec = ToySpec(args.rho_ellipse, args.samples, args.noise_std, args.seed)
    X0, X1 = gen_circle_ellipse(spec)
    labels = np.r_[np.zeros(len(X0), dtype=int), np.ones(len(X1), dtype=int)]
    write_dataset_csv(args.out, np.vstack([X0, X1]), labels)
    print(f"wrote {len(labels)} rows (rho_ellipse={spec.rho_ellipse}, {spec.samples_per_class} per class) to {args.out}")
    return {"inputs": [], "outputs": [args.out], "seeds": {"data": args.seed}}


def cmd_test2(args) -> dict:
    return _run_test(args, multiclass=False)


def cmd_testk(args) -> dict:
    return _run_test(args, multiclass=True)


def cmd_kernel(args) -> dict | None:
    if args.pairs:
        if args.x is not None or args.y is not None:
            raise ArgumentError("use either --pairs or --x/--y")
        P = load_csv(args.pairs, None).raw
        if P.shape[1] % 2:
            raise DataError("pairs file needs an even number of columns (x then y)")
        q = P.shape[1] // 2
        xs, ys = P[:, :q], P[:, q:]
    else:
        if args.x is None or args.y is None:
            raise ArgumentError("need --x and --y, or --pairs")
        if args.x.shape != args.y.shape:
            raise ArgumentError(f"dimension mismatch: {args.x.size} vs {args.y.size}")
        xs, ys = args.x[None, :], args.y[None, :]
        q = args.x.size
    cfg = KernelConfig(q, args.deg, args.kernel, FilterSpec(args.filter))
    values = np.array([kernel_value(x, y, cfg) for x, y in zip(xs, ys)])
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("value\n")
            fh.writelines(f"{v:.17g}\n" for v in values)
    else:
        for v in values:
            print(f"{v:.17g}")
    if args.oracle:
        if cfg.kind != "hermite":
            raise ArgumentError("--oracle checks the Hermite kernel only")
        ref = np.array([phi_bruteforce(x, y, cfg) for x, y in zip(xs, ys)])
        print(f"oracle max discrepancy: {np.max(np.abs(values - ref)):.3e}")
    if args.out:
        return {"inputs": [args.pairs] if args.pairs else [], "outputs": [args.out], "seeds": {}}
    return None


def cmd_suggest_deg(args) -> None:
    deg = suggest_degree(args.m, args.q, args.gamma)
    print(deg)
    print("advisory: asymptotic rate with unit constant; tune deg for your data", file=sys.stderr)


COMMANDS = {
    "gen-toy": cmd_gen_toy,
    "test2": cmd_test2,
    "testk": cmd_testk,
    "kernel": cmd_kernel,
    "suggest-deg": cmd_suggest_deg,
}


def _flags(args) -> dict:
    return {k: (v.tolist() if isinstance(v, np.ndarray) else v)
            for k, v in vars(args).items() if k not in ("command", "threads")}


def write_manifest(args, info: dict, started: float, elapsed: float) -> Path:
    manifest = {
        "subcommand": args.command,
        "flags": _flags(args),
        "seeds": info.get("seeds", {}),
        "version": __version__,
        "threads": _accel.get_threads(),
        "inputs": {p: sha256(p) for p in info.get("inputs", [])},
        "outputs": {p: sha256(p) for p in info.get("outputs", [])},
        "timing": {"started_unix": started, "elapsed_s": elapsed},
    }
    path = Path(str(info["outputs"][0]) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return path


def _dispatch(args) -> int:
    started = time.time()
    t0 = time.perf_counter()
    info = COMMANDS[args.command](args)
    if info and info.get("outputs"):
        write_manifest(args, info, started, time.perf_counter() - t0)
    return 0


def cmd_replay(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    ns = build_parser().parse_args([manifest["subcommand"], *_required_stub(manifest)])
    for k, v in manifest["flags"].items():
        setattr(ns, k, np.array(v) if k in ("x", "y") and v is not None else v)
    for p, digest in manifest.get("inputs", {}).items():
        if sha256(p) != digest:
            raise DataError(f"input {p} changed since the manifest was written")
    if args.out:
        ns.out = args.out
    ns.threads = args.threads
    _dispatch(ns)
    if args.verify:
        recorded = list(manifest["outputs"].values())
        actual = sha256(ns.out)
        if actual != recorded[0]:
            print(f"replay mismatch: {ns.out}", file=sys.stderr)
            return 1
        print("replay verified: outputs bit-identical")
    return 0


def _required_stub(manifest) -> list[str]:
    # satisfies argparse's required flags; real values are overwritten from the manifest
    f = manifest["flags"]
    stub = ["--out", str(f.get("out"))]
    if manifest["subcommand"] in ("test2", "testk"):
        stub += ["--data", str(f["data"]), "--deg", str(f["deg"])]
    elif manifest["subcommand"] == "kernel":
        stub += ["--deg", str(f["deg"])]
    return stub


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = getattr(args, "threads", None)
    if threads is not None:
        _accel.set_threads(threads)
    try:
        if args.command == "replay":
            return cmd_replay(args)
        return _dispatch(args)
    except WitnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
