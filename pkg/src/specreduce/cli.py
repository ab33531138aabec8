"""Command-line front end: reduce graphs, partition them, or embed feature
datasets, writing CSV/JSON artifacts for external plotting.

Exit codes: 0 success, 1 usage or I/O error, 2 numerical failure.
Logging verbosity comes from the SC_LOG environment variable
(error, info or debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from .graph import Graph, GraphError, load_graph
from .linsolve import SolveError
from .partition import (cut_metrics, direct_spectral_partition,
                        multilevel_spectral_partition)
from .pipeline import (ReduceOptions, reduction_report, save_hierarchy,
                       spectral_reduce_with_trace)
from .tsne import (Dataset, TsneParams, majority_labels, multilevel_tsne)

log = logging.getLogger("specreduce")

DEFAULT_SEED = 42
DIRECT_SLOW_NODES = 50_000


def _setup_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO,
             "debug": logging.DEBUG}.get(
        os.environ.get("SC_LOG", "error").lower(), logging.ERROR)
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def _limit_threads(threads: int | None) -> None:
    if threads is None:
        return
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(limits=threads)
    except ImportError:
        log.warning("threadpoolctl not installed; --threads ignored")


def _write_json(path, payload: dict, schema_name: str) -> None:
    _validate_schema(payload, schema_name)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _validate_schema(payload: dict, schema_name: str) -> None:
    """Best-effort self-check of our own artifacts against shipped schemas."""
    try:
        import jsonschema
    except ImportError:
        return
    schema_path = os.path.join(os.path.dirname(__file__), "schemas",
                               schema_name)
    with open(schema_path) as f:
        jsonschema.validate(payload, json.load(f))


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------
def cmd_reduce(args) -> int:
    g = load_graph(args.infile, format=args.format)
    opts = ReduceOptions(psi=args.ratio, sigma=args.sigma, seed=args.seed)
    hier, trace = spectral_reduce_with_trace(g, opts)
    report = reduction_report(g, hier, t_reduction_s=trace.t_reduction_s)
    report["seed"] = args.seed
    report["branch"] = trace.branch
    report["stalled"] = trace.stalled
    os.makedirs(args.out, exist_ok=True)
    save_hierarchy(hier, args.out)
    _write_json(os.path.join(args.out, "report.json"), report,
                "reduce_report.schema.json")
    print(f"seed={args.seed} nodes {g.n} -> {hier.coarsest.n} "
          f"(ratio {report['node_ratio']:.2f}) in "
          f"{report['t_reduction_s']:.3f} s")
    return 0


def cmd_partition(args) -> int:
    g = load_graph(args.infile, format=args.format)
    if args.direct:
        if g.n > DIRECT_SLOW_NODES:
            log.warning("direct mode on %d nodes (> %d) may be very slow",
                        g.n, DIRECT_SLOW_NODES)
            print(f"warning: direct mode on {g.n} nodes "
                  f"(> {DIRECT_SLOW_NODES}) may be very slow",
                  file=sys.stderr)
        t0 = time.perf_counter()
        part = direct_spectral_partition(g, args.k, cut_type=args.cut,
                                         seed=args.seed)
        t1 = time.perf_counter()
        report = cut_metrics(g, part)
        t_eigs, t_smooth, t_total = t1 - t0, 0.0, time.perf_counter() - t0
    else:
        opts = ReduceOptions(psi=args.ratio, sigma=args.sigma, seed=args.seed)
        part, report, timing = multilevel_spectral_partition(
            g, args.k, reduce_opts=opts, cut_type=args.cut, seed=args.seed)
        t_eigs, t_smooth, t_total = (timing.t_eigs_s, timing.t_smooth_s,
                                     timing.t_total_s)
    part.save(args.out + ".labels")
    metrics = {
        "k": args.k,
        "cut_type": args.cut,
        "mode": "direct" if args.direct else "multilevel",
        "seed": args.seed,
        "edge_cut": report.edge_cut,
        "ratio_cut": report.ratio_cut,
        "normalized_cut": report.normalized_cut,
        "t_eigs_s": round(t_eigs, 3),
        "t_smooth_s": round(t_smooth, 3),
        "t_total_s": round(t_total, 3),
    }
    _write_json(args.out + ".metrics.json", metrics,
                "partition_metrics.schema.json")
    print(f"seed={args.seed} k={args.k} {args.cut} cut="
          f"{report.normalized_cut if args.cut == 'normalized' else report.ratio_cut:.4f} "
          f"in {t_total:.3f} s")
    return 0


def cmd_tsne(args) -> int:
    raw = np.loadtxt(args.infile, delimiter=",", ndmin=2)
    if args.labels:
        if raw.shape[1] < 2:
            raise GraphError("need at least one feature column besides labels")
        data = Dataset(F=raw[:, :-1], labels=raw[:, -1].astype(np.int64))
    else:
        data = Dataset(F=raw)
    opts = ReduceOptions(psi=args.ratio, seed=args.seed)
    emb, mapping = multilevel_tsne(
        data, knn_k=args.knn, reduce_opts=opts,
        tsne_params=TsneParams(), seed=args.seed,
        perplexity=args.perplexity)
    os.makedirs(args.out, exist_ok=True)
    header = "id,x,y"
    cols = [np.arange(mapping.n_coarse), emb.Y[:, 0], emb.Y[:, 1]]
    fmts = ["%d", "%.8g", "%.8g"]
    if args.labels:
        header += ",label"
        cols.append(majority_labels(data.labels, mapping))
        fmts.append("%d")
    np.savetxt(os.path.join(args.out, "embedding.csv"),
               np.column_stack(cols), delimiter=",", header=header,
               comments="", fmt=fmts)
    mapping.save(os.path.join(args.out, "mapping.txt"))
    with open(os.path.join(args.out, "kl_trace.csv"), "w") as f:
        f.write("record,kl\n")
        for i, v in enumerate(emb.objective_trace):
            f.write(f"{i},{v:.8g}\n")
    print(f"seed={args.seed} embedded {mapping.n_coarse} points "
          f"(from {data.n}); final KL {emb.objective_trace[-1]:.4f}")
    return 0


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="specreduce",
        description="Spectral graph reduction, partitioning and embedding.")
    ap.add_argument("--threads", type=int, default=None,
                    help="cap BLAS/LAPACK thread pools")
    sub = ap.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("reduce", help="reduce a graph and write a hierarchy")
    pr.add_argument("--in", dest="infile", required=True)
    pr.add_argument("--format", default="matrix-market",
                    choices=["matrix-market", "metis", "edge-list"])
    pr.add_argument("--ratio", type=float, required=True,
                    help="target node-reduction ratio (>= 1)")
    pr.add_argument("--sigma", type=float, default=2.0)
    pr.add_argument("--seed", type=int, default=DEFAULT_SEED)
    pr.add_argument("--out", required=True, help="output directory")
    pr.set_defaults(func=cmd_reduce)

    pp = sub.add_parser("partition", help="k-way spectral partitioning")
    pp.add_argument("--in", dest="infile", required=True)
    pp.add_argument("--format", default="matrix-market",
                    choices=["matrix-market", "metis", "edge-list"])
    pp.add_argument("-k", type=int, required=True)
    pp.add_argument("--cut", default="normalized",
                    choices=["normalized", "ratio"])
    pp.add_argument("--direct", action="store_true",
                    help="skip reduction; solve on the full graph")
    pp.add_argument("--ratio", type=float, default=8.0,
                    help="reduction ratio for multilevel mode")
    pp.add_argument("--sigma", type=float, default=2.0)
    pp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    pp.add_argument("--out", required=True, help="output path prefix")
    pp.set_defaults(func=cmd_partition)

    pt = sub.add_parser("tsne", help="multilevel 2-D embedding of a CSV")
    pt.add_argument("--in", dest="infile", required=True,
                    help="CSV of feature rows")
    pt.add_argument("--labels", action="store_true",
                    help="treat the last CSV column as integer labels")
    pt.add_argument("--knn", type=int, default=10)
    pt.add_argument("--ratio", type=float, default=1.0)
    pt.add_argument("--perplexity", type=float, default=30.0)
    pt.add_argument("--seed", type=int, default=DEFAULT_SEED)
    pt.add_argument("--out", required=True, help="output directory")
    pt.set_defaults(func=cmd_tsne)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    _limit_threads(args.threads)
    try:
        if args.command == "reduce" and args.ratio < 1:
            raise GraphError("--ratio must be >= 1")
        if args.command == "partition" and args.k < 2:
            raise GraphError("-k must be >= 2")
        if args.command == "tsne" and args.knn < 1:
            raise GraphError("--knn must be >= 1")
        return args.func(args)
    except (GraphError, OSError, ValueError) as exc:
        if isinstance(exc, (SolveError, np.linalg.LinAlgError)):
            print(f"error: numerical failure: {exc}", file=sys.stderr)
            return 2
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
