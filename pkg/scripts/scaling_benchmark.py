#!/usr/bin/env python3
"""Measure reduction wall-clock time on growing grid graphs and fit a
log-log slope against |E| * log|V| to check near-linear scaling.

Usage: python3 scripts/scaling_benchmark.py [--sides 100 200 400] [--ratio 8]
"""

import argparse
import time

import numpy as np

import specreduce as sr


def grid_graph(a, b):
    idx = np.arange(a * b).reshape(a, b)
    edges = np.vstack([
        np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()]),
        np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()]),
    ])
    return sr.Graph.from_edges(a * b, edges, np.ones(len(edges)))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sides", type=int, nargs="+", default=[100, 200, 400])
    ap.add_argument("--ratio", type=float, default=8.0)
    ap.add_argument("--repeats", type=int, default=2,
                    help="take the best of this many runs per size")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    xs, ys = [], []
    for side in args.sides:
        g = grid_graph(side, side)
        best = np.inf
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            hier = sr.spectral_reduce(
                g, sr.ReduceOptions(psi=args.ratio, seed=args.seed))
            best = min(best, time.perf_counter() - t0)
        xs.append(g.m * np.log(g.n))
        ys.append(best)
        print(f"{side}x{side}: {g.n:7d} nodes -> {hier.coarsest.n:6d}, "
              f"{best:7.2f} s")
    slope = np.polyfit(np.log(xs), np.log(ys), 1)[0]
    print(f"log-log slope vs edges*log(nodes): {slope:.2f} "
          f"(1.0 means perfectly near-linear)")


if __name__ == "__main__":
    main()
