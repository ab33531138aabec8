#!/usr/bin/env python3
"""Embed a synthetic Gaussian-blob dataset with multilevel t-SNE at several
reduction ratios and report silhouette scores and timings.

Usage: python3 scripts/tsne_blobs.py [--n-per 500] [--blobs 3] [--dim 20]
       [--ratios 1 4 10] [--out-dir OUT]
"""

import argparse
import os
import time

import numpy as np

import specreduce as sr
from specreduce.tsne import majority_labels


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-per", type=int, default=500)
    ap.add_argument("--blobs", type=int, default=3)
    ap.add_argument("--dim", type=int, default=20)
    ap.add_argument("--spread", type=float, default=1.0)
    ap.add_argument("--ratios", type=float, nargs="+", default=[1.0, 4.0, 10.0])
    ap.add_argument("--knn", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default=None,
                    help="optionally write embedding CSVs here")
    args = ap.parse_args()

    from sklearn.metrics import silhouette_score

    rng = np.random.default_rng(args.seed)
    centers = rng.normal(0, 6.0, size=(args.blobs, args.dim))
    pts = np.vstack([c + rng.normal(0, args.spread, (args.n_per, args.dim))
                     for c in centers])
    labels = np.repeat(np.arange(args.blobs), args.n_per)
    data = sr.Dataset(F=pts, labels=labels)
    print(f"dataset: {data.n} points, {args.dim} dims, {args.blobs} blobs")

    for psi in args.ratios:
        t0 = time.perf_counter()
        emb, mapping = sr.multilevel_tsne(
            data, knn_k=args.knn,
            reduce_opts=sr.ReduceOptions(psi=psi, seed=args.seed),
            seed=args.seed)
        dt = time.perf_counter() - t0
        lab = majority_labels(labels, mapping)
        sil = silhouette_score(emb.Y, lab)
        print(f"ratio {psi:5.1f}: {mapping.n_coarse:5d} points embedded, "
              f"silhouette {sil:.3f}, {dt:.1f} s, "
              f"final KL {emb.objective_trace[-1]:.3f}")
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
            path = os.path.join(args.out_dir, f"embedding_ratio{psi:g}.csv")
            np.savetxt(path, np.column_stack([emb.Y, lab]), delimiter=",",
                       header="x,y,label", comments="")
            print(f"  wrote {path}")


if __name__ == "__main__":
    main()
