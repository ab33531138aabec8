"""End-to-end spectral reduction: density-based routing between node
aggregation (Phase A) and sparsification plus edge scaling (Phase B),
iterated level by level to a target node-reduction ratio.

Sparse graphs aggregate first and run Phase B once on the coarsest graph;
dense graphs (or callers that ask for it) sparsify and rescale first, then
aggregate the sparsified graph.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .aggregate import (MappingOperator, aggregate_nodes, gs_test_vectors,
                        reduce_graph)
from .graph import Graph, GraphError, density, is_connected, \
    largest_component, load_graph, save_graph
from .partition import Hierarchy, smallest_eigenpairs
from .scale import SgdParams, sgd_edge_scaling
from .sparsify import DEFAULT_STEP_FRACTION, densify_to_similarity, \
    spanning_tree

log = logging.getLogger("specreduce")

MAX_LEVEL_RATIO = 4.0   # gentle per-level aggregation for later smoothing
EIG_COMPARE_COUNT = 10
REPORT_EIG_MAX_NODES = 20000


@dataclass(frozen=True)
class ReduceOptions:
    """Knobs for the reduction pipeline."""

    psi: float = 1.0                # target node-reduction ratio
    gamma_max: float = 40.0         # edges-per-node routing threshold
    sigma: float = 2.0              # similarity target for densification
    step_fraction: float = DEFAULT_STEP_FRACTION
    num_test_vectors: int = 16
    smoothing_sweeps: int = 5
    sgd: SgdParams = field(default_factory=SgdParams)
    force_phase_b_first: bool = False
    always_phase_b: bool = False    # run Phase B even below the threshold
    seed: int = 0

    def __post_init__(self):
        if self.psi < 1:
            raise GraphError("reduction ratio must be >= 1")
        if self.gamma_max <= 0:
            raise GraphError("gamma_max must be positive")
        if self.sigma <= 1:
            raise GraphError("sigma must be > 1")

    def with_phase_b_first(self) -> "ReduceOptions":
        return replace(self, force_phase_b_first=True)


@dataclass(frozen=True)
class ReduceTrace:
    """What the pipeline actually did: branch taken, per-level shrink
    factors, whether Phase B ran, and whether aggregation stalled short of
    the requested ratio."""

    branch: str                     # "aggregate-first" or "phase-b-first"
    level_ratios: list[float]
    phase_b_applied: bool
    stalled: bool
    achieved_ratio: float
    t_reduction_s: float


def _phase_b(g: Graph, opts: ReduceOptions) -> Graph:
    """Sparsify to the similarity target, then rescale the kept weights."""
    s = spanning_tree(g)
    s = densify_to_similarity(g, s, opts.sigma,
                              step_fraction=opts.step_fraction,
                              seed=opts.seed)
    s, _ = sgd_edge_scaling(g, s, params=opts.sgd, seed=opts.seed)
    return s.graph


def _aggregate_levels(g: Graph, opts: ReduceOptions):
    """Repeated gentle aggregation until the cumulative ratio reaches psi.

    Returns (levels, maps, stalled).
    """
    levels = [g]
    maps: list[MappingOperator] = []
    final_target = max(2, int(np.ceil(g.n / opts.psi)))
    while True:
        cur = levels[-1]
        if cur.n <= final_target:
            break
        target = min(MAX_LEVEL_RATIO, cur.n / final_target)
        tv = gs_test_vectors(cur, K=opts.num_test_vectors,
                             sweeps=opts.smoothing_sweeps,
                             seed=opts.seed + len(maps))
        h = aggregate_nodes(cur, tv, target_ratio=target)
        if h.n_coarse >= cur.n:
            break
        levels.append(reduce_graph(cur, h))
        maps.append(h)
    stalled = levels[-1].n > final_target
    return levels, maps, stalled


def spectral_reduce_with_trace(g: Graph, opts: ReduceOptions | None = None,
                               ) -> tuple[Hierarchy, ReduceTrace]:
    """Run the full reduction and report what happened."""
    if opts is None:
        opts = ReduceOptions()
    t0 = time.perf_counter()
    if not is_connected(g):
        log.warning("input graph is disconnected; reducing the largest "
                    "connected component only")
        g, _ = largest_component(g)
    dense = density(g) > opts.gamma_max
    phase_b_first = dense or opts.force_phase_b_first
    phase_b_applied = False
    if opts.psi == 1.0 and not opts.always_phase_b:
        hier = Hierarchy(levels=[g], maps=[])
        trace = ReduceTrace(
            branch="phase-b-first" if phase_b_first else "aggregate-first",
            level_ratios=[], phase_b_applied=False, stalled=False,
            achieved_ratio=1.0, t_reduction_s=time.perf_counter() - t0)
        return hier, trace
    if phase_b_first:
        base = _phase_b(g, opts) if (g.m > g.n - 1) else g
        phase_b_applied = base is not g
        levels, maps, stalled = _aggregate_levels(base, opts)
    else:
        levels, maps, stalled = _aggregate_levels(g, opts)
        coarse = levels[-1]
        run_b = (density(coarse) > opts.gamma_max or opts.always_phase_b)
        if run_b and coarse.m > coarse.n - 1 and coarse.n > 2:
            levels = levels[:-1] + [_phase_b(coarse, opts)]
            phase_b_applied = True
    hier = Hierarchy(levels=levels, maps=maps)
    ratios = [levels[j].n / levels[j + 1].n for j in range(len(maps))]
    trace = ReduceTrace(
        branch="phase-b-first" if phase_b_first else "aggregate-first",
        level_ratios=ratios,
        phase_b_applied=phase_b_applied,
        stalled=stalled,
        achieved_ratio=levels[0].n / levels[-1].n,
        t_reduction_s=time.perf_counter() - t0,
    )
    if stalled:
        log.warning("aggregation stalled at ratio %.2f (requested %.2f); "
                    "returning the best-achieved hierarchy",
                    trace.achieved_ratio, opts.psi)
    return hier, trace


def spectral_reduce(g: Graph, opts: ReduceOptions | None = None) -> Hierarchy:
    hier, _ = spectral_reduce_with_trace(g, opts)
    return hier


# ----------------------------------------------------------------------
# reporting
# ----------------------------------------------------------------------
def normalized_eig_compare(g: Graph, s: Graph, count: int = EIG_COMPARE_COUNT,
                           ) -> dict:
    """First ``count`` nontrivial Laplacian eigenvalues of both graphs, each
    spectrum normalized by its own last compared eigenvalue."""
    count = min(count, g.n - 1, s.n - 1)
    if count < 1:
        return {"original": [], "reduced": [], "mean_rel_error": 0.0}
    vg, _ = smallest_eigenpairs(g, count + 1, "identity")
    vs, _ = smallest_eigenpairs(s, count + 1, "identity")
    eg, es = vg[1:count + 1], vs[1:count + 1]
    if eg[-1] <= 0 or es[-1] <= 0:
        raise GraphError("degenerate spectrum: cannot normalize")
    eg = eg / eg[-1]
    es = es / es[-1]
    denom = np.where(eg > 0, eg, 1.0)
    err = float(np.mean(np.abs(es - eg) / denom))
    return {"original": [float(v) for v in eg],
            "reduced": [float(v) for v in es],
            "mean_rel_error": err}


def reduction_report(g: Graph, h: Hierarchy, t_reduction_s: float = 0.0,
                     eig_count: int = EIG_COMPARE_COUNT) -> dict:
    """Node/edge shrink ratios plus a normalized low-end spectrum comparison
    between the finest and coarsest graphs."""
    s = h.coarsest
    if h.finest.n != g.n:
        # reduction ran on the largest component; ratios still use g
        log.info("report baseline has %d nodes, hierarchy finest has %d",
                 g.n, h.finest.n)
    report = {
        "nodes_original": int(g.n),
        "nodes_reduced": int(s.n),
        "edges_original": int(g.m),
        "edges_reduced": int(s.m),
        "node_ratio": float(g.n / s.n),
        "edge_ratio": float(g.m / s.m) if s.m else float("inf"),
        "t_reduction_s": round(float(t_reduction_s), 3),
    }
    if g.n <= REPORT_EIG_MAX_NODES:
        report["eig_compare"] = normalized_eig_compare(g, s, eig_count)
    else:
        report["eig_compare"] = {"original": [], "reduced": [],
                                 "mean_rel_error": None}
    return report


# ----------------------------------------------------------------------
# hierarchy serialization
# ----------------------------------------------------------------------
def save_hierarchy(h: Hierarchy, dirpath) -> None:
    """Directory layout: level_<j>.edges, map_<j>.txt, meta.json."""
    os.makedirs(dirpath, exist_ok=True)
    for j, g in enumerate(h.levels):
        save_graph(g, os.path.join(dirpath, f"level_{j}.edges"),
                   format="edge-list")
    for j, m in enumerate(h.maps):
        m.save(os.path.join(dirpath, f"map_{j}.txt"))
    meta = {
        "depth": h.depth,
        "nodes": [int(g.n) for g in h.levels],
        "edges": [int(g.m) for g in h.levels],
    }
    with open(os.path.join(dirpath, "meta.json"), "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def load_hierarchy(dirpath) -> Hierarchy:
    with open(os.path.join(dirpath, "meta.json")) as f:
        meta = json.load(f)
    depth = int(meta["depth"])
    levels = [load_graph(os.path.join(dirpath, f"level_{j}.edges"),
                         format="edge-list") for j in range(depth)]
    maps = [MappingOperator.load(os.path.join(dirpath, f"map_{j}.txt"))
            for j in range(depth - 1)]
    return Hierarchy(levels=levels, maps=maps)
