"""Phase B topology step: spanning-tree backbone plus spectrally-critical
off-tree edge recovery.

The backbone is a maximum-weight spanning tree (a practical stand-in for a
low-stretch tree).  Off-tree edges are ranked by how much they would reduce
the dominant generalized eigenvalue of the (graph, subgraph) pencil,
estimated from a handful of generalized power iterations, and recovered in
descending order until the pencil's condition number estimate meets the
similarity target.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import ceil

import numpy as np

from .graph import Graph, GraphError, is_connected
from .linsolve import LaplacianSolver

POWER_STEPS = 2          # t in the generalized power iteration
EMBED_VECTORS = 3        # k start vectors for the edge embedding
FILTER_COSINE = 0.95     # skip candidates this similar to a recovered edge
DEFAULT_STEP_FRACTION = 0.05


@dataclass(frozen=True)
class Sparsifier:
    """Subgraph P of ``source`` on the same node set.

    ``edge_index`` points into ``source.edges``; ``tree_mask`` marks the
    spanning-tree subset; ``weights`` are the current (possibly scaled)
    subgraph weights.
    """

    source: Graph
    edge_index: np.ndarray
    tree_mask: np.ndarray
    weights: np.ndarray
    achieved_kappa: float | None = None

    @property
    def graph(self) -> Graph:
        return Graph.from_edges(
            self.source.n,
            self.source.edges[self.edge_index],
            self.weights,
            merge_duplicates=False,
        )

    @property
    def offtree_recovered(self) -> np.ndarray:
        return self.edge_index[~self.tree_mask]

    def offtree_candidates(self) -> np.ndarray:
        """Indices of source edges not yet in the subgraph."""
        mask = np.ones(self.source.m, dtype=bool)
        mask[self.edge_index] = False
        return np.flatnonzero(mask)

    def save(self, path_edges, path_tree) -> None:
        e = self.source.edges[self.edge_index]
        with open(path_edges, "w") as f:
            for (p, q), w in zip(e, self.weights):
                f.write(f"{p + 1} {q + 1} {w:.17g}\n")
        np.savetxt(path_tree, self.tree_mask.astype(int), fmt="%d")


@dataclass(frozen=True)
class EdgeCriticality:
    """Approximate spectral criticality scores for off-tree edges, plus the
    per-vector embedding coordinates used for edge filtering."""

    edge_index: np.ndarray   # indices into source.edges
    scores: np.ndarray       # (m_off,)
    coords: np.ndarray       # (m_off, k)


def spanning_tree(g: Graph) -> Sparsifier:
    """Maximum-weight spanning tree (Kruskal; ties broken by edge id)."""
    if not is_connected(g):
        raise GraphError("spanning tree requires a connected graph")
    order = np.lexsort((np.arange(g.m), -g.weights))
    parent = np.arange(g.n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    chosen = []
    for idx in order:
        p, q = g.edges[idx]
        rp, rq = find(p), find(q)
        if rp != rq:
            parent[rp] = rq
            chosen.append(idx)
            if len(chosen) == g.n - 1:
                break
    edge_index = np.sort(np.array(chosen, dtype=np.int64))
    return Sparsifier(
        source=g,
        edge_index=edge_index,
        tree_mask=np.ones(len(edge_index), dtype=bool),
        weights=g.weights[edge_index].copy(),
    )


def generalized_power_vectors(
    g: Graph,
    p_graph: Graph,
    t: int,
    k: int,
    seed: int,
    solver: LaplacianSolver | None = None,
) -> np.ndarray:
    """k columns of (L_P^+ L_G)^t h0 with seeded random h0 orthogonal to
    all-ones; each column normalized to unit quadratic form in L_P."""
    rng = np.random.default_rng(seed)
    if solver is None:
        solver = LaplacianSolver(p_graph)
    lg = g.laplacian()
    lp = p_graph.laplacian()
    h = rng.uniform(-0.5, 0.5, size=(g.n, k))
    h -= h.mean(axis=0)
    for _ in range(t):
        for j in range(k):
            h[:, j], _ = solver.solve(lg @ h[:, j])
    for j in range(k):
        qf = float(h[:, j] @ (lp @ h[:, j]))
        if qf > 0:
            h[:, j] /= np.sqrt(qf)
    return h


def offtree_embedding(g: Graph, s: Sparsifier, t: int = POWER_STEPS,
                      k: int = EMBED_VECTORS, seed: int = 0,
                      solver: LaplacianSolver | None = None) -> EdgeCriticality:
    """Score every off-tree edge by its approximate spectral criticality."""
    if t < 1 or k < 1:
        raise GraphError("need t >= 1 power steps and k >= 1 vectors")
    cand = s.offtree_candidates()
    if len(cand) == 0:
        return EdgeCriticality(cand, np.zeros(0), np.zeros((0, k)))
    h = generalized_power_vectors(g, s.graph, t, k, seed, solver=solver)
    e = g.edges[cand]
    coords = h[e[:, 0]] - h[e[:, 1]]
    scores = g.weights[cand] * np.sum(coords**2, axis=1)
    return EdgeCriticality(edge_index=cand, scores=scores, coords=coords)


def recover_edges(g: Graph, s: Sparsifier, crit: EdgeCriticality,
                  budget: int) -> Sparsifier:
    """Add up to ``budget`` off-tree edges in descending criticality.

    A candidate whose embedding coordinates point in nearly the same
    direction (cosine > FILTER_COSINE) as an edge already recovered in this
    pass is skipped, so one pass does not stack near-duplicate edges.
    """
    if budget < 0:
        raise GraphError("budget must be >= 0")
    if budget == 0 or len(crit.edge_index) == 0:
        return s
    order = np.lexsort((crit.edge_index, -crit.scores))
    norms = np.linalg.norm(crit.coords, axis=1)
    taken: list[int] = []
    taken_dirs: list[np.ndarray] = []
    for pos in order:
        if len(taken) == budget:
            break
        if norms[pos] == 0.0:
            direction = None
        else:
            direction = crit.coords[pos] / norms[pos]
            if any(abs(float(direction @ d)) > FILTER_COSINE for d in taken_dirs):
                continue
        taken.append(int(crit.edge_index[pos]))
        if direction is not None:
            taken_dirs.append(direction)
    if not taken:
        return s
    new_index = np.concatenate([s.edge_index, np.array(taken, dtype=np.int64)])
    order2 = np.argsort(new_index, kind="stable")
    new_mask = np.concatenate([s.tree_mask, np.zeros(len(taken), dtype=bool)])
    new_w = np.concatenate([s.weights, g.weights[taken]])
    return replace(
        s,
        edge_index=new_index[order2],
        tree_mask=new_mask[order2],
        weights=new_w[order2],
    )


def densify_to_similarity(g: Graph, s: Sparsifier, sigma_target: float,
                          step_fraction: float = DEFAULT_STEP_FRACTION,
                          seed: int = 0, est_iters: int = 25) -> Sparsifier:
    """Recover off-tree edges until the condition-number estimate of the
    (L_G, L_P) pencil drops below sigma_target**2 (or edges run out)."""
    from .scale import estimate_lambda_max, estimate_lambda_min

    if sigma_target <= 1:
        raise GraphError("sigma_target must be > 1")
    # the estimators are one-sided (kappa is underestimated), so stop
    # slightly below the target to leave margin for estimation error
    kappa_target = 0.95 * sigma_target**2
    d_g = g.degrees()
    step = max(1, ceil(step_fraction * g.n))
    round_id = 0
    while True:
        pg = s.graph
        lam_max = estimate_lambda_max(g, s, iters=est_iters, seed=seed + 7 * round_id)
        lam_min = estimate_lambda_min(d_g, pg.degrees())
        kappa = lam_max / lam_min
        s = replace(s, achieved_kappa=float(kappa))
        if kappa <= kappa_target:
            return s
        cand = s.offtree_candidates()
        if len(cand) == 0:
            return s
        crit = offtree_embedding(g, s, seed=seed + 7 * round_id + 3)
        grown = recover_edges(g, s, crit, budget=step)
        if len(grown.edge_index) == len(s.edge_index):
            return s
        s = grown
        round_id += 1
