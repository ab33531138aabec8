"""Multilevel t-SNE: kNN graph construction, feature aggregation onto the
reduced node set, exact-gradient t-SNE, and the eigenspace correlation
diagnostic.

The gradient is the exact O(N^2) form; the whole point of reducing first
is that the embedded set is small enough for that to be cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging

import numpy as np

from .aggregate import MappingOperator
from .graph import Graph, GraphError, connected_components

log = logging.getLogger("specreduce")

DEFAULT_PERPLEXITY = 30.0
EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250
MOMENTUM_SWITCH_ITER = 250


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (n rows, d columns) with optional per-row labels."""

    F: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        f = np.asarray(self.F)
        if f.ndim != 2 or f.shape[0] < 2:
            raise GraphError("need a 2-D feature matrix with at least 2 rows")
        if not np.all(np.isfinite(f)):
            raise GraphError("features must be finite")
        if self.labels is not None and len(self.labels) != f.shape[0]:
            raise GraphError("label count does not match row count")

    @property
    def n(self) -> int:
        return self.F.shape[0]


@dataclass(frozen=True)
class AffinityMatrix:
    """Dense symmetric joint probabilities: p_ij >= 0, p_ii = 0, sum = 1."""

    P: np.ndarray

    def __post_init__(self):
        p = self.P
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise GraphError("affinity matrix must be square")

    @property
    def n(self) -> int:
        return self.P.shape[0]


@dataclass(frozen=True)
class TsneParams:
    iterations: int = 1000
    learning_rate: float = 200.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    exaggeration: float = EXAGGERATION
    exaggeration_iters: int = EXAGGERATION_ITERS
    record_every: int = 10


@dataclass(frozen=True)
class Embedding:
    Y: np.ndarray
    objective_trace: list[float] = field(default_factory=list)


# ----------------------------------------------------------------------
# kNN graph and feature reduction
# ----------------------------------------------------------------------
def knn_graph(data: Dataset, k: int, gaussian_weights: bool = False) -> Graph:
    """Symmetrized exact k-nearest-neighbor graph with unit weights.

    Ties in distance break by smaller index, so duplicated points still
    produce a deterministic graph.
    """
    n = data.n
    if not (1 <= k < n):
        raise GraphError("need 1 <= k < n neighbors")
    f = np.asarray(data.F, dtype=np.float64)
    d2 = _pairwise_sq_dists(f)
    np.fill_diagonal(d2, np.inf)
    edges = set()
    idx = np.arange(n)
    for i in range(n):
        order = np.lexsort((idx, d2[i]))[:k]
        for j in order:
            edges.add((min(i, int(j)), max(i, int(j))))
    e = np.array(sorted(edges), dtype=np.int64)
    if gaussian_weights:
        dist2 = np.sum((f[e[:, 0]] - f[e[:, 1]]) ** 2, axis=1)
        scale = np.mean(dist2) if np.any(dist2 > 0) else 1.0
        w = np.exp(-dist2 / max(scale, 1e-300))
        w = np.maximum(w, 1e-12)
    else:
        w = np.ones(len(e))
    return Graph.from_edges(n, e, w)


def reduce_features(data: Dataset, h: MappingOperator,
                    mode: str = "mean") -> Dataset:
    """Aggregate feature rows per cluster (mean by default, raw 0/1 sum
    behind a flag); labels become the cluster majority label."""
    if h.n_fine != data.n:
        raise GraphError("mapping size does not match dataset")
    if mode not in ("mean", "sum"):
        raise GraphError("mode must be 'mean' or 'sum'")
    f = np.asarray(data.F, dtype=np.float64)
    fr = h.project_sum(f) if mode == "sum" else h.project_mean(f)
    labels = None
    if data.labels is not None:
        labels = majority_labels(np.asarray(data.labels), h)
    return Dataset(F=fr, labels=labels)


def majority_labels(labels: np.ndarray, h: MappingOperator) -> np.ndarray:
    """Per-cluster majority fine label (ties break by smaller label value)."""
    uniq, inv = np.unique(labels, return_inverse=True)
    counts = np.zeros((h.n_coarse, len(uniq)), dtype=np.int64)
    np.add.at(counts, (h.cluster_of, inv), 1)
    return uniq[counts.argmax(axis=1)]


# ----------------------------------------------------------------------
# affinities
# ----------------------------------------------------------------------
def perplexity_calibrate(data: Dataset, perplexity: float = DEFAULT_PERPLEXITY,
                         max_bisections: int = 200,
                         tol: float = 1e-5) -> AffinityMatrix:
    """Per-point binary search on the Gaussian bandwidth so each conditional
    distribution has the requested perplexity, then symmetrize."""
    n = data.n
    if not (1 < perplexity < n):
        raise GraphError("need 1 < perplexity < n")
    d2 = _pairwise_sq_dists(np.asarray(data.F, dtype=np.float64))
    target = np.log2(perplexity)
    cond = np.zeros((n, n))
    for i in range(n):
        row = np.delete(d2[i], i)
        p, ok = _calibrate_row(row, target, max_bisections, tol)
        if not ok:
            log.warning("perplexity search did not converge for point %d; "
                        "falling back to a uniform conditional", i)
            p = np.full(n - 1, 1.0 / (n - 1))
        cond[i] = np.insert(p, i, 0.0)
    p = (cond + cond.T) / (2.0 * n)
    return AffinityMatrix(P=p)


def _calibrate_row(d2_row, target_log2_perp, max_bisections, tol):
    beta, beta_lo, beta_hi = 1.0, 0.0, np.inf
    for _ in range(max_bisections):
        e = np.exp(-(d2_row - d2_row.min()) * beta)
        s = e.sum()
        if s <= 0:
            return e, False
        p = e / s
        nz = p > 0
        h = -np.sum(p[nz] * np.log2(p[nz]))
        diff = h - target_log2_perp
        if abs(2.0**h - 2.0**target_log2_perp) < tol:
            return p, True
        if diff > 0:  # entropy too high: sharpen
            beta_lo = beta
            beta = beta * 2 if np.isinf(beta_hi) else (beta_lo + beta_hi) / 2
        else:
            beta_hi = beta
            beta = (beta_lo + beta_hi) / 2
    return p, False


# ----------------------------------------------------------------------
# t-SNE descent
# ----------------------------------------------------------------------
def _q_matrix(y):
    """Cauchy-kernel joint probabilities and their normalization constant."""
    d2 = _pairwise_sq_dists(y)
    num = 1.0 / (1.0 + d2)
    np.fill_diagonal(num, 0.0)
    z = num.sum()
    return num / z, num, z


def kl_divergence(p, q):
    mask = p > 0
    qc = np.maximum(q, 1e-300)
    return float(np.sum(p[mask] * np.log(p[mask] / qc[mask])))


def tsne_gradient(p, y):
    """Exact gradient of the KL cost with respect to the 2-D positions."""
    q, num, _ = _q_matrix(y)
    pq = (p - q) * num  # (p_ij - q_ij) q_ij Z
    grad = np.zeros_like(y)
    for i in range(y.shape[0]):
        grad[i] = 4.0 * (pq[i][:, None] * (y[i] - y)).sum(axis=0)
    return grad, q


def tsne_embed(aff: AffinityMatrix, params: TsneParams | None = None,
               seed: int = 0) -> Embedding:
    """Momentum gradient descent with per-coordinate gains and early
    exaggeration on the exact pairwise gradient."""
    if params is None:
        params = TsneParams()
    p_base = aff.P
    n = aff.n
    rng = np.random.default_rng(seed)
    y = rng.normal(0.0, 1e-4, size=(n, 2))
    update = np.zeros_like(y)
    gains = np.ones_like(y)
    trace: list[float] = []
    for it in range(params.iterations):
        p = p_base * params.exaggeration if it < params.exaggeration_iters else p_base
        grad, q = _tsne_grad_fast(p, y)
        momentum = (params.momentum_early if it < MOMENTUM_SWITCH_ITER
                    else params.momentum_late)
        same_sign = np.sign(grad) == np.sign(update)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        gains = np.clip(gains, 0.01, 1e2)  # max-gain clip guards overflow
        update = momentum * update - params.learning_rate * gains * grad
        y = y + update
        y = y - y.mean(axis=0)
        if it % params.record_every == 0 or it == params.iterations - 1:
            trace.append(kl_divergence(p_base, q))
    return Embedding(Y=y, objective_trace=trace)


def _tsne_grad_fast(p, y):
    q, num, _ = _q_matrix(y)
    pq_num = (p - q) * num
    # grad_i = 4 * (row_sum_i * y_i - (pq_num @ y)_i)
    grad = 4.0 * (pq_num.sum(axis=1)[:, None] * y - pq_num @ y)
    return grad, q


def correlation_factor(v, u) -> float:
    """Fraction of a vector's norm captured by the span of orthonormal
    columns u: ||U U^T v|| / ||v||."""
    v = np.asarray(v, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise GraphError("correlation factor undefined for the zero vector")
    return float(np.linalg.norm(u.T @ v) / nrm)


# ----------------------------------------------------------------------
# multilevel pipeline
# ----------------------------------------------------------------------
def multilevel_tsne(data: Dataset, knn_k: int = 10, reduce_opts=None,
                    tsne_params: TsneParams | None = None, seed: int = 0,
                    perplexity: float = DEFAULT_PERPLEXITY,
                    feature_mode: str = "mean",
                    ) -> tuple[Embedding, MappingOperator]:
    """kNN graph -> spectral reduction -> feature aggregation -> t-SNE.

    Returns the reduced-point embedding and the fine-to-coarse mapping so
    callers can color reduced points by majority fine label.
    """
    from .pipeline import ReduceOptions, spectral_reduce

    opts = reduce_opts if reduce_opts is not None else ReduceOptions()
    if opts.psi <= 1:
        mapping = MappingOperator.identity(data.n)
        reduced = data
    else:
        # kNN graphs are sparse, but their affinity structure degrades the
        # aggregation metric, so sparsify/scale runs before aggregation
        g = knn_graph(data, knn_k)
        g = _bridge_components(g, data)
        hier = spectral_reduce(g, opts.with_phase_b_first())
        mapping = hier.composed_map()
        reduced = reduce_features(data, mapping, mode=feature_mode)
    eff_perp = min(perplexity, max(2.0, reduced.n / 3.0))
    aff = perplexity_calibrate(reduced, perplexity=eff_perp)
    emb = tsne_embed(aff, params=tsne_params, seed=seed)
    return emb, mapping


def _bridge_components(g: Graph, data: Dataset) -> Graph:
    """Connect a disconnected kNN graph by linking each stray component to
    the rest at its closest point pair, so the reduction keeps every point."""
    labels = connected_components(g)
    if labels.max() == 0:
        return g
    d2 = _pairwise_sq_dists(np.asarray(data.F, dtype=np.float64))
    extra = []
    while labels.max() > 0:
        in0 = labels == 0
        rest = np.flatnonzero(~in0)
        here = np.flatnonzero(in0)
        block = d2[np.ix_(here, rest)]
        i, j = np.unravel_index(block.argmin(), block.shape)
        p, q = int(here[i]), int(rest[j])
        extra.append((min(p, q), max(p, q)))
        # merge the bridged component into component 0
        labels[labels == labels[q]] = 0
        labels = np.unique(labels, return_inverse=True)[1]
    edges = np.vstack([g.edges, np.array(extra, dtype=np.int64)])
    weights = np.concatenate([g.weights, np.ones(len(extra))])
    return Graph.from_edges(g.n, edges, weights)


def _pairwise_sq_dists(x):
    s = np.sum(x * x, axis=1)
    d2 = s[:, None] + s[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    return d2
