"""K-way spectral partitioning on the reduced hierarchy.

Implements the direct (no-reduction) spectral partitioner as a baseline,
the multilevel eigensolver that solves densely at the coarsest level and
lifts + smooths eigenvectors back up, k-means clustering of the spectral
embedding, and the ratio/normalized/edge cut quality metrics.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .aggregate import MappingOperator
from .graph import Graph, GraphError, is_connected
from .refine import DEFAULT_ITERS, DEFAULT_THETA, eigen_smooth

DENSE_EIG_MAX = 1500       # direct dense eigensolve below this many nodes
COARSEST_EIG_MAX = 3000    # hard cap for the coarsest-level dense solve


@dataclass(frozen=True)
class Hierarchy:
    """Graphs from finest (level 0) to coarsest, with the fine-to-coarse
    mapping between each consecutive pair."""

    levels: list[Graph]
    maps: list[MappingOperator]

    def __post_init__(self):
        if len(self.maps) != len(self.levels) - 1:
            raise GraphError("need exactly one mapping per consecutive level pair")
        for j, h in enumerate(self.maps):
            if h.n_fine != self.levels[j].n or h.n_coarse != self.levels[j + 1].n:
                raise GraphError(f"mapping {j} does not match level sizes")

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def finest(self) -> Graph:
        return self.levels[0]

    @property
    def coarsest(self) -> Graph:
        return self.levels[-1]

    def composed_map(self) -> MappingOperator:
        h = MappingOperator.identity(self.levels[0].n)
        for m in self.maps:
            h = h.compose(m)
        return h


@dataclass(frozen=True)
class Partition:
    labels: np.ndarray
    k: int

    def __post_init__(self):
        lbl = np.asarray(self.labels)
        if len(np.unique(lbl)) != self.k or lbl.min(initial=0) < 0 or (
            len(lbl) and lbl.max() >= self.k
        ):
            raise GraphError("labels must cover 0..k-1 with no empty cluster")

    def save(self, path) -> None:
        np.savetxt(path, self.labels, fmt="%d")


@dataclass(frozen=True)
class CutReport:
    edge_cut: float
    ratio_cut: float
    normalized_cut: float


def cut_metrics(g: Graph, part: Partition) -> CutReport:
    """Edge cut, ratio cut and normalized cut of a k-way partition.

    Each boundary edge contributes to the cut value of both incident
    clusters, so the k-way edge cut counts it twice.
    """
    labels = np.asarray(part.labels)
    if labels.shape != (g.n,):
        raise GraphError("label vector length does not match graph")
    sizes = np.bincount(labels, minlength=part.k).astype(float)
    if np.any(sizes == 0):
        raise GraphError("empty cluster")
    vol = np.zeros(part.k)
    np.add.at(vol, labels, g.degrees())
    lp, lq = labels[g.edges[:, 0]], labels[g.edges[:, 1]]
    boundary = lp != lq
    cut = np.zeros(part.k)
    np.add.at(cut, lp[boundary], g.weights[boundary])
    np.add.at(cut, lq[boundary], g.weights[boundary])
    with np.errstate(invalid="ignore", divide="ignore"):
        ncut = np.where(vol > 0, cut / vol, 0.0)
    return CutReport(
        edge_cut=float(cut.sum()),
        ratio_cut=float(np.sum(cut / sizes)),
        normalized_cut=float(ncut.sum()),
    )


# ----------------------------------------------------------------------
# k-means
# ----------------------------------------------------------------------
def kmeans(points, k: int, seed: int = 0, max_iter: int = 300,
           restarts: int = 5) -> Partition:
    """k-means++ seeded Lloyd iterations, best of ``restarts`` by inertia."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = len(pts)
    if n < k:
        raise GraphError("need at least k points")
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(restarts):
        centers = _kmeanspp_init(pts, k, rng)
        labels, inertia = _lloyd(pts, centers, k, max_iter)
        if inertia < best_inertia - 1e-12:
            best_labels, best_inertia = labels, inertia
    return Partition(labels=best_labels, k=k)


def _kmeanspp_init(pts, k, rng):
    n = len(pts)
    centers = np.empty((k, pts.shape[1]))
    centers[0] = pts[rng.integers(n)]
    d2 = np.sum((pts - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[j] = pts[rng.integers(n)]
        else:
            centers[j] = pts[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((pts - centers[j]) ** 2, axis=1))
    return centers

def _lloyd(pts, centers, k, max_iter):
    n = len(pts)
    labels = np.full(n, -1)
    for _ in range(max_iter):
        d2 = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_labels = d2.argmin(axis=1)
        counts = np.bincount(new_labels, minlength=k)
        # empty-cluster repair: split the largest cluster at its farthest point
        for empty in np.flatnonzero(counts == 0):
            big = counts.argmax()
            cand = np.flatnonzero(new_labels == big)
            far = cand[d2[cand, big].argmax()]
            new_labels[far] = empty
            counts[big] -= 1
            counts[empty] += 1
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            centers[j] = pts[labels == j].mean(axis=0)
    inertia = float(np.sum((pts - centers[labels]) ** 2))
    return labels, inertia


# ----------------------------------------------------------------------
# eigensolvers
# ----------------------------------------------------------------------
def smallest_eigenpairs(g: Graph, k: int, b_mode: str) -> tuple[np.ndarray, np.ndarray]:
    """First k eigenpairs of L u = lambda B u with B = I or B = D.

    The degree-weighted problem is solved as a symmetric problem on the
    normalized Laplacian and back-transformed.
    """
    if b_mode not in ("identity", "degree"):
        raise GraphError("b_mode must be 'identity' or 'degree'")
    if k > g.n:
        raise GraphError("cannot ask for more eigenpairs than nodes")
    lap = g.laplacian()
    if b_mode == "degree":
        d = g.degrees()
        if np.any(d <= 0):
            raise GraphError("zero degree: normalized problem undefined")
        dm12 = 1.0 / np.sqrt(d)
        mat = sp.diags(dm12) @ lap @ sp.diags(dm12)
    else:
        mat = lap
    if g.n <= DENSE_EIG_MAX:
        vals, vecs = scipy.linalg.eigh(mat.toarray(), subset_by_index=(0, k - 1))
    else:
        sigma = -1e-3 * float(g.degrees().mean())
        vals, vecs = spla.eigsh(mat.tocsc(), k=k, sigma=sigma, which="LM")
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    if b_mode == "degree":
        vecs = dm12[:, None] * vecs
        # normalize in the D inner product for a consistent scale
        scale = np.sqrt(np.einsum("ij,ij->j", vecs, g.degrees()[:, None] * vecs))
        vecs = vecs / scale
    vals = np.maximum(vals, 0.0)
    return vals, vecs


def direct_spectral_partition(g: Graph, k: int, cut_type: str = "normalized",
                              seed: int = 0) -> Partition:
    """Spectral partitioning on the full graph: first k eigenvectors, then
    k-means on their rows."""
    if k < 2:
        raise GraphError("need k >= 2 partitions")
    b_mode = _b_mode(cut_type)
    _, u = smallest_eigenpairs(g, k, b_mode)
    return kmeans(u, k, seed=seed)


def _b_mode(cut_type: str) -> str:
    if cut_type == "ratio":
        return "identity"
    if cut_type == "normalized":
        return "degree"
    raise GraphError("cut_type must be 'ratio' or 'normalized'")


def multilevel_eigensolver(h: Hierarchy, k: int, cut_type: str = "normalized",
                           theta: float = DEFAULT_THETA,
                           smooth_iters: int = DEFAULT_ITERS) -> np.ndarray:
    """Dense eigensolve at the coarsest level, then lift and smooth the
    eigenvectors level by level; Gram-Schmidt at the finest level."""
    u, _, _ = _multilevel_u(h, k, _b_mode(cut_type), theta, smooth_iters)
    return u


def _multilevel_u(h: Hierarchy, k: int, b_mode: str, theta: float,
                  smooth_iters: int):
    coarse = h.coarsest
    if coarse.n < k:
        raise GraphError(
            f"coarsest level has {coarse.n} nodes < k={k}; lower the reduction ratio"
        )
    if coarse.n > COARSEST_EIG_MAX:
        raise GraphError(
            f"coarsest level has {coarse.n} nodes (> {COARSEST_EIG_MAX}); "
            "increase the reduction ratio"
        )
    t0 = time.perf_counter()
    lam, u = _dense_generalized_eigs(coarse, k, b_mode)
    t1 = time.perf_counter()
    for j in range(h.depth - 2, -1, -1):
        u = h.maps[j].lift(u)
        g = h.levels[j]
        for i in range(k):
            try:
                u[:, i] = eigen_smooth(g, b_mode, float(lam[i]), u[:, i],
                                       theta=theta, iters=smooth_iters)
            except GraphError:
                # shift hit every diagonal (e.g. lam = 1 in the normalized
                # problem): keep the lifted column as is
                nrm = np.linalg.norm(u[:, i])
                if nrm > 0:
                    u[:, i] /= nrm
    q, _ = np.linalg.qr(u)
    # orient deterministically: largest-magnitude entry positive per column
    for i in range(k):
        j = np.abs(q[:, i]).argmax()
        if q[j, i] < 0:
            q[:, i] = -q[:, i]
    t2 = time.perf_counter()
    return q, t1 - t0, t2 - t1


def _dense_generalized_eigs(g: Graph, k: int, b_mode: str):
    lap = g.laplacian_dense()
    if b_mode == "degree":
        b = np.diag(g.degrees())
        vals, vecs = scipy.linalg.eigh(lap, b, subset_by_index=(0, k - 1))
    else:
        vals, vecs = scipy.linalg.eigh(lap, subset_by_index=(0, k - 1))
    return np.maximum(vals, 0.0), vecs


@dataclass(frozen=True)
class PartitionTiming:
    t_eigs_s: float
    t_smooth_s: float
    t_total_s: float


def multilevel_spectral_partition(g: Graph, k: int, reduce_opts=None,
                                  cut_type: str = "normalized", seed: int = 0,
                                  ) -> tuple[Partition, CutReport, PartitionTiming]:
    """Reduce, solve the eigenproblem on the hierarchy, cluster, score."""
    from .pipeline import ReduceOptions, spectral_reduce

    if k < 2:
        raise GraphError("need k >= 2 partitions")
    if not is_connected(g):
        raise GraphError("partitioning requires a connected graph")
    opts = reduce_opts if reduce_opts is not None else ReduceOptions()
    t0 = time.perf_counter()
    hier = spectral_reduce(g, opts)
    if hier.depth == 1:
        t1 = time.perf_counter()
        part = direct_spectral_partition(g, k, cut_type=cut_type, seed=seed)
        t2 = time.perf_counter()
        return part, cut_metrics(g, part), PartitionTiming(t2 - t1, 0.0, t2 - t0)
    u, t_eigs, t_smooth = _multilevel_u(hier, k, _b_mode(cut_type),
                                        DEFAULT_THETA, DEFAULT_ITERS)
    part = kmeans(u, k, seed=seed)
    report = cut_metrics(g, part)
    t4 = time.perf_counter()
    return part, report, PartitionTiming(t_eigs, t_smooth, t4 - t0)
