"""Phase A: spectrum-preserving node aggregation.

Gauss-Seidel-smoothed test vectors embed every node in a K-dimensional
space; pairs of nodes whose embedding rows are highly correlated (large
spectral affinity) get merged.  The resulting fine-to-coarse mapping
contracts the graph so that the coarse Laplacian is exactly the 0/1
triple product of the fine one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from .graph import Graph, GraphError, is_connected

DEFAULT_TEST_VECTORS = 8
DEFAULT_GS_SWEEPS = 5


@dataclass(frozen=True)
class TestVectors:
    """K Gauss-Seidel-smoothed vectors, each orthogonal to the all-one vector."""

    __test__ = False  # not a pytest test class despite the name

    X: np.ndarray  # (n, K)
    sweeps: int

    @property
    def K(self) -> int:
        return self.X.shape[1]

    @property
    def n(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class MappingOperator:
    """Fine-to-coarse aggregation map: fine node i belongs to coarse node
    ``cluster_of[i]``.  Encodes the 0/1 aggregation matrix and (as its
    transpose) the piecewise-constant lifting."""

    cluster_of: np.ndarray
    n_coarse: int

    def __post_init__(self):
        c = np.asarray(self.cluster_of)
        if c.min(initial=0) < 0 or (len(c) and c.max() >= self.n_coarse):
            raise GraphError("cluster ids out of range")
        if len(np.unique(c)) != self.n_coarse:
            raise GraphError("every coarse id needs at least one fine preimage")

    @property
    def n_fine(self) -> int:
        return len(self.cluster_of)

    def lift(self, y: np.ndarray) -> np.ndarray:
        """Coarse-to-fine: copy each cluster value to its members."""
        return np.asarray(y)[self.cluster_of]

    def project_sum(self, x: np.ndarray) -> np.ndarray:
        """Fine-to-coarse 0/1 sum (the aggregation matrix applied to x)."""
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros((self.n_coarse,) + x.shape[1:])
        np.add.at(out, self.cluster_of, x)
        return out

    def project_mean(self, x: np.ndarray) -> np.ndarray:
        sizes = np.bincount(self.cluster_of, minlength=self.n_coarse).astype(float)
        s = self.project_sum(x)
        return s / sizes.reshape((-1,) + (1,) * (s.ndim - 1))

    def to_matrix(self) -> sp.csr_matrix:
        """The 0/1 fine-to-coarse matrix (n_coarse x n_fine)."""
        n = self.n_fine
        return sp.csr_matrix(
            (np.ones(n), (self.cluster_of, np.arange(n))),
            shape=(self.n_coarse, n),
        )

    def compose(self, coarser: "MappingOperator") -> "MappingOperator":
        """Map through this operator, then through ``coarser``."""
        if coarser.n_fine != self.n_coarse:
            raise GraphError("mapping shapes do not compose")
        return MappingOperator(coarser.cluster_of[self.cluster_of], coarser.n_coarse)

    @staticmethod
    def identity(n: int) -> "MappingOperator":
        return MappingOperator(np.arange(n), n)

    def save(self, path) -> None:
        np.savetxt(path, self.cluster_of, fmt="%d")

    @staticmethod
    def load(path) -> "MappingOperator":
        c = np.loadtxt(path, dtype=np.int64).reshape(-1)
        return MappingOperator(c, int(c.max()) + 1)


# ----------------------------------------------------------------------
# test vectors and affinity
# ----------------------------------------------------------------------
def gs_test_vectors(g: Graph, K: int = DEFAULT_TEST_VECTORS,
                    sweeps: int = DEFAULT_GS_SWEEPS, seed: int = 0) -> TestVectors:
    """Smooth K seeded random vectors with forward Gauss-Seidel on L x = 0."""
    if K < 1:
        raise GraphError("need at least one test vector")
    if sweeps < 1:
        raise GraphError("need at least one Gauss-Seidel sweep")
    if not is_connected(g):
        raise GraphError("test vectors require a connected graph")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-0.5, 0.5, size=(g.n, K))
    x -= x.mean(axis=0)
    if g.n == 1:
        return TestVectors(X=x, sweeps=sweeps)
    a = g.adjacency().tocsr()
    # forward GS on (D - A) x = 0:  (D - tril(A)) x_new = triu(A) x_old
    lower = sp.diags(g.degrees()) - sp.tril(a, k=-1)
    upper = sp.triu(a, k=1).tocsr()
    lower = lower.tocsr()
    for _ in range(sweeps):
        x = spsolve_triangular(lower, upper @ x, lower=True)
    x -= x.mean(axis=0)
    return TestVectors(X=np.ascontiguousarray(x), sweeps=sweeps)


def node_affinity(tv: TestVectors, p: int, q: int) -> float:
    """Cauchy-Schwarz-normalized squared inner product of two embedding rows."""
    xp, xq = tv.X[p], tv.X[q]
    npp = float(xp @ xp)
    nqq = float(xq @ xq)
    if npp == 0.0 or nqq == 0.0:
        raise GraphError(f"affinity undefined: zero embedding row for node {p if npp == 0 else q}")
    return float((xp @ xq) ** 2 / (npp * nqq))


def _edge_affinities(tv: TestVectors, edges: np.ndarray) -> np.ndarray:
    x = tv.X
    xp, xq = x[edges[:, 0]], x[edges[:, 1]]
    num = np.einsum("ij,ij->i", xp, xq) ** 2
    den = np.einsum("ij,ij->i", xp, xp) * np.einsum("ij,ij->i", xq, xq)
    out = np.zeros(len(edges))
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out


# ----------------------------------------------------------------------
# aggregation
# ----------------------------------------------------------------------
def aggregate_nodes(g: Graph, tv: TestVectors, target_ratio: float) -> MappingOperator:
    """Greedy affinity-driven aggregation to roughly n / target_ratio clusters.

    Clusters start as singletons; passes merge each (not yet merged) cluster
    into its highest-affinity neighboring cluster, capping cluster size so
    no megacluster forms.  Every produced cluster induces a connected
    subgraph of g.
    """
    if target_ratio < 1:
        raise GraphError("target_ratio must be >= 1")
    if not is_connected(g):
        raise GraphError("aggregation requires a connected graph")
    n = g.n
    if target_ratio == 1:
        return MappingOperator.identity(n)
    target = int(round(n / target_ratio))
    if target < 2:
        target = 2  # clamp: never aggregate below 2 coarse nodes
    cap = ceil(2 * target_ratio)

    root_of = np.arange(n)  # fine node -> current cluster root
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    size = np.ones(n, dtype=np.int64)
    xsum = tv.X.copy()  # per-cluster summed embedding rows
    count = n
    indptr, indices, _ = g.neighbor_lists()
    wdeg = g.degrees()

    while count > target:
        roots = np.fromiter(members.keys(), dtype=np.int64)
        cdeg = np.zeros(n)
        np.add.at(cdeg, root_of, wdeg)
        order = roots[np.lexsort((roots, cdeg[roots]))]
        merged: set[int] = set()
        merged_any = False
        for c in order:
            if count <= target:
                break
            if c in merged or c not in members:
                continue
            # candidate neighbor clusters reachable by an edge from cluster c
            best_aff, best_d = 0.0, -1
            xc = xsum[c] / size[c]
            ncc = float(xc @ xc)
            seen: set[int] = set()
            for i in members[c]:
                for j in indices[indptr[i]:indptr[i + 1]]:
                    d = root_of[j]
                    if d == c or d in seen:
                        continue
                    seen.add(d)
                    if size[c] + size[d] > cap:
                        continue
                    xd = xsum[d] / size[d]
                    ndd = float(xd @ xd)
                    if ncc == 0.0 or ndd == 0.0:
                        continue
                    dot = float(xc @ xd)
                    if dot <= 0.0:
                        # anti-correlated embeddings mark opposite clusters
                        # (mean projection makes rows across a balanced split
                        # anti-proportional), so never merge across them
                        continue
                    aff = dot ** 2 / (ncc * ndd)
                    if aff > best_aff + 1e-15 or (
                        abs(aff - best_aff) <= 1e-15 and 0 <= best_d and d < best_d
                    ):
                        best_aff, best_d = aff, d
            if best_d < 0 or best_aff <= 0.0:
                continue  # zero-affinity cluster stays as is
            # merge into the smaller root id for determinism
            root, other = (c, best_d) if c < best_d else (best_d, c)
            for i in members[other]:
                root_of[i] = root
            members[root].extend(members.pop(other))
            size[root] += size[other]
            xsum[root] = xsum[root] + xsum[other]
            merged.add(root)
            merged.add(other)
            merged_any = True
            count -= 1
        if not merged_any:
            break  # stall: no admissible merge left

    _, labels = np.unique(root_of, return_inverse=True)
    return MappingOperator(labels, int(labels.max()) + 1)


def reduce_graph(g: Graph, h: MappingOperator) -> Graph:
    """Contract g along the mapping; coarse Laplacian equals the 0/1 triple
    product of the fine Laplacian.  Intra-cluster edges vanish."""
    if h.n_fine != g.n:
        raise GraphError("mapping size does not match graph")
    cp = h.cluster_of[g.edges[:, 0]]
    cq = h.cluster_of[g.edges[:, 1]]
    keep = cp != cq
    if not np.any(keep):
        return Graph.from_edges(h.n_coarse, np.zeros((0, 2), dtype=np.int64), [])
    return Graph.from_edges(
        h.n_coarse,
        np.column_stack([cp[keep], cq[keep]]),
        g.weights[keep],
    )
