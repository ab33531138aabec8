"""Undirected weighted graph type, Laplacian operations and file I/O.

The ``Graph`` value is the single source of truth for nodes, edges and
weights everywhere in this package.  It is canonical (sorted, deduplicated
edge list with ``p < q``) and immutable after construction, so equal graphs
compare equal and instances can be shared freely across threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc


class GraphError(ValueError):
    """Invalid graph construction or malformed graph file."""


@dataclass(frozen=True)
class Graph:
    """Canonical undirected weighted graph.

    ``edges`` is an ``(m, 2)`` int array with ``p < q`` per row, sorted
    lexicographically and duplicate-free; ``weights`` the matching strictly
    positive edge weights.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------
    @staticmethod
    def from_edges(n: int, edges, weights=None, merge_duplicates: bool = True) -> "Graph":
        """Build a canonical graph from an edge list.

        Duplicate edges (in either orientation) are merged by summing their
        weights.  Self-loops and non-positive weights are rejected.
        """
        if n <= 0:
            raise GraphError("graph must have at least one node")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if weights is None:
            w = np.ones(len(e), dtype=np.float64)
        else:
            w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if len(w) != len(e):
            raise GraphError("edge/weight length mismatch")
        if len(e):
            if e.min() < 0 or e.max() >= n:
                raise GraphError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise GraphError("self-loops are not allowed")
            if np.any(w <= 0) or not np.all(np.isfinite(w)):
                raise GraphError("edge weights must be finite and strictly positive")
            lo = np.minimum(e[:, 0], e[:, 1])
            hi = np.maximum(e[:, 0], e[:, 1])
            key = lo * n + hi
            order = np.argsort(key, kind="stable")
            key, lo, hi, w = key[order], lo[order], hi[order], w[order]
            uniq, inv = np.unique(key, return_inverse=True)
            if len(uniq) != len(key):
                if not merge_duplicates:
                    raise GraphError("duplicate edges in input")
                wm = np.zeros(len(uniq))
                np.add.at(wm, inv, w)
                w = wm
                lo = uniq // n
                hi = uniq % n
            e = np.column_stack([lo, hi])
        else:
            e = np.zeros((0, 2), dtype=np.int64)
            w = np.zeros(0, dtype=np.float64)
        e.setflags(write=False)
        w.setflags(write=False)
        return Graph(n=int(n), edges=e, weights=w)

    def with_weights(self, weights) -> "Graph":
        """Same topology with replaced (strictly positive) weights."""
        return Graph.from_edges(self.n, self.edges, weights, merge_duplicates=False)

    # ------------------------------------------------------------------
    # derived structure (cached)
    # ------------------------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency matrix (CSR)."""
        if "adj" not in self._cache:
            p, q = self.edges[:, 0], self.edges[:, 1]
            a = sp.coo_matrix(
                (np.concatenate([self.weights, self.weights]),
                 (np.concatenate([p, q]), np.concatenate([q, p]))),
                shape=(self.n, self.n),
            ).tocsr()
            self._cache["adj"] = a
        return self._cache["adj"]

    def degrees(self) -> np.ndarray:
        """Weighted degree vector d(p) = sum of incident edge weights."""
        if "deg" not in self._cache:
            d = np.zeros(self.n)
            np.add.at(d, self.edges[:, 0], self.weights)
            np.add.at(d, self.edges[:, 1], self.weights)
            d.setflags(write=False)
            self._cache["deg"] = d
        return self._cache["deg"]

    def laplacian(self) -> sp.csr_matrix:
        """Graph Laplacian D - A as a sparse CSR matrix."""
        if "lap" not in self._cache:
            a = self.adjacency()
            lap = sp.diags(self.degrees()) - a
            self._cache["lap"] = lap.tocsr()
        return self._cache["lap"]

    def laplacian_dense(self) -> np.ndarray:
        return self.laplacian().toarray()

    def neighbor_lists(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR-style neighbor structure (indptr, indices, weights)."""
        a = self.adjacency()
        return a.indptr, a.indices, a.data

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.weights, other.weights)
        )


# ----------------------------------------------------------------------
# basic operations
# ----------------------------------------------------------------------
def quadratic_form(g: Graph, x) -> float:
    """Laplacian quadratic form sum_{(p,q) in E} w(p,q) (x(p) - x(q))^2."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != g.n:
        raise GraphError(f"vector length {x.shape[0]} != node count {g.n}")
    d = x[g.edges[:, 0]] - x[g.edges[:, 1]]
    return float(np.dot(g.weights, d * d))


def density(g: Graph) -> float:
    """Edge-to-node ratio |E| / |V|."""
    return g.m / g.n


def connected_components(g: Graph) -> np.ndarray:
    """Per-node component labels in 0..c-1."""
    if g.m == 0:
        return np.arange(g.n)
    _, labels = _cc(g.adjacency(), directed=False)
    return labels


def is_connected(g: Graph) -> bool:
    return g.n == 1 or (g.m > 0 and connected_components(g).max() == 0)


def largest_component(g: Graph) -> tuple[Graph, np.ndarray]:
    """Subgraph induced by the largest connected component.

    Returns the subgraph and the original node ids of its nodes.
    """
    labels = connected_components(g)
    counts = np.bincount(labels)
    keep = labels == counts.argmax()
    nodes = np.flatnonzero(keep)
    remap = -np.ones(g.n, dtype=np.int64)
    remap[nodes] = np.arange(len(nodes))
    mask = keep[g.edges[:, 0]] & keep[g.edges[:, 1]]
    sub = Graph.from_edges(len(nodes), remap[g.edges[mask]], g.weights[mask])
    return sub, nodes


# ----------------------------------------------------------------------
# file I/O
# ----------------------------------------------------------------------
FORMATS = ("matrix-market", "metis", "edge-list")


def load_graph(path, format: str) -> Graph:
    """Load a graph file; node ids are 1-based on disk, 0-based in memory."""
    if format not in FORMATS:
        raise GraphError(f"unknown format {format!r}; expected one of {FORMATS}")
    with open(path, "r") as f:
        text = f.read()
    if format == "matrix-market":
        return _parse_matrix_market(text)
    if format == "metis":
        return _parse_metis(text)
    return _parse_edge_list(text)


def save_graph(g: Graph, path, format: str) -> None:
    if format not in FORMATS:
        raise GraphError(f"unknown format {format!r}; expected one of {FORMATS}")
    with open(path, "w") as f:
        if format == "matrix-market":
            f.write("%%MatrixMarket matrix coordinate real symmetric\n")
            f.write(f"{g.n} {g.n} {g.m}\n")
            for (p, q), w in zip(g.edges, g.weights):
                f.write(f"{q + 1} {p + 1} {w:.17g}\n")
        elif format == "metis":
            f.write(f"{g.n} {g.m} 001\n")
            indptr, indices, data = g.neighbor_lists()
            for i in range(g.n):
                row = " ".join(
                    f"{j + 1} {w:.17g}"
                    for j, w in zip(indices[indptr[i]:indptr[i + 1]],
                                    data[indptr[i]:indptr[i + 1]])
                )
                f.write(row + "\n")
        else:
            for (p, q), w in zip(g.edges, g.weights):
                f.write(f"{p + 1} {q + 1} {w:.17g}\n")


def _parse_edge_list(text: str) -> Graph:
    rows = []
    for lineno, line in enumerate(io.StringIO(text), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphError(f"line {lineno}: expected 'u v [w]', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise GraphError(f"line {lineno}: {exc}") from exc
        if u < 1 or v < 1:
            raise GraphError(f"line {lineno}: node ids are 1-based")
        rows.append((u - 1, v - 1, w))
    if not rows:
        raise GraphError("empty graph file")
    arr = np.array(rows)
    n = int(arr[:, :2].max()) + 1
    return Graph.from_edges(n, arr[:, :2].astype(np.int64), arr[:, 2])


def _parse_matrix_market(text: str) -> Graph:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("%%MatrixMarket"):
        raise GraphError("missing MatrixMarket header")
    header = lines[0].lower().split()
    if "coordinate" not in header:
        raise GraphError("only coordinate matrices are supported")
    pattern = "pattern" in header
    if "symmetric" not in header and "general" not in header:
        raise GraphError("matrix must be symmetric or general")
    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise GraphError("empty matrix file")
    dims = body[0].split()
    if len(dims) != 3:
        raise GraphError(f"malformed size line {body[0]!r}")
    nrow, ncol, nnz = (int(t) for t in dims)
    if nrow != ncol:
        raise GraphError("matrix must be square")
    if len(body) - 1 != nnz:
        raise GraphError(f"expected {nnz} entries, found {len(body) - 1}")
    rows = []
    for lineno, line in enumerate(body[1:], 2):
        parts = line.split()
        try:
            i, j = int(parts[0]), int(parts[1])
            w = 1.0 if pattern else float(parts[2])
        except (ValueError, IndexError) as exc:
            raise GraphError(f"entry {lineno}: malformed line {line!r}") from exc
        if not (1 <= i <= nrow and 1 <= j <= nrow):
            raise GraphError(f"entry {lineno}: index out of range")
        if i == j:
            continue  # diagonal entries are dropped
        rows.append((i - 1, j - 1, abs(w)))
    if not rows:
        raise GraphError("matrix has no off-diagonal entries")
    arr = np.array(rows)
    if np.any(arr[:, 2] == 0):
        raise GraphError("zero off-diagonal magnitude")
    return Graph.from_edges(nrow, arr[:, :2].astype(np.int64), arr[:, 2])


def _parse_metis(text: str) -> Graph:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("%")]
    if not lines:
        raise GraphError("empty graph file")
    head = lines[0].split()
    if len(head) not in (2, 3, 4):
        raise GraphError(f"malformed METIS header {lines[0]!r}")
    n, m = int(head[0]), int(head[1])
    fmt = head[2] if len(head) >= 3 else "0"
    has_edge_w = fmt.zfill(3)[-1] == "1"
    has_node_w = fmt.zfill(3)[-2] == "1"
    if len(lines) - 1 != n:
        raise GraphError(f"expected {n} adjacency lines, found {len(lines) - 1}")
    rows = []
    for i, line in enumerate(lines[1:]):
        toks = line.split()
        if has_node_w and toks:
            toks = toks[1:]  # node weights are ignored
        step = 2 if has_edge_w else 1
        if len(toks) % step:
            raise GraphError(f"node {i + 1}: odd token count in weighted adjacency")
        for t in range(0, len(toks), step):
            j = int(toks[t]) - 1
            w = float(toks[t + 1]) if has_edge_w else 1.0
            if not (0 <= j < n):
                raise GraphError(f"node {i + 1}: neighbor {j + 1} out of range")
            if j == i:
                raise GraphError(f"node {i + 1}: self-loop")
            if i < j:
                rows.append((i, j, w))
    if not rows:
        raise GraphError("graph has no edges")
    arr = np.array(rows)
    e = Graph.from_edges(n, arr[:, :2].astype(np.int64), arr[:, 2],
                         merge_duplicates=True)
    if e.m != m:
        # headers count each undirected edge once; tolerate mismatch only if
        # duplicates were merged consistently
        if e.m > m:
            raise GraphError(f"header declares {m} edges, file has {e.m}")
    return e
