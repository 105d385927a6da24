"""Graph container, edge-list loading, exact betweenness and vertex-diameter
bounds."""

from __future__ import annotations

import gzip
import io
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import (DegenerateGraphError, EmptyGraphError, OracleTimeout,
                     ParseError)

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable CSR graph with dense node ids ``0..n-1``.

    For undirected graphs the backward arrays are the forward arrays.
    ``labels[i]`` is the external id of node ``i``.
    """

    n: int
    directed: bool
    fptr: np.ndarray
    fidx: np.ndarray
    bptr: np.ndarray
    bidx: np.ndarray
    labels: np.ndarray
    n_edges: int = field(default=0)

    @property
    def csr(self):
        return self.fptr, self.fidx, self.bptr, self.bidx

    def out_neighbors(self, v):
        return self.fidx[self.fptr[v]:self.fptr[v + 1]]

    def in_neighbors(self, v):
        return self.bidx[self.bptr[v]:self.bptr[v + 1]]

    def out_degree(self):
        return np.diff(self.fptr)

    def in_degree(self):
        return np.diff(self.bptr)

    @property
    def forward_adj(self):
        return [self.out_neighbors(v) for v in range(self.n)]

    @property
    def backward_adj(self):
        return [self.in_neighbors(v) for v in range(self.n)]

    @classmethod
    def from_edges(cls, edges, directed=False, labels=None, n=None):
        """Build from an ``(m, 2)`` array of dense ids.

        Self-loops are dropped and duplicate edges collapsed.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if n is None:
            n = int(e.max()) + 1 if e.size else 0
        e = e[e[:, 0] != e[:, 1]]
        if not directed:
            e = np.sort(e, axis=1)
        e = np.unique(e, axis=0)
        n_edges = len(e)
        if not directed:
            e = np.concatenate([e, e[:, ::-1]])
        fptr, fidx = _csr(e[:, 0], e[:, 1], n)
        if directed:
            bptr, bidx = _csr(e[:, 1], e[:, 0], n)
        else:
            bptr, bidx = fptr, fidx
        if labels is None:
            labels = np.arange(n, dtype=np.int64)
        return cls(n, directed, fptr, fidx, bptr, bidx,
                   np.asarray(labels), n_edges)

    def to_networkx(self):
        import networkx as nx

        g = nx.DiGraph() if self.directed else nx.Graph()
        g.add_nodes_from(range(self.n))
        for u in range(self.n):
            for w in self.out_neighbors(u):
                g.add_edge(u, int(w))
        return g


def _csr(src, dst, n):
    order = np.lexsort((dst, src))
    src = src[order]
    dst = dst[order]
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(ptr, src + 1, 1)
    np.cumsum(ptr, out=ptr)
    return ptr, np.ascontiguousarray(dst, dtype=np.int64)


def load_edge_list(source, directed=False):
    """Parse a SNAP-style edge list.

    ``source`` is a path (gzip if it ends in ``.gz``), a text/binary stream
    or a ``bytes`` object. Lines
    starting with ``#`` or ``%`` are comments. External ids are remapped to
    dense ids in order of first appearance.
    """
    if isinstance(source, (bytes, bytearray)):
        stream = io.BytesIO(source)
    elif isinstance(source, str) or hasattr(source, "__fspath__"):
        opener = gzip.open if str(source).endswith(".gz") else open
        stream = opener(source, "rb")
    else:
        stream = source
    ids = {}
    labels = []
    src = []
    dst = []
    try:
        for lineno, raw in enumerate(stream, 1):
            line = raw.decode() if isinstance(raw, bytes) else raw
            line = line.strip()
            if not line or line[0] in "#%":
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ParseError(lineno, line, "expected two node ids")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(lineno, line) from None
            if a < 0 or b < 0:
                raise ParseError(lineno, line, "negative node id")
            for x in (a, b):
                if x not in ids:
                    ids[x] = len(labels)
                    labels.append(x)
            src.append(ids[a])
            dst.append(ids[b])
    finally:
        if stream is not source:
            stream.close()
    if not src:
        raise EmptyGraphError("edge list contains no edges")
    edges = np.column_stack([np.array(src, dtype=np.int64),
                             np.array(dst, dtype=np.int64)])
    g = Graph.from_edges(edges, directed=directed,
                         labels=np.array(labels, dtype=np.int64),
                         n=len(labels))
    if g.n_edges == 0:
        raise EmptyGraphError("edge list contains only self-loops")
    return g


def brandes_exact(g, blocks=16, max_seconds=None):
    """Exact betweenness of every node with ordered-pair normalization
    ``1 / (n (n - 1))``.

    Sources are split into ``blocks`` fixed ranges, so the result does not
    depend on the number of threads. ``max_seconds`` bounds the wall time
    (checked between chunks of sources); exceeding it raises
    :class:`OracleTimeout`.
    """
    n = g.n
    if n < 2:
        raise DegenerateGraphError(f"need at least 2 nodes, got {n}")
    blocks = max(1, min(blocks, n))
    acc = np.zeros((blocks, n))
    fptr, fidx, bptr, bidx = g.csr
    if max_seconds is None:
        K.brandes_blocks(fptr, fidx, bptr, bidx, n, 0, n, acc)
    else:
        start = time.monotonic()
        step = max(blocks, 256)
        for lo in range(0, n, step):
            K.brandes_blocks(fptr, fidx, bptr, bidx, n, lo,
                             min(n, lo + step), acc)
            if time.monotonic() - start > max_seconds:
                raise OracleTimeout(
                    f"exact betweenness exceeded {max_seconds}s "
                    f"after {min(n, lo + step)}/{n} sources")
    return acc.sum(axis=0) / (n * (n - 1))


def exact_vertex_diameter(g):
    """Maximum number of nodes on any shortest path (all-pairs BFS)."""
    return int(K.max_hops_all_pairs(g.fptr, g.fidx, g.n)) + 1


def _components(g):
    """Weakly connected component id per node."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    a = csr_matrix((np.ones(len(g.fidx)), g.fidx, g.fptr), shape=(g.n, g.n))
    _, comp = connected_components(a, directed=g.directed, connection="weak")
    return comp


def vertex_diameter_upper_bound(g, pivots=4, rng=None, exact_below=2048,
                                override=None):
    """Upper bound on the vertex diameter.

    Undirected graphs get a certified bound: per connected component,
    ``2 * ecc(p) + 1`` minimized over double-sweep pivots, maximized over
    components. Directed graphs get the heuristic
    ``max_p (forward depth + backward depth) + 1``. Graphs with fewer than
    ``exact_below`` nodes are solved exactly by all-pairs BFS. ``override``
    always wins.
    """
    if override is not None:
        return int(override)
    if g.n < exact_below:
        return exact_vertex_diameter(g)
    rng = np.random.default_rng(rng)
    n = g.n
    dist = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)

    def ecc(ptr, idx, v):
        reached, e, last = K.bfs_depths(ptr, idx, n, v, dist, order)
        nodes = order[:reached].copy()
        depth = dist[nodes].copy()
        dist[nodes] = -1
        return int(e), int(last), nodes, depth

    if g.directed:
        deg = g.out_degree() + g.in_degree()
        cand = [int(np.argmax(deg))]
        cand += [int(v) for v in rng.choice(n, size=min(pivots, n),
                                            replace=False)]
        best = 1
        for p in cand:
            fe = ecc(g.fptr, g.fidx, p)[0]
            be = ecc(g.bptr, g.bidx, p)[0]
            best = max(best, fe + be + 1)
        log.warning("directed vertex-diameter bound %d is a heuristic; "
                    "pass an override for certified runs", best)
        return best

    comp = _components(g)
    sizes = np.bincount(comp)
    bound = 1
    for c in np.flatnonzero(sizes > 1):
        members = np.flatnonzero(comp == c)
        start = int(members[np.argmax(g.out_degree()[members])])
        best = None
        pool = [start] + [int(v) for v in rng.choice(
            members, size=min(pivots, len(members)), replace=False)]
        for p in pool:
            e1, far, _, _ = ecc(g.fptr, g.fidx, p)
            e2, far2, nodes, depth = ecc(g.fptr, g.fidx, far)
            # midpoint of the far-far2 path is usually near the center
            mid = _midpoint(g, far, far2, e2)
            e3 = ecc(g.fptr, g.fidx, mid)[0]
            for e in (e1, e2, e3):
                cur = 2 * e + 1
                best = cur if best is None else min(best, cur)
        bound = max(bound, best)
    return bound


def _midpoint(g, a, b, d):
    n = g.n
    dist = np.full(n, -1, dtype=np.int64)
    sigma = np.zeros(n)
    order = np.empty(n, dtype=np.int64)
    K.bfs_count(g.fptr, g.fidx, n, b, dist, sigma, order)
    x = a
    for _ in range(d // 2):
        for w in g.out_neighbors(x):
            if dist[w] == dist[x] - 1:
                x = int(w)
                break
    return x


def write_centrality_csv(path_or_stream, g, values, header="node,bc"):
    """Write ``node,value`` rows ordered by external id."""
    order = np.argsort(g.labels, kind="stable")
    lines = [header]
    lines += [f"{g.labels[i]},{values[i]:.12g}" for i in order]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        with open(path_or_stream, "w") as fh:
            fh.write(text)
