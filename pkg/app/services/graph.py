"""
Immutable undirected simple graphs in compressed sparse row form, plus
edgelist ingestion and the canonical writer.
"""

import logging
from array import array
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from app.errors import EmptyGraph, GraphInvariantError, InvalidNode, ParseError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Undirected simple graph. Node ids are 0..node_count-1; ``labels`` maps an
    internal id to the external id it was built from (None means identity).
    """

    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        for name in ("indptr", "indices"):
            arr = getattr(self, name)
            arr.setflags(write=False)
        if self.labels is not None:
            self.labels.setflags(write=False)
        self._check_invariants()

    @classmethod
    def from_csr(
        cls,
        indptr: np.ndarray,
        indices: np.ndarray,
        labels: np.ndarray | None = None,
    ) -> "Graph":
        return cls(
            np.ascontiguousarray(indptr, dtype=np.int64),
            np.ascontiguousarray(indices, dtype=np.int64),
            None if labels is None else np.ascontiguousarray(labels, dtype=np.int64),
        )

    @property
    def node_count(self) -> int:
        return int(self.indptr.shape[0] - 1)

    @property
    def edge_count(self) -> int:
        return int(self.indices.shape[0] // 2)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def average_degree(self) -> float:
        return 2.0 * self.edge_count / self.node_count if self.node_count else 0.0

    def _check(self, u: int) -> int:
        u = int(u)
        if not 0 <= u < self.node_count:
            raise InvalidNode(f"node {u} outside 0..{self.node_count - 1}")
        return u

    def degree(self, u: int) -> int:
        u = self._check(u)
        return int(self.indptr[u + 1] - self.indptr[u])

    def neighbors(self, u: int) -> np.ndarray:
        u = self._check(u)
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        pos = np.searchsorted(row, v)
        return bool(pos < row.shape[0] and row[pos] == v)

    def label(self, u: int) -> int:
        u = self._check(u)
        return u if self.labels is None else int(self.labels[u])

    def external_ids(self) -> np.ndarray:
        if self.labels is None:
            return np.arange(self.node_count, dtype=np.int64)
        return self.labels

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with u < v, sorted lexicographically."""
        src = np.repeat(np.arange(self.node_count, dtype=np.int64), self.degrees)
        keep = src < self.indices
        return np.column_stack((src[keep], self.indices[keep]))

    def to_scipy(self) -> sp.csr_matrix:
        n = self.node_count
        data = np.ones(self.indices.shape[0], dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(n, n))

    def to_networkx(self):
        import networkx as nx

        nx_graph = nx.Graph()
        nx_graph.add_nodes_from(range(self.node_count))
        nx_graph.add_edges_from(self.edges().tolist())
        return nx_graph

    def _check_invariants(self):
        n = self.node_count
        if n < 0 or self.indptr[0] != 0 or self.indptr[-1] != self.indices.shape[0]:
            raise GraphInvariantError("indptr does not frame indices")
        if self.labels is not None and self.labels.shape[0] != n:
            raise GraphInvariantError("labels length differs from node_count")
        if self.indices.shape[0] % 2:
            raise GraphInvariantError("degree sum is odd")
        if self.indices.shape[0] == 0:
            return
        if self.indices.min() < 0 or self.indices.max() >= n:
            raise GraphInvariantError("neighbor id out of range")
        src = np.repeat(np.arange(n, dtype=np.int64), self.degrees)
        if np.any(src == self.indices):
            raise GraphInvariantError("self-loop present")
        keys = src * n + self.indices
        if np.any(np.diff(keys) <= 0):
            raise GraphInvariantError("neighbor rows not strictly increasing")
        reverse = np.sort(self.indices * n + src)
        if not np.array_equal(keys, reverse):
            raise GraphInvariantError("adjacency is not symmetric")


def _from_pairs(
    src: np.ndarray, dst: np.ndarray, node_count: int, labels: np.ndarray | None
) -> Graph:
    keep = src != dst
    src, dst = src[keep], dst[keep]
    n = node_count
    keys = np.unique(np.concatenate((src * n + dst, dst * n + src)))
    rows = keys // n
    indices = keys % n
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return Graph.from_csr(indptr, indices, labels)


def graph_from_pairs(pairs: np.ndarray, node_count: int) -> Graph:
    """
    Build a graph over exactly ``node_count`` nodes from internal-id pairs.

    Unlike build_graph, ids are not compacted, so isolated nodes survive.
    Generators use this.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if node_count < 1:
        raise EmptyGraph("graph needs at least one node")
    if pairs.size and (pairs.min() < 0 or pairs.max() >= node_count):
        raise InvalidNode("pair references a node outside the graph")
    return _from_pairs(pairs[:, 0], pairs[:, 1], node_count, None)


def build_graph(edges: Iterable[Sequence[int]] | np.ndarray) -> Graph:
    """
    Symmetrize, deduplicate and compact an edge list into a Graph.

    Self-loops are dropped before compaction, so a node that only appears in
    self-loops does not survive.
    """
    pairs = np.asarray(
        edges if isinstance(edges, np.ndarray) else list(edges), dtype=np.int64
    ).reshape(-1, 2)
    if pairs.size and pairs.min() < 0:
        raise InvalidNode("node ids must be non-negative")
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    if pairs.shape[0] == 0:
        raise EmptyGraph("edge sequence is empty once self-loops are dropped")

    labels, inverse = np.unique(pairs, return_inverse=True)
    inverse = inverse.reshape(-1, 2)
    n = int(labels.shape[0])
    identity = bool(labels[-1] == n - 1)
    return _from_pairs(
        inverse[:, 0], inverse[:, 1], n, None if identity else labels.astype(np.int64)
    )


def load_edgelist(
    source: BinaryIO,
    skip_comments: bool = True,
    *,
    skip_lines: int = 0,
) -> Graph:
    """
    Parse a SNAP-style edgelist: one ``u v`` pair per line, whitespace or
    comma separated, extra columns ignored. Lines starting with '#' are
    comments when ``skip_comments`` is set. Directed inputs are symmetrized.
    """
    heads = array("q")
    tails = array("q")
    for line_number, raw in enumerate(source, start=1):
        if line_number <= skip_lines:
            continue
        line = raw.strip()
        if not line:
            continue
        if skip_comments and line.startswith(b"#"):
            continue
        parts = line.replace(b",", b" ").split()
        if len(parts) < 2:
            raise ParseError(line_number, raw.decode("utf-8", "replace").rstrip())
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(
                line_number, raw.decode("utf-8", "replace").rstrip(), "non-integer id"
            ) from None
        if u < 0 or v < 0:
            raise ParseError(
                line_number, raw.decode("utf-8", "replace").rstrip(), "negative id"
            )
        heads.append(u)
        tails.append(v)

    pairs = np.column_stack(
        (np.frombuffer(heads, dtype=np.int64), np.frombuffer(tails, dtype=np.int64))
    )
    graph = build_graph(pairs)
    logger.info(
        "Loaded edgelist",
        extra={
            "lines": len(heads),
            "node_count": graph.node_count,
            "edge_count": graph.edge_count,
        },
    )
    return graph


def save_edgelist(g: Graph, sink: BinaryIO, use_labels: bool = False):
    """Canonical form: sorted ``u v`` with u < v, one per line, LF-terminated."""
    edges = g.edges()
    if use_labels and g.labels is not None:
        edges = g.labels[edges]
    np.savetxt(sink, edges, fmt="%d %d", newline="\n")


def induced_subgraph(g: Graph, nodes: Iterable[int] | np.ndarray) -> Graph:
    """
    Subgraph on ``nodes`` with every edge of ``g`` between them. New ids follow
    ascending order of the old ones; labels keep pointing at external ids.
    """
    keep = np.unique(np.asarray(nodes if isinstance(nodes, np.ndarray) else list(nodes), dtype=np.int64))
    if keep.shape[0] == 0:
        raise EmptyGraph("induced subgraph of an empty node set")
    if keep[0] < 0 or keep[-1] >= g.node_count:
        raise InvalidNode("node set references nodes outside the graph")
    sub = g.to_scipy()[keep][:, keep].tocsr()
    sub.sort_indices()
    return Graph.from_csr(sub.indptr, sub.indices, g.external_ids()[keep])


def largest_connected_component(g: Graph) -> Graph:
    if g.node_count == 0:
        raise EmptyGraph("graph has no nodes")
    count, membership = connected_components(g.to_scipy(), directed=False)
    if count == 1:
        return g
    largest = int(np.argmax(np.bincount(membership)))
    nodes = np.flatnonzero(membership == largest)
    logger.debug(
        "Restricted graph to largest component",
        extra={"components": int(count), "kept": int(nodes.shape[0])},
    )
    return induced_subgraph(g, nodes)
