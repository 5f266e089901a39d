"""
Community detection on walk-induced subgraphs.

Louvain and Clauset-Newman-Moore come from networkx; label propagation is
implemented here because it draws every random choice from the caller's
numpy Generator and needs a sweep cap.
"""

import logging
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from app.errors import EmptyGraph, EmptyWalk
from app.services.access import LimitedGraphView
from app.services.generators import CommunityLabels
from app.services.graph import Graph, induced_subgraph
from app.services.walkers import Walk, simple_random_walk

logger = logging.getLogger(__name__)

LABEL_PROPAGATION_SWEEPS = 100


class Partition(CommunityLabels):
    """Detected communities; same layout as the planted labels."""

    def filtered_count(self, min_size: int = 2) -> int:
        return int(np.count_nonzero(self.sizes() >= min_size))

    def to_record(self) -> dict:
        return {
            "community_count": self.community_count,
            "filtered_count": self.filtered_count(),
            "assignment": self.assignment.tolist(),
        }

    @classmethod
    def from_sets(cls, node_count: int, communities: Iterable[Iterable[int]]) -> "Partition":
        assignment = np.full(node_count, -1, dtype=np.int64)
        for block, members in enumerate(communities):
            assignment[list(members)] = block
        if node_count and assignment.min() < 0:
            raise ValueError("communities do not cover every node")
        return cls.from_assignment(assignment)

    @classmethod
    def single_block(cls, node_count: int) -> "Partition":
        return cls(np.zeros(node_count, dtype=np.int64))


def walk_induced_subgraph(g: Graph, walks: Sequence[Walk]) -> Graph:
    """Subgraph of g on every node any walk visited, with all edges between them."""
    if not walks:
        raise EmptyWalk("no walks to induce a subgraph from")
    visited = np.unique(np.concatenate([w.nodes for w in walks]))
    return induced_subgraph(g, visited)


def planted_seed_walks(
    g: Graph,
    labels: CommunityLabels,
    walk_length: int,
    seeds_min: int,
    seeds_max: int,
    rng: np.random.Generator,
) -> list[Walk]:
    """
    Between seeds_min and seeds_max walks of ``walk_length`` started inside
    every planted community, so each community gets a chance to show up in
    the induced subgraph.
    """
    walks: list[Walk] = []
    for community in range(labels.community_count):
        members = labels.members(community)
        if members.shape[0] == 0:
            continue
        count = int(rng.integers(seeds_min, seeds_max + 1))
        starts = rng.choice(members, size=min(count, members.shape[0]), replace=False)
        for start in starts.tolist():
            if g.degree(start) == 0:
                continue
            view = LimitedGraphView(g)
            walks.append(simple_random_walk(view, start, walk_length, 0, rng))
    return walks


def modularity(g: Graph, p: CommunityLabels, resolution: float = 1.0) -> float:
    """Q = sum_c [e_c/m - resolution * (d_c/2m)^2]."""
    m = g.edge_count
    if m == 0:
        raise EmptyGraph("modularity is undefined without edges")
    assignment = p.assignment
    if assignment.shape[0] != g.node_count:
        raise ValueError("partition does not cover the graph")
    k = p.community_count
    edges = g.edges()
    a, b = assignment[edges[:, 0]], assignment[edges[:, 1]]
    intra = np.bincount(a[a == b], minlength=k)
    degree_sums = np.bincount(assignment, weights=g.degrees, minlength=k)
    return float(intra.sum() / m - resolution * np.square(degree_sums / (2.0 * m)).sum())


def _non_negative(g: Graph, partition: Partition) -> Partition:
    if g.edge_count and modularity(g, partition) < 0:
        return Partition.single_block(g.node_count)
    return partition


def louvain(g: Graph, rng: np.random.Generator, resolution: float = 1.0) -> Partition:
    if g.node_count == 0:
        raise EmptyGraph("louvain needs at least one node")
    seed = int(rng.integers(2**32))
    communities = nx.community.louvain_communities(
        g.to_networkx(), resolution=resolution, seed=seed
    )
    return _non_negative(g, Partition.from_sets(g.node_count, communities))


def greedy_modularity(g: Graph) -> Partition:
    """Clauset-Newman-Moore agglomeration; deterministic."""
    if g.node_count == 0:
        raise EmptyGraph("greedy modularity needs at least one node")
    if g.edge_count == 0:
        return Partition.from_assignment(np.arange(g.node_count))
    communities = nx.community.greedy_modularity_communities(g.to_networkx())
    return _non_negative(g, Partition.from_sets(g.node_count, communities))


def majority_labels(g: Graph, labels: np.ndarray, u: int) -> np.ndarray:
    neighbors = g.neighbors(u)
    if neighbors.shape[0] == 0:
        return labels[u : u + 1]
    values, counts = np.unique(labels[neighbors], return_counts=True)
    return values[counts == counts.max()]


def is_label_fixed_point(g: Graph, labels: np.ndarray) -> bool:
    """True when every node's label is among its neighborhood majorities."""
    return all(labels[u] in majority_labels(g, labels, u) for u in range(g.node_count))


def label_propagation(
    g: Graph, rng: np.random.Generator, max_sweeps: int = LABEL_PROPAGATION_SWEEPS
) -> Partition:
    """
    Asynchronous label propagation. Nodes are visited in a fresh random
    order each sweep and adopt one of their neighborhood's most frequent
    labels, ties broken uniformly at random. Stops once every label is
    among its node's majorities, or after ``max_sweeps`` sweeps.
    """
    n = g.node_count
    if n == 0:
        raise EmptyGraph("label propagation needs at least one node")
    labels = np.arange(n, dtype=np.int64)
    for sweep in range(1, max_sweeps + 1):
        for u in rng.permutation(n).tolist():
            best = majority_labels(g, labels, u)
            labels[u] = best[rng.integers(best.shape[0])]
        if is_label_fixed_point(g, labels):
            break
    else:
        logger.warning("Label propagation hit the sweep cap", extra={"sweeps": max_sweeps})
    logger.debug("Label propagation finished", extra={"sweeps": sweep})
    return Partition.from_assignment(labels)
