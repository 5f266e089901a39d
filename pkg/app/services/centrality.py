"""
Exact node-ranking measures used as top-k ground truth, and the walk
visit-frequency ranking they are compared against.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path

from app.errors import EmptyGraph, EmptyWalk, NonConvergence
from app.services.graph import Graph
from app.services.walkers import Walk

logger = logging.getLogger(__name__)

# sources handled per sparse product in betweenness / closeness
SOURCE_BLOCK = 128


@dataclass(frozen=True, eq=False)
class RankedNodes:
    """
    Scores for a set of nodes. ``ordering`` sorts by descending score with
    ties broken by ascending node id.
    """

    nodes: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        if self.nodes.shape != self.scores.shape:
            raise ValueError("nodes and scores must be aligned")

    @property
    def ordering(self) -> np.ndarray:
        return self.nodes[np.lexsort((self.nodes, -self.scores))]

    def top(self, k: int) -> list[int]:
        return self.ordering[:k].tolist()

    def score_of(self, node: int) -> float:
        (position,) = np.flatnonzero(self.nodes == node)
        return float(self.scores[position])

    def to_record(self) -> dict:
        return {
            "scores": dict(zip(self.nodes.tolist(), self.scores.tolist())),
            "ordering": self.ordering.tolist(),
        }


def _dense_ranking(scores: np.ndarray) -> RankedNodes:
    return RankedNodes(np.arange(scores.shape[0], dtype=np.int64), scores)


def betweenness(g: Graph) -> RankedNodes:
    """
    Brandes accumulation run level-synchronously: a block of BFS sources
    advances one level per sparse product, shortest-path counts ride along
    the same products, and dependencies flow back level by level. Each
    unordered pair is counted once; no normalization.
    """
    n = g.node_count
    if n == 0:
        raise EmptyGraph("betweenness of an empty graph")
    A = g.to_scipy()
    totals = np.zeros(n, dtype=np.float64)

    for first in range(0, n, SOURCE_BLOCK):
        sources = np.arange(first, min(first + SOURCE_BLOCK, n))
        cols = np.arange(sources.shape[0])
        sigma = np.zeros((n, sources.shape[0]), dtype=np.float64)
        sigma[sources, cols] = 1.0
        seen = sigma > 0
        levels = [seen.copy()]
        frontier = sigma.copy()
        while True:
            reached = A @ frontier
            new = (reached > 0) & ~seen
            if not new.any():
                break
            sigma[new] = reached[new]
            seen |= new
            levels.append(new)
            frontier = np.where(new, reached, 0.0)

        delta = np.zeros_like(sigma)
        safe_sigma = np.where(seen, sigma, 1.0)
        for depth in range(len(levels) - 1, 0, -1):
            carry = np.where(levels[depth], (1.0 + delta) / safe_sigma, 0.0)
            delta += np.where(levels[depth - 1], sigma * (A @ carry), 0.0)
        delta[sources, cols] = 0.0
        totals += delta.sum(axis=1)

    return _dense_ranking(totals / 2.0)


def closeness(g: Graph) -> RankedNodes:
    """
    (r-1)/sum(distances) within each node's component, scaled by
    (r-1)/(n-1) where r counts the nodes it reaches (itself included).
    """
    n = g.node_count
    if n == 0:
        raise EmptyGraph("closeness of an empty graph")
    if n == 1:
        return _dense_ranking(np.zeros(1))
    A = g.to_scipy()
    scores = np.zeros(n, dtype=np.float64)
    for first in range(0, n, SOURCE_BLOCK):
        sources = np.arange(first, min(first + SOURCE_BLOCK, n))
        dist = shortest_path(A, directed=False, unweighted=True, indices=sources)
        finite = np.isfinite(dist)
        reach = finite.sum(axis=1) - 1
        total = np.where(finite, dist, 0.0).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            block = np.where(total > 0, reach / total * reach / (n - 1), 0.0)
        scores[sources] = block
    return _dense_ranking(scores)


def pagerank(
    g: Graph,
    damping: float = 0.85,
    tol: float = 1e-9,
    max_iter: int = 10_000,
) -> RankedNodes:
    """
    Power iteration on PR(v) = (1-damping)/n + damping * sum PR(u)/d(u).
    Mass sitting on isolated nodes is spread uniformly. Stops once the L1
    change drops below ``tol``.
    """
    n = g.node_count
    if n == 0:
        raise EmptyGraph("pagerank of an empty graph")
    A = g.to_scipy()
    degrees = g.degrees.astype(np.float64)
    dangling = degrees == 0
    inv_degree = np.divide(1.0, degrees, out=np.zeros(n), where=~dangling)

    rank = np.full(n, 1.0 / n)
    for iteration in range(1, max_iter + 1):
        spread = A.T @ (rank * inv_degree)
        nxt = (1.0 - damping) / n + damping * (spread + rank[dangling].sum() / n)
        nxt /= nxt.sum()
        change = float(np.abs(nxt - rank).sum())
        rank = nxt
        if change < tol:
            logger.debug("PageRank converged", extra={"iterations": iteration, "nodes": n})
            return _dense_ranking(rank)
    raise NonConvergence(f"pagerank did not converge in {max_iter} iterations")


def visit_frequency_ranking(walks: Sequence[Walk]) -> RankedNodes:
    """Visit counts pooled over all walks; only visited nodes are ranked."""
    if not walks:
        raise EmptyWalk("no walks to rank from")
    nodes, counts = np.unique(np.concatenate([w.nodes for w in walks]), return_counts=True)
    return RankedNodes(nodes.astype(np.int64), counts.astype(np.float64))


MEASURES = {
    "betweenness": betweenness,
    "closeness": closeness,
    "pagerank": pagerank,
}
