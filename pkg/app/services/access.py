"""
Partial-access facade over a Graph.

A LimitedGraphView is what samplers see of a graph: degrees, random
neighbors and neighbor lists of nodes they already know, metered against a
query budget. It deliberately offers no node count, edge count, node list or
maximum degree.
"""

import logging
from typing import Optional

import numpy as np

from app.errors import BudgetExhausted, IsolatedNode
from app.services.graph import Graph

logger = logging.getLogger(__name__)


class LimitedGraphView:
    """
    Cost model: the first degree query of a node costs 1, a random-neighbor
    draw costs 1, the first neighbor enumeration of u costs d(u). Repeated
    degree queries and enumerations are served from the session cache.
    With ``free_neighbor_degrees`` set, enumerating u also reveals the
    degrees of its neighbors at no extra cost.
    """

    __slots__ = (
        "_graph",
        "_budget",
        "_spent",
        "_known_degree",
        "_enumerated",
        "_free_neighbor_degrees",
    )

    def __init__(
        self,
        graph: Graph,
        budget: Optional[int] = None,
        free_neighbor_degrees: bool = False,
    ):
        if budget is not None and budget < 0:
            raise ValueError("budget must be non-negative")
        self._graph = graph
        self._budget = budget
        self._spent = 0
        self._known_degree: set[int] = set()
        self._enumerated: set[int] = set()
        self._free_neighbor_degrees = free_neighbor_degrees

    @property
    def budget(self) -> Optional[int]:
        return self._budget

    @property
    def spent(self) -> int:
        return self._spent

    @property
    def remaining(self) -> Optional[int]:
        return None if self._budget is None else self._budget - self._spent

    @property
    def free_neighbor_degrees(self) -> bool:
        return self._free_neighbor_degrees

    def name(self, u: int) -> int:
        """External id of a node the caller already holds."""
        return self._graph.label(u)

    def _spend(self, cost: int):
        if self._budget is not None and self._spent + cost > self._budget:
            raise BudgetExhausted(cost, self._budget - self._spent)
        self._spent += cost

    def query_degree(self, u: int) -> int:
        u = int(u)
        degree = self._graph.degree(u)
        if u not in self._known_degree:
            self._spend(1)
            self._known_degree.add(u)
        return degree

    def sample_random_neighbor(self, u: int, rng: np.random.Generator) -> int:
        degree = self._graph.degree(u)
        if degree == 0:
            raise IsolatedNode(f"node {u} has no neighbors")
        self._spend(1)
        return int(self._graph.indices[self._graph.indptr[u] + rng.integers(degree)])

    def query_neighbors(self, u: int) -> np.ndarray:
        u = int(u)
        neighbors = self._graph.neighbors(u)
        if u not in self._enumerated:
            self._spend(neighbors.shape[0])
            self._enumerated.add(u)
            if self._free_neighbor_degrees:
                self._known_degree.update(neighbors.tolist())
        return neighbors
