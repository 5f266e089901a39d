"""
Random-walk samplers over a LimitedGraphView plus the uniform node-list
baseline, and the dense transition-matrix oracle used to check them.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from app.errors import DMaxTooSmall, IsolatedNode, NonReturning
from app.services.access import LimitedGraphView
from app.services.graph import Graph

logger = logging.getLogger(__name__)

Sampler = Literal["srw", "mh", "max_degree", "weighted"]
RngLike = np.random.Generator | int | None

RETURN_CAP_FACTOR = 200


@dataclass(frozen=True, eq=False)
class Walk:
    """Retained positions of a walk: ``length`` transitions, ``length + 1`` nodes."""

    nodes: np.ndarray
    degrees: np.ndarray
    start: int
    rng_seed: Optional[int]
    burn_in_dropped: int
    sampler: str
    budget_spent: int = 0

    @property
    def length(self) -> int:
        return int(self.nodes.shape[0] - 1)

    @property
    def steps(self) -> list[tuple[int, int]]:
        return list(zip(self.nodes.tolist(), self.degrees.tolist()))

    def to_record(self) -> dict:
        return {
            "start": self.start,
            "seed": self.rng_seed,
            "sampler": self.sampler,
            "burn_in_dropped": self.burn_in_dropped,
            "budget_spent": self.budget_spent,
            "steps": [[n, d] for n, d in self.steps],
        }

    @classmethod
    def from_record(cls, record: dict) -> "Walk":
        steps = np.asarray(record["steps"], dtype=np.int64).reshape(-1, 2)
        return cls(
            nodes=steps[:, 0].copy(),
            degrees=steps[:, 1].copy(),
            start=int(record["start"]),
            rng_seed=record.get("seed"),
            burn_in_dropped=int(record.get("burn_in_dropped", 0)),
            sampler=record.get("sampler", "srw"),
            budget_spent=int(record.get("budget_spent", 0)),
        )


@dataclass(frozen=True, eq=False)
class ReturnRecord:
    source: int
    source_weight: float
    return_times: np.ndarray
    degrees: np.ndarray
    # w(v) of every visited position, aligned with degrees
    weights: np.ndarray
    rng_seed: Optional[int] = None
    budget_spent: int = 0
    # visited positions, aligned with degrees
    nodes: Optional[np.ndarray] = None

    @property
    def k(self) -> int:
        return int(self.return_times.shape[0])

    @property
    def total_time(self) -> int:
        return int(self.return_times.sum())


def resolve_rng(rng: RngLike) -> tuple[np.random.Generator, Optional[int]]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), rng


def _walk(
    view: LimitedGraphView,
    start: int,
    length: int,
    burn_in: int,
    seed: Optional[int],
    sampler: str,
    step: Callable[[int, int], tuple[int, int]],
) -> Walk:
    if length < 0 or burn_in < 0:
        raise ValueError("length and burn_in must be non-negative")
    start = int(start)
    degree = view.query_degree(start)
    if degree == 0:
        raise IsolatedNode(f"walk cannot leave isolated node {start}")

    nodes = np.empty(length + 1, dtype=np.int64)
    degrees = np.empty(length + 1, dtype=np.int64)
    current = start
    for position in range(burn_in + length + 1):
        if position:
            current, degree = step(current, degree)
        if position >= burn_in:
            nodes[position - burn_in] = current
            degrees[position - burn_in] = degree

    return Walk(
        nodes=nodes,
        degrees=degrees,
        start=start,
        rng_seed=seed,
        burn_in_dropped=burn_in,
        sampler=sampler,
        budget_spent=view.spent,
    )


def simple_random_walk(
    view: LimitedGraphView,
    start: int,
    length: int,
    burn_in: int = 0,
    rng: RngLike = None,
) -> Walk:
    rng, seed = resolve_rng(rng)

    def step(u: int, du: int) -> tuple[int, int]:
        v = view.sample_random_neighbor(u, rng)
        return v, view.query_degree(v)

    return _walk(view, start, length, burn_in, seed, "srw", step)


def mh_walk(
    view: LimitedGraphView,
    start: int,
    length: int,
    burn_in: int = 0,
    rng: RngLike = None,
) -> Walk:
    """
    Metropolis-Hastings walk with a uniform target: propose a uniform
    neighbor v, accept with probability min(1, d(u)/d(v)), else stay.
    """
    rng, seed = resolve_rng(rng)

    def step(u: int, du: int) -> tuple[int, int]:
        neighbors = view.query_neighbors(u)
        v = int(neighbors[rng.integers(du)])
        dv = view.query_degree(v)
        if dv > du and rng.random() * dv >= du:
            return u, du
        return v, dv

    return _walk(view, start, length, burn_in, seed, "mh", step)


def max_degree_walk(
    view: LimitedGraphView,
    start: int,
    length: int,
    burn_in: int,
    d_max: int,
    rng: RngLike = None,
) -> Walk:
    """Each neighbor w.p. 1/d_max, stay w.p. (d_max - d(u)) / d_max."""
    rng, seed = resolve_rng(rng)
    if view.query_degree(int(start)) > d_max:
        raise DMaxTooSmall(f"start degree exceeds d_max={d_max}")

    def step(u: int, du: int) -> tuple[int, int]:
        if rng.random() * d_max >= du:
            return u, du
        v = view.sample_random_neighbor(u, rng)
        dv = view.query_degree(v)
        if dv > d_max:
            raise DMaxTooSmall(f"node {v} has degree {dv} > d_max={d_max}")
        return v, dv

    return _walk(view, start, length, burn_in, seed, "max_degree", step)


def weighted_return_walk(
    view: LimitedGraphView,
    start: int,
    k_returns: int,
    rng: RngLike = None,
    max_steps: Optional[int] = None,
) -> ReturnRecord:
    """
    Walk with edge weights w(u,v) = 1/d(u) + 1/d(v) until it has returned
    to ``start`` k times. The step cap is RETURN_CAP_FACTOR * k * (unique
    nodes seen so far) unless ``max_steps`` overrides it.
    """
    if k_returns < 1:
        raise ValueError("k_returns must be at least 1")
    rng, seed = resolve_rng(rng)
    start = int(start)
    if view.query_degree(start) == 0:
        raise IsolatedNode(f"walk cannot leave isolated node {start}")

    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def transitions(u: int) -> tuple[np.ndarray, np.ndarray]:
        if u not in cache:
            neighbors = view.query_neighbors(u)
            du = view.query_degree(u)
            dv = np.fromiter(
                (view.query_degree(v) for v in neighbors.tolist()),
                dtype=np.float64,
                count=neighbors.shape[0],
            )
            cache[u] = (neighbors, np.cumsum(1.0 / du + 1.0 / dv))
        return cache[u]

    source_weight = float(transitions(start)[1][-1])
    return_times: list[int] = []
    nodes: list[int] = []
    degrees: list[int] = []
    weights: list[float] = []
    visited = {start}
    current = start
    since_return = 0
    steps = 0
    while len(return_times) < k_returns:
        neighbors, cumulative = transitions(current)
        pick = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
        current = int(neighbors[min(pick, neighbors.shape[0] - 1)])
        steps += 1
        since_return += 1
        visited.add(current)
        nodes.append(current)
        degrees.append(view.query_degree(current))
        weights.append(float(transitions(current)[1][-1]))
        if current == start:
            return_times.append(since_return)
            since_return = 0
        cap = max_steps if max_steps is not None else RETURN_CAP_FACTOR * k_returns * len(visited)
        if steps > cap and len(return_times) < k_returns:
            raise NonReturning(
                f"{len(return_times)} of {k_returns} returns after {steps} steps"
            )

    return ReturnRecord(
        source=start,
        source_weight=source_weight,
        return_times=np.asarray(return_times, dtype=np.int64),
        degrees=np.asarray(degrees, dtype=np.int64),
        weights=np.asarray(weights, dtype=np.float64),
        rng_seed=seed,
        budget_spent=view.spent,
        nodes=np.asarray(nodes, dtype=np.int64),
    )


def uniform_node_sample(g: Graph, count: int, rng: RngLike = None) -> np.ndarray:
    """I.i.d. uniform draws from the node list, with replacement."""
    if count < 0:
        raise ValueError("count must be non-negative")
    rng, _ = resolve_rng(rng)
    return rng.integers(0, g.node_count, size=count, dtype=np.int64)


def transition_matrix(g: Graph, sampler: Sampler, d_max: Optional[int] = None) -> np.ndarray:
    """Dense transition matrix of a sampler; meant for small graphs only."""
    n = g.node_count
    degrees = g.degrees.astype(np.float64)
    edges = g.edges()
    u, v = np.concatenate((edges[:, 0], edges[:, 1])), np.concatenate((edges[:, 1], edges[:, 0]))
    P = np.zeros((n, n), dtype=np.float64)
    match sampler:
        case "srw":
            P[u, v] = 1.0 / degrees[u]
        case "mh":
            P[u, v] = 1.0 / np.maximum(degrees[u], degrees[v])
        case "max_degree":
            top = float(d_max if d_max is not None else degrees.max())
            if degrees.max() > top:
                raise DMaxTooSmall(f"max degree {int(degrees.max())} > d_max={d_max}")
            P[u, v] = 1.0 / top
        case "weighted":
            w = 1.0 / degrees[u] + 1.0 / degrees[v]
            P[u, v] = w
            totals = P.sum(axis=1)
            P[totals > 0] /= totals[totals > 0, None]
        case _:
            raise ValueError(f"unknown sampler {sampler}")
    P[np.arange(n), np.arange(n)] += 1.0 - P.sum(axis=1)
    return P


def stationary_distribution(P: np.ndarray, tol: float = 1e-14, max_squarings: int = 64) -> np.ndarray:
    """
    Power iteration on the lazy chain (P + I)/2, which shares P's stationary
    distribution but converges on periodic (bipartite) graphs too. The
    power is doubled each round by squaring.
    """
    n = P.shape[0]
    Q = 0.5 * (P + np.eye(n))
    x = np.full(n, 1.0 / n)
    for _ in range(max_squarings):
        Q = Q @ Q
        nxt = x @ Q
        nxt /= nxt.sum()
        if np.abs(nxt - x).sum() < tol:
            return nxt
        x = nxt
    return x
