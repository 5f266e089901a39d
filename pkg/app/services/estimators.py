"""
Graph-size and edge-count estimators: Chapman capture-recapture over two
samples, the average-degree edge estimate and the return-time estimate,
plus the end-to-end per-method pipelines.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from app.errors import CollisionFree, EmptySample, IsolatedNode, NonReturning
from app.models import SizeEstimate
from app.services.access import LimitedGraphView
from app.services.graph import Graph
from app.services.seeding import make_rng, mix_seed
from app.services.walkers import (
    ReturnRecord,
    max_degree_walk,
    mh_walk,
    simple_random_walk,
    uniform_node_sample,
    weighted_return_walk,
)

logger = logging.getLogger(__name__)

SizeMethod = Literal["uniform", "mh", "max_degree", "return_walk", "srw"]
SIZE_METHODS: tuple[str, ...] = ("uniform", "mh", "max_degree", "return_walk", "srw")

RETURN_START_CANDIDATES = 10
# walk steps per recorded capture-recapture position
WALK_THINNING = 20


@dataclass(frozen=True, eq=False)
class SampleSet:
    nodes: np.ndarray
    degrees: np.ndarray
    method: str

    def __post_init__(self):
        if self.nodes.shape[0] != self.degrees.shape[0]:
            raise ValueError("nodes and degrees must be aligned")

    @property
    def distinct(self) -> np.ndarray:
        return np.unique(self.nodes)


def _chapman(s1: SampleSet, s2: SampleSet) -> tuple[float, int, int, int]:
    a, b = s1.distinct, s2.distinct
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptySample("capture-recapture needs two non-empty samples")
    common = int(np.intersect1d(a, b, assume_unique=True).shape[0])
    if common == 0:
        raise CollisionFree(f"samples of {a.shape[0]} and {b.shape[0]} nodes share none")
    n_hat = (a.shape[0] + 1) * (b.shape[0] + 1) / common - 1
    return float(n_hat), int(a.shape[0]), int(b.shape[0]), common


def chapman_estimate(s1: SampleSet, s2: SampleSet) -> float:
    """N = (|S1|+1)(|S2|+1)/|C| - 1 over the distinct nodes of each sample."""
    return _chapman(s1, s2)[0]


def edge_estimate(
    n_hat: float, degrees: np.ndarray, weights: Optional[np.ndarray] = None
) -> float:
    """
    M = d_avg * N / 2. ``weights`` turns d_avg into an importance-weighted
    mean, used when the degrees come from a walk with a known bias.
    """
    degrees = np.asarray(degrees, dtype=np.float64)
    if degrees.shape[0] == 0:
        raise EmptySample("edge estimate needs at least one degree")
    if n_hat < 0:
        raise ValueError("n_hat must be non-negative")
    d_avg = float(np.average(degrees, weights=weights))
    return d_avg * n_hat / 2.0


def return_time_estimate(rec: ReturnRecord) -> float:
    """n = Z(k) * w(u) / (2k), Z(k) being the total time of k returns."""
    if rec.k < 1:
        raise ValueError("return record needs at least one return")
    return rec.total_time * rec.source_weight / (2.0 * rec.k)


def _walk_start(g: Graph, rng: np.random.Generator) -> int:
    """Uniform start among nodes with at least one neighbour."""
    movable = np.flatnonzero(g.degrees)
    if movable.shape[0] == 0:
        raise IsolatedNode("graph has no edges to walk")
    return int(movable[rng.integers(movable.shape[0])])


def _walk_sample(
    g: Graph,
    method: str,
    sample_size: int,
    burn_in: int,
    seed: int,
    index: int,
    thinning: int = WALK_THINNING,
) -> tuple[SampleSet, int]:
    """
    Walk (sample_size - 1) * thinning steps past the burn-in and keep every
    ``thinning``-th position, so the sample still has sample_size entries
    but consecutive entries are far apart on the walk.
    """
    walk_seed = mix_seed(seed, method, index)
    rng = np.random.default_rng(walk_seed)
    start = _walk_start(g, rng)
    view = LimitedGraphView(g)
    length = (sample_size - 1) * thinning
    match method:
        case "srw":
            walk = simple_random_walk(view, start, length, burn_in, rng)
        case "mh":
            walk = mh_walk(view, start, length, burn_in, rng)
        case "max_degree":
            walk = max_degree_walk(view, start, length, burn_in, int(g.degrees.max()), rng)
        case _:
            raise ValueError(f"{method} is not a walk sampler")
    return SampleSet(walk.nodes[::thinning], walk.degrees[::thinning], method), view.spent


def _capture_recapture(
    g: Graph, method: str, sample_size: int, burn_in: int, seed: int, thinning: int
) -> SizeEstimate:
    spent = 0
    samples: list[SampleSet] = []
    for index in range(2):
        if method == "uniform":
            nodes = uniform_node_sample(g, sample_size, make_rng(seed, method, index))
            samples.append(SampleSet(nodes, g.degrees[nodes], method))
        else:
            sample, cost = _walk_sample(g, method, sample_size, burn_in, seed, index, thinning)
            samples.append(sample)
            spent += cost

    n_hat, distinct_1, distinct_2, common = _chapman(samples[0], samples[1])
    degrees = np.concatenate([s.degrees for s in samples])
    d_avg = float(degrees.mean())
    return SizeEstimate(
        method=method,
        n_hat=n_hat,
        m_hat=edge_estimate(n_hat, degrees),
        seed=seed,
        diagnostics={
            "sample_size": sample_size,
            "distinct": [distinct_1, distinct_2],
            "collisions": common,
            "d_avg": d_avg,
            "thinning": 1 if method == "uniform" else thinning,
            "budget_spent": spent,
        },
    )


def _return_walks(g: Graph, k_returns: int, walks: int, seed: int) -> SizeEstimate:
    rng = make_rng(seed, "return_walk", "start")
    movable = np.flatnonzero(g.degrees)
    if movable.shape[0] == 0:
        raise IsolatedNode("graph has no edges to walk")
    candidates = movable[rng.integers(0, movable.shape[0], size=RETURN_START_CANDIDATES)]
    start = int(candidates[np.argmax(g.degrees[candidates])])

    records: list[ReturnRecord] = []
    spent = 0
    for index in range(walks):
        view = LimitedGraphView(g)
        records.append(
            weighted_return_walk(view, start, k_returns, mix_seed(seed, "return_walk", index))
        )
        spent += view.spent

    estimates = [return_time_estimate(rec) for rec in records]
    n_hat = float(np.mean(estimates))
    degrees = np.concatenate([rec.degrees for rec in records])
    weights = 1.0 / np.concatenate([rec.weights for rec in records])
    return SizeEstimate(
        method="return_walk",
        n_hat=n_hat,
        m_hat=edge_estimate(n_hat, degrees, weights),
        seed=seed,
        diagnostics={
            "start": start,
            "source_weight": records[0].source_weight,
            "per_walk": estimates,
            "k": k_returns,
            "budget_spent": spent,
        },
    )


def estimate_size(
    g: Graph,
    method: SizeMethod,
    budget_fraction: float = 0.20,
    burn_in_fraction: float = 0.10,
    seed: int = 0,
    *,
    k_returns: int = 10,
    return_walks: int = 3,
    thinning: int = WALK_THINNING,
) -> SizeEstimate:
    """
    Run one estimation pipeline. Capture-recapture methods draw two
    independent samples of budget_fraction * n / 2 positions each; the
    walk samplers start at a uniform non-isolated node, drop
    burn_in_fraction * n steps and then record every ``thinning``-th
    position. return_walk averages the return-time estimate over
    ``return_walks`` weighted walks from a high-degree start.

    Undefined estimates (no collisions, a walk that never returns, a graph
    with no edges to walk) come back as a failed SizeEstimate rather than
    raising.
    """
    if method not in SIZE_METHODS:
        raise ValueError(f"unknown size method {method}")
    if thinning < 1:
        raise ValueError("thinning must be at least 1")
    n = g.node_count
    sample_size = max(1, round(budget_fraction * n / 2))
    burn_in = round(burn_in_fraction * n)
    try:
        if method == "return_walk":
            result = _return_walks(g, k_returns, return_walks, seed)
        else:
            result = _capture_recapture(g, method, sample_size, burn_in, seed, thinning)
    except (CollisionFree, NonReturning, IsolatedNode) as exc:
        logger.warning(
            "Size estimate failed",
            extra={"method": method, "seed": seed, "reason": type(exc).__name__},
        )
        return SizeEstimate(
            method=method,
            status="failed",
            seed=seed,
            diagnostics={"error": type(exc).__name__, "detail": str(exc)},
        )
    logger.debug(
        "Size estimate",
        extra={"method": method, "seed": seed, "n_hat": result.n_hat, "m_hat": result.m_hat},
    )
    return result
