"""
Walk statistics, node-name anonymization and the versioned prompt
templates for the four estimation tasks.

Rendering is a pure function of (stats, params, TEMPLATE_VERSION); golden
tests pin the bytes, so any wording change must bump the version.
"""

import json
import logging
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from app.errors import EmptyStats, EmptyWalk, UnknownTask
from app.models import PromptArtifact, WalkStats
from app.services.graph import Graph
from app.services.seeding import make_rng
from app.services.walkers import Walk

logger = logging.getLogger(__name__)

TEMPLATE_VERSION = "template_v1"
TASKS = ("size", "community", "structure", "topk")

OFFSET_LOW = 10**6
OFFSET_HIGH = 10**9
SAMPLED_NAMES = 20
EXTREME_DEGREES = 10
HISTOGRAM_BINS = 50
ANSWER_PREFIX = "ANSWER:"


@dataclass(frozen=True)
class Anonymizer:
    """Maps an internal node id to its external id shifted by one offset."""

    offset: int
    labels: Optional[np.ndarray] = None

    def name(self, u: int) -> int:
        external = int(u) if self.labels is None else int(self.labels[u])
        return external + self.offset

    def names(self, nodes: np.ndarray) -> np.ndarray:
        external = nodes if self.labels is None else self.labels[nodes]
        return np.asarray(external, dtype=np.int64) + self.offset


def draw_offset(seed: int) -> int:
    return int(make_rng(seed, "anonymize").integers(OFFSET_LOW, OFFSET_HIGH))


def make_anonymizer(g: Graph, seed: int) -> Anonymizer:
    return Anonymizer(draw_offset(seed), g.labels)


def anonymize(nodes, seed: int) -> dict[int, int]:
    """node -> node + offset, the offset drawn once from [1e6, 1e9) per seed."""
    offset = draw_offset(seed)
    return {int(u): int(u) + offset for u in nodes}


def _edge_keys(nodes: np.ndarray) -> np.ndarray:
    a, b = nodes[:-1], nodes[1:]
    moved = a != b
    lo, hi = np.minimum(a[moved], b[moved]), np.maximum(a[moved], b[moved])
    return np.unique(np.column_stack((lo, hi)), axis=0) if lo.size else np.empty((0, 2), np.int64)


def _first_collision(nodes: np.ndarray) -> Optional[int]:
    _, first = np.unique(nodes, return_index=True)
    seen_before = np.ones(nodes.shape[0], dtype=bool)
    seen_before[first] = False
    hits = np.flatnonzero(seen_before)
    return int(hits[0]) if hits.size else None


def _first_return(nodes: np.ndarray) -> Optional[int]:
    hits = np.flatnonzero(nodes[1:] == nodes[0])
    return int(hits[0]) + 1 if hits.size else None


def _stats(
    nodes: np.ndarray,
    degrees: np.ndarray,
    walk_length: int,
    unique_edges: int,
    first_collision: Optional[int],
    first_return: Optional[int],
    anonymizer: Anonymizer,
    rng: np.random.Generator,
) -> WalkStats:
    distinct, first = np.unique(nodes, return_index=True)
    visits = np.unique(nodes, return_counts=True)[1]
    node_degrees = degrees[first]
    names = anonymizer.names(distinct)

    positions = nodes.shape[0]
    bounds = np.arange(11) * positions // 10
    discovered = np.sort(first)
    deciles = np.diff(np.searchsorted(discovered, bounds, side="left"))

    picked = rng.choice(distinct.shape[0], size=min(SAMPLED_NAMES, distinct.shape[0]), replace=False)
    high = np.lexsort((names, -node_degrees))[:EXTREME_DEGREES]
    low = np.lexsort((names, node_degrees))[:EXTREME_DEGREES]
    hist_keys, hist_counts = np.unique(node_degrees, return_counts=True)
    by_name = np.argsort(names)

    return WalkStats(
        walk_length=walk_length,
        unique_nodes=int(distinct.shape[0]),
        unique_edges=unique_edges,
        first_collision_step=first_collision,
        first_return_step=first_return,
        decile_new_nodes=deciles.tolist(),
        sampled_names=np.sort(names[picked]).tolist(),
        top10_degrees=list(zip(names[high].tolist(), node_degrees[high].tolist())),
        bottom10_degrees=list(zip(names[low].tolist(), node_degrees[low].tolist())),
        degree_histogram=dict(zip(hist_keys.tolist(), hist_counts.tolist())),
        avg_degree=float(node_degrees.mean()),
        node_visits=list(
            zip(
                names[by_name].tolist(),
                visits[by_name].tolist(),
                node_degrees[by_name].tolist(),
            )
        ),
    )


def compute_walk_stats(walk: Walk, anonymizer: Anonymizer, seed: int = 0) -> WalkStats:
    """
    Statistics of one walk. Positions are indexed from 0 (the start), so
    a collision or return "at step i" means position i repeats a node.
    """
    nodes = walk.nodes
    if nodes.shape[0] == 0:
        raise EmptyWalk("walk has no positions")
    return _stats(
        nodes,
        walk.degrees,
        walk_length=walk.length,
        unique_edges=int(_edge_keys(nodes).shape[0]),
        first_collision=_first_collision(nodes),
        first_return=_first_return(nodes),
        anonymizer=anonymizer,
        rng=make_rng(seed, "names", walk.start),
    )


def compute_combined_stats(walks: Sequence[Walk], anonymizer: Anonymizer, seed: int = 0) -> WalkStats:
    """
    Pooled statistics of several walks: positions are concatenated in walk
    order, edges are the union of per-walk traversals, and collision/return
    times are the earliest across walks.
    """
    if not walks or all(w.nodes.shape[0] == 0 for w in walks):
        raise EmptyWalk("no walk positions to combine")
    edges = np.concatenate([_edge_keys(w.nodes) for w in walks])
    edges = np.unique(edges, axis=0) if edges.size else edges
    collisions = [c for c in (_first_collision(w.nodes) for w in walks if w.nodes.size) if c is not None]
    returns = [r for r in (_first_return(w.nodes) for w in walks if w.nodes.size) if r is not None]
    return _stats(
        np.concatenate([w.nodes for w in walks]),
        np.concatenate([w.degrees for w in walks]),
        walk_length=sum(w.length for w in walks),
        unique_edges=int(edges.shape[0]),
        first_collision=min(collisions) if collisions else None,
        first_return=min(returns) if returns else None,
        anonymizer=anonymizer,
        rng=make_rng(seed, "names", "combined"),
    )


def estimate_tokens(text: str) -> int:
    return (len(text.encode("utf-8")) + 3) // 4


def _histogram(histogram: Mapping[int, int]) -> str:
    items = sorted(histogram.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = dict(sorted(items[:HISTOGRAM_BINS]))
    rendered = {str(k): v for k, v in kept.items()}
    tail = sum(v for _, v in items[HISTOGRAM_BINS:])
    if tail:
        rendered["other"] = tail
    return json.dumps(rendered)


def _pairs(pairs: Sequence[tuple[int, int]]) -> str:
    return json.dumps({str(name): degree for name, degree in pairs})


def _optional(value: Optional[int], missing: str) -> str:
    return missing if value is None else str(value)


def _size_section(title: str, s: WalkStats) -> list[str]:
    return [
        f"{title}:",
        f"- Length of the walk: {s.walk_length}",
        f"- Number of unique nodes: {s.unique_nodes}",
        f"- Number of unique edges: {s.unique_edges}",
        f"- Time to first node collision: {_optional(s.first_collision_step, 'no collision')}",
        f"- Steps until first return to the source node: {_optional(s.first_return_step, 'no return')}",
        f"- New nodes discovered per 10% of the walk: {json.dumps(s.decile_new_nodes)}",
        f"- Names of some nodes: {json.dumps(s.sampled_names)}",
        f"- Ten highest-degree nodes (name: degree): {_pairs(s.top10_degrees)}",
        f"- Ten lowest-degree nodes (name: degree): {_pairs(s.bottom10_degrees)}",
        f"- Degree distribution (degree: number of nodes): {_histogram(s.degree_histogram)}",
        f"- Average degree: {s.avg_degree:.2f}",
        "",
    ]


def _visits_section(title: str, s: WalkStats) -> list[str]:
    visits = {str(name): [count, degree] for name, count, degree in s.node_visits}
    return [
        f"{title}:",
        f"- Length of the walk: {s.walk_length}",
        f"- Number of unique nodes: {s.unique_nodes}",
        f"- Visits and degree per node (name: [visits, degree]): {json.dumps(visits)}",
        "",
    ]


def _combined_visits(s: WalkStats) -> list[str]:
    return [
        "All walks combined:",
        f"- Total length: {s.walk_length}",
        f"- Number of unique nodes: {s.unique_nodes}",
        f"- Number of unique edges: {s.unique_edges}",
        "",
    ]


def _instruction(task: str, params: Mapping[str, Any]) -> tuple[str, str]:
    match task:
        case "size":
            quantity = params.get("quantity", "nodes")
            if quantity not in ("nodes", "edges"):
                raise ValueError(f"size prompts ask for nodes or edges, not {quantity}")
            sampler = params.get("sampler", "random")
            return (
                "You are given statistics of "
                f"{sampler} walks on a large undirected graph that you cannot see. "
                f"Estimate the total number of {quantity} in the graph.",
                f"{ANSWER_PREFIX} <estimated number of {quantity}>",
            )
        case "community":
            return (
                "You are given random walks on a large undirected graph that you cannot see. "
                "Walks that keep revisiting the same group of nodes suggest a community. "
                "Estimate the number of communities in the graph.",
                f"{ANSWER_PREFIX} <number of communities>",
            )
        case "structure":
            return (
                "You are given random walks on a large undirected graph that you cannot see. "
                "Decide which model generated the graph: BA (Barabasi-Albert), "
                "ER (Erdos-Renyi), LFR (community benchmark) or Grid (lattice).",
                f"{ANSWER_PREFIX} <one of BA, ER, LFR, Grid>",
            )
        case "topk":
            k = params.get("k")
            if not isinstance(k, int) or k < 1:
                raise ValueError("topk prompts need a positive integer k")
            measure = params.get("measure", "pagerank")
            return (
                "You are given random walks on a large undirected graph that you cannot see. "
                f"Identify the {k} nodes with the highest {measure} centrality, most central first.",
                f"{ANSWER_PREFIX} <comma separated list of {k} node names>",
            )
    raise UnknownTask(f"unknown task {task!r}")


def render_prompt(
    task: str,
    stats: Sequence[WalkStats],
    combined: WalkStats,
    task_params: Optional[Mapping[str, Any]] = None,
) -> PromptArtifact:
    params = dict(task_params or {})
    if task not in TASKS:
        raise UnknownTask(f"unknown task {task!r}")
    if not stats:
        raise EmptyStats("a prompt needs statistics from at least one walk")
    instruction, answer = _instruction(task, params)

    lines = [instruction, ""]
    if task == "size":
        for i, s in enumerate(stats, start=1):
            lines += _size_section(f"Walk {i} statistics", s)
        lines += _size_section("Statistics of all walks combined", combined)
    else:
        for i, s in enumerate(stats, start=1):
            lines += _visits_section(f"Walk {i}", s)
        lines += _combined_visits(combined)
    lines += [
        "Reason step by step if needed, then finish with exactly one final line of the form:",
        answer,
    ]
    text = "\n".join(lines) + "\n"

    provenance = {
        "template": TEMPLATE_VERSION,
        "walks": len(stats),
        **{k: v for k, v in params.items() if isinstance(v, (str, int, float, bool, list))},
    }
    return PromptArtifact(
        task=task,
        text=text,
        token_estimate=estimate_tokens(text),
        provenance=provenance,
    )
