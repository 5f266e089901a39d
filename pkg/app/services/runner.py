"""
Batch execution of a TaskSpec over a benchmark manifest.

Every (graph, method, trial) becomes one ExperimentRecord. Records run
concurrently up to the worker limit; each derives its own seed from
(master_seed, graph_id, method, trial), so results do not depend on
scheduling. Domain errors turn into failed/unparsed records; anything
else is logged with its traceback and flagged as crashed.
"""

import asyncio
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
import structlog

from app.errors import EstimationError, Unparsable
from app.models import ExperimentRecord, Manifest, ManifestEntry, PromptArtifact, TaskSpec
from app.services.access import LimitedGraphView
from app.services.agents import AgentAdapter, agent_query
from app.services.benchmark import load_entry
from app.services.community import (
    greedy_modularity,
    label_propagation,
    louvain,
    planted_seed_walks,
    walk_induced_subgraph,
)
from app.services.centrality import visit_frequency_ranking
from app.services.estimators import SIZE_METHODS, estimate_size
from app.services.generators import CommunityLabels
from app.services.graph import Graph
from app.services.promptgen import (
    compute_combined_stats,
    compute_walk_stats,
    make_anonymizer,
    render_prompt,
)
from app.services.seeding import make_rng, mix_seed
from app.services.structure import classify_structure
from app.services.walkers import Walk, mh_walk, simple_random_walk

logger = logging.getLogger(__name__)

CLASSICAL_METHODS: dict[str, tuple[str, ...]] = {
    "size": SIZE_METHODS,
    "community": ("louvain", "greedy", "label_propagation"),
    "structure": ("classifier",),
    "topk": ("visit_frequency",),
}
AGENT_METHODS: dict[str, tuple[str, ...]] = {
    "size": ("agent-mh", "agent-srw"),
    "community": ("agent",),
    "structure": ("agent",),
    "topk": ("agent",),
}


def default_methods(spec: TaskSpec) -> list[str]:
    methods = list(CLASSICAL_METHODS[spec.task])
    if spec.agent:
        methods += AGENT_METHODS[spec.task]
    return methods


def is_agent_method(method: str) -> bool:
    return method == "agent" or method.startswith("agent-")


@dataclass
class Outcome:
    estimate: Optional[dict[str, Any]]
    status: str = "ok"
    error: Optional[str] = None
    budget_spent: Optional[int] = None


def _walk_batch(
    g: Graph,
    sampler: str,
    walks: int,
    length: int,
    burn_in: int,
    rng: np.random.Generator,
) -> tuple[list[Walk], int]:
    batch: list[Walk] = []
    spent = 0
    for _ in range(walks):
        view = LimitedGraphView(g)
        start = int(rng.integers(g.node_count))
        while g.degree(start) == 0:
            start = int(rng.integers(g.node_count))
        walker = mh_walk if sampler == "mh" else simple_random_walk
        batch.append(walker(view, start, length, burn_in, rng))
        spent += view.spent
    return batch, spent


def task_walks(
    task: str,
    g: Graph,
    labels: Optional[CommunityLabels],
    spec: TaskSpec,
    seed: int,
    sampler: str = "srw",
) -> tuple[list[Walk], int]:
    """Walks a task observes, under the task's walk protocol."""
    rng = make_rng(seed, "walks", task)
    n = g.node_count
    match task:
        case "size":
            length = max(1, round(spec.budget_fraction * n / spec.size_prompt_walks))
            burn_in = round(spec.burn_in_fraction * n)
            return _walk_batch(g, sampler, spec.size_prompt_walks, length, burn_in, rng)
        case "community":
            if labels is None:
                raise EstimationError("community task needs planted labels")
            walks = planted_seed_walks(
                g,
                labels,
                spec.community_walk_length,
                spec.seeds_per_community_min,
                spec.seeds_per_community_max,
                rng,
            )
            return walks, sum(w.budget_spent for w in walks)
        case _:
            length = max(1, round(spec.structure_walk_fraction * n))
            return _walk_batch(g, "srw", spec.structure_walks, length, 0, rng)


def build_prompts(
    task: str,
    g: Graph,
    labels: Optional[CommunityLabels],
    spec: TaskSpec,
    seed: int,
    graph_id: str,
    sampler: str = "mh",
) -> tuple[list[PromptArtifact], list[Walk], int]:
    """The prompts for one record: nodes and edges for size, one otherwise."""
    walks, spent = task_walks(task, g, labels, spec, seed, sampler)
    anonymizer = make_anonymizer(g, mix_seed(seed, "anonymize"))
    stats = [compute_walk_stats(w, anonymizer, seed) for w in walks]
    combined = compute_combined_stats(walks, anonymizer, seed)
    base = {"graph_id": graph_id, "seed": seed, "sampler": sampler}
    if task == "size":
        params = [{**base, "quantity": "nodes"}, {**base, "quantity": "edges"}]
    elif task == "topk":
        params = [{**base, "k": max(spec.topk_k), "measure": spec.centrality}]
    else:
        params = [base]
    prompts = [render_prompt(task, stats, combined, p) for p in params]
    return prompts, walks, spent


def record_truth(entry: ManifestEntry, spec: TaskSpec) -> dict[str, Any]:
    truth = entry.truth
    match spec.task:
        case "size":
            return {"nodes": truth["nodes"], "edges": truth["edges"]}
        case "community":
            return {"communities": truth.get("communities")}
        case "structure":
            return {"structure": truth.get("structure")}
        case "topk":
            ranking = truth.get("topk", {}).get(spec.centrality, [])
            return {"ranking": ranking[: max(spec.topk_k)], "k": list(spec.topk_k), "measure": spec.centrality}
    return {}


def run_classical(
    task: str,
    method: str,
    g: Graph,
    labels: Optional[CommunityLabels],
    spec: TaskSpec,
    seed: int,
) -> Outcome:
    match task:
        case "size":
            result = estimate_size(
                g,
                method,
                spec.budget_fraction,
                spec.burn_in_fraction,
                seed,
                k_returns=spec.k_returns,
                return_walks=spec.return_walks,
            )
            spent = result.diagnostics.get("budget_spent")
            if result.status != "ok":
                return Outcome(None, "failed", result.diagnostics.get("error"), spent)
            return Outcome({"n_hat": result.n_hat, "m_hat": result.m_hat}, budget_spent=spent)
        case "community":
            walks, spent = task_walks(task, g, labels, spec, seed)
            sub = walk_induced_subgraph(g, walks)
            rng = make_rng(seed, method)
            match method:
                case "louvain":
                    partition = louvain(sub, rng)
                case "greedy":
                    partition = greedy_modularity(sub)
                case "label_propagation":
                    partition = label_propagation(sub, rng)
                case _:
                    raise ValueError(f"unknown community method {method}")
            estimate = {
                "communities": partition.filtered_count(),
                "raw_communities": partition.community_count,
            }
            return Outcome(estimate, budget_spent=spent)
        case "structure":
            walks, spent = task_walks(task, g, labels, spec, seed)
            anonymizer = make_anonymizer(g, mix_seed(seed, "anonymize"))
            stats = [compute_walk_stats(w, anonymizer, seed) for w in walks]
            return Outcome({"structure": classify_structure(stats)}, budget_spent=spent)
        case "topk":
            walks, spent = task_walks(task, g, labels, spec, seed)
            ranking = visit_frequency_ranking(walks).top(max(spec.topk_k))
            return Outcome({"ranking": ranking}, budget_spent=spent)
    raise ValueError(f"unknown task {task}")


async def run_agent(
    adapter: AgentAdapter,
    task: str,
    method: str,
    g: Graph,
    labels: Optional[CommunityLabels],
    spec: TaskSpec,
    seed: int,
    graph_id: str,
) -> Outcome:
    sampler = method.split("-", 1)[1] if "-" in method else "srw"
    prompts, walks, spent = await asyncio.to_thread(
        build_prompts, task, g, labels, spec, seed, graph_id, sampler
    )
    answers = [await agent_query(adapter, p) for p in prompts]
    match task:
        case "size":
            estimate = {"n_hat": float(answers[0]), "m_hat": float(answers[1])}
        case "community":
            estimate = {"communities": int(answers[0])}
        case "structure":
            estimate = {"structure": answers[0]}
        case _:
            anonymizer = make_anonymizer(g, mix_seed(seed, "anonymize"))
            visited = np.unique(np.concatenate([w.nodes for w in walks]))
            by_name = dict(zip(anonymizer.names(visited).tolist(), visited.tolist()))
            estimate = {"ranking": [by_name.get(name, -1) for name in answers[0]]}
    return Outcome(estimate, budget_spent=spent)


class BenchmarkRunner:
    def __init__(
        self,
        manifest: Manifest,
        root: str | Path,
        spec: TaskSpec,
        agent: Optional[AgentAdapter] = None,
    ):
        self.manifest = manifest
        self.root = Path(root)
        self.spec = spec
        self.agent = agent
        self.methods = spec.methods or default_methods(spec)
        self._graphs: dict[str, tuple[Graph, Optional[CommunityLabels]]] = {}
        self._graph_locks: dict[str, asyncio.Lock] = {}

    def entries(self) -> list[ManifestEntry]:
        spec = self.spec
        return [
            e
            for e in self.manifest.entries
            if e.task == spec.task
            and (not spec.families or e.family in spec.families or e.truth.get("structure") in spec.families)
            and (not spec.size_classes or e.size_class in spec.size_classes)
        ]

    async def _graph(self, entry: ManifestEntry) -> tuple[Graph, Optional[CommunityLabels]]:
        lock = self._graph_locks.setdefault(entry.graph_id, asyncio.Lock())
        async with lock:
            if entry.graph_id not in self._graphs:
                self._graphs[entry.graph_id] = await asyncio.to_thread(load_entry, self.root, entry)
        return self._graphs[entry.graph_id]

    async def _run_one(
        self, semaphore: asyncio.Semaphore, entry: ManifestEntry, method: str, trial: int
    ) -> ExperimentRecord:
        spec = self.spec
        seed = mix_seed(spec.master_seed, entry.graph_id, method, trial)
        base = {
            "graph_id": entry.graph_id,
            "task": spec.task,
            "family": entry.family,
            "size_class": entry.size_class,
            "method": method,
            "trial": trial,
            "seed": seed,
            "truth": record_truth(entry, spec),
        }
        async with semaphore:
            with structlog.contextvars.bound_contextvars(
                graph_id=entry.graph_id, method=method, trial=trial
            ):
                started = time.perf_counter()
                crashed = False
                try:
                    g, labels = await self._graph(entry)
                    if is_agent_method(method):
                        if self.agent is None:
                            raise EstimationError(f"method {method} needs an agent")
                        outcome = await run_agent(
                            self.agent, spec.task, method, g, labels, spec, seed, entry.graph_id
                        )
                    else:
                        outcome = await asyncio.to_thread(
                            run_classical, spec.task, method, g, labels, spec, seed
                        )
                except Unparsable as exc:
                    logger.warning("Unparsable agent answer", extra={"error": str(exc)})
                    outcome = Outcome(None, "unparsed", str(exc))
                except EstimationError as exc:
                    logger.warning(
                        "Record failed", extra={"error": f"{type(exc).__name__}: {exc}"}
                    )
                    outcome = Outcome(None, "failed", f"{type(exc).__name__}: {exc}")
                except Exception as exc:
                    logger.error("Record crashed", exc_info=True)
                    outcome = Outcome(None, "failed", f"{type(exc).__name__}: {exc}")
                    crashed = True
                wall_time = time.perf_counter() - started

        return ExperimentRecord(
            **base,
            estimate=outcome.estimate,
            status=outcome.status,
            error=outcome.error,
            crashed=crashed,
            budget_spent=outcome.budget_spent,
            wall_time=wall_time,
        )

    async def run(self) -> list[ExperimentRecord]:
        entries = self.entries()
        semaphore = asyncio.Semaphore(self.spec.workers)
        jobs = [
            self._run_one(semaphore, entry, method, trial)
            for entry in entries
            for method in self.methods
            for trial in range(self.spec.trials)
        ]
        logger.info(
            "Running task",
            extra={"task": self.spec.task, "graphs": len(entries), "records": len(jobs)},
        )
        records = await asyncio.gather(*jobs)
        records.sort(key=lambda r: r.key)
        failed = sum(r.status != "ok" for r in records)
        logger.info(
            "Task finished",
            extra={"task": self.spec.task, "records": len(records), "not_ok": failed},
        )
        return records


async def run_task(
    manifest: Manifest,
    root: str | Path,
    spec: TaskSpec,
    agent: Optional[AgentAdapter] = None,
) -> list[ExperimentRecord]:
    return await BenchmarkRunner(manifest, root, spec, agent).run()
