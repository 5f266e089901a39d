"""
Benchmark corpus: plans the graph cells per task, generates every graph,
restricts it to its largest component, stores it as a canonical edgelist
and records the ground truths in a JSON manifest.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from app.errors import HarnessError
from app.models import GRID_FAMILIES, GeneratorSpec, Manifest, ManifestEntry, structure_label
from app.services.centrality import MEASURES
from app.services.generators import CommunityLabels, generate
from app.services.graph import Graph, largest_connected_component, load_edgelist, save_edgelist
from app.services.seeding import make_rng, mix_seed

logger = logging.getLogger(__name__)

GRAPHS_PER_CELL = 100
SIZE_CLASSES: dict[str, tuple[int, int]] = {
    "small": (100, 1_000),
    "medium": (1_000, 10_000),
    "large": (10_000, 100_000),
}
TOPK_DEPTH = 100
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class Cell:
    task: str
    family: str
    size_class: Optional[str]
    low: int
    high: int


CELLS: tuple[Cell, ...] = (
    *(
        Cell("size", family, size_class, *bounds)
        for family in ("BA", "ER", "GRP")
        for size_class, bounds in SIZE_CLASSES.items()
    ),
    Cell("community", "LFR", None, 1_000, 5_000),
    *(Cell("structure", family, None, 1_000, 5_000) for family in ("ER", "BA", "Grid", "LFR")),
    Cell("topk", "LFR", None, 1_000, 3_000),
)


def cell_count(scale: float) -> int:
    return max(1, round(GRAPHS_PER_CELL * scale))


def _spec_for(cell: Cell, index: int, master_seed: int, size_cap: Optional[int]) -> tuple[str, GeneratorSpec]:
    graph_id = f"{cell.task}-{cell.family}-{cell.size_class or 'any'}-{index:03d}"
    rng = make_rng(master_seed, graph_id, "plan")
    high = min(cell.high, size_cap) if size_cap else cell.high
    low = min(cell.low, high)
    size = int(rng.integers(low, high + 1))
    seed = mix_seed(master_seed, graph_id)

    family = cell.family
    params: dict = {}
    if family == "Grid":
        family = GRID_FAMILIES[index % len(GRID_FAMILIES)]
    elif family == "BA":
        params = {"attach": min(int(rng.integers(3, 6)), size - 1)}
    elif family == "ER":
        params = {"edge_multiplier": min(float(rng.uniform(5.0, 10.0)), (size - 1) / 2)}
    elif family == "GRP":
        block = min(max(1.0, float(rng.uniform(0.05, 0.2)) * size), float(size))
        params = {
            "mean_block": block,
            "p_in": min(0.25, 25.0 / block),
            "p_out": min(0.01, 5.0 / size),
        }
    elif family == "LFR":
        params = {"mixing": float(rng.uniform(0.05, 0.2))}
        if cell.task == "community":
            params["communities"] = int(rng.integers(5, 13))
    return graph_id, GeneratorSpec(family=family, size=size, seed=seed, **params)


def plan_benchmark(
    master_seed: int, scale: float = 1.0, size_cap: Optional[int] = None
) -> list[tuple[Cell, str, GeneratorSpec]]:
    if scale <= 0:
        raise HarnessError("scale must be positive")
    count = cell_count(scale)
    return [
        (cell, *_spec_for(cell, index, master_seed, size_cap))
        for cell in CELLS
        for index in range(count)
    ]


def compute_truth(task: str, family: str, g: Graph, labels: Optional[CommunityLabels]) -> dict:
    truth: dict = {"nodes": g.node_count, "edges": g.edge_count}
    if task == "community" and labels is not None:
        truth["communities"] = labels.community_count
    elif task == "structure":
        truth["structure"] = structure_label(family)
    elif task == "topk":
        truth["topk"] = {name: fn(g).top(TOPK_DEPTH) for name, fn in MEASURES.items()}
    return truth


def generate_benchmark(
    out_dir: str | Path,
    master_seed: int,
    scale: float = 0.1,
    size_cap: Optional[int] = 100_000,
) -> Manifest:
    out = Path(out_dir)
    graphs_dir = out / "graphs"
    graphs_dir.mkdir(parents=True, exist_ok=True)
    plan = plan_benchmark(master_seed, scale, size_cap)
    logger.info("Generating benchmark", extra={"graphs": len(plan), "scale": scale, "out_dir": str(out)})

    entries: list[ManifestEntry] = []
    for cell, graph_id, spec in plan:
        raw, planted = generate(spec)
        component = largest_connected_component(raw)
        kept = component.external_ids()
        g = Graph.from_csr(component.indptr, component.indices)
        labels = planted.restrict(kept) if planted is not None else None

        path = graphs_dir / f"{graph_id}.txt"
        with path.open("wb") as fh:
            save_edgelist(g, fh)
        communities_path = None
        if labels is not None:
            communities_path = graphs_dir / f"{graph_id}.communities.json"
            communities_path.write_text(json.dumps(labels.to_record()) + "\n", encoding="utf-8")

        entries.append(
            ManifestEntry(
                graph_id=graph_id,
                task=cell.task,
                family=spec.family,
                size_class=cell.size_class,
                spec=spec,
                path=path.relative_to(out).as_posix(),
                communities_path=communities_path.relative_to(out).as_posix() if communities_path else None,
                truth=compute_truth(cell.task, spec.family, g, labels),
            )
        )
        logger.debug("Stored benchmark graph", extra={"graph_id": graph_id, "nodes": g.node_count})

    manifest = Manifest(master_seed=master_seed, scale=scale, size_cap=size_cap, entries=entries)
    (out / MANIFEST_NAME).write_text(manifest.canonical_json() + "\n", encoding="utf-8")
    logger.info("Benchmark written", extra={"graphs": len(entries), "digest": manifest.digest})
    return manifest


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    try:
        return Manifest.model_validate_json(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise HarnessError(f"manifest {path} not found") from None


def load_entry(root: str | Path, entry: ManifestEntry) -> tuple[Graph, Optional[CommunityLabels]]:
    root = Path(root)
    with (root / entry.path).open("rb") as fh:
        g = load_edgelist(fh)
    labels = None
    if entry.communities_path:
        record = json.loads((root / entry.communities_path).read_text(encoding="utf-8"))
        labels = CommunityLabels(np.asarray(record["assignment"], dtype=np.int64))
    return g, labels
