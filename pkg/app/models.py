import hashlib
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Family = Literal["BA", "ER", "GRP", "LFR", "GridHex", "GridTri", "Hypercube"]
TaskName = Literal["size", "community", "structure", "topk"]
StructureLabel = Literal["BA", "ER", "LFR", "Grid"]
CentralityMeasure = Literal["pagerank", "betweenness", "closeness"]
RecordStatus = Literal["ok", "failed", "unparsed"]

GRID_FAMILIES = ("GridHex", "GridTri", "Hypercube")


def structure_label(family: str) -> str:
    return "Grid" if family in GRID_FAMILIES else family


class GeneratorSpec(BaseModel):
    """Family plus parameters for one synthetic graph. Validated by generate()."""

    model_config = ConfigDict(frozen=True)

    family: Family
    size: int
    seed: int = 0

    # BA: edges attached per new node
    attach: int = 3
    # ER: expected edges = edge_multiplier * size
    edge_multiplier: float = 5.0
    # GRP: block size mean/variance (None -> 0.1*size and mean/2)
    mean_block: Optional[float] = None
    block_variance: Optional[float] = None
    p_in: float = 0.25
    p_out: float = 0.01
    # LFR
    mixing: float = 0.1
    degree_exponent: float = 2.0
    community_exponent: float = 1.0
    avg_degree: float = 10.0
    max_degree: Optional[int] = None
    communities: Optional[int] = None
    min_community: Optional[int] = None
    max_community: Optional[int] = None
    # grids: (rows, cols) for lattices, (d,) for the hypercube
    dims: Optional[tuple[int, ...]] = None


class SizeEstimate(BaseModel):
    method: str
    status: Literal["ok", "failed"] = "ok"
    n_hat: Optional[float] = None
    m_hat: Optional[float] = None
    seed: Optional[int] = None
    diagnostics: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _finite_when_ok(self):
        if self.status == "ok":
            for value in (self.n_hat, self.m_hat):
                if value is None or not (0.0 <= value < float("inf")):
                    raise ValueError("ok estimates need finite non-negative n_hat/m_hat")
        return self


class WalkStats(BaseModel):
    walk_length: int
    unique_nodes: int
    unique_edges: int
    first_collision_step: Optional[int] = None
    first_return_step: Optional[int] = None
    decile_new_nodes: list[int]
    sampled_names: list[int]
    top10_degrees: list[tuple[int, int]]
    bottom10_degrees: list[tuple[int, int]]
    degree_histogram: dict[int, int]
    avg_degree: float
    # (name, visits, degree) per distinct node, sorted by name
    node_visits: list[tuple[int, int, int]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _consistent(self):
        if sum(self.decile_new_nodes) != self.unique_nodes:
            raise ValueError("decile counts must add up to unique_nodes")
        if len(self.decile_new_nodes) != 10:
            raise ValueError("exactly ten decile counts expected")
        if (
            self.first_collision_step is not None
            and self.first_collision_step > self.walk_length
        ):
            raise ValueError("first collision after the end of the walk")
        return self


class PromptArtifact(BaseModel):
    task: TaskName
    text: str
    token_estimate: int
    provenance: dict[str, Any] = Field(default_factory=dict)

    @field_validator("text")
    @classmethod
    def _non_empty(cls, value: str) -> str:
        if not value:
            raise ValueError("prompt text must not be empty")
        return value

    @property
    def prompt_hash(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()


class TaskSpec(BaseModel):
    task: TaskName = "size"
    task_id: Optional[str] = None
    families: list[str] = Field(default_factory=list)
    size_classes: list[str] = Field(default_factory=list)
    methods: list[str] = Field(default_factory=list)
    budget_fraction: float = 0.20
    burn_in_fraction: float = 0.10
    k_returns: int = 10
    return_walks: int = 3
    size_prompt_walks: int = 5
    community_walk_length: int = 300
    seeds_per_community_min: int = 2
    seeds_per_community_max: int = 3
    structure_walks: int = 5
    structure_walk_fraction: float = 0.10
    topk_k: list[int] = Field(default_factory=lambda: [20, 50, 100])
    centrality: CentralityMeasure = "pagerank"
    trials: int = 1
    master_seed: int = 0
    agent: Optional[Literal["exec", "replay"]] = None
    agent_command: Optional[str] = None
    replay_dir: Optional[str] = None
    agent_timeout: float = 300.0
    workers: int = 4

    @field_validator("budget_fraction", "burn_in_fraction", "structure_walk_fraction")
    @classmethod
    def _fraction(cls, value: float) -> float:
        if not 0.0 < value <= 1.0:
            raise ValueError("fractions must lie in (0, 1]")
        return value

    @model_validator(mode="after")
    def _ranges(self):
        if not 1 <= self.seeds_per_community_min <= self.seeds_per_community_max:
            raise ValueError("seeds per community must satisfy 1 <= min <= max")
        if self.k_returns < 1 or self.trials < 1 or self.workers < 1:
            raise ValueError("k_returns, trials and workers must be positive")
        if any(k < 1 for k in self.topk_k):
            raise ValueError("top-k sizes must be positive")
        return self


class ExperimentRecord(BaseModel):
    graph_id: str
    task: TaskName
    family: str
    size_class: Optional[str] = None
    method: str
    trial: int = 0
    seed: int
    estimate: Optional[dict[str, Any]] = None
    truth: dict[str, Any] = Field(default_factory=dict)
    status: RecordStatus = "ok"
    error: Optional[str] = None
    crashed: bool = False
    budget_spent: Optional[int] = None
    wall_time: Optional[float] = None

    @model_validator(mode="after")
    def _estimate_when_ok(self):
        if self.status == "ok" and self.estimate is None:
            raise ValueError("ok records carry an estimate payload")
        return self

    @property
    def key(self) -> tuple[str, str, str, int]:
        return (self.graph_id, self.task, self.method, self.trial)


class ScoreRow(BaseModel):
    task: TaskName
    family: str
    size_class: Optional[str] = None
    method: str
    metric: str
    k: Optional[int] = None
    attempted: int = 0
    ok: int = 0
    failed: int = 0
    unparsed: int = 0
    median: Optional[float] = None
    mean: Optional[float] = None
    std: Optional[float] = None
    rank: Optional[int] = None
    values: list[float] = Field(default_factory=list)


class ScoreTable(BaseModel):
    rows: list[ScoreRow] = Field(default_factory=list)


class ManifestEntry(BaseModel):
    graph_id: str
    task: TaskName
    family: Family
    size_class: Optional[str] = None
    spec: GeneratorSpec
    path: str
    communities_path: Optional[str] = None
    truth: dict[str, Any] = Field(default_factory=dict)


class Manifest(BaseModel):
    version: int = 1
    master_seed: int
    scale: float
    size_cap: Optional[int] = None
    entries: list[ManifestEntry] = Field(default_factory=list)

    def canonical_json(self) -> str:
        return self.model_dump_json(indent=2)

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()
