"""
Synthetic graph families used by the benchmark.

Every generator is a pure function of (spec, spec.seed): the same spec always
yields the same adjacency. BA, ER, GRP and the lattices come from networkx,
seeded from the spec; LFR is built here.
"""

import logging
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from app.errors import SpecError
from app.models import GeneratorSpec
from app.services.graph import Graph, graph_from_pairs
from app.services.seeding import make_rng

logger = logging.getLogger(__name__)

MIXING_TOLERANCE = 0.02


@dataclass(frozen=True, eq=False)
class CommunityLabels:
    """Total assignment node -> community id with contiguous ids."""

    assignment: np.ndarray

    def __post_init__(self):
        self.assignment.setflags(write=False)

    @classmethod
    def from_assignment(cls, assignment) -> "CommunityLabels":
        """Relabel arbitrary ids to 0..count-1 in order of first appearance."""
        raw = np.asarray(assignment, dtype=np.int64)
        if raw.size == 0:
            return cls(raw.copy())
        _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first))
        return cls(order[inverse.reshape(-1)].astype(np.int64))

    @property
    def community_count(self) -> int:
        return int(self.assignment.max()) + 1 if self.assignment.size else 0

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.community_count)

    def members(self, community: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == community)

    def restrict(self, nodes: np.ndarray) -> "CommunityLabels":
        """Labels of a node subset (e.g. a largest component), recompacted."""
        return type(self).from_assignment(self.assignment[np.asarray(nodes)])

    def to_record(self) -> dict:
        return {
            "community_count": self.community_count,
            "assignment": self.assignment.tolist(),
        }


def validate_spec(spec: GeneratorSpec):
    if spec.seed < 0:
        raise SpecError("seed must be non-negative")
    family = spec.family
    if family == "Hypercube":
        if spec.dims is not None and (len(spec.dims) != 1 or spec.dims[0] < 1):
            raise SpecError("Hypercube dims must be (d,) with d >= 1")
        if spec.dims is None and spec.size < 2:
            raise SpecError("Hypercube needs size >= 2 or explicit dims")
        return
    if family in ("GridHex", "GridTri"):
        if spec.dims is not None and (len(spec.dims) != 2 or min(spec.dims) < 1):
            raise SpecError(f"{family} dims must be (rows, cols) with both >= 1")
        if spec.dims is None and spec.size < 4:
            raise SpecError(f"{family} needs size >= 4 or explicit dims")
        return
    if spec.size < 2:
        raise SpecError("size must be at least 2")
    if family == "BA":
        if not 1 <= spec.attach < spec.size:
            raise SpecError("BA needs 1 <= attach < size")
    elif family == "ER":
        if not 0 < spec.edge_multiplier <= (spec.size - 1) / 2:
            raise SpecError("ER edge multiplier must lie in (0, (size-1)/2]")
    elif family == "GRP":
        if not (0 <= spec.p_out <= 1 and 0 <= spec.p_in <= 1):
            raise SpecError("GRP probabilities must lie in [0, 1]")
        if spec.mean_block is not None and not 1 <= spec.mean_block <= spec.size:
            raise SpecError("GRP mean block size must lie in [1, size]")
        if spec.block_variance is not None and spec.block_variance < 0:
            raise SpecError("GRP block variance must be non-negative")
    elif family == "LFR":
        if not 0 < spec.mixing < 1:
            raise SpecError("LFR mixing must lie in (0, 1)")
        if spec.degree_exponent <= 1 or spec.community_exponent < 1:
            raise SpecError("LFR exponents need tau1 > 1 and tau2 >= 1")
        if not 1 <= spec.avg_degree < spec.size:
            raise SpecError("LFR average degree must lie in [1, size)")
        if spec.communities is not None and not 1 <= spec.communities <= spec.size // 2:
            raise SpecError("LFR community count must lie in [1, size/2]")
        if (
            spec.min_community is not None
            and spec.max_community is not None
            and not 2 <= spec.min_community <= spec.max_community <= spec.size
        ):
            raise SpecError("LFR community bounds need 2 <= min <= max <= size")


def generate(spec: GeneratorSpec) -> tuple[Graph, CommunityLabels | None]:
    """
    Build the graph a spec describes. LFR and GRP also return their planted
    community labels.
    """
    validate_spec(spec)
    rng = make_rng(spec.seed, spec.family)
    labels = None
    match spec.family:
        case "BA":
            graph = _barabasi_albert(spec.size, spec.attach, rng)
        case "ER":
            graph = _erdos_renyi(spec.size, spec.edge_multiplier, rng)
        case "GRP":
            graph, labels = _gaussian_partition(spec, rng)
        case "LFR":
            graph, labels = _lfr(spec, rng)
        case "GridHex" | "GridTri" | "Hypercube":
            graph = _lattice(spec)
        case _:
            raise SpecError(f"unknown family {spec.family}")

    logger.debug(
        "Generated graph",
        extra={
            "family": spec.family,
            "seed": spec.seed,
            "node_count": graph.node_count,
            "edge_count": graph.edge_count,
        },
    )
    return graph, labels


def _nx_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(2**32))


def _from_networkx(nx_graph: nx.Graph) -> Graph:
    n = nx_graph.number_of_nodes()
    pairs = np.asarray(list(nx_graph.edges()), dtype=np.int64).reshape(-1, 2)
    return graph_from_pairs(pairs, n)


def _barabasi_albert(n: int, m: int, rng: np.random.Generator) -> Graph:
    # networkx seeds with a star on m+1 nodes, so |E| = m(n-m)
    return _from_networkx(nx.barabasi_albert_graph(n, m, seed=_nx_seed(rng)))


def _erdos_renyi(n: int, multiplier: float, rng: np.random.Generator) -> Graph:
    p = 2.0 * multiplier / (n - 1)
    return _from_networkx(nx.fast_gnp_random_graph(n, p, seed=_nx_seed(rng)))


def _gaussian_partition(
    spec: GeneratorSpec, rng: np.random.Generator
) -> tuple[Graph, CommunityLabels]:
    n = spec.size
    mean = spec.mean_block if spec.mean_block is not None else 0.1 * n
    variance = spec.block_variance if spec.block_variance is not None else mean / 2
    # networkx draws block sizes with standard deviation mean/shape + 0.5
    std = math.sqrt(variance)
    shape = mean / std if std > 0 else math.inf
    nx_graph = nx.gaussian_random_partition_graph(
        n, mean, shape, spec.p_in, spec.p_out, seed=_nx_seed(rng)
    )
    membership = np.empty(n, dtype=np.int64)
    for block, nodes in enumerate(nx_graph.graph["partition"]):
        membership[list(nodes)] = block
    return _from_networkx(nx_graph), CommunityLabels.from_assignment(membership)


def _truncated_power_law(
    rng: np.random.Generator, exponent: float, low: float, high: float, size: int
) -> np.ndarray:
    u = rng.random(size)
    if math.isclose(exponent, 1.0):
        return low * (high / low) ** u
    a = 1.0 - exponent
    return (low**a + u * (high**a - low**a)) ** (1.0 / a)


def _power_law_mean(exponent: float, low: float, high: float) -> float:
    if math.isclose(exponent, 2.0):
        return math.log(high / low) / (1.0 / low - 1.0 / high)
    if math.isclose(exponent, 1.0):
        return (high - low) / math.log(high / low)
    a = 1.0 - exponent
    b = 2.0 - exponent
    return (a / b) * (high**b - low**b) / (high**a - low**a)


def _lfr_degrees(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    n = spec.size
    high = float(spec.max_degree or max(spec.avg_degree + 1, min(n // 10, 10 * spec.avg_degree)))
    high = min(high, n - 1)
    if spec.avg_degree >= high:
        return np.full(n, int(round(high)), dtype=np.int64)
    # bisection on the lower cut-off so the truncated mean hits avg_degree
    lo, hi = 1.0, float(spec.avg_degree)
    for _ in range(60):
        mid = (lo + hi) / 2
        if _power_law_mean(spec.degree_exponent, mid, high) < spec.avg_degree:
            lo = mid
        else:
            hi = mid
    raw = _truncated_power_law(rng, spec.degree_exponent, lo, high, n)
    return np.clip(np.rint(raw), 1, high).astype(np.int64)


def _lfr_community_sizes(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    n = spec.size
    if spec.communities is not None:
        count = spec.communities
        ratio = 3.0
        if spec.min_community and spec.max_community:
            ratio = max(1.0, spec.max_community / spec.min_community)
        raw = (
            _truncated_power_law(rng, spec.community_exponent, 1.0, ratio, count)
            if ratio > 1
            else np.ones(count)
        )
        share = raw / raw.sum() * n
        sizes = np.floor(share).astype(np.int64)
        # largest remainders take the leftover nodes
        leftover = n - int(sizes.sum())
        sizes[np.argsort(-(share - sizes), kind="stable")[:leftover]] += 1
        floor = max(2, spec.min_community or 2)
        while sizes.min() < floor:
            small, big = int(np.argmin(sizes)), int(np.argmax(sizes))
            sizes[small] += 1
            sizes[big] -= 1
        return sizes

    low = float(spec.min_community or max(10, int(2 * spec.avg_degree)))
    high = float(spec.max_community or max(low, n // 4))
    sizes: list[int] = []
    remaining = n
    while remaining > 0:
        size = int(round(_truncated_power_law(rng, spec.community_exponent, low, high, 1)[0]))
        if remaining - size < low:
            size = remaining
        sizes.append(size)
        remaining -= size
    return np.asarray(sizes, dtype=np.int64)


def _pair_stubs(stubs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    stubs = rng.permutation(stubs)
    if stubs.shape[0] % 2:
        stubs = stubs[:-1]
    return stubs.reshape(-1, 2)


def _lfr(spec: GeneratorSpec, rng: np.random.Generator) -> tuple[Graph, CommunityLabels]:
    """
    Planted partition with power-law degrees and community sizes. Internal
    and external stubs are paired by two configuration models, then edges
    are rewired until the global mixing fraction is within tolerance.
    """
    n = spec.size
    mu = spec.mixing
    sizes = _lfr_community_sizes(spec, rng)
    membership = rng.permutation(np.repeat(np.arange(sizes.shape[0], dtype=np.int64), sizes))
    degrees = _lfr_degrees(spec, rng)

    community_size = sizes[membership]
    internal = np.minimum(np.rint((1.0 - mu) * degrees).astype(np.int64), community_size - 1)
    external = degrees - internal

    chunks = []
    for community in range(sizes.shape[0]):
        nodes = np.flatnonzero(membership == community)
        chunks.append(_pair_stubs(np.repeat(nodes, internal[nodes]), rng))
    outside = _pair_stubs(np.repeat(np.arange(n, dtype=np.int64), external), rng)
    outside = outside[membership[outside[:, 0]] != membership[outside[:, 1]]]
    pairs = np.concatenate(chunks + [outside])
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    keys = np.unique(np.minimum(pairs[:, 0], pairs[:, 1]) * n + np.maximum(pairs[:, 0], pairs[:, 1]))

    edge_set = set(keys.tolist())
    intra = [k for k in edge_set if membership[k // n] == membership[k % n]]
    inter = [k for k in edge_set if membership[k // n] != membership[k % n]]
    members = [np.flatnonzero(membership == c) for c in range(sizes.shape[0])]

    target_tolerance = MIXING_TOLERANCE / 2
    for _ in range(20 * max(1, len(edge_set))):
        total = len(intra) + len(inter)
        if total == 0 or abs(len(inter) / total - mu) <= target_tolerance:
            break
        need_inter = len(inter) / total < mu
        source = intra if need_inter else inter
        if not source:
            break
        pos = int(rng.integers(len(source)))
        key = source[pos]
        u = key // n if rng.random() < 0.5 else key % n
        if need_inter:
            w = int(rng.integers(n))
            if membership[w] == membership[u]:
                continue
        else:
            pool = members[membership[u]]
            w = int(pool[rng.integers(pool.shape[0])])
        if w == u:
            continue
        new_key = min(u, w) * n + max(u, w)
        if new_key in edge_set:
            continue
        source[pos] = source[-1]
        source.pop()
        edge_set.discard(key)
        edge_set.add(new_key)
        (inter if need_inter else intra).append(new_key)

    keys = np.fromiter(edge_set, dtype=np.int64, count=len(edge_set))
    pairs = np.column_stack((keys // n, keys % n))
    # stub collisions can strand a node; tie it back into its own community
    stranded = np.flatnonzero(np.bincount(pairs.ravel(), minlength=n) == 0)
    extra = []
    for u in stranded.tolist():
        pool = members[membership[u]]
        pool = pool[pool != u]
        if pool.shape[0]:
            extra.append((u, int(pool[rng.integers(pool.shape[0])])))
    if extra:
        pairs = np.concatenate((pairs, np.asarray(extra, dtype=np.int64)))
    return graph_from_pairs(pairs, n), CommunityLabels.from_assignment(membership)


def _lattice(spec: GeneratorSpec) -> Graph:
    if spec.family == "Hypercube":
        d = spec.dims[0] if spec.dims else max(1, int(round(math.log2(spec.size))))
        nx_graph = nx.hypercube_graph(d)
    elif spec.family == "GridHex":
        rows, cols = spec.dims or (max(1, round(math.sqrt(spec.size / 2)) - 1),) * 2
        nx_graph = nx.hexagonal_lattice_graph(rows, cols, with_positions=False)
    else:
        side = max(1, round(math.sqrt(spec.size)))
        rows, cols = spec.dims or (side, 2 * side)
        nx_graph = nx.triangular_lattice_graph(rows, cols, with_positions=False)

    nx_graph = nx.convert_node_labels_to_integers(nx_graph, ordering="sorted")
    return _from_networkx(nx_graph)
