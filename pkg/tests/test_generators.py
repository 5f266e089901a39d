import math

import numpy as np
import pytest

from app.errors import SpecError
from app.models import GeneratorSpec
from app.services.generators import CommunityLabels, generate


def _mixing(g, labels: CommunityLabels) -> float:
    edges = g.edges()
    a = labels.assignment[edges[:, 0]]
    b = labels.assignment[edges[:, 1]]
    return float(np.mean(a != b))


def test_ba_edge_count_and_connectivity():
    g, labels = generate(GeneratorSpec(family="BA", size=100, attach=3, seed=7))
    assert labels is None
    assert g.node_count == 100
    assert g.edge_count == 3 * (100 - 3)
    assert g.degrees.min() >= 1


def test_same_spec_same_graph():
    spec = GeneratorSpec(family="BA", size=300, seed=11)
    first, _ = generate(spec)
    second, _ = generate(spec)
    assert np.array_equal(first.indptr, second.indptr)
    assert np.array_equal(first.indices, second.indices)

    other, _ = generate(spec.model_copy(update={"seed": 12}))
    assert not np.array_equal(first.indices, other.indices)


def test_er_edge_counts_follow_the_binomial():
    n, multiplier = 200, 5.0
    p = 2 * multiplier / (n - 1)
    pairs = n * (n - 1) // 2
    sd = math.sqrt(pairs * p * (1 - p))
    counts = np.array([
        generate(GeneratorSpec(family="ER", size=n, edge_multiplier=multiplier, seed=seed))[0].edge_count
        for seed in range(100)
    ])
    assert abs(counts.mean() - pairs * p) <= 3 * sd / math.sqrt(len(counts))
    assert np.all(np.abs(counts - pairs * p) <= 5 * sd)
    assert len(set(counts.tolist())) > 1


def test_grp_planted_blocks():
    spec = GeneratorSpec(family="GRP", size=500, seed=5, p_in=0.3, p_out=0.002)
    g, labels = generate(spec)
    assert labels.assignment.shape[0] == 500
    assert labels.community_count >= 5
    assert _mixing(g, labels) < 0.3


def test_lfr_hits_community_count_and_mixing():
    spec = GeneratorSpec(family="LFR", size=1000, seed=9, mixing=0.1, communities=8)
    g, labels = generate(spec)
    assert labels.community_count == 8
    assert labels.sizes().min() >= 2
    assert abs(_mixing(g, labels) - 0.1) <= 0.04
    assert g.degrees.max() / np.median(g.degrees) >= 3


def test_hypercube():
    g, _ = generate(GeneratorSpec(family="Hypercube", size=16, dims=(4,)))
    assert g.node_count == 16
    assert set(g.degrees.tolist()) == {4}


def test_hex_and_triangular_lattice_degrees():
    hexagonal, _ = generate(GeneratorSpec(family="GridHex", size=100, dims=(5, 5)))
    assert set(hexagonal.degrees.tolist()) <= {2, 3}
    triangular, _ = generate(GeneratorSpec(family="GridTri", size=100, dims=(6, 10)))
    assert set(triangular.degrees.tolist()) <= {2, 3, 4, 5, 6}


@pytest.mark.parametrize(
    "spec",
    [
        GeneratorSpec(family="BA", size=10, attach=10),
        GeneratorSpec(family="ER", size=10, edge_multiplier=100),
        GeneratorSpec(family="LFR", size=100, mixing=1.5),
        GeneratorSpec(family="GRP", size=100, p_in=2.0),
        GeneratorSpec(family="Hypercube", size=8, dims=(2, 2)),
        GeneratorSpec(family="BA", size=100, seed=-1),
    ],
)
def test_invalid_specs(spec):
    with pytest.raises(SpecError):
        generate(spec)


def test_labels_relabel_by_first_appearance():
    labels = CommunityLabels.from_assignment([5, 5, 2, 7, 2])
    assert labels.assignment.tolist() == [0, 0, 1, 2, 1]
    assert labels.community_count == 3
    assert labels.sizes().tolist() == [2, 2, 1]
    assert labels.restrict(np.array([2, 3])).assignment.tolist() == [0, 1]


def test_grp_blocks_are_contiguous_and_denser_inside():
    spec = GeneratorSpec(family="GRP", size=400, seed=2, mean_block=50, block_variance=25, p_in=0.2, p_out=0.005)
    g, labels = generate(spec)
    # networkx numbers the nodes block by block
    assert np.all(np.diff(labels.assignment) >= 0)
    assert labels.sizes().sum() == 400
    edges = g.edges()
    inside = labels.assignment[edges[:, 0]] == labels.assignment[edges[:, 1]]
    assert inside.sum() > 3 * (~inside).sum()
