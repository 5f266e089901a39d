import numpy as np
import pytest

from app.errors import DMaxTooSmall, IsolatedNode, NonReturning
from app.models import GeneratorSpec
from app.services.access import LimitedGraphView
from app.services.generators import generate
from app.services.graph import graph_from_pairs, largest_connected_component
from app.services.walkers import (
    Walk,
    max_degree_walk,
    mh_walk,
    simple_random_walk,
    stationary_distribution,
    transition_matrix,
    uniform_node_sample,
    weighted_return_walk,
)
from tests.helpers import complete, cycle

SMALL_FAMILIES = [
    GeneratorSpec(family="BA", size=60, attach=2, seed=1),
    GeneratorSpec(family="ER", size=80, edge_multiplier=2, seed=2),
    GeneratorSpec(family="GRP", size=120, seed=3, p_in=0.3, p_out=0.02),
    GeneratorSpec(family="LFR", size=150, seed=4, avg_degree=6, communities=4),
    GeneratorSpec(family="GridHex", size=50, dims=(3, 3)),
    GeneratorSpec(family="GridTri", size=50, dims=(4, 6)),
    GeneratorSpec(family="Hypercube", size=32, dims=(5,)),
]


def _adjacent_or_same(g, walk: Walk) -> bool:
    return all(
        a == b or g.has_edge(a, b) for a, b in zip(walk.nodes[:-1].tolist(), walk.nodes[1:].tolist())
    )


def test_srw_shape_and_adjacency(barbell):
    walk = simple_random_walk(LimitedGraphView(barbell), 0, 50, rng=5)
    assert walk.length == 50
    assert walk.nodes.shape[0] == 51
    assert walk.nodes[0] == 0
    assert walk.rng_seed == 5
    assert all(barbell.has_edge(a, b) for a, b in zip(walk.nodes[:-1], walk.nodes[1:]))
    assert walk.degrees.tolist() == barbell.degrees[walk.nodes].tolist()


def test_burn_in_drops_prefix(barbell):
    full = simple_random_walk(LimitedGraphView(barbell), 2, 15, 0, rng=7)
    trimmed = simple_random_walk(LimitedGraphView(barbell), 2, 10, 5, rng=7)
    assert trimmed.burn_in_dropped == 5
    assert trimmed.nodes.tolist() == full.nodes[5:].tolist()


def test_zero_length_walk(barbell):
    walk = mh_walk(LimitedGraphView(barbell), 3, 0, rng=1)
    assert walk.nodes.tolist() == [3]


def test_isolated_start():
    g = graph_from_pairs(np.array([[0, 1]]), 3)
    for walker in (simple_random_walk, mh_walk):
        with pytest.raises(IsolatedNode):
            walker(LimitedGraphView(g), 2, 5, rng=0)
    with pytest.raises(IsolatedNode):
        weighted_return_walk(LimitedGraphView(g), 2, 1, rng=0)


def test_mh_equals_srw_on_regular_graph():
    g = cycle(30)
    srw = simple_random_walk(LimitedGraphView(g), 0, 200, rng=3)
    mh = mh_walk(LimitedGraphView(g), 0, 200, rng=3)
    assert srw.nodes.tolist() == mh.nodes.tolist()


def test_mh_steps_stay_adjacent(star):
    walk = mh_walk(LimitedGraphView(star), 1, 300, rng=4)
    assert _adjacent_or_same(star, walk)
    # uniform target: the hub holds about a fifth of the positions
    assert 25 < (walk.nodes == 0).sum() < 100


def test_max_degree_walk(star):
    walk = max_degree_walk(LimitedGraphView(star), 0, 200, 0, d_max=8, rng=2)
    assert _adjacent_or_same(star, walk)
    with pytest.raises(DMaxTooSmall):
        max_degree_walk(LimitedGraphView(star), 0, 10, 0, d_max=3, rng=2)
    with pytest.raises(DMaxTooSmall):
        max_degree_walk(LimitedGraphView(star), 1, 500, 0, d_max=3, rng=2)


def test_walk_record_round_trip(barbell):
    walk = simple_random_walk(LimitedGraphView(barbell), 0, 12, 3, rng=9)
    again = Walk.from_record(walk.to_record())
    assert again.nodes.tolist() == walk.nodes.tolist()
    assert again.burn_in_dropped == 3
    assert again.rng_seed == 9


def test_uniform_sample_range(barbell):
    nodes = uniform_node_sample(barbell, 500, 1)
    assert nodes.min() >= 0 and nodes.max() < barbell.node_count
    assert uniform_node_sample(barbell, 0, 1).shape == (0,)


@pytest.mark.parametrize("spec", SMALL_FAMILIES, ids=lambda s: s.family)
def test_stationary_distributions_match_theory(spec):
    g = largest_connected_component(generate(spec)[0])
    degrees = g.degrees.astype(float)
    n = g.node_count

    pi = stationary_distribution(transition_matrix(g, "srw"))
    np.testing.assert_allclose(pi, degrees / degrees.sum(), atol=1e-9)

    for sampler in ("mh", "max_degree"):
        pi = stationary_distribution(transition_matrix(g, sampler))
        np.testing.assert_allclose(pi, np.full(n, 1.0 / n), atol=1e-9)

    edges = g.edges()
    w = np.zeros(n)
    share = 1.0 / degrees[edges[:, 0]] + 1.0 / degrees[edges[:, 1]]
    np.add.at(w, edges[:, 0], share)
    np.add.at(w, edges[:, 1], share)
    pi = stationary_distribution(transition_matrix(g, "weighted"))
    np.testing.assert_allclose(pi, w / w.sum(), atol=1e-9)


def test_transition_rows_are_stochastic(barbell):
    for sampler in ("srw", "mh", "max_degree", "weighted"):
        P = transition_matrix(barbell, sampler)
        np.testing.assert_allclose(P.sum(axis=1), 1.0)
        assert P.min() >= 0
    with pytest.raises(DMaxTooSmall):
        transition_matrix(barbell, "max_degree", d_max=2)


@pytest.mark.slow
def test_empirical_visits_close_to_stationary():
    g = largest_connected_component(generate(SMALL_FAMILIES[1])[0])
    n = g.node_count
    steps = 200_000
    for sampler, walker in (("srw", simple_random_walk), ("mh", mh_walk)):
        walk = walker(LimitedGraphView(g), 0, steps, 1_000, rng=21)
        empirical = np.bincount(walk.nodes, minlength=n) / (steps + 1)
        pi = stationary_distribution(transition_matrix(g, sampler))
        assert 0.5 * np.abs(empirical - pi).sum() < 0.05


@pytest.mark.slow
def test_max_degree_and_return_walks_close_to_stationary():
    g = largest_connected_component(generate(SMALL_FAMILIES[1])[0])
    n = g.node_count

    steps = 400_000
    walk = max_degree_walk(LimitedGraphView(g), 0, steps, 1_000, int(g.degrees.max()), rng=22)
    empirical = np.bincount(walk.nodes, minlength=n) / (steps + 1)
    pi = stationary_distribution(transition_matrix(g, "max_degree"))
    assert 0.5 * np.abs(empirical - pi).sum() < 0.05

    rec = weighted_return_walk(LimitedGraphView(g), 0, 2_500, rng=23)
    assert rec.nodes.shape == rec.degrees.shape
    assert rec.nodes[-1] == 0
    empirical = np.bincount(rec.nodes, minlength=n) / rec.nodes.shape[0]
    pi = stationary_distribution(transition_matrix(g, "weighted"))
    assert 0.5 * np.abs(empirical - pi).sum() < 0.05


def test_return_walk_on_cycle_counts_returns():
    g = cycle(12)
    rec = weighted_return_walk(LimitedGraphView(g), 0, 5, rng=8)
    assert rec.k == 5
    assert rec.source_weight == pytest.approx(2.0)
    assert rec.total_time == rec.degrees.shape[0]
    # returns on an even cycle take an even number of steps
    assert all(t % 2 == 0 for t in rec.return_times.tolist())
    np.testing.assert_allclose(rec.weights, 2.0)


def test_return_walk_cap():
    with pytest.raises(NonReturning):
        weighted_return_walk(LimitedGraphView(cycle(100)), 0, 3, rng=1, max_steps=1)


def test_return_walk_needs_a_return():
    with pytest.raises(ValueError):
        weighted_return_walk(LimitedGraphView(complete(5)), 0, 0, rng=1)
