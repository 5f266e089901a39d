import io

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from app.errors import EmptyGraph, GraphInvariantError, InvalidNode, ParseError
from app.services.graph import (
    Graph,
    build_graph,
    graph_from_pairs,
    induced_subgraph,
    largest_connected_component,
    load_edgelist,
    save_edgelist,
)

edge_lists = st.lists(
    st.tuples(st.integers(0, 30), st.integers(0, 30)), min_size=1, max_size=120
)


def test_triangle_counts(triangle):
    assert triangle.node_count == 3
    assert triangle.edge_count == 3
    assert triangle.degrees.tolist() == [2, 2, 2]
    assert triangle.neighbors(1).tolist() == [0, 2]


def test_duplicates_and_direction_collapse():
    g = build_graph([(0, 1), (1, 0), (0, 1), (1, 2)])
    assert g.edge_count == 2
    assert g.has_edge(1, 0) and g.has_edge(2, 1)


def test_self_loops_are_dropped():
    g = build_graph([(0, 0), (0, 1), (1, 1)])
    assert g.edge_count == 1
    assert g.degrees.tolist() == [1, 1]


def test_only_self_loops_is_empty():
    with pytest.raises(EmptyGraph):
        build_graph([(3, 3)])
    with pytest.raises(EmptyGraph):
        build_graph([])


def test_sparse_ids_are_compacted():
    g = build_graph([(10, 20), (20, 30)])
    assert g.node_count == 3
    assert g.external_ids().tolist() == [10, 20, 30]
    assert g.label(2) == 30
    assert g.degree(1) == 2


def test_invalid_node_lookup(triangle):
    with pytest.raises(InvalidNode):
        triangle.degree(3)
    with pytest.raises(InvalidNode):
        triangle.neighbors(-1)


def test_asymmetric_csr_is_rejected():
    with pytest.raises(GraphInvariantError):
        Graph.from_csr(np.array([0, 1, 1]), np.array([1]))


def test_load_edgelist_formats():
    text = b"# comment\n1 2\n2,3,extra\n\n3\t1 7\n"
    g = load_edgelist(io.BytesIO(text))
    assert g.node_count == 3
    assert g.edge_count == 3
    assert g.external_ids().tolist() == [1, 2, 3]


def test_load_edgelist_skips_header_lines():
    g = load_edgelist(io.BytesIO(b"numeric_id_1,numeric_id_2\n0,1\n1,2\n"), skip_lines=1)
    assert g.edge_count == 2


def test_parse_error_reports_line():
    with pytest.raises(ParseError) as info:
        load_edgelist(io.BytesIO(b"0 1\n1 x\n"))
    assert info.value.line_number == 2
    with pytest.raises(ParseError) as info:
        load_edgelist(io.BytesIO(b"0 1\n2\n"))
    assert info.value.line_number == 2


def test_save_edgelist_is_canonical(triangle):
    sink = io.BytesIO()
    save_edgelist(triangle, sink)
    assert sink.getvalue() == b"0 1\n0 2\n1 2\n"


def test_save_edgelist_with_labels():
    g = build_graph([(20, 10), (30, 20)])
    sink = io.BytesIO()
    save_edgelist(g, sink, use_labels=True)
    assert sink.getvalue() == b"10 20\n20 30\n"


def test_induced_subgraph_keeps_external_ids():
    g = build_graph([(5, 6), (6, 7), (7, 5), (7, 8)])
    sub = induced_subgraph(g, [1, 2, 3])
    assert sub.node_count == 3
    assert sub.edge_count == 2
    assert sub.external_ids().tolist() == [6, 7, 8]


def test_largest_component():
    g = build_graph([(0, 1), (1, 2), (2, 0), (3, 4)])
    lcc = largest_connected_component(g)
    assert lcc.node_count == 3
    assert lcc.edge_count == 3
    assert largest_connected_component(lcc) is lcc


def test_graph_from_pairs_keeps_isolated_nodes():
    g = graph_from_pairs(np.array([[0, 1]]), 3)
    assert g.node_count == 3
    assert g.degree(2) == 0
    with pytest.raises(InvalidNode):
        graph_from_pairs(np.array([[0, 3]]), 3)


@given(edge_lists)
@settings(max_examples=60, deadline=None)
def test_build_matches_networkx(edges):
    loops_only = all(u == v for u, v in edges)
    if loops_only:
        with pytest.raises(EmptyGraph):
            build_graph(edges)
        return
    g = build_graph(edges)

    expected = nx.Graph()
    expected.add_edges_from((u, v) for u, v in edges if u != v)
    assert g.node_count == expected.number_of_nodes()
    assert g.edge_count == expected.number_of_edges()
    assert int(g.degrees.sum()) == 2 * g.edge_count
    ids = g.external_ids()
    for u in range(g.node_count):
        assert g.degree(u) == expected.degree(int(ids[u]))
        for v in g.neighbors(u).tolist():
            assert g.has_edge(v, u)


@given(edge_lists)
@settings(max_examples=40, deadline=None)
def test_save_then_load_preserves_edges(edges):
    if all(u == v for u, v in edges):
        return
    g = build_graph(edges)
    sink = io.BytesIO()
    save_edgelist(g, sink, use_labels=True)
    again = load_edgelist(io.BytesIO(sink.getvalue()))
    assert again.edge_count == g.edge_count
    assert np.array_equal(again.external_ids()[again.edges()], g.external_ids()[g.edges()])
