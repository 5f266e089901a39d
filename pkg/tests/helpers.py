import networkx as nx
import numpy as np

from app.services.graph import Graph, graph_from_pairs


def from_networkx(nx_graph) -> Graph:
    """Graph over 0..n-1 from a networkx graph whose nodes are 0..n-1."""
    pairs = np.asarray(list(nx_graph.edges()), dtype=np.int64).reshape(-1, 2)
    return graph_from_pairs(pairs, nx_graph.number_of_nodes())


def cycle(n: int) -> Graph:
    return from_networkx(nx.cycle_graph(n))


def complete(n: int) -> Graph:
    return from_networkx(nx.complete_graph(n))
