import networkx as nx
import numpy as np
import pytest

from app.services.graph import Graph, build_graph
from tests.helpers import from_networkx


@pytest.fixture
def triangle() -> Graph:
    return build_graph([(0, 1), (1, 2), (2, 0)])


@pytest.fixture
def star() -> Graph:
    # center 0 with four leaves
    return build_graph([(0, 1), (0, 2), (0, 3), (0, 4)])


@pytest.fixture
def path5() -> Graph:
    return build_graph([(0, 1), (1, 2), (2, 3), (3, 4)])


@pytest.fixture
def barbell() -> Graph:
    """Two K4 blocks {0..3} and {4..7} joined by the bridge 3-4."""
    return from_networkx(nx.barbell_graph(4, 0))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def isolated_settings(tmp_path, monkeypatch):
    """Point the CLI's rotating log file into a temp dir."""
    from app.settings import settings

    monkeypatch.setattr(settings, "LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setattr(settings, "DATA_DIR", str(tmp_path / "data"))
    return tmp_path


@pytest.fixture(scope="session")
def small_benchmark(tmp_path_factory):
    """One graph per cell, capped at 300 nodes; shared by the harness tests."""
    from app.services.benchmark import generate_benchmark

    root = tmp_path_factory.mktemp("benchmark")
    manifest = generate_benchmark(root, master_seed=7, scale=0.01, size_cap=300)
    return manifest, root
