"""Test fixtures for netdyad tests."""

from __future__ import annotations

import os

import numpy as np
import pytest

from netdyad.dyad_graph import DyadNetwork, build_dyad_index, build_dyad_network
from netdyad.settings import reload_settings
from netdyad.types import NodeGraph

RUN_SLOW_ENV = "NETDYAD_RUN_SLOW"


def pytest_collection_modifyitems(config, items):
    if os.environ.get(RUN_SLOW_ENV) == "1":
        return
    skip_slow = pytest.mark.skip(reason=f"set {RUN_SLOW_ENV}=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def _reset_settings_cache():
    reload_settings()
    yield
    reload_settings()


def network_of(graph: NodeGraph) -> DyadNetwork:
    return build_dyad_network(build_dyad_index(graph))


def random_graph(rng: np.random.Generator, n_nodes: int, p: float) -> NodeGraph:
    """Erdos-Renyi style graph drawn directly, independent of graph_gen."""
    upper = np.triu(rng.random((n_nodes, n_nodes)) < p, k=1)
    i, j = np.nonzero(upper)
    return NodeGraph(n_nodes=n_nodes, edges=tuple(zip(i.tolist(), j.tolist(), strict=True)))


@pytest.fixture
def triangle() -> NodeGraph:
    """Three nodes, three edges: every pair of dyads is adjacent."""
    return NodeGraph(n_nodes=3, edges=((0, 1), (1, 2), (0, 2)))


@pytest.fixture
def path4() -> NodeGraph:
    """Path 0-1-2-3: dyads (0,1), (1,2), (2,3) at distances 1 and 2."""
    return NodeGraph(n_nodes=4, edges=((0, 1), (1, 2), (2, 3)))


@pytest.fixture
def star() -> NodeGraph:
    """Node 0 joined to 1..4: four mutually adjacent dyads."""
    return NodeGraph(n_nodes=5, edges=((0, 1), (0, 2), (0, 3), (0, 4)))


@pytest.fixture
def two_components() -> NodeGraph:
    """Disjoint edges (0,1)-(1,2) and (3,4)."""
    return NodeGraph(n_nodes=5, edges=((0, 1), (1, 2), (3, 4)))


@pytest.fixture
def small_random_graphs() -> list[NodeGraph]:
    rng = np.random.default_rng(20240611)
    graphs = []
    while len(graphs) < 25:
        graph = random_graph(rng, int(rng.integers(4, 12)), float(rng.uniform(0.15, 0.5)))
        if 2 <= graph.n_edges <= 30:
            graphs.append(graph)
    return graphs


@pytest.fixture
def make_network():
    return network_of


@pytest.fixture
def make_random_graph():
    return random_graph
