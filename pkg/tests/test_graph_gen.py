"""Tests for the seeded Erdos-Renyi and Barabasi-Albert generators."""

from __future__ import annotations

import math

import numpy as np
import pytest

from netdyad.dyad_graph import validate_node_graph
from netdyad.errors import NetdyadError
from netdyad.graph_gen import (
    _decode_upper_triangle,
    barabasi_albert,
    derive_seed,
    erdos_renyi,
    generate_graph,
    graph_statistics,
    grid_graph_specs,
    resolve_graph_kind,
    seed_graph_size,
    summarize_graph,
)
from netdyad.types import GraphSpec, NodeGraph


@pytest.mark.unit
def test_seed_graph_size():
    assert seed_graph_size(500) == math.ceil(5 * math.sqrt(500)) == 112
    assert seed_graph_size(100) == 50


@pytest.mark.unit
@pytest.mark.parametrize(
    ("name", "kind"),
    [("ba", "barabasi_albert"), ("ER", "erdos_renyi"), ("erdos_renyi", "erdos_renyi")],
)
def test_resolve_graph_kind(name, kind):
    assert resolve_graph_kind(name) == kind


@pytest.mark.unit
def test_resolve_graph_kind_rejects_unknown():
    with pytest.raises(NetdyadError, match="unknown graph spec"):
        resolve_graph_kind("ws")


@pytest.mark.unit
def test_decode_upper_triangle_enumerates_all_pairs():
    n_nodes = 9
    linear = np.arange(n_nodes * (n_nodes - 1) // 2)

    pairs = _decode_upper_triangle(linear, n_nodes)

    expected = [(i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes)]
    assert [tuple(p) for p in pairs.tolist()] == expected


@pytest.mark.unit
def test_erdos_renyi_is_deterministic_and_valid():
    spec = GraphSpec(kind="erdos_renyi", n_nodes=300, param=2.0, seed=7)

    first, second = erdos_renyi(spec), erdos_renyi(spec)

    assert first == second
    validate_node_graph(first)
    assert all(i < j for i, j in first.edges)


@pytest.mark.unit
def test_erdos_renyi_seeds_differ():
    base = GraphSpec(kind="erdos_renyi", n_nodes=300, param=2.0, seed=1)
    other = GraphSpec(kind="erdos_renyi", n_nodes=300, param=2.0, seed=2)

    assert erdos_renyi(base).edges != erdos_renyi(other).edges


@pytest.mark.unit
def test_erdos_renyi_mean_edge_count():
    n_nodes, lam = 500, 1.0
    counts = [
        erdos_renyi(GraphSpec("erdos_renyi", n_nodes, lam, seed=seed)).n_edges
        for seed in range(200)
    ]
    expected = math.comb(n_nodes, 2) * lam / n_nodes

    # standard error of the mean is about sqrt(249.5 / 200) ~ 1.1
    assert abs(np.mean(counts) - expected) < 5


@pytest.mark.unit
def test_erdos_renyi_full_probability_is_complete():
    graph = erdos_renyi(GraphSpec("erdos_renyi", 6, 6.0, seed=3))

    assert graph.n_edges == 15


@pytest.mark.unit
def test_graph_spec_validation():
    with pytest.raises(NetdyadError, match="integer"):
        GraphSpec("barabasi_albert", 100, 1.5)
    with pytest.raises(NetdyadError, match="exceeds 1"):
        GraphSpec("erdos_renyi", 10, 20.0)
    with pytest.raises(NetdyadError, match="seed"):
        GraphSpec("erdos_renyi", 10, 1.0, seed=-1)


@pytest.mark.unit
def test_barabasi_albert_structure():
    spec = GraphSpec(kind="barabasi_albert", n_nodes=500, param=2, seed=11)

    graph = barabasi_albert(spec)

    validate_node_graph(graph)
    n_seed = seed_graph_size(500)
    seed_edges = sum(1 for i, j in graph.edges if j < n_seed)
    assert graph.n_edges == seed_edges + 2 * (500 - n_seed)
    degrees = graph.degrees()
    assert degrees[n_seed:].min() >= 2
    assert barabasi_albert(spec) == graph


@pytest.mark.unit
def test_barabasi_albert_seed_component_ignores_nu():
    low = barabasi_albert(GraphSpec("barabasi_albert", 400, 1, seed=5))
    high = barabasi_albert(GraphSpec("barabasi_albert", 400, 3, seed=5))
    n_seed = seed_graph_size(400)

    def seed_part(graph: NodeGraph):
        return [edge for edge in graph.edges if edge[1] < n_seed]

    assert seed_part(low) == seed_part(high)


@pytest.mark.unit
def test_barabasi_albert_is_heavier_tailed_than_erdos_renyi():
    wins = 0
    for seed in range(20):
        ba = generate_graph(GraphSpec("barabasi_albert", 1000, 3, seed=seed))
        er = generate_graph(GraphSpec("erdos_renyi", 1000, 3.0, seed=seed))
        wins += ba.degrees().max() > er.degrees().max()

    assert wins >= 19


@pytest.mark.unit
def test_barabasi_albert_rejects_tiny_graphs():
    with pytest.raises(NetdyadError, match="needs N"):
        barabasi_albert(GraphSpec("barabasi_albert", 20, 1))


@pytest.mark.unit
def test_summarize_graph_on_star(star):
    stats = summarize_graph(star, kind="custom", param=0.0)

    assert stats.node_d_max == 4
    assert stats.node_d_ave == pytest.approx(8 / 5)
    assert stats.d_act == 4
    assert stats.dyad_d_max == 3
    assert stats.dyad_d_ave == pytest.approx(3.0)


@pytest.mark.unit
def test_graph_statistics_prefix_stable():
    spec = GraphSpec("erdos_renyi", 200, 2.0, seed=4)

    one = graph_statistics(spec, draws=1)
    first_draw = summarize_graph(
        generate_graph(GraphSpec("erdos_renyi", 200, 2.0, seed=derive_seed(4, 0)))
    )

    assert one.d_act == first_draw.d_act
    assert graph_statistics(spec, draws=3).draws == 3


@pytest.mark.unit
def test_grid_graph_specs_cover_every_cell():
    specs = list(grid_graph_specs(seed=9))

    assert len(specs) == 18
    assert {spec.kind for spec in specs} == {"barabasi_albert", "erdos_renyi"}
    assert {spec.n_nodes for spec in specs} == {500, 1000, 5000}
    assert all(spec.seed == 9 for spec in specs)
