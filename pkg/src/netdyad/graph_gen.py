"""Seeded random graph generators for the Monte Carlo designs.

Erdős–Rényi graphs include each of the C(N, 2) node pairs independently with
probability ``lambda / N``. Barabási–Albert graphs grow from an Erdős–Rényi
seed component on ``ceil(5 sqrt(N))`` nodes; every later node attaches
``nu`` edges to distinct existing nodes chosen with probability
proportional to degree.

RNG streams: ``PCG64`` seeded through ``SeedSequence(spec.seed)``. The BA
generator spawns two child streams, the first for the seed graph and the
second for attachment, so the seed component of a BA draw does not depend on
``nu``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator

import numpy as np

from .constants import (
    BA_SEED_MULTIPLIER,
    GRAPH_KINDS,
    GRID_GRAPH_PARAMS,
    GRID_NODE_COUNTS,
    SPEC_ALIASES,
)
from .dyad_graph import build_dyad_index, build_dyad_network
from .errors import NetdyadError
from .types import GraphSpec, GraphStats, NodeGraph

logger = logging.getLogger(__name__)


def seed_graph_size(n_nodes: int) -> int:
    """Number of nodes in the BA seed component, ``ceil(5 sqrt(N))``."""
    return math.ceil(BA_SEED_MULTIPLIER * math.sqrt(n_nodes))


def resolve_graph_kind(name: str) -> str:
    """Map CLI aliases (``ba``/``er``) onto full graph kinds."""
    kind = SPEC_ALIASES.get(name.strip().lower(), name.strip().lower())
    if kind not in GRAPH_KINDS:
        raise NetdyadError(
            f"unknown graph spec {name!r}; expected one of "
            f"{', '.join(sorted(SPEC_ALIASES))}"
        )
    return kind


def erdos_renyi(spec: GraphSpec) -> NodeGraph:
    """Draw an Erdős–Rényi graph with edge probability ``spec.param / N``."""
    if spec.kind != "erdos_renyi":
        raise NetdyadError(f"erdos_renyi called with a {spec.kind} spec")
    rng = _generator(np.random.SeedSequence(spec.seed))
    pairs = _sample_er_pairs(spec.n_nodes, spec.param / spec.n_nodes, rng)
    return _to_node_graph(spec.n_nodes, pairs)


def barabasi_albert(spec: GraphSpec) -> NodeGraph:
    """Grow a Barabási–Albert graph from an Erdős–Rényi seed component.

    Raises:
        NetdyadError: if no node is left to attach (``N <= ceil(5 sqrt(N))``)
            or ``nu`` is not smaller than the seed component.
    """
    if spec.kind != "barabasi_albert":
        raise NetdyadError(f"barabasi_albert called with a {spec.kind} spec")
    n_nodes = spec.n_nodes
    nu = int(spec.param)
    n_seed = seed_graph_size(n_nodes)
    if n_nodes <= n_seed:
        raise NetdyadError(
            f"Barabasi-Albert needs N > ceil(5 sqrt(N)) = {n_seed}, got N={n_nodes}"
        )
    if nu >= n_seed:
        raise NetdyadError(
            f"Barabasi-Albert nu={nu} must be smaller than the seed graph "
            f"size {n_seed}"
        )
    seed_p = spec.seed_lambda / n_seed
    if seed_p > 1:
        raise NetdyadError(
            f"seed_lambda={spec.seed_lambda} gives seed edge probability above 1"
        )

    seed_stream, attach_stream = np.random.SeedSequence(spec.seed).spawn(2)
    seed_pairs = _sample_er_pairs(n_seed, seed_p, _generator(seed_stream))
    rng = _generator(attach_stream)

    degree = np.zeros(n_nodes, dtype=np.float64)
    np.add.at(degree, seed_pairs.ravel(), 1.0)
    attached = np.empty((n_nodes - n_seed, nu, 2), dtype=np.int64)
    for row, node in enumerate(range(n_seed, n_nodes)):
        weights = degree[:node]
        if np.count_nonzero(weights) < nu:
            # not enough connected nodes to draw nu distinct targets
            weights = weights + 1.0
        targets = rng.choice(node, size=nu, replace=False, p=weights / weights.sum())
        attached[row, :, 0] = targets
        attached[row, :, 1] = node
        degree[targets] += 1.0
        degree[node] = nu

    pairs = np.vstack([seed_pairs, attached.reshape(-1, 2)])
    logger.debug(
        "Generated Barabasi-Albert graph",
        extra={"n_nodes": n_nodes, "nu": nu, "seed_edges": len(seed_pairs)},
    )
    return _to_node_graph(n_nodes, pairs)


def generate_graph(spec: GraphSpec) -> NodeGraph:
    if spec.kind == "barabasi_albert":
        return barabasi_albert(spec)
    return erdos_renyi(spec)


def summarize_graph(
    graph: NodeGraph, *, kind: str = "custom", param: float = math.nan
) -> GraphStats:
    """Node degree and dyad-network degree summaries of one graph."""
    node_degrees = graph.degrees()
    net = build_dyad_network(build_dyad_index(graph))
    dyad_degrees = net.degrees
    return GraphStats(
        kind=kind,
        param=param,
        n_nodes=graph.n_nodes,
        node_d_max=float(node_degrees.max()) if node_degrees.size else 0.0,
        node_d_ave=float(node_degrees.mean()) if node_degrees.size else 0.0,
        d_act=float(net.n_dyads),
        dyad_d_max=float(dyad_degrees.max()) if dyad_degrees.size else 0.0,
        dyad_d_ave=net.average_degree(),
    )


def graph_statistics(spec: GraphSpec, draws: int = 1) -> GraphStats:
    """Average :func:`summarize_graph` over ``draws`` seeded draws of ``spec``.

    Draw ``d`` uses the seed derived from ``SeedSequence(spec.seed,
    spawn_key=(d,))``, so adding draws never changes the earlier ones.
    """
    if draws < 1:
        raise NetdyadError(f"draws must be >= 1, got {draws}")
    rows = []
    for draw in range(draws):
        child = GraphSpec(
            kind=spec.kind,
            n_nodes=spec.n_nodes,
            param=spec.param,
            seed=derive_seed(spec.seed, draw),
            seed_lambda=spec.seed_lambda,
        )
        rows.append(summarize_graph(generate_graph(child)))
    columns = ("node_d_max", "node_d_ave", "d_act", "dyad_d_max", "dyad_d_ave")
    means = {
        name: float(np.mean([getattr(row, name) for row in rows])) for name in columns
    }
    return GraphStats(
        kind=spec.kind,
        param=spec.param,
        n_nodes=spec.n_nodes,
        draws=draws,
        **means,
    )


def grid_graph_specs(seed: int = 0) -> Iterator[GraphSpec]:
    """Every (kind, param, N) cell of the full simulation grid."""
    for kind in GRAPH_KINDS:
        for param in GRID_GRAPH_PARAMS:
            for n_nodes in GRID_NODE_COUNTS:
                yield GraphSpec(kind=kind, n_nodes=n_nodes, param=param, seed=seed)


def derive_seed(seed: int, *key: int) -> int:
    """Deterministic 64-bit child seed of ``seed`` for the given spawn key."""
    state = np.random.SeedSequence(seed, spawn_key=key).generate_state(1, np.uint64)
    return int(state[0])


def _generator(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_seq))


def _sample_er_pairs(n_nodes: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted ``(i, j)`` pairs, ``i < j``, each included with probability ``p``.

    The edge count is Binomial(C(N, 2), p); the pairs are then drawn uniformly
    without replacement by their linear index in the upper triangle.
    """
    n_pairs = n_nodes * (n_nodes - 1) // 2
    if n_pairs == 0:
        return np.empty((0, 2), dtype=np.int64)
    n_edges = int(rng.binomial(n_pairs, min(p, 1.0)))
    linear = np.sort(rng.choice(n_pairs, size=n_edges, replace=False))
    return _decode_upper_triangle(linear.astype(np.int64), n_nodes)


def _decode_upper_triangle(linear: np.ndarray, n_nodes: int) -> np.ndarray:
    """Map row-major upper-triangle indices back to ``(i, j)`` pairs."""
    if linear.size == 0:
        return np.empty((0, 2), dtype=np.int64)

    def row_start(i: np.ndarray) -> np.ndarray:
        return i * (2 * n_nodes - i - 1) // 2

    b = 2 * n_nodes - 1
    i = np.floor((b - np.sqrt(float(b) ** 2 - 8.0 * linear)) / 2).astype(np.int64)
    i = np.clip(i, 0, n_nodes - 2)
    # float rounding can land one row off in either direction
    i = np.where(row_start(i) > linear, i - 1, i)
    i = np.where(row_start(i + 1) <= linear, i + 1, i)
    j = linear - row_start(i) + i + 1
    return np.column_stack([i, j])


def _to_node_graph(n_nodes: int, pairs: np.ndarray) -> NodeGraph:
    pairs = np.sort(pairs, axis=1)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    edges = tuple((int(i), int(j)) for i, j in pairs[order])
    return NodeGraph(n_nodes=n_nodes, edges=edges)


__all__ = [
    "barabasi_albert",
    "derive_seed",
    "erdos_renyi",
    "generate_graph",
    "graph_statistics",
    "grid_graph_specs",
    "resolve_graph_kind",
    "seed_graph_size",
    "summarize_graph",
]
