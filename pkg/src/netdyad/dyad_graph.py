"""Network over active dyads: enumeration, adjacency, distances and shells.

Two dyads are adjacent when they share a sampling unit. The dyad network is
the line graph of the node-level graph; it is stored as a read-only CSR
adjacency matrix so many workers can share one instance.

Shells are computed by breadth-first search truncated at a radius, either
for a single source (:func:`shells_up_to`, :func:`dyad_distance`) or for a
block of sources at once with sparse frontier products
(:func:`iter_shell_blocks`). The full M x M distance matrix is never built.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import GraphValidationError, NetdyadError
from .settings import get_settings
from .types import DyadDistance, NodeGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DyadIndex:
    """Bijection between dyad ids ``0..M-1`` and the edges of a node graph.

    Dyads are canonical ``(i, j)`` pairs with ``i < j``, sorted
    lexicographically.
    """

    n_nodes: int
    pairs: np.ndarray
    _lookup: dict[tuple[int, int], int] = field(repr=False, compare=False)

    @property
    def n_dyads(self) -> int:
        return int(self.pairs.shape[0])

    def dyad_id(self, i: int, j: int) -> int:
        """Return the id of dyad ``{i, j}`` (order of ``i`` and ``j`` is free)."""
        key = (i, j) if i < j else (j, i)
        try:
            return self._lookup[key]
        except KeyError:
            raise NetdyadError(f"({i}, {j}) is not an active dyad") from None

    def pair(self, m: int) -> tuple[int, int]:
        _check_dyad_id(m, self.n_dyads)
        i, j = self.pairs[m]
        return int(i), int(j)

    def __contains__(self, pair: object) -> bool:
        if not isinstance(pair, tuple) or len(pair) != 2:
            return False
        i, j = pair
        return ((i, j) if i < j else (j, i)) in self._lookup

    def __len__(self) -> int:
        return self.n_dyads


class DyadNetwork:
    """Immutable adjacency structure over active dyads.

    Example:
        net = build_dyad_network(build_dyad_index(graph))
        shells = shells_up_to(net, 0, 2)
    """

    __slots__ = ("_adjacency", "_cache_radius", "_index", "_shell_cache")

    def __init__(
        self,
        index: DyadIndex,
        adjacency: sparse.csr_matrix,
        *,
        shell_cache: tuple[tuple[np.ndarray, ...], ...] | None = None,
        cache_radius: int = -1,
    ) -> None:
        for array in (adjacency.data, adjacency.indices, adjacency.indptr):
            array.flags.writeable = False
        self._index = index
        self._adjacency = adjacency
        self._shell_cache = shell_cache
        self._cache_radius = cache_radius

    @property
    def index(self) -> DyadIndex:
        return self._index

    @property
    def adjacency(self) -> sparse.csr_matrix:
        return self._adjacency

    @property
    def n_dyads(self) -> int:
        return self._adjacency.shape[0]

    @property
    def n_nodes(self) -> int:
        return self._index.n_nodes

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self._adjacency.indptr)

    @property
    def n_adjacent_pairs(self) -> int:
        return int(self._adjacency.nnz // 2)

    @property
    def cache_radius(self) -> int:
        return self._cache_radius

    def average_degree(self) -> float:
        if self.n_dyads == 0:
            return 0.0
        return float(self._adjacency.nnz / self.n_dyads)

    def neighbors(self, m: int) -> np.ndarray:
        _check_dyad_id(m, self.n_dyads)
        start, stop = self._adjacency.indptr[m], self._adjacency.indptr[m + 1]
        return self._adjacency.indices[start:stop]

    def is_adjacent(self, m: int, m2: int) -> bool:
        neighbors = self.neighbors(m)
        _check_dyad_id(m2, self.n_dyads)
        pos = np.searchsorted(neighbors, m2)
        return bool(pos < neighbors.size and neighbors[pos] == m2)

    def cached_shells(self, m: int, s_max: int) -> list[np.ndarray] | None:
        if self._shell_cache is None or s_max > self._cache_radius:
            return None
        return list(self._shell_cache[m][: s_max + 1])

    def with_shell_cache(self, radius: int) -> DyadNetwork:
        """Return a copy that answers shell queries up to ``radius`` from memory."""
        if radius < 0:
            raise NetdyadError("cache radius must be >= 0")
        matrices = shell_matrices(self, radius)
        cache = tuple(
            tuple(
                np.array(
                    matrix.indices[matrix.indptr[m] : matrix.indptr[m + 1]],
                    copy=True,
                )
                for matrix in matrices
            )
            for m in range(self.n_dyads)
        )
        logger.debug(
            "Cached dyad shells",
            extra={"n_dyads": self.n_dyads, "radius": radius},
        )
        return DyadNetwork(
            self._index, self._adjacency, shell_cache=cache, cache_radius=radius
        )


def validate_node_graph(graph: NodeGraph) -> np.ndarray:
    """Check NodeGraph invariants and return canonical ``(M, 2)`` edge pairs.

    Raises:
        GraphValidationError: on self-loops, duplicate (or reversed duplicate)
            edges, and node ids outside ``[0, n_nodes)``.
    """
    if graph.n_nodes < 0:
        raise GraphValidationError(f"n_nodes must be >= 0, got {graph.n_nodes}")
    seen: set[tuple[int, int]] = set()
    canonical: list[tuple[int, int]] = []
    for u, v in graph.edges:
        u, v = int(u), int(v)
        if u == v:
            raise GraphValidationError(f"self-loop on node {u}", pair=(u, v))
        for node in (u, v):
            if not 0 <= node < graph.n_nodes:
                raise GraphValidationError(
                    f"edge ({u}, {v}) references node {node} outside "
                    f"[0, {graph.n_nodes})",
                    pair=(u, v),
                )
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise GraphValidationError(f"duplicate edge ({u}, {v})", pair=(u, v))
        seen.add(key)
        canonical.append(key)
    pairs = np.asarray(canonical, dtype=np.int64).reshape(-1, 2)
    if pairs.shape[0]:
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        pairs = pairs[order]
    return pairs


def build_dyad_index(graph: NodeGraph) -> DyadIndex:
    """Enumerate the active dyads of ``graph`` in ``(min node, max node)`` order."""
    pairs = validate_node_graph(graph)
    pairs.flags.writeable = False
    lookup = {(int(i), int(j)): m for m, (i, j) in enumerate(pairs)}
    return DyadIndex(n_nodes=graph.n_nodes, pairs=pairs, _lookup=lookup)


def build_dyad_network(index: DyadIndex) -> DyadNetwork:
    """Build the adjacency ("share a unit") network over the dyads of ``index``.

    The line graph is ``B'B`` minus its diagonal, where ``B`` is the N x M
    node-dyad incidence matrix, so the work is ``sum over nodes C(degree, 2)``.
    """
    n_dyads = index.n_dyads
    if n_dyads == 0:
        empty = sparse.csr_matrix((0, 0), dtype=np.float64)
        return DyadNetwork(index, empty)

    rows = index.pairs.ravel()
    cols = np.repeat(np.arange(n_dyads), 2)
    incidence = sparse.csr_matrix(
        (np.ones(rows.size), (rows, cols)),
        shape=(index.n_nodes, n_dyads),
    )
    shared = (incidence.T @ incidence).tocsr()
    shared = (shared - sparse.diags(shared.diagonal())).tocsr()
    shared.eliminate_zeros()
    if shared.nnz and shared.data.max() > 1:
        # two distinct dyads sharing both units would be parallel edges
        raise GraphValidationError("parallel dyads share both units")
    shared.data[:] = 1.0
    shared.sort_indices()
    logger.debug(
        "Built dyad network",
        extra={"n_dyads": n_dyads, "adjacent_pairs": shared.nnz // 2},
    )
    return DyadNetwork(index, shared)


def dyad_distance(
    net: DyadNetwork, m: int, m2: int, cap: int | None = None
) -> DyadDistance:
    """Geodesic distance between dyads ``m`` and ``m2``, BFS truncated at ``cap``.

    Returns ``DyadDistance(inf, exact=True)`` for disconnected dyads and
    ``DyadDistance(inf, exact=False)`` when the distance exceeds ``cap``.
    """
    _check_dyad_id(m, net.n_dyads)
    _check_dyad_id(m2, net.n_dyads)
    if cap is not None and cap < 0:
        raise NetdyadError(f"cap must be >= 0, got {cap}")
    if m == m2:
        return DyadDistance(0.0)
    for s, shell in enumerate(_iter_bfs(net, m, cap), start=0):
        if s and np.any(shell == m2):
            return DyadDistance(float(s))
    reached_cap = cap is not None and _frontier_alive(net, m, cap)
    return DyadDistance(math.inf, exact=not reached_cap)


def shells_up_to(net: DyadNetwork, m: int, s_max: int) -> list[np.ndarray]:
    """Return ``[shell(m, 0), ..., shell(m, s_max)]`` as sorted id arrays.

    Shells past the eccentricity of ``m`` are empty arrays.
    """
    _check_dyad_id(m, net.n_dyads)
    if s_max < 0:
        raise NetdyadError(f"s_max must be >= 0, got {s_max}")
    cached = net.cached_shells(m, s_max)
    if cached is not None:
        return cached
    shells = list(_iter_bfs(net, m, s_max))
    empty = np.empty(0, dtype=net.adjacency.indices.dtype)
    shells.extend(empty for _ in range(s_max + 1 - len(shells)))
    return shells


def iter_shell_blocks(
    net: DyadNetwork,
    s_max: int | None,
    *,
    block_size: int | None = None,
) -> Iterator[tuple[slice, list[sparse.csr_matrix]]]:
    """Multi-source truncated BFS over consecutive blocks of source dyads.

    Yields ``(rows, shells)`` where ``shells[s - 1]`` is the ``len(rows) x M``
    0/1 indicator of dyads at distance exactly ``s`` from each source row,
    for ``s = 1..`` up to ``s_max`` (``None`` runs to exhaustion). Trailing
    empty shells are omitted.
    """
    n_dyads = net.n_dyads
    size = block_size or get_settings().shell_block_size
    for start in range(0, n_dyads, size):
        stop = min(start + size, n_dyads)
        yield slice(start, stop), _block_shells(net.adjacency, start, stop, s_max)


def shell_matrices(
    net: DyadNetwork,
    s_max: int | None,
    *,
    block_size: int | None = None,
) -> list[sparse.csr_matrix]:
    """Full M x M shell indicators for ``s = 0..s_max`` (identity first).

    With ``s_max=None`` the list runs to the diameter of the dyad network.
    """
    n_dyads = net.n_dyads
    per_distance: list[list[tuple[int, sparse.csr_matrix]]] = []
    block_rows: list[int] = []
    for rows, shells in iter_shell_blocks(net, s_max, block_size=block_size):
        block_rows.append(rows.stop - rows.start)
        for s, shell in enumerate(shells):
            while len(per_distance) <= s:
                per_distance.append([])
            per_distance[s].append((len(block_rows) - 1, shell))

    depth = len(per_distance) if s_max is None else s_max
    matrices = [sparse.identity(n_dyads, format="csr", dtype=np.float64)]
    for s in range(depth):
        pieces = per_distance[s] if s < len(per_distance) else []
        by_block = dict(pieces)
        stacked = [
            by_block.get(b, sparse.csr_matrix((n_rows, n_dyads)))
            for b, n_rows in enumerate(block_rows)
        ]
        matrix = (
            sparse.vstack(stacked, format="csr")
            if stacked
            else sparse.csr_matrix((n_dyads, n_dyads))
        )
        matrix.sort_indices()
        matrices.append(matrix)
    return matrices


def dyad_diameter(net: DyadNetwork, *, block_size: int | None = None) -> int:
    """Largest finite geodesic distance between two dyads (0 when M <= 1)."""
    diameter = 0
    for _rows, shells in iter_shell_blocks(net, None, block_size=block_size):
        diameter = max(diameter, len(shells))
    return diameter


def _block_shells(
    adjacency: sparse.csr_matrix,
    start: int,
    stop: int,
    s_max: int | None,
) -> list[sparse.csr_matrix]:
    n_rows = stop - start
    n_dyads = adjacency.shape[0]
    frontier = sparse.csr_matrix(
        (np.ones(n_rows), (np.arange(n_rows), np.arange(start, stop))),
        shape=(n_rows, n_dyads),
    )
    visited = frontier
    shells: list[sparse.csr_matrix] = []
    while s_max is None or len(shells) < s_max:
        reach = (frontier @ adjacency).tocsr()
        reach.data[:] = 1.0
        fresh = (reach - reach.multiply(visited)).tocsr()
        fresh.eliminate_zeros()
        if fresh.nnz == 0:
            break
        fresh.sort_indices()
        shells.append(fresh)
        visited = (visited + fresh).tocsr()
        frontier = fresh
    return shells


def _iter_bfs(net: DyadNetwork, m: int, cap: int | None) -> Iterator[np.ndarray]:
    """Yield shells of ``m`` from distance 0 until exhausted or ``cap``."""
    adjacency = net.adjacency
    visited = np.zeros(net.n_dyads, dtype=bool)
    visited[m] = True
    frontier = np.array([m], dtype=adjacency.indices.dtype)
    yield frontier
    depth = 0
    while cap is None or depth < cap:
        reached = np.unique(adjacency[frontier].indices)
        fresh = reached[~visited[reached]]
        if fresh.size == 0:
            return
        visited[fresh] = True
        depth += 1
        yield fresh
        frontier = fresh


def _frontier_alive(net: DyadNetwork, m: int, cap: int) -> bool:
    """True when BFS from ``m`` still has unvisited dyads one step past ``cap``."""
    return sum(1 for _ in _iter_bfs(net, m, cap + 1)) > cap + 1


def _check_dyad_id(m: int, n_dyads: int) -> None:
    if not 0 <= int(m) < n_dyads:
        raise NetdyadError(f"dyad id {m} outside [0, {n_dyads})")


__all__ = [
    "DyadIndex",
    "DyadNetwork",
    "build_dyad_index",
    "build_dyad_network",
    "dyad_diameter",
    "dyad_distance",
    "iter_shell_blocks",
    "shell_matrices",
    "shells_up_to",
    "validate_node_graph",
]
