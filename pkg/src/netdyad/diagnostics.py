"""Denseness measures of the dyad network.

For radius ``s`` and exponent ``k``:

* shell density ``delta(s; k)``: mean over dyads of ``|shell(m, s)|^k``;
* ``Delta(s, r; k)``: mean over dyads of the largest
  ``|N(m; r) \\ N(m'; s - 1)|^k`` over ``m'`` in ``shell(m, s)``, with
  ``N(m'; -1)`` empty and an empty shell contributing 0;
* composite ``c(s, r; k)``: the minimum over an alpha grid of
  ``Delta(s, r; k alpha)^(1/alpha) * delta(s; alpha/(alpha-1))^((alpha-1)/alpha)``.

These screen, in a finite sample, the conditions under which the
network-HAC estimator is consistent. They are advisory.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np
from scipy import sparse

from .constants import ALPHA_GRID_HIGH, ALPHA_GRID_LOW, ALPHA_GRID_POINTS
from .dyad_graph import DyadNetwork, iter_shell_blocks, shell_matrices
from .errors import NetdyadError
from .settings import get_settings
from .types import DensenessReport

logger = logging.getLogger(__name__)


def default_alpha_grid() -> tuple[float, ...]:
    """40 log-spaced points on ``[1.01, 8]``."""
    grid = np.geomspace(ALPHA_GRID_LOW, ALPHA_GRID_HIGH, ALPHA_GRID_POINTS)
    return tuple(float(alpha) for alpha in grid)


class ShellProfile:
    """Shell indicators and cumulative neighborhoods of every dyad.

    Built once per network up to ``max_radius`` (the diameter when None),
    then queried for any ``(s, r, k)`` within that radius without repeating
    the BFS. Memory grows with the number of dyad pairs inside the radius.
    """

    def __init__(self, net: DyadNetwork, max_radius: int | None = None) -> None:
        if net.n_dyads == 0:
            raise NetdyadError("denseness measures need at least one dyad")
        if max_radius is not None:
            _check_radius(max_radius, "max_radius")
        self.net = net
        self.shells = shell_matrices(net, max_radius)
        self.max_radius = len(self.shells) - 1
        # an empty shell inside the radius means every later shell is empty too
        self.exhausted = max_radius is None or any(
            shell.nnz == 0 for shell in self.shells[1:]
        )
        self._neighborhoods: list[sparse.csr_matrix] = []
        running = None
        for shell in self.shells:
            running = shell if running is None else (running + shell).tocsr()
            self._neighborhoods.append(running)

    @property
    def n_dyads(self) -> int:
        return self.net.n_dyads

    def shell_sizes(self, s: int) -> np.ndarray:
        """``|shell(m, s)|`` for every dyad ``m``."""
        self._check_reach(s, "s")
        if s > self.max_radius:
            return np.zeros(self.n_dyads)
        return self.shells[s].getnnz(axis=1).astype(np.float64)

    def neighborhood(self, r: int) -> sparse.csr_matrix:
        """Indicator of ``N(m; r)``, the dyads within distance ``r``."""
        self._check_reach(r, "r")
        return self._neighborhoods[min(r, self.max_radius)]

    def neighborhood_sizes(self, r: int) -> np.ndarray:
        return self.neighborhood(r).getnnz(axis=1).astype(np.float64)

    def delta_terms(self, s: int, r: int) -> np.ndarray:
        """Per-dyad ``max_{m' in shell(m, s)} |N(m; r) \\ N(m'; s - 1)|``."""
        self._check_reach(s, "s")
        reach = self.neighborhood_sizes(r)
        if s == 0:
            return reach
        terms = np.zeros(self.n_dyads)
        if s > self.max_radius:
            return terms
        shell = self.shells[s]
        inner = self.neighborhood(s - 1)
        outer = self.neighborhood(r)
        block = get_settings().shell_block_size
        for start in range(0, self.n_dyads, block):
            stop = min(start + block, self.n_dyads)
            overlap = (outer[start:stop] @ inner.T).tocsr()
            terms[start:stop] = reach[start:stop] - _min_over_shell(
                shell[start:stop], overlap
            )
        terms[shell.getnnz(axis=1) == 0] = 0.0
        return terms

    def _check_reach(self, value: int, name: str) -> None:
        _check_radius(value, name)
        if value > self.max_radius and not self.exhausted:
            raise NetdyadError(
                f"{name}={value} lies beyond the profile radius {self.max_radius}"
            )


def shell_sizes(net: DyadNetwork, s_max: int) -> np.ndarray:
    """``(M, s_max + 1)`` array of shell sizes, shell 0 first."""
    _check_radius(s_max, "s_max")
    return _shell_size_table(net, s_max)


def shell_density(net: DyadNetwork, s: int, k: float) -> float:
    """``(1/M) sum_m |shell(m, s)|^k``."""
    _check_radius(s, "s")
    _check_exponent(k)
    return _power_mean(_shell_size_table(net, s)[:, s], k)


def delta_density(net: DyadNetwork, s: int, r: int, k: float) -> float:
    """``(1/M) sum_m max_{m' in shell(m, s)} |N(m; r) \\ N(m'; s - 1)|^k``."""
    _check_radius(s, "s")
    _check_radius(r, "r")
    _check_exponent(k)
    return _power_mean(ShellProfile(net, max(s, r)).delta_terms(s, r), k)


def composite_density(
    net: DyadNetwork,
    s: int,
    r: int,
    k: float,
    alpha_grid: Sequence[float] | None = None,
) -> float:
    """Grid minimum of the composite density over ``alpha > 1``."""
    grid = _check_alpha_grid(alpha_grid)
    _check_radius(s, "s")
    _check_radius(r, "r")
    _check_exponent(k)
    profile = ShellProfile(net, max(s, r))
    return _composite(profile.delta_terms(s, r), profile.shell_sizes(s), k, grid)


def denseness_report(
    net: DyadNetwork,
    bandwidth: float,
    *,
    max_s: int | None = None,
    alpha_grid: Sequence[float] | None = None,
) -> DensenessReport:
    """Shell-density profile plus ``Delta`` and composite sums at ``bandwidth``.

    The neighborhood radius is ``floor(bandwidth)``. Sums run over
    ``s = 0..diameter`` unless ``max_s`` caps them. The shell-density profile
    always covers the diameter from a streaming pass over shell sizes; the
    neighborhoods behind ``Delta`` are built only up to
    ``max(max_s, radius)``.
    """
    if not (math.isfinite(bandwidth) and bandwidth >= 0):
        raise NetdyadError(f"bandwidth must be finite and >= 0, got {bandwidth}")
    if max_s is not None:
        _check_radius(max_s, "max_s")
    grid = _check_alpha_grid(alpha_grid)
    sizes = _shell_size_table(net, None)
    diameter = sizes.shape[1] - 1
    radius = math.floor(bandwidth)
    last_s = diameter if max_s is None else max_s
    reach = min(radius, diameter)
    profile = ShellProfile(net, max(min(last_s, diameter), reach))

    profile_density = tuple(_power_mean(sizes[:, s], 1.0) for s in range(diameter + 1))
    deltas: list[float] = []
    composites: list[float] = []
    empty = np.zeros(net.n_dyads)
    for s in range(last_s + 1):
        within = s <= diameter
        terms = profile.delta_terms(s, reach) if within else empty
        deltas.append(_power_mean(terms, 2.0))
        composites.append(
            _composite(terms, sizes[:, s] if within else empty, 2.0, grid)
        )

    density_sum = float(sum(profile_density[: last_s + 1]))
    composite_sum = float(sum(composites)) / net.n_dyads
    logger.debug(
        "Computed denseness report",
        extra={"n_dyads": net.n_dyads, "bandwidth": bandwidth, "diameter": diameter},
    )
    return DensenessReport(
        n_dyads=net.n_dyads,
        bandwidth=float(bandwidth),
        radius=radius,
        diameter=diameter,
        shell_density=profile_density,
        delta=tuple(deltas),
        composite=tuple(composites),
        alpha_grid=grid,
        shell_density_sum=density_sum,
        composite_mean_sum=composite_sum,
    )


def _shell_size_table(net: DyadNetwork, s_max: int | None) -> np.ndarray:
    """``(M, depth + 1)`` shell sizes from a blocked BFS that keeps only counts.

    ``depth`` is ``s_max``, or the diameter when ``s_max`` is None.
    """
    n_dyads = net.n_dyads
    if n_dyads == 0:
        raise NetdyadError("denseness measures need at least one dyad")
    columns = [np.ones(n_dyads)]
    for rows, shells in iter_shell_blocks(net, s_max):
        for s, shell in enumerate(shells, start=1):
            while len(columns) <= s:
                columns.append(np.zeros(n_dyads))
            columns[s][rows] = shell.getnnz(axis=1)
    while s_max is not None and len(columns) <= s_max:
        columns.append(np.zeros(n_dyads))
    return np.column_stack(columns)


def _composite(
    delta_terms: np.ndarray,
    sizes: np.ndarray,
    k: float,
    grid: Sequence[float],
) -> float:
    best = math.inf
    for alpha in grid:
        delta = _power_mean(delta_terms, k * alpha)
        density = _power_mean(sizes, alpha / (alpha - 1.0))
        value = delta ** (1.0 / alpha) * density ** ((alpha - 1.0) / alpha)
        best = min(best, value)
    return float(best)


def _min_over_shell(shell: sparse.csr_matrix, overlap: sparse.csr_matrix) -> np.ndarray:
    """Row-wise minimum of ``overlap`` over the positions set in ``shell``.

    Positions missing from ``overlap`` count as 0; empty rows give 0.
    """
    hits = shell.multiply(overlap).tocsr()
    hits.eliminate_zeros()
    shell_counts = np.diff(shell.indptr)
    hit_counts = np.diff(hits.indptr)
    minima = np.zeros(shell.shape[0])
    nonempty = np.flatnonzero(hit_counts > 0)
    if nonempty.size:
        # nonempty rows own contiguous, back-to-back slices of hits.data
        row_min = np.minimum.reduceat(hits.data, hits.indptr[:-1][nonempty])
        full = hit_counts[nonempty] == shell_counts[nonempty]
        minima[nonempty[full]] = row_min[full]
    return minima


def _power_mean(values: np.ndarray, k: float) -> float:
    if values.size == 0:
        return 0.0
    return float(np.mean(np.power(values, k)))


def _check_radius(value: int, name: str) -> None:
    if int(value) != value or value < 0:
        raise NetdyadError(f"{name} must be an integer >= 0, got {value}")


def _check_exponent(k: float) -> None:
    if not (math.isfinite(k) and k > 0):
        raise NetdyadError(f"exponent k must be > 0, got {k}")


def _check_alpha_grid(alpha_grid: Sequence[float] | None) -> tuple[float, ...]:
    grid = default_alpha_grid() if alpha_grid is None else tuple(map(float, alpha_grid))
    if not grid:
        raise NetdyadError("alpha grid must not be empty")
    bad = [alpha for alpha in grid if not alpha > 1.0]
    if bad:
        raise NetdyadError(f"alpha grid values must exceed 1, got {bad[0]}")
    return grid


__all__ = [
    "ShellProfile",
    "composite_density",
    "default_alpha_grid",
    "delta_density",
    "denseness_report",
    "shell_density",
    "shell_sizes",
]
