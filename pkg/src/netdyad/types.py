"""Type definitions for dyadic regression and network-HAC inference.

Plain records only; behaviour lives in the modules that build them.
numpy arrays stored in these records are never mutated after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .constants import (
    DEFAULT_BA_SEED_LAMBDA,
    DEFAULT_BETA_TRUE,
    DEFAULT_LEVEL,
    DEFAULT_MC_BANDWIDTH,
    DEFAULT_MC_REPS,
    DEFAULT_PSD_EPSILON,
    GRAPH_KINDS,
    KERNEL_KINDS,
    SHOCK_MODES,
)
from .errors import NetdyadError

GraphKind = Literal["barabasi_albert", "erdos_renyi"]
EstimatorKind = Literal["ehw", "dyadic", "network"]
BandwidthChoice = float | Literal["auto", "diameter"]


# --- Graphs ---


@dataclass(frozen=True, slots=True)
class NodeGraph:
    """Undirected simple graph over ``n_nodes`` sampling units."""

    n_nodes: int
    edges: tuple[tuple[int, int], ...]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        """Node degrees as an int64 array of length ``n_nodes``."""
        degree = np.zeros(self.n_nodes, dtype=np.int64)
        if self.edges:
            flat = np.asarray(self.edges, dtype=np.int64).ravel()
            degree += np.bincount(flat, minlength=self.n_nodes)
        return degree


@dataclass(frozen=True, slots=True)
class DyadDistance:
    """Geodesic distance between two dyads.

    ``value`` is an integer-valued float or ``math.inf``. ``exact`` is False
    when a capped BFS stopped before it could decide, i.e. the distance is
    known only to exceed the cap.
    """

    value: float
    exact: bool = True

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    @property
    def beyond_cap(self) -> bool:
        return not self.exact


@dataclass(frozen=True, slots=True)
class GraphSpec:
    """Seeded random graph specification."""

    kind: GraphKind
    n_nodes: int
    param: float  # nu (BA, integer) or lambda (ER)
    seed: int = 0
    seed_lambda: float = DEFAULT_BA_SEED_LAMBDA

    def __post_init__(self) -> None:
        if self.kind not in GRAPH_KINDS:
            raise NetdyadError(f"unknown graph kind {self.kind!r}")
        if self.n_nodes < 1:
            raise NetdyadError(f"n_nodes must be positive, got {self.n_nodes}")
        if self.kind == "barabasi_albert" and (
            self.param < 1 or int(self.param) != self.param
        ):
            raise NetdyadError(
                f"Barabasi-Albert nu must be an integer >= 1, got {self.param}"
            )
        if self.kind == "erdos_renyi":
            if not (math.isfinite(self.param) and self.param > 0):
                raise NetdyadError(f"Erdos-Renyi lambda must be > 0, got {self.param}")
            if self.param / self.n_nodes > 1:
                raise NetdyadError(
                    f"Erdos-Renyi edge probability lambda/N = "
                    f"{self.param / self.n_nodes:g} exceeds 1"
                )
        if self.seed < 0:
            raise NetdyadError(f"seed must be >= 0, got {self.seed}")
        if not self.seed_lambda > 0:
            raise NetdyadError(f"seed_lambda must be > 0, got {self.seed_lambda}")


@dataclass(frozen=True, slots=True)
class GraphStats:
    """Node- and dyad-level summary statistics of (averaged) graph draws."""

    kind: str
    param: float
    n_nodes: int
    node_d_max: float
    node_d_ave: float
    d_act: float
    dyad_d_max: float
    dyad_d_ave: float
    draws: int = 1


# --- Regression ---


@dataclass(frozen=True)
class RegressionData:
    """Outcome vector, design matrix and the dyad each row belongs to."""

    y: np.ndarray
    X: np.ndarray
    dyad_ids: np.ndarray
    column_names: tuple[str, ...]
    group_ids: np.ndarray | None = None
    intercept_index: int | None = None

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=np.float64)
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        dyad_ids = np.asarray(self.dyad_ids, dtype=np.int64)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "dyad_ids", dyad_ids)
        n_rows = y.shape[0]
        if y.ndim != 1:
            raise NetdyadError("y must be one-dimensional")
        if X.ndim != 2 or X.shape[0] != n_rows:
            raise NetdyadError(
                f"X has {X.shape[0]} rows but y has {n_rows}; rows must align"
            )
        if dyad_ids.shape != (n_rows,):
            raise NetdyadError(
                f"dyad_ids has {dyad_ids.shape[0]} entries but y has {n_rows}"
            )
        if len(self.column_names) != X.shape[1]:
            raise NetdyadError(
                f"{len(self.column_names)} column names for {X.shape[1]} columns"
            )
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise NetdyadError("y and X must not contain NaN or infinite entries")
        if self.group_ids is not None:
            groups = np.asarray(self.group_ids)
            if groups.shape != (n_rows,):
                raise NetdyadError("group_ids must have one entry per row")
            object.__setattr__(self, "group_ids", groups)
        if self.intercept_index is not None and not (
            0 <= self.intercept_index < X.shape[1]
        ):
            raise NetdyadError("intercept_index out of range")

    @property
    def n_rows(self) -> int:
        return self.y.shape[0]

    @property
    def n_regressors(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class OlsFit:
    """Fitted OLS coefficients, residuals and the bread (X'X)^-1."""

    beta_hat: np.ndarray
    residuals: np.ndarray
    bread: np.ndarray
    data: RegressionData
    singular_values: np.ndarray

    @property
    def fitted_values(self) -> np.ndarray:
        return self.data.y - self.residuals

    @property
    def scores(self) -> np.ndarray:
        """Row-wise score contributions x_m * e_m (M x K)."""
        return self.data.X * self.residuals[:, None]


# --- Variance ---


@dataclass(frozen=True)
class VarianceEstimate:
    """K x K sandwich variance plus provenance."""

    matrix: np.ndarray
    kind: EstimatorKind
    kernel: str | None = None
    bandwidth: float | None = None
    psd_repaired: bool = False
    psd_epsilon: float | None = None
    scale: str = "raw"  # unnormalised sums: bread_raw @ meat_raw @ bread_raw

    def __post_init__(self) -> None:
        if self.kernel is not None and self.kernel not in KERNEL_KINDS:
            raise NetdyadError(f"unknown kernel {self.kernel!r}")

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix)


@dataclass(frozen=True)
class EstimateReport:
    """OLS fit plus the requested variance estimates (one row block per coefficient)."""

    fit: OlsFit
    estimates: tuple[VarianceEstimate, ...]
    level: float = DEFAULT_LEVEL
    fixed_effects: bool = False
    n_groups: int | None = None


# --- Diagnostics ---


@dataclass(frozen=True)
class DensenessReport:
    """Network denseness measures screened at one bandwidth."""

    n_dyads: int
    bandwidth: float
    radius: int
    diameter: int
    shell_density: tuple[float, ...]  # delta^d(s;1), s = 0..diameter
    delta: tuple[float, ...]  # Delta(s, b; 2), s = 0..max_s
    composite: tuple[float, ...]  # c(s, b; 2), s = 0..max_s
    alpha_grid: tuple[float, ...]
    shell_density_sum: float
    composite_mean_sum: float  # (1/M) sum_s c(s, b; 2)
    empty_shell_convention: str = "max over an empty shell contributes 0"

    @property
    def max_s(self) -> int:
        return len(self.delta) - 1


# --- Monte Carlo ---


@dataclass(frozen=True)
class McStudyConfig:
    """Full specification of one Monte Carlo experiment cell."""

    graph_kind: GraphKind
    n_nodes: int
    graph_param: float
    spillover_radius: int = 2
    gamma: float = 0.8
    beta_true: float = DEFAULT_BETA_TRUE
    reps: int = DEFAULT_MC_REPS
    level: float = DEFAULT_LEVEL
    kernel: str = "rectangular"
    bandwidth: BandwidthChoice = DEFAULT_MC_BANDWIDTH
    bandwidth_degree: str = "dyad"
    seed: int = 0
    psd_epsilon: float = DEFAULT_PSD_EPSILON
    workers: int | None = None
    fix_graph: bool = False
    shock_mode: str = "shared"
    seed_lambda: float = DEFAULT_BA_SEED_LAMBDA
    allow_negative_gamma: bool = False

    def __post_init__(self) -> None:
        low = -1.0 if self.allow_negative_gamma else 0.0
        if not (low <= self.gamma <= 1.0):
            raise NetdyadError(f"gamma must lie in [{low:g}, 1], got {self.gamma}")
        if self.spillover_radius < 0:
            raise NetdyadError("spillover radius S must be >= 0")
        if self.reps < 1:
            raise NetdyadError("reps must be >= 1")
        if not (0.0 < self.level < 1.0):
            raise NetdyadError(f"level must lie in (0, 1), got {self.level}")
        if self.kernel not in KERNEL_KINDS:
            raise NetdyadError(f"unknown kernel {self.kernel!r}")
        if self.shock_mode not in SHOCK_MODES:
            raise NetdyadError(f"unknown shock mode {self.shock_mode!r}")
        if self.psd_epsilon < 0:
            raise NetdyadError("psd_epsilon must be >= 0")
        if isinstance(self.bandwidth, str):
            if self.bandwidth not in ("auto", "diameter"):
                raise NetdyadError(f"invalid bandwidth {self.bandwidth!r}")
        elif not math.isfinite(self.bandwidth) or self.bandwidth < 0:
            raise NetdyadError(f"bandwidth must be finite and >= 0, got {self.bandwidth}")

    def graph_spec(self, seed: int) -> GraphSpec:
        return GraphSpec(
            kind=self.graph_kind,
            n_nodes=self.n_nodes,
            param=self.graph_param,
            seed=seed,
            seed_lambda=self.seed_lambda,
        )


@dataclass(frozen=True, slots=True)
class ReplicationRecord:
    """One estimator's outcome in one replication."""

    estimator: str
    covered: bool
    ci_length: float
    se: float
    beta_hat: float
    psd_repaired: bool = False


@dataclass(frozen=True, slots=True)
class ReplicationResult:
    """All estimator records of one replication."""

    rep_index: int
    attempts: int
    n_dyads: int
    records: tuple[ReplicationRecord, ...]

    def record(self, estimator: str) -> ReplicationRecord:
        for item in self.records:
            if item.estimator == estimator:
                return item
        raise KeyError(estimator)


@dataclass(frozen=True, slots=True)
class EstimatorSummary:
    """Aggregated coverage/length/bias for one estimator."""

    estimator: str
    coverage: float
    avg_length: float
    mean_se: float
    bias_pct: float
    psd_repairs: int = 0


@dataclass(frozen=True)
class McTable:
    """Aggregated Monte Carlo outputs for one configuration."""

    config: McStudyConfig
    summaries: tuple[EstimatorSummary, ...]
    empirical_se: float
    n_replications: int
    failed_attempts: int = 0
    replications: tuple[ReplicationResult, ...] = field(default=(), repr=False)

    def summary(self, estimator: str) -> EstimatorSummary:
        for item in self.summaries:
            if item.estimator == estimator:
                return item
        raise KeyError(estimator)


@dataclass(frozen=True)
class SyntheticDataset:
    """A drawn graph plus regression data generated on its dyads."""

    graph: NodeGraph
    data: RegressionData
    beta_true: np.ndarray
    spillover_radius: int
    gamma: float
