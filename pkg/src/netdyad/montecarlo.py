"""Monte Carlo coverage study for the three variance estimators.

Data generating process on a drawn graph with active dyads ``m = (i, j)``:

* ``x_m = |z_i - z_j|`` with one standard Normal ``z`` per node;
* ``e_m = eta_mm + sum_{s=1..S} gamma^s sum_{m' in shell(m, s)} eta_mm'``;
* ``y_m = beta * x_m + e_m`` (no intercept).

In the default ``shared`` shock mode each unordered pair ``{m, m'}`` within
distance ``S`` has one shock that loads on both dyads; ``ordered`` draws an
independent shock per ordered pair that loads on its first dyad only, so
errors are uncorrelated and only their variances grow with shell sizes.

Replication ``r`` draws everything from ``SeedSequence(seed, spawn_key=(r, a))``
where ``a`` counts failed attempts (no dyads, or a singular design), so a
table depends only on the base seed, never on the worker count.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable, Iterator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache, partial

import numpy as np
from scipy import sparse

from .constants import (
    ESTIMATOR_KINDS,
    GRAPH_KINDS,
    GRID_GRAPH_PARAMS,
    GRID_NODE_COUNTS,
    MAX_REPLICATION_ATTEMPTS,
    SHOCK_MODES,
)
from .dyad_graph import (
    DyadIndex,
    DyadNetwork,
    build_dyad_index,
    build_dyad_network,
    shell_matrices,
)
from .errors import NetdyadError, RankDeficiencyError
from .graph_gen import derive_seed, generate_graph
from .observability import log_timing
from .regression import ols_fit
from .settings import get_settings
from .types import (
    EstimatorSummary,
    GraphSpec,
    McStudyConfig,
    McTable,
    OlsFit,
    RegressionData,
    ReplicationRecord,
    ReplicationResult,
    SyntheticDataset,
)
from .variance import (
    confidence_interval,
    ensure_psd,
    estimate_variance,
    resolve_bandwidth,
)

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int], None]


@dataclass(frozen=True)
class _GraphContext:
    index: DyadIndex
    net: DyadNetwork
    bandwidth: float
    loading: sparse.csr_matrix


def simulate_covariates(idx: DyadIndex, rng: np.random.Generator) -> np.ndarray:
    """``x_m = |z_i - z_j|`` with one standard Normal ``z`` per node."""
    z = rng.standard_normal(idx.n_nodes)
    return np.abs(z[idx.pairs[:, 0]] - z[idx.pairs[:, 1]])


def error_loading(
    net: DyadNetwork,
    spillover_radius: int,
    gamma: float,
    *,
    mode: str = "shared",
    allow_negative_gamma: bool = False,
) -> sparse.csr_matrix:
    """Sparse matrix ``L`` with ``e = L @ eta`` for i.i.d. standard Normal ``eta``.

    The first ``M`` columns are the own shocks (weight ``gamma^0 = 1``). Pair
    columns follow in increasing distance; ``gamma = 0`` or ``S = 0`` leaves
    only the own shocks.
    """
    _check_error_params(spillover_radius, gamma, mode, allow_negative_gamma)
    n_dyads = net.n_dyads
    rows = [np.arange(n_dyads)]
    cols = [np.arange(n_dyads)]
    values = [np.ones(n_dyads)]
    n_columns = n_dyads
    if gamma != 0 and spillover_radius > 0 and n_dyads:
        shells = shell_matrices(net, spillover_radius)
        for s in range(1, spillover_radius + 1):
            weight = gamma**s
            if mode == "shared":
                pairs = sparse.triu(shells[s], k=1).tocoo()
                n_pairs = pairs.nnz
                pair_cols = n_columns + np.arange(n_pairs)
                rows.extend([pairs.row, pairs.col])
                cols.extend([pair_cols, pair_cols])
                values.extend([np.full(n_pairs, weight)] * 2)
            else:
                pairs = shells[s].tocoo()
                n_pairs = pairs.nnz
                rows.append(pairs.row)
                cols.append(n_columns + np.arange(n_pairs))
                values.append(np.full(n_pairs, weight))
            n_columns += n_pairs
    return sparse.csr_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_dyads, n_columns),
    )


def simulate_errors(
    net: DyadNetwork,
    spillover_radius: int,
    gamma: float,
    rng: np.random.Generator,
    *,
    mode: str = "shared",
    size: int | None = None,
    allow_negative_gamma: bool = False,
) -> np.ndarray:
    """Draw ``e`` (length ``M``) or ``size`` independent draws (``M x size``).

    ``Var(e_m) = sum_{s=0..S} gamma^(2s) |shell(m, s)|`` in both shock modes.
    """
    loading = error_loading(
        net,
        spillover_radius,
        gamma,
        mode=mode,
        allow_negative_gamma=allow_negative_gamma,
    )
    return _draw_errors(loading, rng, size)


def run_replication(cfg: McStudyConfig, rep_index: int) -> ReplicationResult:
    """One replication: draw, fit, and check every estimator's interval.

    Raises:
        NetdyadError: if every one of ``MAX_REPLICATION_ATTEMPTS`` substreams
            gives an unusable draw.
    """
    for attempt in range(MAX_REPLICATION_ATTEMPTS):
        graph_stream, covariate_stream, error_stream = np.random.SeedSequence(
            cfg.seed, spawn_key=(rep_index, attempt)
        ).spawn(3)
        if cfg.fix_graph:
            context = _cached_context(cfg, derive_seed(cfg.seed))
        else:
            graph_seed = int(graph_stream.generate_state(1, np.uint64)[0])
            context = _build_context(cfg, graph_seed)
        if context is None:
            if cfg.fix_graph:
                raise NetdyadError("the fixed graph has no active dyads")
            continue

        x = simulate_covariates(context.index, _generator(covariate_stream))
        errors = _draw_errors(context.loading, _generator(error_stream), None)
        n_dyads = context.net.n_dyads
        data = RegressionData(
            y=cfg.beta_true * x + errors,
            X=x[:, None],
            dyad_ids=np.arange(n_dyads),
            column_names=("x",),
        )
        try:
            fit = ols_fit(data)
        except RankDeficiencyError:
            logger.debug(
                "Replication attempt had a singular design",
                extra={"rep": rep_index, "attempt": attempt},
            )
            continue

        records = tuple(
            _estimator_record(kind, fit, context, cfg) for kind in ESTIMATOR_KINDS
        )
        return ReplicationResult(
            rep_index=rep_index,
            attempts=attempt + 1,
            n_dyads=n_dyads,
            records=records,
        )
    raise NetdyadError(
        f"replication {rep_index} failed on all {MAX_REPLICATION_ATTEMPTS} "
        "attempts (graphs without dyads or singular designs)"
    )


def run_study(
    cfg: McStudyConfig, *, progress: ProgressCallback | None = None
) -> McTable:
    """Run ``cfg.reps`` replications and aggregate them into a table.

    Replications go through ``ProcessPoolExecutor.map`` (in-process when a
    single worker is requested), which returns them in index order.
    """
    workers = min(get_settings().determine_worker_count(cfg.workers), cfg.reps)
    logger.info(
        "Starting Monte Carlo study",
        extra={"reps": cfg.reps, "workers": workers, "graph_kind": cfg.graph_kind},
    )
    task = partial(run_replication, cfg)
    with log_timing(
        logger, "Finished Monte Carlo study", reps=cfg.reps, workers=workers
    ) as fields:
        if workers <= 1:
            results = _collect(map(task, range(cfg.reps)), cfg.reps, progress)
        else:
            chunksize = max(1, cfg.reps // (workers * 8))
            with ProcessPoolExecutor(max_workers=workers) as executor:
                stream = executor.map(task, range(cfg.reps), chunksize=chunksize)
                results = _collect(stream, cfg.reps, progress)
        table = aggregate(cfg, results)
        fields["failed_attempts"] = table.failed_attempts
    return table


def aggregate(cfg: McStudyConfig, results: list[ReplicationResult]) -> McTable:
    """Coverage, average length, mean SE and SE bias per estimator."""
    if not results:
        raise NetdyadError("no replication completed")
    beta_hats = np.array([result.records[0].beta_hat for result in results])
    empirical_se = float(np.std(beta_hats, ddof=1)) if len(results) > 1 else math.nan
    summaries = []
    for kind in ESTIMATOR_KINDS:
        records = [result.record(kind) for result in results]
        mean_se = float(np.mean([record.se for record in records]))
        if math.isfinite(empirical_se) and empirical_se > 0:
            bias_pct = (mean_se - empirical_se) / empirical_se * 100.0
        else:
            bias_pct = math.nan
        summaries.append(
            EstimatorSummary(
                estimator=kind,
                coverage=float(np.mean([record.covered for record in records])),
                avg_length=float(np.mean([record.ci_length for record in records])),
                mean_se=mean_se,
                bias_pct=bias_pct,
                psd_repairs=sum(record.psd_repaired for record in records),
            )
        )
    return McTable(
        config=cfg,
        summaries=tuple(summaries),
        empirical_se=empirical_se,
        n_replications=len(results),
        failed_attempts=sum(result.attempts - 1 for result in results),
        replications=tuple(results),
    )


def coverage_grid(
    spillover_radius: int = 2,
    gamma: float = 0.8,
    reps: int = 5000,
    **overrides,
) -> Iterator[McStudyConfig]:
    """Every (graph kind, parameter, N) cell of the full coverage grid."""
    for kind in GRAPH_KINDS:
        for param in GRID_GRAPH_PARAMS:
            for n_nodes in GRID_NODE_COUNTS:
                yield McStudyConfig(
                    graph_kind=kind,
                    n_nodes=n_nodes,
                    graph_param=param,
                    spillover_radius=spillover_radius,
                    gamma=gamma,
                    reps=reps,
                    **overrides,
                )


def run_grid(
    configs: Iterable[McStudyConfig],
    *,
    progress: Callable[[McStudyConfig, int, int], None] | None = None,
) -> list[McTable]:
    tables = []
    for cfg in configs:
        callback = partial(progress, cfg) if progress is not None else None
        tables.append(run_study(cfg, progress=callback))
    return tables


def synthesize_dataset(
    spec: GraphSpec,
    *,
    spillover_radius: int = 2,
    gamma: float = 0.8,
    n_covariates: int = 1,
    n_groups: int = 0,
    beta: Iterable[float] | None = None,
    mode: str = "shared",
) -> SyntheticDataset:
    """Draw a graph and a regression dataset on its dyads.

    Covariate ``x1`` is ``|z_i - z_j|``; further covariates are sums of
    independent node attributes ``w_i + w_j``, so every covariate is
    correlated across adjacent dyads. With ``n_groups > 0`` each dyad gets a
    uniformly drawn group with a standard Normal group intercept.
    """
    if n_covariates < 1:
        raise NetdyadError("synthetic data needs at least one covariate")
    if n_groups < 0:
        raise NetdyadError("n_groups must be >= 0")
    beta_true = (
        np.ones(n_covariates) if beta is None else np.asarray(list(beta), dtype=float)
    )
    if beta_true.shape != (n_covariates,):
        raise NetdyadError(
            f"beta has {beta_true.size} entries for {n_covariates} covariates"
        )
    _check_error_params(spillover_radius, gamma, mode, allow_negative_gamma=False)

    graph_stream, covariate_stream, error_stream, group_stream = (
        np.random.SeedSequence(spec.seed).spawn(4)
    )
    graph_seed = int(graph_stream.generate_state(1, np.uint64)[0])
    graph = generate_graph(replace(spec, seed=graph_seed))
    index = build_dyad_index(graph)
    if index.n_dyads == 0:
        raise NetdyadError("the drawn graph has no active dyads")
    net = build_dyad_network(index)

    rng = _generator(covariate_stream)
    columns = [simulate_covariates(index, rng)]
    for _ in range(n_covariates - 1):
        w = rng.standard_normal(index.n_nodes)
        columns.append(w[index.pairs[:, 0]] + w[index.pairs[:, 1]])
    X = np.column_stack(columns)
    y = X @ beta_true + simulate_errors(
        net, spillover_radius, gamma, _generator(error_stream), mode=mode
    )

    group_ids = None
    if n_groups:
        group_rng = _generator(group_stream)
        group_ids = group_rng.integers(0, n_groups, size=index.n_dyads)
        y = y + group_rng.standard_normal(n_groups)[group_ids]

    data = RegressionData(
        y=y,
        X=X,
        dyad_ids=np.arange(index.n_dyads),
        column_names=tuple(f"x{k + 1}" for k in range(n_covariates)),
        group_ids=group_ids,
    )
    return SyntheticDataset(
        graph=graph,
        data=data,
        beta_true=beta_true,
        spillover_radius=spillover_radius,
        gamma=gamma,
    )


def _estimator_record(
    kind: str, fit: OlsFit, context: _GraphContext, cfg: McStudyConfig
) -> ReplicationRecord:
    estimate = estimate_variance(
        kind,
        fit,
        context.net,
        kernel=cfg.kernel,
        bandwidth=context.bandwidth,
    )
    estimate = ensure_psd(estimate, cfg.psd_epsilon)
    repaired = estimate.psd_repaired
    low, high = confidence_interval(fit, estimate, 0, cfg.level)
    return ReplicationRecord(
        estimator=kind,
        covered=bool(low <= cfg.beta_true <= high),
        ci_length=high - low,
        se=math.sqrt(float(estimate.matrix[0, 0])),
        beta_hat=float(fit.beta_hat[0]),
        psd_repaired=repaired,
    )


def _build_context(cfg: McStudyConfig, graph_seed: int) -> _GraphContext | None:
    graph = generate_graph(cfg.graph_spec(graph_seed))
    index = build_dyad_index(graph)
    if index.n_dyads < 1:
        return None
    net = build_dyad_network(index)
    bandwidth = resolve_bandwidth(cfg.bandwidth, net, degree=cfg.bandwidth_degree)
    loading = error_loading(
        net,
        cfg.spillover_radius,
        cfg.gamma,
        mode=cfg.shock_mode,
        allow_negative_gamma=cfg.allow_negative_gamma,
    )
    return _GraphContext(index=index, net=net, bandwidth=bandwidth, loading=loading)


_cached_context = lru_cache(maxsize=4)(_build_context)


def _draw_errors(
    loading: sparse.csr_matrix, rng: np.random.Generator, size: int | None
) -> np.ndarray:
    shape = (loading.shape[1],) if size is None else (loading.shape[1], size)
    return loading @ rng.standard_normal(shape)


def _collect(
    stream: Iterable[ReplicationResult],
    total: int,
    progress: ProgressCallback | None,
) -> list[ReplicationResult]:
    results = []
    for done, result in enumerate(stream, start=1):
        results.append(result)
        if progress is not None:
            progress(done, total)
    return results


def _check_error_params(
    spillover_radius: int, gamma: float, mode: str, allow_negative_gamma: bool
) -> None:
    if spillover_radius < 0:
        raise NetdyadError(f"spillover radius must be >= 0, got {spillover_radius}")
    low = -1.0 if allow_negative_gamma else 0.0
    if not low <= gamma <= 1.0:
        raise NetdyadError(f"gamma must lie in [{low:g}, 1], got {gamma}")
    if mode not in SHOCK_MODES:
        raise NetdyadError(f"unknown shock mode {mode!r}")


def _generator(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_seq))


__all__ = [
    "aggregate",
    "coverage_grid",
    "error_loading",
    "run_grid",
    "run_replication",
    "run_study",
    "simulate_covariates",
    "simulate_errors",
    "synthesize_dataset",
]
