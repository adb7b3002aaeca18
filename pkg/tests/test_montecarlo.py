"""Tests for the Monte Carlo data generating process and coverage study."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from netdyad.constants import ESTIMATOR_KINDS
from netdyad.dyad_graph import build_dyad_index, shell_matrices, shells_up_to
from netdyad.errors import NetdyadError
from netdyad.montecarlo import (
    aggregate,
    coverage_grid,
    error_loading,
    run_replication,
    run_study,
    simulate_covariates,
    simulate_errors,
    synthesize_dataset,
)
from netdyad.regression import ols_fit
from netdyad.types import (
    GraphSpec,
    McStudyConfig,
    NodeGraph,
    ReplicationRecord,
    ReplicationResult,
)


def _config(**overrides) -> McStudyConfig:
    base = {
        "graph_kind": "erdos_renyi",
        "n_nodes": 120,
        "graph_param": 2.0,
        "reps": 5,
        "seed": 17,
        "workers": 1,
    }
    base.update(overrides)
    return McStudyConfig(**base)


@pytest.fixture
def ten_dyads(make_network):
    """A node-0 star of three edges with a seven-edge tail from node 3."""
    edges = ((0, 1), (0, 2), (0, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (8, 9), (9, 10))
    return make_network(NodeGraph(n_nodes=11, edges=edges))


@pytest.mark.unit
def test_covariates_are_half_normal_with_scale_two():
    n_pairs = 100_000
    matching = NodeGraph(
        n_nodes=2 * n_pairs, edges=tuple((2 * k, 2 * k + 1) for k in range(n_pairs))
    )

    x = simulate_covariates(build_dyad_index(matching), np.random.default_rng(3))

    assert x.min() >= 0.0
    assert x.mean() == pytest.approx(2 / math.sqrt(math.pi), rel=0.01)


@pytest.mark.unit
def test_zero_gamma_leaves_only_own_shocks(ten_dyads):
    loading = error_loading(ten_dyads, 3, 0.0)

    np.testing.assert_array_equal(loading.toarray(), np.eye(10))
    draws = simulate_errors(ten_dyads, 3, 0.0, np.random.default_rng(0))
    np.testing.assert_array_equal(draws, np.random.default_rng(0).standard_normal(10))


@pytest.mark.unit
@pytest.mark.parametrize("mode", ["shared", "ordered"])
def test_loading_gives_shell_weighted_variance(mode, ten_dyads):
    gamma, radius = 0.8, 2
    loading = error_loading(ten_dyads, radius, gamma, mode=mode)

    covariance = (loading @ loading.T).toarray()

    expected = [
        sum(
            gamma ** (2 * s) * shell.size
            for s, shell in enumerate(shells_up_to(ten_dyads, m, radius))
        )
        for m in range(ten_dyads.n_dyads)
    ]
    np.testing.assert_allclose(np.diag(covariance), expected, rtol=1e-12)


@pytest.mark.unit
def test_shared_shocks_correlate_dyads_within_the_radius(ten_dyads):
    gamma = 0.8
    shells = shell_matrices(ten_dyads, 2)
    loading = error_loading(ten_dyads, 2, gamma)

    covariance = (loading @ loading.T).toarray()

    # each pair shock loads gamma^s on both dyads, so it adds gamma^2s to
    # their covariance and to both variances
    spillover = gamma**2 * shells[1].toarray() + gamma**4 * shells[2].toarray()
    expected = spillover + np.diag(1.0 + spillover.sum(axis=1))
    np.testing.assert_allclose(covariance, expected, rtol=1e-12)
    assert covariance[0, 1] == pytest.approx(gamma**2)
    assert covariance[0, 9] == 0.0


@pytest.mark.unit
def test_ordered_shocks_are_uncorrelated_across_dyads(ten_dyads):
    loading = error_loading(ten_dyads, 2, 0.8, mode="ordered")

    covariance = (loading @ loading.T).toarray()

    np.testing.assert_array_equal(covariance, np.diag(np.diag(covariance)))


@pytest.mark.unit
def test_simulated_error_variance_matches_shells(ten_dyads):
    gamma, radius = 0.8, 2
    draws = simulate_errors(
        ten_dyads, radius, gamma, np.random.default_rng(11), size=100_000
    )

    assert draws.shape == (10, 100_000)
    for m in range(ten_dyads.n_dyads):
        expected = sum(
            gamma ** (2 * s) * shell.size
            for s, shell in enumerate(shells_up_to(ten_dyads, m, radius))
        )
        assert draws[m].var() == pytest.approx(expected, rel=0.03)


@pytest.mark.unit
@pytest.mark.parametrize(
    ("radius", "gamma", "kwargs", "message"),
    [
        (-1, 0.5, {}, "spillover radius"),
        (2, 1.5, {}, "gamma must lie"),
        (2, -0.3, {}, "gamma must lie"),
        (2, 0.5, {"mode": "pairwise"}, "shock mode"),
    ],
)
def test_error_parameters_are_validated(radius, gamma, kwargs, message, ten_dyads):
    with pytest.raises(NetdyadError, match=message):
        error_loading(ten_dyads, radius, gamma, **kwargs)


@pytest.mark.unit
def test_negative_gamma_needs_opt_in(ten_dyads):
    loading = error_loading(ten_dyads, 1, -0.5, allow_negative_gamma=True)

    assert loading.min() == pytest.approx(-0.5)


@pytest.mark.unit
def test_replication_is_determined_by_seed_and_index():
    cfg = _config()

    first = run_replication(cfg, 3)

    assert run_replication(cfg, 3) == first
    assert run_replication(cfg, 4) != first
    assert [record.estimator for record in first.records] == list(ESTIMATOR_KINDS)
    assert first.attempts == 1


@pytest.mark.unit
def test_dyadic_and_network_agree_when_bandwidth_covers_one_shell():
    cfg = _config(spillover_radius=1, bandwidth=1.0, reps=500)

    for rep in range(cfg.reps):
        result = run_replication(cfg, rep)
        dyadic, network = result.record("dyadic"), result.record("network")
        assert replace(network, estimator="dyadic") == dyadic


@pytest.mark.unit
def test_strongly_indefinite_network_estimate_is_repaired():
    # replication 4 has a network eigenvalue far below -epsilon
    cfg = _config(n_nodes=60, bandwidth="auto", seed=2024)

    result = run_replication(cfg, 4)

    network = result.record("network")
    assert network.psd_repaired
    assert math.isfinite(network.se) and network.se > 0
    assert network.ci_length == pytest.approx(2 * 1.959964 * network.se, rel=1e-6)
    assert not result.record("ehw").psd_repaired


@pytest.mark.unit
@pytest.mark.parametrize(
    ("graph_kind", "graph_param", "n_nodes", "bandwidth"),
    [
        ("erdos_renyi", 2.0, 60, "auto"),
        ("erdos_renyi", 2.0, 40, 4.0),
        ("barabasi_albert", 1, 60, 2.0),
    ],
)
def test_small_graph_studies_always_yield_intervals(
    graph_kind, graph_param, n_nodes, bandwidth
):
    cfg = _config(
        graph_kind=graph_kind,
        graph_param=graph_param,
        n_nodes=n_nodes,
        bandwidth=bandwidth,
        reps=30,
    )

    table = run_study(cfg)

    assert table.n_replications == 30
    for summary in table.summaries:
        assert math.isfinite(summary.mean_se) and summary.mean_se > 0
    assert sum(summary.psd_repairs for summary in table.summaries) == sum(
        record.psd_repaired for rep in table.replications for record in rep.records
    )


@pytest.mark.unit
def test_fixed_graph_reuses_one_draw():
    cfg = _config(fix_graph=True)

    results = [run_replication(cfg, rep) for rep in range(4)]

    assert len({result.n_dyads for result in results}) == 1
    assert len({result.records[0].beta_hat for result in results}) == 4


@pytest.mark.unit
def test_empty_graphs_exhaust_the_attempts():
    cfg = _config(n_nodes=2, graph_param=1e-9)

    with pytest.raises(NetdyadError, match="failed on all 100 attempts"):
        run_replication(cfg, 0)
    with pytest.raises(NetdyadError, match="no active dyads"):
        run_replication(replace(cfg, fix_graph=True), 0)


@pytest.mark.unit
def test_run_study_reports_progress_and_bounds():
    calls = []

    table = run_study(_config(reps=4), progress=lambda done, total: calls.append((done, total)))

    assert calls == [(1, 4), (2, 4), (3, 4), (4, 4)]
    assert table.n_replications == 4
    assert [rep.rep_index for rep in table.replications] == [0, 1, 2, 3]
    for summary in table.summaries:
        assert 0.0 <= summary.coverage <= 1.0
        assert summary.avg_length > 0
    assert table.empirical_se > 0


@pytest.mark.integration
def test_run_study_does_not_depend_on_worker_count():
    cfg = _config(reps=12)

    serial = run_study(cfg)
    parallel = run_study(replace(cfg, workers=2))

    assert parallel.replications == serial.replications
    assert parallel.summaries == serial.summaries


def _result(rep: int, beta_hat: float, attempts: int = 1, covered=(True, True, True)):
    ses = {"ehw": 0.2, "dyadic": 0.25, "network": 0.3}
    return ReplicationResult(
        rep_index=rep,
        attempts=attempts,
        n_dyads=10,
        records=tuple(
            ReplicationRecord(
                estimator=kind,
                covered=hit,
                ci_length=2 * 1.96 * ses[kind],
                se=ses[kind],
                beta_hat=beta_hat,
                psd_repaired=kind == "network" and rep == 0,
            )
            for kind, hit in zip(ESTIMATOR_KINDS, covered, strict=True)
        ),
    )


@pytest.mark.unit
def test_aggregate_computes_coverage_and_bias():
    results = [
        _result(0, 0.9, covered=(False, True, True)),
        _result(1, 1.0, attempts=3),
        _result(2, 1.4, covered=(False, False, True)),
    ]

    table = aggregate(_config(reps=3), results)

    empirical = math.sqrt(0.14 / 2)
    assert table.empirical_se == pytest.approx(empirical)
    assert table.failed_attempts == 2
    ehw = table.summary("ehw")
    assert ehw.coverage == pytest.approx(1 / 3)
    assert ehw.mean_se == pytest.approx(0.2)
    assert ehw.bias_pct == pytest.approx((0.2 - empirical) / empirical * 100)
    assert table.summary("dyadic").coverage == pytest.approx(2 / 3)
    assert table.summary("network").coverage == 1.0
    assert table.summary("network").psd_repairs == 1
    assert table.summary("ehw").psd_repairs == 0


@pytest.mark.unit
def test_aggregate_single_replication_has_no_bias():
    table = aggregate(_config(reps=1), [_result(0, 1.0)])

    assert math.isnan(table.empirical_se)
    assert all(math.isnan(summary.bias_pct) for summary in table.summaries)


@pytest.mark.unit
def test_aggregate_needs_results():
    with pytest.raises(NetdyadError, match="no replication"):
        aggregate(_config(), [])


@pytest.mark.unit
def test_coverage_grid_cells():
    cells = list(coverage_grid(reps=50, seed=4))

    assert len(cells) == 18
    assert len({(c.graph_kind, c.graph_param, c.n_nodes) for c in cells}) == 18
    assert all(c.reps == 50 and c.seed == 4 for c in cells)
    assert all(c.spillover_radius == 2 and c.gamma == 0.8 for c in cells)


@pytest.mark.unit
def test_config_validation():
    with pytest.raises(NetdyadError, match="gamma"):
        _config(gamma=-0.1)
    with pytest.raises(NetdyadError, match="reps"):
        _config(reps=0)
    with pytest.raises(NetdyadError, match="bandwidth"):
        _config(bandwidth="widest")
    assert _config(gamma=-0.1, allow_negative_gamma=True).gamma == -0.1


@pytest.mark.unit
def test_synthesize_dataset_is_seeded():
    spec = GraphSpec("erdos_renyi", 300, 2.0, seed=5)

    first = synthesize_dataset(spec, n_covariates=3, n_groups=4)
    second = synthesize_dataset(spec, n_covariates=3, n_groups=4)

    assert first.graph == second.graph
    np.testing.assert_array_equal(first.data.y, second.data.y)
    assert first.data.column_names == ("x1", "x2", "x3")
    assert first.data.X.shape == (first.graph.n_edges, 3)
    assert set(np.unique(first.data.group_ids)) <= {0, 1, 2, 3}
    np.testing.assert_array_equal(first.beta_true, np.ones(3))


@pytest.mark.unit
def test_synthesized_coefficients_are_recoverable():
    spec = GraphSpec("erdos_renyi", 3000, 3.0, seed=8)

    dataset = synthesize_dataset(spec, gamma=0.0, n_covariates=2, beta=[1.0, -2.0])

    fit = ols_fit(dataset.data)
    np.testing.assert_allclose(fit.beta_hat, [1.0, -2.0], atol=0.1)


@pytest.mark.unit
def test_synthesize_rejects_bad_arguments():
    spec = GraphSpec("erdos_renyi", 50, 2.0)

    with pytest.raises(NetdyadError, match="entries for 2 covariates"):
        synthesize_dataset(spec, n_covariates=2, beta=[1.0])
    with pytest.raises(NetdyadError, match="at least one covariate"):
        synthesize_dataset(spec, n_covariates=0)
    with pytest.raises(NetdyadError, match="n_groups"):
        synthesize_dataset(spec, n_groups=-1)


# --- acceptance-scale coverage studies (NETDYAD_RUN_SLOW=1) ---


@pytest.mark.slow
def test_erdos_renyi_coverage_matches_known_cell():
    table = run_study(
        McStudyConfig("erdos_renyi", 500, 1.0, reps=1000, seed=2024, workers=None)
    )

    ehw, dyadic, network = (table.summary(kind) for kind in ESTIMATOR_KINDS)
    assert network.coverage == pytest.approx(0.9370, abs=0.025)
    assert dyadic.coverage == pytest.approx(0.9320, abs=0.025)
    assert ehw.coverage == pytest.approx(0.8910, abs=0.030)
    assert ehw.coverage < dyadic.coverage < network.coverage
    assert ehw.avg_length < dyadic.avg_length < network.avg_length


@pytest.mark.slow
def test_barabasi_albert_standard_error_bias_ordering():
    # bias is measured against the spread of beta_hat on one network; redrawing
    # BA graphs mixes in hub-driven variance heterogeneity that the mean SE
    # cannot track (E sqrt(V) < sqrt(E V))
    table = run_study(
        McStudyConfig(
            "barabasi_albert", 1000, 3, reps=1000, seed=2024, workers=None, fix_graph=True
        )
    )

    assert table.replications[0].n_dyads == table.replications[-1].n_dyads
    assert abs(table.summary("network").bias_pct) <= 5
    assert table.summary("dyadic").bias_pct <= -8
    assert table.summary("ehw").bias_pct <= -15


@pytest.mark.slow
def test_small_spillovers_give_similar_coverage():
    table = run_study(
        McStudyConfig("erdos_renyi", 1000, 1.0, gamma=0.2, reps=1000, seed=7, workers=None)
    )

    coverages = [summary.coverage for summary in table.summaries]
    assert max(coverages) - min(coverages) <= 0.03


@pytest.mark.slow
def test_independent_errors_give_equal_coverage_up_to_noise():
    reps = 1000
    table = run_study(
        McStudyConfig("erdos_renyi", 500, 2.0, gamma=0.0, reps=reps, seed=11, workers=None)
    )

    # joint 99% band for three binomial proportions around 0.95
    band = 2 * 2.94 * math.sqrt(0.95 * 0.05 / reps)
    coverages = [summary.coverage for summary in table.summaries]
    assert max(coverages) - min(coverages) <= band
