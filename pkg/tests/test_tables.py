"""Tests for result tabulation, rendering and the simulation manifest."""

from __future__ import annotations

import io
import json

import numpy as np
import pandas as pd
import pytest

from netdyad.diagnostics import denseness_report
from netdyad.errors import NetdyadError
from netdyad.regression import ols_fit
from netdyad.tables import (
    MC_COLUMNS,
    draws_frame,
    emit_table,
    grid_frame,
    render_table,
    to_frame,
    write_manifest,
)
from netdyad.types import (
    EstimateReport,
    EstimatorSummary,
    GraphStats,
    McStudyConfig,
    McTable,
    RegressionData,
    ReplicationRecord,
    ReplicationResult,
)
from netdyad.variance import dyadic_robust_variance, ehw_variance, repair_psd


def _mc_table(n_nodes: int = 500, empirical_se: float = 0.08) -> McTable:
    cfg = McStudyConfig("erdos_renyi", n_nodes, 1.0, reps=2, seed=3)
    summaries = (
        EstimatorSummary("ehw", 0.891, 0.2874, 0.0712, -21.45),
        EstimatorSummary("dyadic", 0.932, 0.3280, 0.0801, -14.14),
        EstimatorSummary("network", 0.937, 0.3370, 0.0832, -0.92, psd_repairs=3),
    )
    replications = tuple(
        ReplicationResult(
            rep_index=rep,
            attempts=1,
            n_dyads=250,
            records=tuple(
                ReplicationRecord(kind, rep == 0, 0.3, 0.08, 1.0 + rep / 10)
                for kind in ("ehw", "dyadic", "network")
            ),
        )
        for rep in range(2)
    )
    return McTable(
        config=cfg,
        summaries=summaries,
        empirical_se=empirical_se,
        n_replications=2,
        replications=replications,
    )


@pytest.fixture
def estimate_report(triangle, make_network) -> EstimateReport:
    data = RegressionData(
        y=np.array([1.0, 2.0, 4.0]),
        X=np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]),
        dyad_ids=np.arange(3),
        column_names=("intercept", "x"),
        intercept_index=0,
    )
    fit = ols_fit(data)
    net = make_network(triangle)
    estimates = (ehw_variance(fit, net), repair_psd(dyadic_robust_variance(fit, net)))
    return EstimateReport(fit=fit, estimates=estimates)


@pytest.mark.unit
def test_mc_table_csv_columns():
    csv = render_table(_mc_table(), "csv")

    lines = csv.splitlines()
    assert lines[0] == ",".join(MC_COLUMNS)
    assert lines[1].startswith("ehw,0.891,0.2874,")
    assert len(lines) == 4


@pytest.mark.unit
def test_mc_table_text_uses_four_decimals():
    text = render_table(_mc_table(), "text")

    assert "empirical SE: 0.0800" in text
    assert "network=3" in text
    assert "0.9370" in text
    assert "-21.4500" in text


@pytest.mark.unit
def test_text_render_keeps_nan_visible_in_preamble():
    text = render_table(_mc_table(empirical_se=float("nan")), "text")

    assert "empirical SE: nan" in text


@pytest.mark.unit
def test_estimate_report_long_layout(estimate_report):
    frame = to_frame(estimate_report)

    assert list(frame.columns) == ["term", "statistic", "value"]
    assert frame["statistic"].tolist()[:7] == [
        "estimate",
        "se_ehw",
        "se_dyadic",
        "ci_low_ehw",
        "ci_high_ehw",
        "ci_low_dyadic",
        "ci_high_dyadic",
    ]
    assert frame["term"].tolist() == ["intercept"] * 7 + ["x"] * 7
    slope = frame[(frame.term == "x") & (frame.statistic == "estimate")]["value"].item()
    assert slope == pytest.approx(1.5)


@pytest.mark.unit
def test_estimate_report_text_names_the_repair(estimate_report):
    text = render_table(estimate_report, "text")

    assert text.startswith("dyads: 3  regressors: 2  level: 0.95")
    assert "PSD-repaired (epsilon=0.005)" in text


@pytest.mark.unit
def test_csv_reparses_to_the_rendered_values(estimate_report):
    frame = to_frame(estimate_report)

    reparsed = pd.read_csv(io.StringIO(render_table(estimate_report, "csv")))

    np.testing.assert_allclose(reparsed["value"], frame["value"], rtol=1e-4)


@pytest.mark.unit
def test_denseness_frame(triangle, make_network):
    report = denseness_report(make_network(triangle), 1.0, max_s=2)

    frame = to_frame(report)

    assert frame["s"].tolist() == [0, 1, 2]
    assert frame["shell_density"].iloc[:2].tolist() == pytest.approx([1.0, 2.0])
    assert np.isnan(frame["shell_density"].iloc[2])
    text = render_table(report, "text")
    assert "sum_s shell density: 3.0000" in text
    assert "note: max over an empty shell contributes 0" in text


@pytest.mark.unit
def test_graph_stats_frame_uses_spec_alias():
    stats = GraphStats("barabasi_albert", 2.0, 500, 40.0, 3.9, 499.0, 120.0, 7.5, draws=10)

    frame = to_frame(stats)

    assert frame.columns[0] == "kind"
    assert frame.iloc[0]["kind"] == "ba"
    assert frame.iloc[0]["draws"] == 10


@pytest.mark.unit
def test_grid_frame_stacks_cells():
    frame = grid_frame([_mc_table(500), _mc_table(1000)])

    assert list(frame.columns[:3]) == ["spec", "param", "n_nodes"]
    assert frame["n_nodes"].tolist() == [500] * 3 + [1000] * 3
    assert set(frame["spec"]) == {"er"}
    assert to_frame([_mc_table(500), _mc_table(1000)]).equals(frame)


@pytest.mark.unit
def test_draws_frame_rows_per_replication_and_estimator():
    frame = draws_frame(_mc_table())

    assert len(frame) == 6
    assert frame["covered"].tolist() == [1, 1, 1, 0, 0, 0]
    assert frame["rep"].tolist() == [0, 0, 0, 1, 1, 1]
    assert "spec" not in frame.columns
    assert list(draws_frame(_mc_table(), cell=True).columns[:3]) == ["spec", "param", "n_nodes"]


@pytest.mark.unit
def test_render_rejects_unknown_inputs():
    with pytest.raises(NetdyadError, match="unknown output format"):
        render_table(_mc_table(), "json")
    with pytest.raises(NetdyadError, match="cannot tabulate"):
        to_frame(42)
    with pytest.raises(NetdyadError, match="nothing to tabulate"):
        to_frame([])


@pytest.mark.unit
def test_emit_table_writes_nested_paths(tmp_path):
    target = tmp_path / "results" / "table.csv"

    rendered = emit_table(_mc_table(), "csv", target)

    assert target.read_text(encoding="utf-8") == rendered


@pytest.mark.unit
def test_manifest_echoes_config(tmp_path):
    target = tmp_path / "run.json"

    write_manifest(target, [_mc_table(), _mc_table(empirical_se=float("nan"))])

    studies = json.loads(target.read_text(encoding="utf-8"))["studies"]
    assert len(studies) == 2
    first = studies[0]
    assert first["config"]["graph_kind"] == "erdos_renyi"
    assert first["config"]["seed"] == 3
    assert first["psd_repairs"] == {"ehw": 0, "dyadic": 0, "network": 3}
    assert len(first["fingerprint"]) > 0
    assert first["fingerprint"] == studies[1]["fingerprint"]
    assert studies[1]["empirical_se"] is None
