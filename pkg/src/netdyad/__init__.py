"""Dyadic regression with network-robust standard errors.

Fits OLS on dyadic data and computes Eicker-Huber-White, dyadic-robust and
network-HAC sandwich variances, where dependence travels along the network
whose vertices are dyads and whose edges join dyads that share a unit.

Example:
    >>> from netdyad import build_dyad_index, build_dyad_network, ols_fit
    >>> index = build_dyad_index(graph)
    >>> net = build_dyad_network(index)
    >>> fit = ols_fit(data)
    >>> v = network_hac_variance(fit, net, "rectangular", default_bandwidth(net))
    >>> confidence_interval(fit, v, coord=1)

Monte Carlo coverage studies:
    >>> from netdyad import McStudyConfig, run_study
    >>> table = run_study(McStudyConfig("erdos_renyi", 500, 1.0, reps=200))
    >>> table.summary("network").coverage
"""

__version__ = "0.1.0"

from .diagnostics import (
    ShellProfile,
    composite_density,
    delta_density,
    denseness_report,
    shell_density,
    shell_sizes,
)
from .dyad_graph import (
    DyadIndex,
    DyadNetwork,
    build_dyad_index,
    build_dyad_network,
    dyad_diameter,
    dyad_distance,
    shells_up_to,
    validate_node_graph,
)
from .errors import (
    DataFormatError,
    GraphValidationError,
    NetdyadError,
    NotPositiveSemidefiniteError,
    RankDeficiencyError,
)
from .graph_gen import barabasi_albert, erdos_renyi, generate_graph, graph_statistics
from .montecarlo import run_replication, run_study, simulate_covariates, simulate_errors
from .regression import ols_fit, within_demean
from .types import (
    DensenessReport,
    EstimateReport,
    GraphSpec,
    GraphStats,
    McStudyConfig,
    McTable,
    NodeGraph,
    OlsFit,
    RegressionData,
    VarianceEstimate,
)
from .variance import (
    Kernel,
    confidence_interval,
    default_bandwidth,
    dyadic_robust_variance,
    ehw_variance,
    ensure_psd,
    network_hac_variance,
    repair_psd,
)

__all__ = [
    "DataFormatError",
    "DensenessReport",
    "DyadIndex",
    "DyadNetwork",
    "EstimateReport",
    "GraphSpec",
    "GraphStats",
    "GraphValidationError",
    "Kernel",
    "McStudyConfig",
    "McTable",
    "NetdyadError",
    "NodeGraph",
    "NotPositiveSemidefiniteError",
    "OlsFit",
    "RankDeficiencyError",
    "RegressionData",
    "ShellProfile",
    "VarianceEstimate",
    "__version__",
    "barabasi_albert",
    "build_dyad_index",
    "build_dyad_network",
    "composite_density",
    "confidence_interval",
    "default_bandwidth",
    "delta_density",
    "denseness_report",
    "dyad_diameter",
    "dyad_distance",
    "dyadic_robust_variance",
    "ehw_variance",
    "ensure_psd",
    "erdos_renyi",
    "generate_graph",
    "graph_statistics",
    "network_hac_variance",
    "ols_fit",
    "repair_psd",
    "run_replication",
    "run_study",
    "shell_density",
    "shell_sizes",
    "shells_up_to",
    "simulate_covariates",
    "simulate_errors",
    "validate_node_graph",
    "within_demean",
]
