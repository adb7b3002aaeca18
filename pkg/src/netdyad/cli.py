"""Command-line interface for netdyad.

Usage:
    netdyad estimate --edges edges.csv --data dyads.csv --estimator all
    netdyad simulate --spec er --param 1 --n 500 --S 2 --gamma 0.8 --reps 1000
    netdyad graph-stats --spec ba --param 3 --n 1000 --draws 10
    netdyad diagnose --edges edges.csv --bandwidth auto
    netdyad synthesize --spec er --param 2 --n 2000 --edges-out e.csv --data-out d.csv
    netdyad emit-edges --edges edges.csv --out canonical.csv

Every subcommand also accepts ``--config path``: a ``key = value`` file whose
keys are the long flag names. Flags given on the command line win.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from .constants import (
    DEFAULT_LEVEL,
    DEFAULT_MC_BANDWIDTH,
    ESTIMATOR_KINDS,
    KERNEL_KINDS,
    OUTPUT_FORMATS,
    SHOCK_MODES,
)
from .diagnostics import denseness_report
from .dyad_graph import build_dyad_index, build_dyad_network
from .errors import DataFormatError, NetdyadError, NotPositiveSemidefiniteError
from .graph_gen import graph_statistics, grid_graph_specs, resolve_graph_kind
from .ingest import (
    parse_dyadic_csv,
    parse_edge_csv,
    read_config_file,
    write_dyadic_csv,
    write_edge_csv,
)
from .montecarlo import coverage_grid, run_grid, run_study, synthesize_dataset
from .observability import log_timing, setup_logging
from .regression import count_groups, ols_fit, within_demean
from .settings import get_settings
from .tables import draws_frame, emit_table, write_manifest
from .types import (
    EstimateReport,
    GraphSpec,
    McStudyConfig,
    McTable,
    VarianceEstimate,
)
from .variance import (
    ensure_psd,
    estimate_variance,
    needs_psd_repair,
    resolve_bandwidth,
)

logger = logging.getLogger(__name__)

SUBCOMMANDS = (
    "estimate",
    "simulate",
    "graph-stats",
    "diagnose",
    "synthesize",
    "emit-edges",
)


# --- argument types ---


def _bandwidth_arg(value: str) -> float | str:
    text = value.strip().lower()
    if text in ("auto", "diameter"):
        return text
    try:
        number = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected 'auto', 'diameter' or a number, got {value!r}"
        ) from None
    if not math.isfinite(number) or number < 0:
        raise argparse.ArgumentTypeError(f"bandwidth must be finite and >= 0, got {value}")
    return number


def _psd_arg(value: str) -> float | None:
    text = value.strip().lower()
    if text == "off":
        return None
    try:
        number = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected an epsilon >= 0 or 'off', got {value!r}"
        ) from None
    if not math.isfinite(number) or number < 0:
        raise argparse.ArgumentTypeError(f"epsilon must be >= 0, got {value}")
    return number


def _estimators_arg(value: str) -> list[str]:
    kinds: list[str] = []
    for item in value.split(","):
        name = item.strip().lower()
        if name == "all":
            kinds.extend(ESTIMATOR_KINDS)
        elif name in ESTIMATOR_KINDS:
            kinds.append(name)
        else:
            raise argparse.ArgumentTypeError(
                f"unknown estimator {item!r}; expected ehw, dyadic, network or all"
            )
    return kinds


def _non_negative_int(value: str) -> int:
    number = int(value)
    if number < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {value}")
    return number


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return number


def _bool_arg(value: str) -> bool:
    text = value.strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {value!r}")


# --- shared arguments ---


def _new_parser(command: str, description: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=f"netdyad {command}",
        description=description,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--config",
        type=Path,
        metavar="PATH",
        help="key = value file mirroring the long flags (flags override it)",
    )
    return parser


def _add_logging_args(parser: argparse.ArgumentParser) -> None:
    """Add common logging-related arguments to a parser."""
    parser.add_argument(
        "--log-level",
        choices=["critical", "error", "warning", "info", "debug"],
        help="Override log level",
    )
    parser.add_argument(
        "--log-format",
        choices=["json", "text"],
        help="Select log formatter (default: json)",
    )


def _add_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--out",
        type=Path,
        metavar="PATH",
        help="Write the table here instead of stdout",
    )
    parser.add_argument(
        "--format",
        choices=OUTPUT_FORMATS,
        help="Table format (default: csv with --out, text on stdout)",
    )


def _add_graph_spec_args(parser: argparse.ArgumentParser, *, required: bool) -> None:
    parser.add_argument(
        "--spec",
        choices=["ba", "er"],
        required=required,
        help="Random graph family: ba (Barabasi-Albert) or er (Erdos-Renyi)",
    )
    parser.add_argument(
        "--param",
        type=float,
        required=required,
        help="nu (edges per new node) for ba, lambda (expected degree) for er",
    )
    parser.add_argument(
        "--n", type=_positive_int, required=required, help="Number of nodes"
    )
    parser.add_argument(
        "--seed", type=_non_negative_int, default=0, help="Base RNG seed (default: 0)"
    )
    parser.add_argument(
        "--seed-lambda",
        type=float,
        help="Expected degree inside the BA seed graph (default: NETDYAD_BA_SEED_LAMBDA)",
    )


def _add_bandwidth_args(parser: argparse.ArgumentParser, default: float | str) -> None:
    parser.add_argument(
        "--bandwidth",
        type=_bandwidth_arg,
        default=default,
        help=f"auto, diameter or a number >= 0 (default: {default})",
    )
    parser.add_argument(
        "--bandwidth-degree",
        choices=["dyad", "node"],
        default="dyad",
        help="Average degree used by the auto bandwidth rule (default: dyad)",
    )


# --- parsers ---


def _estimate_parser() -> argparse.ArgumentParser:
    parser = _new_parser(
        "estimate",
        "Fit OLS on dyadic data and report EHW, dyadic-robust and network-HAC\n"
        "standard errors with normal confidence intervals.",
    )
    parser.add_argument("--edges", type=Path, required=True, help="Edge list CSV (i,j)")
    parser.add_argument(
        "--data",
        type=Path,
        required=True,
        help="Dyadic CSV (dyad_id,i,j,y,<covariates>[,group])",
    )
    parser.add_argument(
        "--n-nodes",
        type=_positive_int,
        help="Node count when isolated nodes follow the largest id in the edge list",
    )
    parser.add_argument(
        "--estimator",
        type=_estimators_arg,
        action="append",
        help="ehw, dyadic, network or all; repeatable or comma-separated (default: all)",
    )
    parser.add_argument("--kernel", choices=KERNEL_KINDS, default="rectangular")
    _add_bandwidth_args(parser, "auto")
    parser.add_argument(
        "--level",
        type=float,
        default=DEFAULT_LEVEL,
        help=f"Confidence level (default: {DEFAULT_LEVEL})",
    )
    parser.add_argument(
        "--psd-repair",
        type=_psd_arg,
        default=None,
        metavar="EPS|off",
        help="Repair non-PSD estimates with eigenvalue floor EPS (default: off, fail instead)",
    )
    parser.add_argument(
        "--no-intercept",
        action="store_true",
        help="Do not prepend an intercept column",
    )
    _add_output_args(parser)
    _add_logging_args(parser)
    return parser


def _simulate_parser() -> argparse.ArgumentParser:
    parser = _new_parser(
        "simulate",
        "Monte Carlo coverage study of the three variance estimators on random\n"
        "graphs with network-decaying error spillovers.",
    )
    _add_graph_spec_args(parser, required=False)
    parser.add_argument(
        "--S",
        dest="spillover_radius",
        type=_non_negative_int,
        default=2,
        help="Largest dyad distance carrying spillovers (default: 2)",
    )
    parser.add_argument("--gamma", type=float, default=0.8, help="Spillover decay (default: 0.8)")
    parser.add_argument("--beta", type=float, default=1.0, help="True slope (default: 1)")
    parser.add_argument(
        "--reps", type=_positive_int, default=1000, help="Replications (default: 1000)"
    )
    parser.add_argument("--level", type=float, default=DEFAULT_LEVEL)
    parser.add_argument("--kernel", choices=KERNEL_KINDS, default="rectangular")
    _add_bandwidth_args(parser, DEFAULT_MC_BANDWIDTH)
    parser.add_argument(
        "--psd-epsilon",
        type=float,
        default=get_settings().psd_epsilon,
        help="Eigenvalue shift for non-PSD estimates",
    )
    parser.add_argument(
        "--workers",
        type=_positive_int,
        help="Worker processes (default: NETDYAD_WORKERS or CPU count)",
    )
    parser.add_argument(
        "--fix-graph",
        action="store_true",
        help="Draw one graph from the base seed and reuse it in every replication",
    )
    parser.add_argument("--shock-mode", choices=SHOCK_MODES, default="shared")
    parser.add_argument(
        "--allow-negative-gamma",
        action="store_true",
        help="Admit gamma in [-1, 0) (experimental)",
    )
    parser.add_argument(
        "--full",
        action="store_true",
        help="Run every ba/er cell with param 1..3 and N in 500, 1000, 5000",
    )
    parser.add_argument(
        "--draws-out",
        type=Path,
        metavar="PATH",
        help="Write per-replication estimator records as CSV",
    )
    _add_output_args(parser)
    _add_logging_args(parser)
    return parser


def _graph_stats_parser() -> argparse.ArgumentParser:
    parser = _new_parser(
        "graph-stats",
        "Node and dyad degree summaries averaged over seeded graph draws.",
    )
    _add_graph_spec_args(parser, required=False)
    parser.add_argument("--draws", type=_positive_int, default=1, help="Graph draws (default: 1)")
    parser.add_argument(
        "--full",
        action="store_true",
        help="Summarise every ba/er cell with param 1..3 and N in 500, 1000, 5000",
    )
    _add_output_args(parser)
    _add_logging_args(parser)
    return parser


def _diagnose_parser() -> argparse.ArgumentParser:
    parser = _new_parser(
        "diagnose",
        "Shell-density, Delta and composite denseness measures of a dyad network.",
    )
    parser.add_argument("--edges", type=Path, required=True, help="Edge list CSV (i,j)")
    parser.add_argument("--n-nodes", type=_positive_int)
    _add_bandwidth_args(parser, "auto")
    parser.add_argument(
        "--max-s",
        type=_non_negative_int,
        help="Largest shell radius in the Delta and composite sums (default: diameter)",
    )
    _add_output_args(parser)
    _add_logging_args(parser)
    return parser


def _synthesize_parser() -> argparse.ArgumentParser:
    parser = _new_parser(
        "synthesize",
        "Draw a graph and dyadic data from the simulation design and write both\n"
        "as CSV files that `netdyad estimate` reads back.",
    )
    _add_graph_spec_args(parser, required=True)
    parser.add_argument("--S", dest="spillover_radius", type=_non_negative_int, default=2)
    parser.add_argument("--gamma", type=float, default=0.8)
    parser.add_argument(
        "--covariates", type=_positive_int, default=1, help="Number of covariates K"
    )
    parser.add_argument(
        "--groups",
        type=_non_negative_int,
        default=0,
        help="Fixed-effect groups; 0 omits the group column",
    )
    parser.add_argument(
        "--beta",
        help="Comma-separated true slopes, one per covariate (default: all 1)",
    )
    parser.add_argument("--shock-mode", choices=SHOCK_MODES, default="shared")
    parser.add_argument("--edges-out", type=Path, required=True)
    parser.add_argument("--data-out", type=Path, required=True)
    _add_logging_args(parser)
    return parser


def _emit_edges_parser() -> argparse.ArgumentParser:
    parser = _new_parser(
        "emit-edges",
        "Parse an edge list and write it back in canonical i < j order.",
    )
    parser.add_argument("--edges", type=Path, required=True)
    parser.add_argument("--n-nodes", type=_positive_int)
    parser.add_argument("--out", type=Path, required=True)
    _add_logging_args(parser)
    return parser


# --- config files ---


def _parse_args(
    parser: argparse.ArgumentParser, argv: Sequence[str]
) -> argparse.Namespace:
    """Parse ``argv`` on top of the defaults from ``--config``, if any."""
    config_parser = argparse.ArgumentParser(add_help=False)
    config_parser.add_argument("--config", type=Path)
    known, _ = config_parser.parse_known_args(argv)
    deferred: dict[str, Any] = {}
    if known.config is not None:
        defaults, deferred = _config_defaults(parser, known.config)
        parser.set_defaults(**defaults)
        for action in parser._actions:
            if action.dest in defaults or action.dest in deferred:
                action.required = False
    args = parser.parse_args(argv)
    for dest, value in deferred.items():
        if getattr(args, dest) is None:
            setattr(args, dest, value)
    return args


def _config_defaults(
    parser: argparse.ArgumentParser, path: Path
) -> tuple[dict[str, Any], dict[str, Any]]:
    """Convert config entries into parser defaults.

    Repeatable options come back separately so a command-line occurrence
    replaces the file value instead of extending it.
    """
    actions = {
        action.dest: action
        for action in parser._actions
        if action.dest not in ("help", "config")
    }
    aliases = {
        opt.lstrip("-").replace("-", "_").lower(): action.dest
        for action in actions.values()
        for opt in action.option_strings
    }
    defaults: dict[str, Any] = {}
    deferred: dict[str, Any] = {}
    for key, raw, line in read_config_file(path):
        dest = aliases.get(key, key if key in actions else None)
        if dest is None:
            raise DataFormatError(f"unknown config key {key!r}", path=path, line=line)
        action = actions[dest]
        try:
            value = _convert_config_value(action, raw)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise DataFormatError(f"{key}: {exc}", path=path, line=line) from None
        if isinstance(action, argparse._AppendAction):
            deferred[dest] = [value]
        else:
            defaults[dest] = value
    return defaults, deferred


def _convert_config_value(action: argparse.Action, raw: str) -> Any:
    if isinstance(action, argparse._StoreTrueAction):
        return _bool_arg(raw)
    value = action.type(raw) if action.type is not None else raw
    if action.choices is not None and value not in action.choices:
        raise ValueError(
            f"invalid choice {raw!r} (choose from {', '.join(map(str, action.choices))})"
        )
    return value


# --- subcommands ---


def _estimate(args: argparse.Namespace) -> int:
    with log_timing(logger, "Estimation complete", subcommand="estimate") as fields:
        graph = parse_edge_csv(args.edges, n_nodes=args.n_nodes)
        index = build_dyad_index(graph)
        net = build_dyad_network(index)
        data = parse_dyadic_csv(args.data, index, intercept=not args.no_intercept)
        fixed_effects = data.group_ids is not None
        n_groups = count_groups(data)
        if fixed_effects:
            data = within_demean(data)
        fit = ols_fit(data)

        requested = args.estimator or [ESTIMATOR_KINDS]
        kinds = _unique([kind for group in requested for kind in group])
        bandwidth = math.nan
        if "network" in kinds:
            bandwidth = resolve_bandwidth(
                args.bandwidth, net, degree=args.bandwidth_degree
            )
        fields.update(n_dyads=net.n_dyads, bandwidth=bandwidth)
        estimates = [
            _maybe_repair(
                estimate_variance(
                    kind, fit, net, kernel=args.kernel, bandwidth=bandwidth
                ),
                args.psd_repair,
            )
            for kind in kinds
        ]

        report = EstimateReport(
            fit=fit,
            estimates=tuple(estimates),
            level=args.level,
            fixed_effects=fixed_effects,
            n_groups=n_groups,
        )
        _write_result(report, args)
    return 0


def _maybe_repair(estimate: VarianceEstimate, epsilon: float | None) -> VarianceEstimate:
    if not needs_psd_repair(estimate):
        return estimate
    if epsilon is None:
        raise NotPositiveSemidefiniteError(
            f"{estimate.kind} variance estimate is not positive semidefinite; "
            "rerun with --psd-repair EPS (for example 0.005)"
        )
    logger.warning(
        "Variance estimate is not PSD; repairing",
        extra={"estimator": estimate.kind, "epsilon": epsilon},
    )
    return ensure_psd(estimate, epsilon)


def _simulate(args: argparse.Namespace) -> int:
    settings = get_settings()
    options = {
        "gamma": args.gamma,
        "beta_true": args.beta,
        "level": args.level,
        "kernel": args.kernel,
        "bandwidth": args.bandwidth,
        "bandwidth_degree": args.bandwidth_degree,
        "seed": args.seed,
        "psd_epsilon": args.psd_epsilon,
        "workers": args.workers,
        "fix_graph": args.fix_graph,
        "shock_mode": args.shock_mode,
        "seed_lambda": args.seed_lambda or settings.ba_seed_lambda,
        "allow_negative_gamma": args.allow_negative_gamma,
    }
    started = time.perf_counter()
    if args.full:
        configs = list(
            coverage_grid(
                spillover_radius=args.spillover_radius, reps=args.reps, **options
            )
        )
        print(f"Running {len(configs)} Monte Carlo cells", file=sys.stderr)
        tables = run_grid(configs, progress=_print_cell_progress)
        result: McTable | list[McTable] = tables
    else:
        _require_graph_spec(args)
        cfg = McStudyConfig(
            graph_kind=resolve_graph_kind(args.spec),
            n_nodes=args.n,
            graph_param=args.param,
            spillover_radius=args.spillover_radius,
            reps=args.reps,
            **options,
        )
        table = run_study(cfg, progress=_print_rep_progress)
        tables = [table]
        result = table

    _write_result(result, args)
    if args.out is not None:
        write_manifest(args.out.with_suffix(".json"), tables)
    if args.draws_out is not None:
        draws = [draws_frame(table, cell=args.full) for table in tables]
        emit_table(draws, "csv", args.draws_out)
    print(
        f"Simulation complete in {time.perf_counter() - started:.1f}s",
        file=sys.stderr,
    )
    return 0


def _graph_stats(args: argparse.Namespace) -> int:
    seed_lambda = args.seed_lambda or get_settings().ba_seed_lambda
    if args.full:
        specs = [
            GraphSpec(
                kind=spec.kind,
                n_nodes=spec.n_nodes,
                param=spec.param,
                seed=spec.seed,
                seed_lambda=seed_lambda,
            )
            for spec in grid_graph_specs(args.seed)
        ]
    else:
        _require_graph_spec(args)
        specs = [
            GraphSpec(
                kind=resolve_graph_kind(args.spec),
                n_nodes=args.n,
                param=args.param,
                seed=args.seed,
                seed_lambda=seed_lambda,
            )
        ]
    stats = [graph_statistics(spec, draws=args.draws) for spec in specs]
    _write_result(stats, args)
    return 0


def _diagnose(args: argparse.Namespace) -> int:
    graph = parse_edge_csv(args.edges, n_nodes=args.n_nodes)
    net = build_dyad_network(build_dyad_index(graph))
    bandwidth = resolve_bandwidth(args.bandwidth, net, degree=args.bandwidth_degree)
    report = denseness_report(net, bandwidth, max_s=args.max_s)
    _write_result(report, args)
    return 0


def _synthesize(args: argparse.Namespace) -> int:
    spec = GraphSpec(
        kind=resolve_graph_kind(args.spec),
        n_nodes=args.n,
        param=args.param,
        seed=args.seed,
        seed_lambda=args.seed_lambda or get_settings().ba_seed_lambda,
    )
    beta = None
    if args.beta:
        try:
            beta = [float(item) for item in args.beta.split(",")]
        except ValueError:
            raise NetdyadError(
                f"--beta needs comma-separated numbers, got {args.beta!r}"
            ) from None
    dataset = synthesize_dataset(
        spec,
        spillover_radius=args.spillover_radius,
        gamma=args.gamma,
        n_covariates=args.covariates,
        n_groups=args.groups,
        beta=beta,
        mode=args.shock_mode,
    )
    index = build_dyad_index(dataset.graph)
    write_edge_csv(dataset.graph, args.edges_out)
    write_dyadic_csv(index, dataset.data, args.data_out)
    print(
        f"Wrote {dataset.graph.n_edges} edges to {args.edges_out} and "
        f"{dataset.data.n_rows} dyads to {args.data_out}",
        file=sys.stderr,
    )
    return 0


def _emit_edges(args: argparse.Namespace) -> int:
    graph = parse_edge_csv(args.edges, n_nodes=args.n_nodes)
    write_edge_csv(graph, args.out)
    return 0


# --- helpers ---


def _write_result(result: Any, args: argparse.Namespace) -> None:
    fmt = args.format or ("csv" if args.out is not None else "text")
    rendered = emit_table(result, fmt, args.out)
    if args.out is None:
        sys.stdout.write(rendered)


def _require_graph_spec(args: argparse.Namespace) -> None:
    missing = [
        flag
        for flag, value in (("--spec", args.spec), ("--param", args.param), ("--n", args.n))
        if value is None
    ]
    if missing:
        raise NetdyadError(f"{', '.join(missing)} required unless --full is given")


def _unique(items: Sequence[str]) -> list[str]:
    return list(dict.fromkeys(items))


def _print_rep_progress(done: int, total: int) -> None:
    step = max(1, total // 20)
    if done == total or done % step == 0:
        print(f"  replications: {done}/{total}", file=sys.stderr)


def _print_cell_progress(cfg: McStudyConfig, done: int, total: int) -> None:
    if done == total:
        print(
            f"  {cfg.graph_kind} param={cfg.graph_param:g} N={cfg.n_nodes}: "
            f"{total} replications",
            file=sys.stderr,
        )


_COMMANDS: dict[
    str,
    tuple[Callable[[], argparse.ArgumentParser], Callable[[argparse.Namespace], int]],
] = {
    "estimate": (_estimate_parser, _estimate),
    "simulate": (_simulate_parser, _simulate),
    "graph-stats": (_graph_stats_parser, _graph_stats),
    "diagnose": (_diagnose_parser, _diagnose),
    "synthesize": (_synthesize_parser, _synthesize),
    "emit-edges": (_emit_edges_parser, _emit_edges),
}


def _usage() -> str:
    return (
        "usage: netdyad {" + ",".join(SUBCOMMANDS) + "} [options]\n\n"
        "Run 'netdyad <command> --help' for the options of one command.\n"
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Main CLI entry point."""
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(_usage(), end="")
        return 0 if argv else 2
    command, rest = argv[0], argv[1:]
    if command not in _COMMANDS:
        print(f"Error: unknown command {command!r}", file=sys.stderr)
        print(_usage(), end="", file=sys.stderr)
        return 2

    build_parser, handler = _COMMANDS[command]
    try:
        args = _parse_args(build_parser(), rest)
    except (NetdyadError, OSError) as exc:
        print(f"Error: {exc!s}", file=sys.stderr)
        return 1

    settings = get_settings()
    setup_logging(
        component=f"cli-{command}",
        level=(args.log_level.upper() if args.log_level else settings.log_level),
        default_level="WARNING",
        log_format=args.log_format or settings.log_format,
    )

    try:
        return handler(args)
    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        return 130
    except (NetdyadError, OSError) as exc:
        logger.debug("Command failed", exc_info=True, extra={"subcommand": command})
        print(f"Error: {exc!s}", file=sys.stderr)
        return 1
    except Exception as exc:
        logger.exception("Unexpected failure", extra={"subcommand": command})
        print(f"Error: {exc!s}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
