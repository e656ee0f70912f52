"""Command-line interface: generate, train, adapt, evaluate and report."""

from __future__ import annotations

import argparse
import logging
from collections.abc import Callable, Sequence
from dataclasses import replace
from pathlib import Path
from typing import Any

from .config import ExperimentConfig, default_output_root, dump_config, load_config
from .const import ALL_METHODS, CONFIG_FILENAME, FIG3_METHODS, MODE_FIG3, MODE_TABLE1
from .evaluation import display_name, read_report_csv, render_table
from .exceptions import ConfigurationError
from .runner import ExperimentRunner
from .utils import get_performance_metrics, handle_command_errors, validation_stage

_LOGGER = logging.getLogger(__name__)

Flag = tuple[str, str, Any]


def _common_flags(args: argparse.Namespace) -> list[Flag]:
    flags: list[Flag] = [
        ("run", "workers", args.workers),
        ("run", "output_dir", None if args.output_dir is None else str(args.output_dir)),
    ]
    if args.seed is not None:
        flags.extend(
            (section, "seed", args.seed)
            for section in ("data", "meta", "baseline", "grid")
        )
    return flags


def _resolve(
    args: argparse.Namespace, extra: Sequence[Flag] = ()
) -> tuple[ExperimentConfig, ExperimentRunner]:
    """Load the config for a command and build its runner."""
    with validation_stage():
        config = load_config(args.config, args.overrides, [*_common_flags(args), *extra])
    output_dir = Path(config.run.output_dir) if config.run.output_dir else default_output_root()
    _LOGGER.info("Config %s, output directory %s", config.digest(), output_dir)
    return config, ExperimentRunner(config, output_dir)


def _parse_checkpoints(values: Sequence[str]) -> dict[str, Path]:
    checkpoints = {}
    for value in values:
        method, sep, path = value.partition("=")
        if not sep or method not in ALL_METHODS or not path:
            raise ConfigurationError(
                "Checkpoints must look like METHOD=PATH with a known method",
                config_key="--checkpoint",
                config_value=value,
            )
        checkpoints[method] = Path(path)
    return checkpoints


@handle_command_errors()
def cmd_generate(args: argparse.Namespace) -> None:
    """Simulate the source systems and write the dataset."""
    config, runner = _resolve(args, [("data", "n_systems", args.n_systems)])
    path = args.out or runner.dataset_path
    record = runner.generate(path, csv=args.csv)
    dump_config(config, runner.output_dir / CONFIG_FILENAME)
    summary = record.dataset.summary()
    print(
        f"Wrote {summary['n_systems']} systems to {path}\n"
        f"  theta range: [{summary['theta_low']}, {summary['theta_high']}]\n"
        f"  dt: {summary['dt']}\n"
        f"  length: min {summary['min_length']}, max {summary['max_length']}, "
        f"mean {summary['mean_length']:.1f}\n"
        f"  config digest: {config.digest()}"
    )


@handle_command_errors()
def cmd_train(args: argparse.Namespace) -> None:
    """Train one method and write its checkpoint and trace."""
    config, runner = _resolve(args, [("meta", "outer_iterations", args.iterations)])
    dump_config(config, runner.output_dir / args.method / CONFIG_FILENAME)
    outcome = runner.train(args.method, args.dataset, resume=args.resume)
    final = outcome.trace[-1]["outer_loss"] if outcome.trace else float("nan")
    print(
        f"Trained {display_name(args.method)} for {len(outcome.trace)} steps "
        f"(final loss {final:.6g})\n"
        f"  checkpoint: {outcome.checkpoint_path}\n"
        f"  trace: {outcome.trace_path}"
    )


@handle_command_errors()
def cmd_adapt(args: argparse.Namespace) -> None:
    """Adapt a checkpoint to the configured query context."""
    _, runner = _resolve(args)
    checkpoint, adapted, path = runner.adapt(args.checkpoint, args.steps)
    if adapted is None:
        print(f"{display_name(checkpoint.method)} does not adapt; wrote {path}")
        return
    before = f"{adapted.losses[0]:.6g}" if adapted.losses else "n/a"
    print(
        f"Adapted {display_name(checkpoint.method)} for {adapted.steps} steps "
        f"(context loss {before} before the first step)\n"
        f"  checkpoint: {path}"
    )


@handle_command_errors()
def cmd_evaluate(args: argparse.Namespace) -> None:
    """Run the long-horizon comparison or the evaluation grid."""
    config, runner = _resolve(args)
    with validation_stage():
        checkpoints = _parse_checkpoints(args.checkpoints)
        if args.mode == MODE_FIG3:
            methods = config.resolve_methods(
                list(FIG3_METHODS) if args.methods is None else args.methods
            )
        else:
            grid = config.grid
            if args.methods is not None:
                grid = replace(grid, methods=tuple(config.resolve_methods(args.methods)))

    if args.mode == MODE_FIG3:
        results, _, directory = runner.evaluate_fig3(methods, checkpoints)
        for method, result in results.items():
            print(f"{display_name(method):>16}  SSE {result.sse:.4e}")
    else:
        report, directory = runner.evaluate_table1(grid, checkpoints)
        print(render_table(report))
    print(f"Reports written to {directory}")


@handle_command_errors()
def cmd_report(args: argparse.Namespace) -> None:
    """Re-render a stored report CSV as an aligned table."""
    table = render_table(read_report_csv(args.report))
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(f"{table}\n", encoding="utf-8")
    print(table)


def _config_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="YAML experiment config")
    parent.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override one config field (repeatable)",
    )
    parent.add_argument("--seed", type=int, help="seed for every random stream")
    parent.add_argument("--workers", type=int, help="worker threads")
    parent.add_argument("--output-dir", dest="output_dir", type=Path)
    return parent


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meta-ssm",
        description="Meta-learned neural state-space models on van der Pol systems.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    commands = parser.add_subparsers(dest="command", required=True)
    parent = _config_parent()

    generate = commands.add_parser("generate", parents=[parent], help="simulate source data")
    generate.add_argument("--out", type=Path, help="dataset file path")
    generate.add_argument("--n-systems", dest="n_systems", type=int)
    generate.add_argument("--csv", action="store_true", help="also export a CSV")
    generate.set_defaults(handler=cmd_generate)

    train = commands.add_parser("train", parents=[parent], help="train one method")
    train.add_argument("--method", choices=ALL_METHODS, required=True)
    train.add_argument("--dataset", type=Path)
    train.add_argument("--iterations", type=int, help="meta outer iterations")
    train.add_argument("--resume", action="store_true")
    train.set_defaults(handler=cmd_train)

    adapt = commands.add_parser("adapt", parents=[parent], help="adapt to the query")
    adapt.add_argument("--checkpoint", type=Path, required=True)
    adapt.add_argument("--steps", type=int)
    adapt.set_defaults(handler=cmd_adapt)

    evaluate = commands.add_parser("evaluate", parents=[parent], help="score methods")
    evaluate.add_argument("--mode", choices=(MODE_FIG3, MODE_TABLE1), default=MODE_FIG3)
    evaluate.add_argument(
        "--checkpoint",
        dest="checkpoints",
        action="append",
        default=[],
        metavar="METHOD=PATH",
    )
    evaluate.add_argument("--methods", nargs="*")
    evaluate.set_defaults(handler=cmd_evaluate)

    report = commands.add_parser("report", help="render a stored report")
    report.add_argument("--report", type=Path, required=True)
    report.add_argument("--out", type=Path)
    report.set_defaults(handler=cmd_report)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Console entry point; returns the process exit code."""
    args = _build_parser().parse_args(argv)
    _configure_logging(args)
    handler: Callable[[argparse.Namespace], int] = args.handler
    code = handler(args)
    _LOGGER.info("Performance: %s", get_performance_metrics())
    return code
