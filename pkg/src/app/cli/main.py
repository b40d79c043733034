from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Sequence

from app import __version__
from app.cli import tables
from app.core import reports
from app.core.config import ExperimentConfig, config_from_preset, dump_config, load_config, with_overrides
from app.core.errors import GameModelError, NonFiniteStateError, UsageError
from app.core.experiments import ExperimentRunner
from app.core.plotting import build_phase_figure, write_svg, write_webp
from app.core.stability import analyze_equilibria
from app.core.validation import detect_output_conflicts, validate_params

logger = logging.getLogger("app.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

Command = Callable[[ExperimentConfig, ExperimentRunner], int]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _log(message: str) -> None:
    logger.info(message)


def _progress(current: int, total: int) -> None:
    logger.debug("Progress: %d/%d", current, total)


def _enabled_names(config: ExperimentConfig, names: dict[str, str]) -> list[str]:
    return [name for name, output_format in names.items() if getattr(config.outputs, output_format)]


def _prepare_output(config: ExperimentConfig, expected_names: list[str]) -> Path:
    output_dir = config.outputs.directory
    output_dir.mkdir(parents=True, exist_ok=True)

    conflicts = detect_output_conflicts(output_dir, [reports.CONFIG_FILENAME, *expected_names])
    if conflicts.has_conflicts:
        preview = ", ".join(conflicts.existing_files[:5])
        if len(conflicts.existing_files) > 5:
            preview += ", ..."
        logger.warning("Overwriting existing files in %s: %s", output_dir, preview)

    dump_config(config, output_dir / reports.CONFIG_FILENAME)
    return output_dir


def cmd_simulate(config: ExperimentConfig, runner: ExperimentRunner) -> int:
    result = runner.simulate(config, on_progress=_progress, on_log=_log)
    outputs = config.outputs

    expected: list[str] = []
    if outputs.csv:
        expected.extend(reports.trajectory_filename(run.index) for run in result.runs)
    if outputs.json:
        expected.append("simulate.json")
    if outputs.svg:
        expected.append("phase-plot.svg")
    if outputs.webp:
        expected.append("phase-plot.webp")
    output_dir = _prepare_output(config, expected)

    if outputs.csv:
        for run in result.runs:
            reports.write_trajectory_csv(output_dir / reports.trajectory_filename(run.index), run.trajectory)
    if outputs.json:
        reports.write_json(output_dir / "simulate.json", reports.simulation_payload(result))
    if outputs.svg or outputs.webp:
        equilibria = analyze_equilibria(config.params, tol=config.stability.tol)
        figure = build_phase_figure([run.trajectory for run in result.runs], equilibria)
        if outputs.svg:
            write_svg(figure, output_dir / "phase-plot.svg")
        if outputs.webp:
            write_webp(figure, output_dir / "phase-plot.webp", outputs.webp_quality)

    print(tables.simulation_table(result))
    if result.failed:
        for failed in result.failed:
            print(f"error: trajectory {failed.index} failed: {failed.message}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_stability(config: ExperimentConfig, runner: ExperimentRunner) -> int:
    result = runner.stability(config)
    expected = _enabled_names(config, {"stability.json": "json", "stability.csv": "csv"})
    output_dir = _prepare_output(config, expected)

    if config.outputs.json:
        reports.write_json(output_dir / "stability.json", reports.stability_payload(result))
    if config.outputs.csv:
        reports.write_csv(output_dir / "stability.csv", reports.STABILITY_HEADER, reports.stability_rows(result))

    print(tables.stability_table(result))
    print()
    print(tables.conditions_table(result.ess))
    print(f"Full cooperation E8 is {result.full_cooperation.stability.kind.value}")
    return EXIT_OK


def cmd_basins(config: ExperimentConfig, runner: ExperimentRunner) -> int:
    report = runner.basins(config, on_progress=_progress, on_log=_log)
    expected = _enabled_names(config, {"basins.json": "json", "basin-samples.csv": "csv"})
    output_dir = _prepare_output(config, expected)

    if config.outputs.json:
        reports.write_json(output_dir / "basins.json", reports.basin_payload(config.params, report))
    if config.outputs.csv:
        reports.write_csv(output_dir / "basin-samples.csv", reports.BASIN_SAMPLE_HEADER, reports.basin_sample_rows(report))

    print(tables.basin_table(report))
    return EXIT_OK


def cmd_compare(config: ExperimentConfig, runner: ExperimentRunner) -> int:
    comparison = runner.compare(config)
    expected = _enabled_names(config, {"compare.json": "json", "compare.csv": "csv"})
    output_dir = _prepare_output(config, expected)

    if config.outputs.json:
        reports.write_json(output_dir / "compare.json", reports.comparison_payload(config.params, comparison))
    if config.outputs.csv:
        reports.write_csv(output_dir / "compare.csv", reports.COMPARISON_HEADER, reports.comparison_rows(comparison))

    print(tables.comparison_table(comparison))
    return EXIT_OK


def cmd_sweep(config: ExperimentConfig, runner: ExperimentRunner) -> int:
    result = runner.sweep(config, on_progress=_progress, on_log=_log)
    expected = _enabled_names(config, {"sweep.csv": "csv", "sweep.json": "json"})
    output_dir = _prepare_output(config, expected)

    if config.outputs.csv:
        reports.write_csv(output_dir / "sweep.csv", reports.sweep_header(result), reports.sweep_rows(result))
    if config.outputs.json:
        reports.write_json(output_dir / "sweep.json", reports.sweep_payload(result))

    print(tables.sweep_table(result))
    return EXIT_OK


def cmd_payoffs(config: ExperimentConfig, runner: ExperimentRunner) -> int:
    table = runner.payoffs(config)
    expected = _enabled_names(config, {"payoffs.csv": "csv", "payoffs.json": "json"})
    output_dir = _prepare_output(config, expected)

    if config.outputs.csv:
        reports.write_csv(output_dir / "payoffs.csv", reports.PAYOFF_HEADER, reports.payoff_rows(table))
    if config.outputs.json:
        reports.write_json(output_dir / "payoffs.json", reports.payoff_payload(config.params, table))

    print(tables.payoff_table_text(table))
    return EXIT_OK


COMMANDS: dict[str, tuple[Command, str]] = {
    "simulate": (cmd_simulate, "integrate trajectories and draw the phase paths"),
    "stability": (cmd_stability, "classify every equilibrium and evaluate the E8 ESS conditions"),
    "basins": (cmd_basins, "estimate basins of attraction from seeded random starts"),
    "compare": (cmd_compare, "compare baseline and blockchain ESS condition margins"),
    "sweep": (cmd_sweep, "classify E8 over a parameter grid"),
    "payoffs": (cmd_payoffs, "print the pure-strategy payoff matrix"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_argument_group("parameters")
    source.add_argument("--config", type=Path, help="JSON experiment configuration")
    source.add_argument("--preset", help="named parameter preset instead of a configuration file")
    common.add_argument("--out", type=Path, help="output directory (overrides outputs.directory)")
    common.add_argument("--seed", type=int, help="random seed (overrides the configuration)")
    common.add_argument("--format", dest="formats", help="comma-separated output formats: csv,json,svg,webp")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress logs, -vv for debug")

    parser = _Parser(prog="sc-finance-game", description="Tripartite supply chain finance evolutionary game engine")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None and args.preset is not None:
        raise UsageError("use either --config or --preset, not both")
    if args.config is None and args.preset is None:
        raise UsageError("one of --config or --preset is required")

    config = load_config(args.config) if args.config is not None else config_from_preset(args.preset)
    formats = None
    if args.formats is not None:
        formats = [item.strip() for item in args.formats.split(",") if item.strip()]
    if args.seed is not None and args.seed < 0:
        raise UsageError("--seed must be a non-negative integer")

    config = with_overrides(config, output_dir=args.out, seed=args.seed, formats=formats)
    validate_params(config.params)
    return config


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    command, _ = COMMANDS[args.command]
    try:
        config = resolve_config(args)
        return command(config, ExperimentRunner())
    except NonFiniteStateError as error:
        print(f"error: numerical failure: {error}", file=sys.stderr)
        return EXIT_NUMERICAL
    except GameModelError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_USAGE
