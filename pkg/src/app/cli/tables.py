from __future__ import annotations

from typing import Any, Sequence

from app.core.experiments import SimulationResult, StabilityResult, SweepResult
from app.core.models import BasinReport, ConvergedTo, EssConditionReport, ModelComparison, PayoffTriple, PureProfile


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    if value is None:
        return "-"
    return str(value)


def format_table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [[_cell(value) for value in row] for row in rows]
    widths = [len(title) for title in header]
    for row in cells:
        widths = [max(width, len(text)) for width, text in zip(widths, row)]

    lines = ["  ".join(title.ljust(width) for title, width in zip(header, widths))]
    lines.append("  ".join("-" * width for width in widths))
    lines.extend("  ".join(text.ljust(width) for text, width in zip(row, widths)) for row in cells)
    return "\n".join(lines)


def _point(values: Sequence[float]) -> str:
    return "(" + ", ".join(f"{value:.4g}" for value in values) + ")"


def stability_table(result: StabilityResult) -> str:
    rows = []
    for report in result.equilibria:
        eigenvalues = ", ".join(
            f"{value.real:.4g}" if value.imag == 0 else f"{value.real:.4g}{value.imag:+.4g}j"
            for value in report.stability.eigenvalues
        )
        rows.append(
            [
                report.equilibrium.label,
                report.equilibrium.kind.value,
                _point(report.equilibrium.point.as_tuple()),
                eigenvalues,
                report.stability.kind.value,
            ]
        )
    return format_table(("equilibrium", "kind", "point", "eigenvalues", "class"), rows)


def conditions_table(report: EssConditionReport) -> str:
    baseline = report.model_tag == "baseline"
    header = ["condition", "expression", "lhs", "rhs", "margin", "satisfied"]
    if baseline:
        header.insert(2, "published")
    rows = []
    for condition in report.conditions:
        row: list[Any] = [condition.label, condition.expression, condition.lhs, condition.rhs, condition.margin]
        if baseline:
            row.insert(2, condition.published_form)
        rows.append([*row, condition.satisfied])
    notes = [f"note {condition.label}: {condition.note}" for condition in report.conditions if condition.note]
    return "\n".join([f"E8 ESS conditions ({report.model_tag} model)", format_table(header, rows), *notes])


def comparison_table(comparison: ModelComparison) -> str:
    rows = [
        [before.label, before.margin, after.margin, after.margin - before.margin, before.satisfied, after.satisfied]
        for before, after in zip(comparison.baseline.conditions, comparison.blockchain.conditions)
    ]
    lines = [
        format_table(("condition", "baseline", "blockchain", "shift", "baseline ok", "blockchain ok"), rows),
        f"E8 baseline: {comparison.baseline_e8.kind.value}, blockchain: {comparison.blockchain_e8.kind.value}",
        f"Pareto improvement: {_cell(comparison.pareto_flag)}",
    ]
    if comparison.flipped_to_ess:
        lines.append("E8 becomes an ESS only once the blockchain cost reductions apply.")
    return "\n".join(lines)


def simulation_table(result: SimulationResult) -> str:
    rows = []
    for run in result.runs:
        terminal = run.trajectory.terminal
        if isinstance(terminal, ConvergedTo):
            outcome, point = "converged", terminal.point.as_tuple()
        else:
            outcome, point = "max time", terminal.final.as_tuple()
        rows.append([run.index, _point(run.initial.as_tuple()), outcome, _point(point), len(run.trajectory.samples)])
    for failed in result.failed:
        rows.append([failed.index, _point(failed.initial.as_tuple()), "failed", "-", 0])
    rows.sort(key=lambda row: row[0])
    table = format_table(("#", "initial", "outcome", "terminal", "samples"), rows)
    return f"{table}\nCompleted {len(result.runs)}/{result.total} trajectories, {len(result.failed)} failed"


def basin_table(report: BasinReport) -> str:
    rows: list[list[Any]] = [
        [_point(point), count, count / report.total_samples] for point, count in report.attractor_counts.items()
    ]
    rows.append(["unresolved", report.unresolved, report.unresolved / report.total_samples])
    return "\n".join(
        [
            f"Basins from {report.total_samples} samples (seed {report.seed})",
            format_table(("attractor", "count", "share"), rows),
        ]
    )


def sweep_table(result: SweepResult) -> str:
    header = [*result.axis_names, "E8", "A1", "A2", "A3"]
    if result.basin_samples:
        header.append("share(1,1,1)")
    rows = []
    for row in result.rows:
        values: list[Any] = [row.cell[name] for name in result.axis_names]
        values.append(row.e8.kind.value)
        values.extend(row.ess.margins)
        if result.basin_samples:
            values.append(row.basin_share)
        rows.append(values)
    return format_table(header, rows)


def payoff_table_text(table: list[tuple[PureProfile, PayoffTriple]]) -> str:
    rows = [[profile.label, payoff.u_alpha, payoff.u_beta, payoff.u_gamma] for profile, payoff in table]
    return format_table(("profile (SME/core/FI)", "alpha", "beta", "gamma"), rows)
