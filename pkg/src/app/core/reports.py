from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from app.core.experiments import SimulationResult, StabilityResult, SweepResult
from app.core.models import (
    BasinReport,
    ConditionRecord,
    ConvergedTo,
    EquilibriumReport,
    EssConditionReport,
    ModelComparison,
    ModelParams,
    PayoffTriple,
    PureProfile,
    StabilityClass,
    Trajectory,
)

TRAJECTORY_HEADER = ("t", "x", "y", "z")
CONFIG_FILENAME = "effective-config.json"


def format_number(value: float) -> str:
    """Shortest round-tripping decimal notation, never scientific."""
    return np.format_float_positional(float(value), trim="-")


def trajectory_filename(index: int) -> str:
    return f"trajectory-{index:03d}.csv"


def write_json(path: Path, payload: Any) -> Path:
    with path.open("w", encoding="utf-8") as stream:
        json.dump(payload, stream, indent=2, ensure_ascii=False)
        stream.write("\n")
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    with path.open("w", encoding="utf-8", newline="") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(item) if isinstance(item, float) else item for item in row])
    return path


def write_trajectory_csv(path: Path, trajectory: Trajectory) -> Path:
    rows = ((float(t), state.x, state.y, state.z) for t, state in trajectory.samples)
    return write_csv(path, TRAJECTORY_HEADER, rows)


def terminal_payload(trajectory: Trajectory) -> dict[str, Any]:
    terminal = trajectory.terminal
    if isinstance(terminal, ConvergedTo):
        return {
            "status": "ConvergedTo",
            "point": list(terminal.point.as_tuple()),
            "snapped_to_vertex": terminal.snapped_to_vertex,
        }
    return {"status": "MaxTimeReached", "point": list(terminal.final.as_tuple())}


def simulation_payload(result: SimulationResult) -> dict[str, Any]:
    return {
        "trajectories": [
            {
                "file": trajectory_filename(run.index),
                "initial": list(run.initial.as_tuple()),
                "params_id": run.trajectory.params_id,
                "samples": len(run.trajectory.samples),
                "terminal": terminal_payload(run.trajectory),
                "max_excursion": run.trajectory.max_excursion,
            }
            for run in result.runs
        ],
        "failed": [
            {"index": failed.index, "initial": list(failed.initial.as_tuple()), "message": failed.message}
            for failed in result.failed
        ],
    }


def _eigenvalue_payload(stability: StabilityClass) -> list[dict[str, float]]:
    return [{"re": value.real, "im": value.imag} for value in stability.eigenvalues]


def equilibrium_payload(report: EquilibriumReport) -> dict[str, Any]:
    return {
        "label": report.equilibrium.label,
        "point": list(report.equilibrium.point.as_tuple()),
        "kind": report.equilibrium.kind.value,
        "eigenvalues": _eigenvalue_payload(report.stability),
        "stability": report.stability.kind.value,
        "field_norm": report.field_norm,
    }


def condition_payload(condition: ConditionRecord) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "label": condition.label,
        "expression": condition.expression,
        "lhs": condition.lhs,
        "rhs": condition.rhs,
        "margin": condition.margin,
        "satisfied": condition.satisfied,
    }
    if condition.published_form is not None:
        payload["published_form"] = condition.published_form
    if condition.note is not None:
        payload["deviation"] = condition.note
    return payload


def ess_payload(report: EssConditionReport) -> dict[str, Any]:
    return {
        "model_tag": report.model_tag,
        "all_satisfied": report.all_satisfied,
        "conditions": [condition_payload(condition) for condition in report.conditions],
    }


def stability_payload(result: StabilityResult) -> dict[str, Any]:
    return {
        "params": result.params.as_dict(),
        "equilibria": [equilibrium_payload(report) for report in result.equilibria],
        "ess_conditions": ess_payload(result.ess),
        "model_tag": result.ess.model_tag,
    }


def stability_rows(result: StabilityResult) -> list[list[Any]]:
    rows: list[list[Any]] = []
    for report in result.equilibria:
        point = report.equilibrium.point
        rows.append(
            [
                report.equilibrium.label,
                report.equilibrium.kind.value,
                point.x,
                point.y,
                point.z,
                *(value.real for value in report.stability.eigenvalues),
                report.stability.kind.value,
            ]
        )
    return rows


STABILITY_HEADER = ("label", "kind", "x", "y", "z", "re_lambda1", "re_lambda2", "re_lambda3", "stability")


def _attractor_label(attractor: tuple[float, float, float] | None) -> str:
    if attractor is None:
        return "unresolved"
    return "(" + ",".join(format_number(value) for value in attractor) + ")"


def basin_payload(params: ModelParams, report: BasinReport) -> dict[str, Any]:
    return {
        "params": params.as_dict(),
        "seed": report.seed,
        "total_samples": report.total_samples,
        "unresolved": report.unresolved,
        "attractors": [
            {"point": list(point), "count": count, "share": count / report.total_samples}
            for point, count in report.attractor_counts.items()
        ],
        "max_excursion": report.max_excursion,
    }


def basin_sample_rows(report: BasinReport) -> list[list[Any]]:
    return [
        [sample.initial.x, sample.initial.y, sample.initial.z, _attractor_label(sample.attractor)]
        for sample in report.samples
    ]


BASIN_SAMPLE_HEADER = ("x0", "y0", "z0", "attractor")


def comparison_payload(params: ModelParams, comparison: ModelComparison) -> dict[str, Any]:
    return {
        "params": params.as_dict(),
        "baseline": ess_payload(comparison.baseline),
        "blockchain": ess_payload(comparison.blockchain),
        "margin_shifts": list(comparison.margin_shifts),
        "baseline_e8": comparison.baseline_e8.kind.value,
        "blockchain_e8": comparison.blockchain_e8.kind.value,
        "flipped_to_ess": comparison.flipped_to_ess,
        "pareto_flag": comparison.pareto_flag,
    }


COMPARISON_HEADER = ("condition", "baseline_margin", "blockchain_margin", "shift", "baseline_ok", "blockchain_ok")


def comparison_rows(comparison: ModelComparison) -> list[list[Any]]:
    return [
        [before.label, before.margin, after.margin, after.margin - before.margin, before.satisfied, after.satisfied]
        for before, after in zip(comparison.baseline.conditions, comparison.blockchain.conditions)
    ]


def sweep_header(result: SweepResult) -> list[str]:
    header = [*ModelParams.field_names(), "e8_class", "A1_margin", "A2_margin", "A3_margin"]
    if result.basin_samples:
        header.append("basin_share_111")
    return header


def sweep_rows(result: SweepResult) -> list[list[Any]]:
    rows: list[list[Any]] = []
    for row in result.rows:
        values: list[Any] = [float(value) for value in row.params.as_dict().values()]
        values.append(row.e8.kind.value)
        values.extend(row.ess.margins)
        if result.basin_samples:
            values.append(row.basin_share)
        rows.append(values)
    return rows


def sweep_payload(result: SweepResult) -> dict[str, Any]:
    header = sweep_header(result)
    return {
        "axes": result.axis_names,
        "basin_samples": result.basin_samples,
        "rows": [dict(zip(header, values)) for values in sweep_rows(result)],
    }


PAYOFF_HEADER = ("sme", "core", "fi", "u_alpha", "u_beta", "u_gamma")


def payoff_rows(table: list[tuple[PureProfile, PayoffTriple]]) -> list[list[Any]]:
    return [
        [
            "finance" if profile.sme_finances else "refuse",
            "guarantee" if profile.core_guarantees else "refuse",
            "cooperate" if profile.fi_cooperates else "refuse",
            payoff.u_alpha,
            payoff.u_beta,
            payoff.u_gamma,
        ]
        for profile, payoff in table
    ]


def payoff_payload(params: ModelParams, table: list[tuple[PureProfile, PayoffTriple]]) -> dict[str, Any]:
    return {
        "params": params.as_dict(),
        "profiles": [
            {
                "profile": profile.label,
                "u_alpha": payoff.u_alpha,
                "u_beta": payoff.u_beta,
                "u_gamma": payoff.u_gamma,
            }
            for profile, payoff in table
        ],
    }
