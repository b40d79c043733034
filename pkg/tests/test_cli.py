from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from app.cli.main import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main
from app.core.presets import PARAMETER_PRESETS
from tests.helpers import params_payload


def _read_csv(path: Path) -> list[dict[str, str]]:
    with path.open(encoding="utf-8", newline="") as stream:
        return list(csv.DictReader(stream))


def _run(*argv: str) -> int:
    return main(list(argv))


def test_stability_report_lists_every_equilibrium(tmp_path, capsys):
    out = tmp_path / "stability"
    assert _run("stability", "--preset", "bistable", "--out", str(out)) == EXIT_OK

    report = json.loads((out / "stability.json").read_text(encoding="utf-8"))
    assert set(report) == {"params", "equilibria", "ess_conditions", "model_tag"}
    kinds = [item["kind"] for item in report["equilibria"]]
    assert kinds.count("Vertex") == 8
    assert kinds.count("Interior") == 1
    e8 = next(item for item in report["equilibria"] if item["label"] == "E8")
    assert e8["stability"] == "ESS"
    assert report["model_tag"] == "baseline"

    printed = capsys.readouterr().out
    equilibrium_table = printed.split("\n\n")[0]
    printed_classes = {
        line.split()[0]: line.split()[-1] for line in equilibrium_table.splitlines() if line.startswith("E")
    }
    json_classes = {item["label"]: item["stability"] for item in report["equilibria"] if item["kind"] == "Vertex"}
    assert printed_classes == json_classes
    assert "Full cooperation E8 is ESS" in printed


def test_baseline_conditions_print_the_published_forms(tmp_path, capsys):
    assert _run("stability", "--preset", "bistable", "--out", str(tmp_path)) == EXIT_OK
    printed = capsys.readouterr().out
    conditions = printed.split("\n\n")[1]
    assert "published" in conditions.splitlines()[1]
    for form in ("r > 1 + θ(I1 + K)", "S + θ(I1 + K) > I2 + K + C2", "I2 > C3"):
        assert form in conditions
    assert "m2" not in conditions and "m3" not in conditions
    assert "note A1:" in conditions


def test_stability_flags_non_hyperbolic_full_cooperation(tmp_path, write_config):
    params = params_payload(PARAMETER_PRESETS["bistable"], I2=0.15, C3=0.15)
    path = write_config({"params": params, "outputs": {"directory": str(tmp_path / "out")}})
    assert _run("stability", "--config", str(path)) == EXIT_OK

    report = json.loads((tmp_path / "out" / "stability.json").read_text(encoding="utf-8"))
    e8 = next(item for item in report["equilibria"] if item["label"] == "E8")
    assert e8["stability"] == "NonHyperbolic"


def test_simulate_from_a_vertex_writes_one_row(tmp_path, write_config):
    path = write_config(
        {"params": params_payload(PARAMETER_PRESETS["bistable"]), "initial_states": [[1, 1, 1]]}
    )
    out = tmp_path / "sim"
    assert _run("simulate", "--config", str(path), "--out", str(out)) == EXIT_OK

    lines = (out / "trajectory-001.csv").read_text(encoding="utf-8").splitlines()
    assert lines == ["t,x,y,z", "0,1,1,1"]
    assert (out / "phase-plot.svg").exists()


def test_simulate_rejects_empty_initial_states(tmp_path, write_config):
    path = write_config({"params": params_payload(PARAMETER_PRESETS["bistable"]), "initial_states": []})
    out = tmp_path / "sim"
    assert _run("simulate", "--config", str(path), "--out", str(out)) == EXIT_USAGE
    assert not out.exists()


def test_simulate_grid_corners_reach_both_ess(tmp_path, write_config):
    path = write_config({"params": params_payload(PARAMETER_PRESETS["bistable"]), "initial_states": {"grid": 2}})
    out = tmp_path / "sim"
    assert _run("simulate", "--config", str(path), "--out", str(out), "--format", "csv,json,svg,webp") == EXIT_OK

    summary = json.loads((out / "simulate.json").read_text(encoding="utf-8"))
    terminals = {tuple(item["terminal"]["point"]) for item in summary["trajectories"]}
    assert (0.0, 0.0, 0.0) in terminals
    assert (1.0, 1.0, 1.0) in terminals
    assert len(list(out.glob("trajectory-*.csv"))) == 8
    assert (out / "phase-plot.webp").stat().st_size > 0

    for item in summary["trajectories"]:
        rows = _read_csv(out / item["file"])
        assert all(0.0 <= float(row[axis]) <= 1.0 for row in rows for axis in "xyz")
        assert item["max_excursion"] <= 1e-9


def test_simulate_reports_numerical_failure(tmp_path, write_config):
    params = params_payload(PARAMETER_PRESETS["bistable"], r=1e308)
    path = write_config({"params": params, "initial_states": [[0.5, 0.5, 0.5]]})
    assert _run("simulate", "--config", str(path), "--out", str(tmp_path / "sim")) == EXIT_NUMERICAL


def test_compare_refuses_without_reductions(tmp_path, capsys):
    assert _run("compare", "--preset", "bistable", "--out", str(tmp_path)) == EXIT_USAGE
    assert "nothing to compare" in capsys.readouterr().err


def test_compare_margins_shift_by_the_reduction(tmp_path, write_config):
    params = params_payload(PARAMETER_PRESETS["bistable"], C3=0.6, m1=0.5, m2=0.5, m3=0.5)
    path = write_config({"params": params, "outputs": {"directory": str(tmp_path / "cmp")}})
    assert _run("compare", "--config", str(path)) == EXIT_OK

    report = json.loads((tmp_path / "cmp" / "compare.json").read_text(encoding="utf-8"))
    assert report["margin_shifts"] == pytest.approx([0.5, 0.5, 0.5], abs=1e-12)
    assert report["pareto_flag"] is True


def test_compare_highlights_the_flip(tmp_path, write_config, capsys):
    params = params_payload(PARAMETER_PRESETS["bistable"], C1=2.9, m1=0.5)
    path = write_config({"params": params, "outputs": {"directory": str(tmp_path / "cmp")}})
    assert _run("compare", "--config", str(path)) == EXIT_OK

    report = json.loads((tmp_path / "cmp" / "compare.json").read_text(encoding="utf-8"))
    assert report["baseline_e8"] == "Saddle"
    assert report["blockchain_e8"] == "ESS"
    assert report["flipped_to_ess"] is True
    assert "becomes an ESS" in capsys.readouterr().out


def _sweep_config(tmp_path: Path, write_config, grid: dict, basin_samples: int = 0) -> Path:
    params = params_payload(PARAMETER_PRESETS["bistable"], C1=2.9)
    return write_config(
        {
            "params": params,
            "sweep": {"grid": grid, "basin_samples": basin_samples},
            "integrator": {"t_max": 200},
        }
    )


def test_sweep_crosses_into_ess(tmp_path, write_config):
    path = _sweep_config(tmp_path, write_config, {"m1": {"min": 0.0, "max": 1.0, "steps": 5}})
    assert _run("sweep", "--config", str(path), "--out", str(tmp_path / "sweep")) == EXIT_OK

    rows = _read_csv(tmp_path / "sweep" / "sweep.csv")
    assert [float(row["m1"]) for row in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert [row["e8_class"] for row in rows] == ["Saddle", "Saddle", "ESS", "ESS", "ESS"]
    margins = [float(row["A1_margin"]) for row in rows]
    assert margins == sorted(margins)


def test_single_cell_sweep_matches_stability(tmp_path, write_config):
    path = _sweep_config(tmp_path, write_config, {"m1": {"min": 0.5, "max": 0.5, "steps": 1}})
    assert _run("sweep", "--config", str(path), "--out", str(tmp_path / "sweep")) == EXIT_OK
    assert _run("stability", "--config", str(path), "--out", str(tmp_path / "stab")) == EXIT_OK

    rows = _read_csv(tmp_path / "sweep" / "sweep.csv")
    assert len(rows) == 1
    stability = json.loads((tmp_path / "stab" / "stability.json").read_text(encoding="utf-8"))
    e8 = next(item for item in stability["equilibria"] if item["label"] == "E8")
    # the sweep overrides m1; the stability run uses the base m1 = 0
    assert rows[0]["e8_class"] == "ESS"
    assert e8["stability"] == "Saddle"
    assert float(rows[0]["C1"]) == stability["params"]["C1"]


def test_sweep_rejects_zero_steps(tmp_path, write_config):
    path = _sweep_config(tmp_path, write_config, {"m1": {"min": 0.0, "max": 1.0, "steps": 0}})
    assert _run("sweep", "--config", str(path), "--out", str(tmp_path / "sweep")) == EXIT_USAGE


def test_sweep_is_byte_identical_across_runs(tmp_path, write_config):
    grid = {"m1": {"min": 0.0, "max": 1.0, "steps": 3}}
    path = _sweep_config(tmp_path, write_config, grid, basin_samples=40)
    for name in ("first", "second"):
        assert _run("sweep", "--config", str(path), "--out", str(tmp_path / name), "--seed", "3") == EXIT_OK
    for artifact in ("sweep.csv", "sweep.json"):
        assert (tmp_path / "first" / artifact).read_bytes() == (tmp_path / "second" / artifact).read_bytes()


def test_basins_are_byte_identical_across_runs(tmp_path, write_config):
    path = write_config({"params": params_payload(PARAMETER_PRESETS["bistable"]), "basins": {"n_samples": 150}})
    for name in ("first", "second"):
        assert _run("basins", "--config", str(path), "--out", str(tmp_path / name), "--seed", "7") == EXIT_OK
    for artifact in ("basins.json", "basin-samples.csv"):
        assert (tmp_path / "first" / artifact).read_bytes() == (tmp_path / "second" / artifact).read_bytes()

    report = json.loads((tmp_path / "first" / "basins.json").read_text(encoding="utf-8"))
    assert report["seed"] == 7
    assert sum(item["count"] for item in report["attractors"]) + report["unresolved"] == 150


def test_effective_config_reproduces_outputs(tmp_path, write_config):
    path = write_config(
        {
            "params": params_payload(PARAMETER_PRESETS["blockchain"]),
            "stability": {"include_faces": True},
            "outputs": {"directory": str(tmp_path / "first")},
        }
    )
    assert _run("stability", "--config", str(path)) == EXIT_OK
    effective = tmp_path / "first" / "effective-config.json"
    assert _run("stability", "--config", str(effective), "--out", str(tmp_path / "second")) == EXIT_OK
    assert (tmp_path / "first" / "stability.json").read_bytes() == (tmp_path / "second" / "stability.json").read_bytes()


def test_phase_plot_svg_is_deterministic(tmp_path, write_config):
    path = write_config(
        {"params": params_payload(PARAMETER_PRESETS["bistable"]), "initial_states": [[0.9, 0.9, 0.9], [0.05, 0.05, 0.05]]}
    )
    for name in ("first", "second"):
        assert _run("simulate", "--config", str(path), "--out", str(tmp_path / name), "--format", "svg") == EXIT_OK
    assert (tmp_path / "first" / "phase-plot.svg").read_bytes() == (tmp_path / "second" / "phase-plot.svg").read_bytes()


def test_payoffs_command(tmp_path, capsys):
    assert _run("payoffs", "--preset", "bistable", "--out", str(tmp_path)) == EXIT_OK
    rows = _read_csv(tmp_path / "payoffs.csv")
    assert len(rows) == 8
    assert rows[-1] == {"sme": "refuse", "core": "refuse", "fi": "refuse", "u_alpha": "10", "u_beta": "10", "u_gamma": "10"}
    assert "finance/guarantee/cooperate" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        ["stability"],
        ["stability", "--preset", "bistable", "--config", "x.json"],
        ["stability", "--preset", "bistable", "--format", "pdf"],
        ["stability", "--preset", "unknown"],
        ["stability", "--config", "does-not-exist.json"],
    ],
)
def test_usage_errors_exit_with_one(tmp_path, argv):
    assert main([*argv, "--out", str(tmp_path)]) == EXIT_USAGE


def test_unknown_config_key_exits_with_one(tmp_path, write_config):
    params = params_payload(PARAMETER_PRESETS["bistable"])
    params["thetta"] = params.pop("theta")
    path = write_config({"params": params})
    assert _run("stability", "--config", str(path), "--out", str(tmp_path)) == EXIT_USAGE


def test_unknown_subcommand_exits_with_one():
    with pytest.raises(SystemExit) as excinfo:
        main(["dance"])
    assert excinfo.value.code == EXIT_USAGE


def test_config_with_invalid_utf8_exits_with_one(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_bytes(b'{"params": {"R1": 1\xff}}')
    assert _run("stability", "--config", str(path), "--out", str(tmp_path / "out")) == EXIT_USAGE
    assert "invalid UTF-8" in capsys.readouterr().err


@pytest.mark.parametrize("key", ["t_max", "step_size"])
def test_infinite_integrator_settings_exit_with_one(tmp_path, write_config, key):
    path = write_config(
        {
            "params": params_payload(PARAMETER_PRESETS["bistable"]),
            "integrator": {key: float("inf")},
            "initial_states": [[0.5, 0.5, 0.5]],
        }
    )
    assert _run("simulate", "--config", str(path), "--out", str(tmp_path / "sim")) == EXIT_USAGE


def test_simulate_prints_a_summary(tmp_path, write_config, capsys):
    path = write_config(
        {"params": params_payload(PARAMETER_PRESETS["bistable"]), "initial_states": [[1, 1, 1], [0, 0, 0]]}
    )
    assert _run("simulate", "--config", str(path), "--out", str(tmp_path / "sim"), "--format", "csv") == EXIT_OK
    assert "Completed 2/2 trajectories, 0 failed" in capsys.readouterr().out
