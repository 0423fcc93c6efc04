import pandas as pd
import pytest
from typer.testing import CliRunner

from src.application import run_scenario as run_scenario_module
from src.application.compare_approaches import SUMMARY_COLUMNS, compare_approaches, savings_pct
from src.application.run_scenario import run_scenario
from src.application.sweep_single_vm import sweep_single_vm
from src.application.validate_placement import validate_placement
from src.cli.main import app
from src.constants import (
    POWER_BREAKDOWN_FILE,
    REPLICAS_FILE,
    SCENARIOS_DIR,
    SERVINGS_FILE,
    SUMMARY_FILE,
    SWEEP_FILE,
    VIOLATIONS_FILE,
)
from src.errors import InvalidParameterError, InvalidScenarioError
from src.loaders import PlacementCsvLoader, YamlScenarioLoader
from src.model.catalog import build_demand

from .conftest import make_scenario, make_vm

runner = CliRunner()


def test_bundled_scenarios_load():
    for path in sorted(SCENARIOS_DIR.glob("*.yaml")):
        scenario = YamlScenarioLoader().load(file_path=path)
        assert scenario.name == path.stem


def test_unknown_keys_are_rejected(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(
        (SCENARIOS_DIR / "toy-line.yaml").read_text(encoding="utf-8") + "colour: blue\n",
        encoding="utf-8",
    )
    with pytest.raises(InvalidScenarioError, match="colour"):
        YamlScenarioLoader().load(file_path=path)


def test_yaml_errors_name_the_line(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("name: broken\ntopology: [1, 2\n", encoding="utf-8")
    with pytest.raises(InvalidScenarioError, match="line"):
        YamlScenarioLoader().load(file_path=path)


def test_missing_scenario_file(tmp_path):
    with pytest.raises(InvalidScenarioError, match="not found"):
        YamlScenarioLoader().load(file_path=tmp_path / "missing.yaml")


def test_single_vm_scenario_has_800_users():
    scenario = YamlScenarioLoader().load(file_path=SCENARIOS_DIR / "att-single-vm.yaml")
    df = build_demand(scenario).get_pandas_dataframe()
    assert df["users"].sum() == 800
    assert df["traffic_mbps"].sum() == pytest.approx(800 * 20.0)


def test_run_writes_reports_that_validate(toy_scenario, tmp_path):
    outcome = run_scenario(toy_scenario, out_dir=tmp_path / "run", models_dir=tmp_path / "models", workers=1)
    assert outcome.audit_problems == ()
    assert outcome.evaluated == 625

    breakdown = pd.read_csv(tmp_path / "run" / POWER_BREAKDOWN_FILE)
    assert not breakdown.empty

    servings = tmp_path / "run" / SERVINGS_FILE
    replicas = tmp_path / "run" / REPLICAS_FILE
    loaded = PlacementCsvLoader().load(file_path=servings, replicas_path=replicas)
    assert loaded == outcome.placement
    assert validate_placement(toy_scenario, servings, replicas, out_dir=tmp_path / "check") == []
    assert pd.read_csv(tmp_path / "check" / VIOLATIONS_FILE).empty


def test_heuristic_run_persists_its_table(toy_scenario, tmp_path):
    outcome = run_scenario(toy_scenario, solver="heuristic", models_dir=tmp_path, workers=1)
    assert outcome.solver == "heuristic"
    assert list(tmp_path.rglob("offline_table.json"))


def test_validate_reports_violations(toy_scenario, tmp_path):
    servings = tmp_path / "servings.csv"
    pd.DataFrame(
        [{"vm": "video", "pon": 1, "node": 1, "location_kind": "metro_fog", "location_node": 3, "traffic_mbps": 1.0}]
    ).to_csv(servings, index=False)
    violations = validate_placement(toy_scenario, servings)
    constraints = {violation.constraint for violation in violations}
    assert "locality" in constraints
    assert "conservation" in constraints


def test_validate_reads_declared_instances(line3, tmp_path):
    scenario = make_scenario(
        line3, [make_vm(rate_mbps=10.0, popularity_share=0.5, max_users_per_replica=60)], demand_nodes=(1, 3)
    )
    servings = tmp_path / SERVINGS_FILE
    replicas = tmp_path / REPLICAS_FILE
    pd.DataFrame(
        [
            {"vm": "vm1", "pon": 1, "node": node, "location_kind": "cloud", "location_node": 2, "traffic_mbps": 500.0}
            for node in (1, 3)
        ]
    ).to_csv(servings, index=False)

    for instances, expected in [(1, ["capacity"]), (2, [])]:
        pd.DataFrame(
            [{"vm": "vm1", "location_kind": "cloud", "location_node": 2, "location_pon": None, "instances": instances}]
        ).to_csv(replicas, index=False)
        violations = validate_placement(scenario, servings, replicas)
        assert [violation.constraint for violation in violations] == expected
    assert PlacementCsvLoader().load(file_path=servings, replicas_path=replicas).replicas[0].instances == 2


def test_compare_reports_savings_against_the_baseline(toy_scenario, tmp_path):
    df = compare_approaches(
        toy_scenario,
        restrictions=["none", "clouds-only"],
        baseline="att-sites",
        out_dir=tmp_path,
        persist_table=False,
        workers=1,
    )
    assert list(df.columns) == SUMMARY_COLUMNS
    assert list(df["approach"]) == ["none", "clouds-only", "att-sites"]
    baseline = df.loc[df["approach"] == "att-sites", "total_w"].item()
    for row in df.itertuples(index=False):
        assert row.saving_pct == pytest.approx(savings_pct(row.total_w, baseline))
    assert df.loc[df["approach"] == "att-sites", "saving_pct"].item() == pytest.approx(0.0)
    assert (df["saving_pct"] >= -1e-9).all()
    assert (df["audit_problems"] == 0).all()
    assert (tmp_path / SUMMARY_FILE).exists()


def test_compare_rejects_unknown_baseline(toy_scenario):
    with pytest.raises(InvalidParameterError):
        compare_approaches(toy_scenario, baseline="everywhere", persist_table=False, workers=1)


def test_savings_formula():
    assert savings_pct(80.0, 100.0) == pytest.approx(20.0)


def test_single_vm_sweep(line3, tmp_path):
    scenario = make_scenario(
        line3, [make_vm(popularity_share=1.0)], users_per_pon=100, demand_nodes=(1,), solver="oracle"
    )
    df = sweep_single_vm(
        scenario,
        workloads=(10.0,),
        rates=(0.1, 100.0),
        profiles=("constant",),
        pue_profiles=("best-practice",),
        out_dir=tmp_path,
        workers=1,
    )
    assert len(df) == 2
    assert set(df["winning_tier"]) <= {"cloud", "metro_fog", "access_fog"}
    shares = df[["cloud_traffic_share", "metro_fog_traffic_share", "access_fog_traffic_share"]].sum(axis=1)
    assert shares.tolist() == pytest.approx([1.0, 1.0])
    assert (tmp_path / SWEEP_FILE).exists()


def test_sweep_needs_exactly_one_vm(toy_scenario):
    with pytest.raises(InvalidScenarioError):
        sweep_single_vm(toy_scenario, workers=1)


def test_cli_generate_run_and_validate(tmp_path):
    scenario_path = tmp_path / "random.yaml"
    result = runner.invoke(app, ["generate-scenario", str(scenario_path), "--seed", "2"])
    assert result.exit_code == 0, result.output
    assert scenario_path.exists()

    out_dir = tmp_path / "out"
    result = runner.invoke(
        app, ["run", str(scenario_path), "--out-dir", str(out_dir), "--no-persist", "--workers", "1"]
    )
    assert result.exit_code == 0, result.output
    assert " W" in result.output

    result = runner.invoke(
        app, ["validate", str(scenario_path), str(out_dir / SERVINGS_FILE), "--out-dir", str(tmp_path / "v")]
    )
    assert result.exit_code == 0, result.output
    assert "feasible" in result.output


def test_cli_exit_codes(tmp_path):
    scenario_path = SCENARIOS_DIR / "toy-line.yaml"
    servings = tmp_path / "servings.csv"
    pd.DataFrame(
        [{"vm": "video", "pon": 1, "node": 1, "location_kind": "cloud", "location_node": 2, "traffic_mbps": 1.0}]
    ).to_csv(servings, index=False)
    result = runner.invoke(app, ["validate", str(scenario_path), str(servings), "--out-dir", str(tmp_path)])
    assert result.exit_code == 4

    result = runner.invoke(app, ["run", str(tmp_path / "missing.yaml"), "--out-dir", str(tmp_path)])
    assert result.exit_code == 2

    result = runner.invoke(app, ["run", str(scenario_path), "--solver", "annealing"])
    assert result.exit_code != 0


def test_run_and_compare_exit_5_on_audit_problems(tmp_path, monkeypatch):
    scenario_path = SCENARIOS_DIR / "toy-line.yaml"
    monkeypatch.setattr(run_scenario_module, "audit_breakdown", lambda *args, **kwargs: ["watts drifted"])

    result = runner.invoke(
        app, ["run", str(scenario_path), "--out-dir", str(tmp_path / "run"), "--no-persist", "--workers", "1"]
    )
    assert result.exit_code == 5, result.output

    result = runner.invoke(
        app,
        [
            "compare", str(scenario_path),
            "-r", "none",
            "--baseline", "clouds-only",
            "--out-dir", str(tmp_path / "compare"),
            "--no-persist",
            "--workers", "1",
        ],
    )
    assert result.exit_code == 5, result.output
    assert "audit_problems" in result.output
