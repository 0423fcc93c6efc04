import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Optional

import typer

from src.application.compare_approaches import compare_approaches
from src.application.offline_training import load_or_train_offline_table
from src.application.run_scenario import run_scenario
from src.application.sweep_single_vm import (
    SWEEP_PROFILES,
    SWEEP_PUE_PROFILES,
    SWEEP_RATES,
    SWEEP_WORKLOADS,
    sweep_single_vm,
)
from src.application.validate_placement import validate_placement
from src.constants import LOG_LEVEL, MODELS_DIR, REPORTS_DIR, WORKERS
from src.entities.scenario import RESTRICTIONS
from src.errors import FogplaceError
from src.loaders import YamlScenarioLoader
from src.model.power import EnergyModel
from src.scripts.generate_random_scenario import write_random_scenario

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="fogplace",
    help="Energy-minimal VM placement over clouds, metro fogs and access fogs.",
    no_args_is_help=True,
)

ScenarioArg = Annotated[Path, typer.Argument(help="Scenario YAML file")]
OutDirOpt = Annotated[Optional[Path], typer.Option("--out-dir", "-o", help="Report directory")]
WorkersOpt = Annotated[int, typer.Option(help="Parallel workers (FOGPLACE_WORKERS)")]


@contextmanager
def _exit_on_domain_error():
    try:
        yield
    except FogplaceError as e:
        logger.error(str(e))
        raise typer.Exit(code=e.exit_code)


def _default_out_dir(out_dir: Path | None, name: str, command: str) -> Path:
    return out_dir if out_dir is not None else REPORTS_DIR / name / command


def _check_restriction(restriction: str | None) -> None:
    if restriction is not None and restriction not in RESTRICTIONS:
        raise typer.BadParameter(f"restriction must be one of {', '.join(RESTRICTIONS)}")


@app.callback()
def main(
    log_level: Annotated[str, typer.Option(help="Logging level")] = LOG_LEVEL,
):
    logging.basicConfig(
        level=log_level.upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


@app.command()
def run(
    scenario_path: ScenarioArg,
    solver: Annotated[Optional[str], typer.Option(help="oracle or heuristic")] = None,
    restriction: Annotated[Optional[str], typer.Option(help="Placement restriction")] = None,
    out_dir: OutDirOpt = None,
    no_persist: Annotated[bool, typer.Option(help="Do not store the offline table")] = False,
    workers: WorkersOpt = WORKERS,
):
    """Solve one scenario and write the power breakdown and placement reports."""
    if solver is not None and solver not in ("oracle", "heuristic"):
        raise typer.BadParameter("solver must be oracle or heuristic")
    _check_restriction(restriction)
    with _exit_on_domain_error():
        scenario = YamlScenarioLoader().load(file_path=scenario_path)
        outcome = run_scenario(
            scenario,
            solver=solver,
            restriction=restriction,
            out_dir=_default_out_dir(out_dir, scenario.name, "run"),
            persist_table=not no_persist,
            workers=workers,
        )
    typer.echo(f"{outcome.scenario}: {outcome.total_w:.3f} W")
    if outcome.audit_problems:
        raise typer.Exit(code=5)


@app.command()
def compare(
    scenario_path: ScenarioArg,
    restriction: Annotated[
        Optional[list[str]], typer.Option("--restriction", "-r", help="Approaches to compare")
    ] = None,
    baseline: Annotated[str, typer.Option(help="Approach savings are measured against")] = "att-sites",
    rate: Annotated[
        Optional[list[float]], typer.Option("--rate", help="Per-user data rates in Mbps")
    ] = None,
    out_dir: OutDirOpt = None,
    no_persist: Annotated[bool, typer.Option(help="Do not store offline tables")] = False,
    workers: WorkersOpt = WORKERS,
):
    """Compare restrictions on the same scenario and report savings against a baseline."""
    for name in restriction or []:
        _check_restriction(name)
    with _exit_on_domain_error():
        scenario = YamlScenarioLoader().load(file_path=scenario_path)
        df = compare_approaches(
            scenario,
            restrictions=restriction,
            baseline=baseline,
            rates=rate,
            out_dir=_default_out_dir(out_dir, scenario.name, "compare"),
            persist_table=not no_persist,
            workers=workers,
        )
    typer.echo(df.to_string(index=False))
    if (df["audit_problems"] > 0).any():
        raise typer.Exit(code=5)


@app.command("sweep-single-vm")
def sweep_single_vm_command(
    scenario_path: ScenarioArg,
    workload: Annotated[Optional[list[float]], typer.Option(help="Peak workloads (%)")] = None,
    rate: Annotated[Optional[list[float]], typer.Option(help="Per-user rates (Mbps)")] = None,
    profile: Annotated[Optional[list[str]], typer.Option(help="Workload profiles")] = None,
    pue_profile: Annotated[Optional[list[str]], typer.Option(help="PUE profiles")] = None,
    out_dir: OutDirOpt = None,
    workers: WorkersOpt = WORKERS,
):
    """Grid of single-VM runs showing which tier serves the demand."""
    with _exit_on_domain_error():
        scenario = YamlScenarioLoader().load(file_path=scenario_path)
        df = sweep_single_vm(
            scenario,
            workloads=tuple(workload or SWEEP_WORKLOADS),
            rates=tuple(rate or SWEEP_RATES),
            profiles=tuple(profile or SWEEP_PROFILES),
            pue_profiles=tuple(pue_profile or SWEEP_PUE_PROFILES),
            out_dir=_default_out_dir(out_dir, scenario.name, "sweep"),
            workers=workers,
        )
    typer.echo(df[["profile", "workload_pct", "rate_mbps", "pue_profile", "winning_tier"]].to_string(index=False))


@app.command()
def validate(
    scenario_path: ScenarioArg,
    servings: Annotated[Path, typer.Argument(help="Placement servings CSV")],
    replicas: Annotated[Optional[Path], typer.Option(help="Placement replicas CSV")] = None,
    out_dir: OutDirOpt = None,
):
    """Check a placement CSV against a scenario and write its violations."""
    with _exit_on_domain_error():
        scenario = YamlScenarioLoader().load(file_path=scenario_path)
        violations = validate_placement(
            scenario,
            servings,
            replicas_path=replicas,
            out_dir=_default_out_dir(out_dir, scenario.name, "validate"),
        )
    for violation in violations:
        typer.echo(str(violation))
    if violations:
        raise typer.Exit(code=4)
    typer.echo("placement is feasible")


@app.command("train-offline")
def train_offline(
    scenario_path: ScenarioArg,
    restriction: Annotated[Optional[str], typer.Option(help="Placement restriction")] = None,
    force: Annotated[bool, typer.Option(help="Retrain even if the stored table is current")] = False,
    models_dir: Annotated[Path, typer.Option(help="Offline table directory")] = MODELS_DIR,
    workers: WorkersOpt = WORKERS,
):
    """Build (or refresh) the heuristic's offline placement table."""
    _check_restriction(restriction)
    with _exit_on_domain_error():
        scenario = YamlScenarioLoader().load(file_path=scenario_path)
        if restriction is not None:
            scenario = scenario.with_run(restriction=restriction)
        table = load_or_train_offline_table(
            EnergyModel(scenario), force_retrain=force, models_dir=models_dir, workers=workers
        )
    for entry in table.entries:
        typer.echo(f"{entry.key.label}: {entry.recipe.label} ({entry.power_w:.3f} W)")


@app.command("generate-scenario")
def generate_scenario(
    output: Annotated[Path, typer.Argument(help="Output YAML file")],
    seed: Annotated[int, typer.Option(help="Random seed")] = 0,
):
    """Write a small random scenario the exact oracle can enumerate."""
    path = write_random_scenario(seed, output)
    typer.echo(str(path))


if __name__ == "__main__":
    app()
