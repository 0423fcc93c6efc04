import logging
from pathlib import Path

import pandas as pd
from joblib import Parallel, delayed

from ..constants import MODELS_DIR, SWEEP_FILE, WORKERS
from ..entities.catalog import WorkloadProfile
from ..entities.placement import LocationKind
from ..entities.scenario import Scenario
from ..errors import InvalidScenarioError
from .reports import write_csv
from .run_scenario import run_scenario

logger = logging.getLogger(__name__)

SWEEP_WORKLOADS = (10.0, 50.0, 100.0)
SWEEP_RATES = (0.1, 1.0, 10.0, 20.0, 50.0, 100.0, 200.0)
SWEEP_PROFILES = ("constant", "linear")
SWEEP_PUE_PROFILES = ("best-practice", "2014")


def single_vm_variant(
    scenario: Scenario, profile: str, workload_pct: float, rate_mbps: float, pue_profile: str
) -> Scenario:
    """The scenario's only VM re-parameterised; linear profiles have no baseline here."""
    vm = scenario.catalog.vms[0].model_copy(
        update={
            "profile": WorkloadProfile(profile),
            "peak_workload_pct": workload_pct,
            "baseline_pct": 0.0,
            "rate_mbps": rate_mbps,
        }
    )
    catalog = scenario.catalog.model_copy(update={"vms": (vm,)})
    variant = scenario.model_copy(update={"catalog": catalog})
    return variant.with_run(pue_profile=pue_profile)


def _sweep_cell(variant: Scenario, persist_table: bool, models_dir: Path) -> dict:
    outcome = run_scenario(variant, persist_table=persist_table, models_dir=models_dir, workers=1)
    traffic = {kind: 0.0 for kind in LocationKind}
    units = {kind: 0 for kind in LocationKind}
    for entry in outcome.placement.servings:
        traffic[entry.location.kind] += entry.traffic_mbps
        units[entry.location.kind] += 1
    replicas = {kind: 0 for kind in LocationKind}
    for replica in outcome.placement.replicas:
        replicas[replica.location.kind] += 1
    total_traffic = sum(traffic.values())
    winner = max(LocationKind, key=lambda kind: traffic[kind]) if total_traffic > 0 else None
    vm = variant.catalog.vms[0]
    row = {
        "profile": vm.profile.value,
        "workload_pct": vm.peak_workload_pct,
        "rate_mbps": vm.rate_mbps,
        "pue_profile": variant.run.pue_profile,
        "solver": outcome.solver,
        "winning_tier": winner.value if winner is not None else "none",
    }
    for kind in LocationKind:
        row[f"{kind.value}_replicas"] = replicas[kind]
        row[f"{kind.value}_units"] = units[kind]
        row[f"{kind.value}_traffic_share"] = traffic[kind] / total_traffic if total_traffic else 0.0
    row["total_w"] = outcome.total_w
    return row


def sweep_single_vm(
    scenario: Scenario,
    workloads: tuple[float, ...] = SWEEP_WORKLOADS,
    rates: tuple[float, ...] = SWEEP_RATES,
    profiles: tuple[str, ...] = SWEEP_PROFILES,
    pue_profiles: tuple[str, ...] = SWEEP_PUE_PROFILES,
    out_dir: Path | None = None,
    persist_table: bool = False,
    models_dir: Path = MODELS_DIR,
    workers: int = WORKERS,
) -> pd.DataFrame:
    """
    Application layer function for the single-VM tier study.

    1. Re-parameterise the scenario's VM for every (profile, workload, rate, PUE) cell
    2. Solve the cells in parallel with the scenario's solver
    3. Report which tier serves the traffic in each cell
    """
    if len(scenario.catalog.vms) != 1 or scenario.catalog.template is not None:
        raise InvalidScenarioError("sweep-single-vm needs a scenario with exactly one VM")

    variants = [
        single_vm_variant(scenario, profile, workload, rate, pue)
        for profile in profiles
        for workload in workloads
        for rate in rates
        for pue in pue_profiles
    ]
    logger.info(f"Sweeping {len(variants)} single-VM cells with {scenario.run.solver}")
    if workers > 1 and len(variants) > 1:
        rows = Parallel(n_jobs=workers)(
            delayed(_sweep_cell)(variant, persist_table, models_dir) for variant in variants
        )
    else:
        rows = [_sweep_cell(variant, persist_table, models_dir) for variant in variants]

    df = pd.DataFrame(rows)
    if out_dir is not None:
        write_csv(df, Path(out_dir) / SWEEP_FILE)
    return df
