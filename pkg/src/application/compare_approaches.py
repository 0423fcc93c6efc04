import logging
from pathlib import Path

import pandas as pd
from joblib import Parallel, delayed

from ..constants import MODELS_DIR, SUMMARY_FILE, WORKERS
from ..entities.scenario import RESTRICTIONS, Scenario
from ..errors import InvalidParameterError
from ..model.catalog import build_demand
from .reports import write_csv, write_run_reports
from .run_scenario import run_scenario

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "approach",
    "solver",
    "rate_mbps",
    "baseline_pct",
    "total_w",
    "core_w",
    "metro_w",
    "pon_w",
    "cloud_w",
    "metro_fog_w",
    "access_fog_w",
    "baseline_approach",
    "saving_pct",
    "audit_problems",
]


def scenario_rate_and_baseline(scenario: Scenario) -> tuple[float, float]:
    source = scenario.catalog.template or scenario.catalog.vms[0]
    return source.rate_mbps, source.baseline_pct


def savings_pct(power_w: float, baseline_w: float) -> float:
    """1 - Pa / Pb, in percent."""
    return (1.0 - power_w / baseline_w) * 100.0


def _run_cell(scenario, restriction, persist_table, models_dir):
    # cells run in worker processes; reports are written by the parent
    return run_scenario(
        scenario,
        restriction=restriction,
        persist_table=persist_table,
        models_dir=models_dir,
        workers=1,
    )


def compare_approaches(
    scenario: Scenario,
    restrictions: list[str] | None = None,
    baseline: str = "att-sites",
    rates: list[float] | None = None,
    out_dir: Path | None = None,
    persist_table: bool = True,
    models_dir: Path = MODELS_DIR,
    workers: int = WORKERS,
) -> pd.DataFrame:
    """
    Application layer function to compare placement approaches.

    1. Build one cell per (data rate, restriction); everything else is shared
    2. Solve the cells in parallel
    3. Report each approach's saving against the baseline approach at the same rate
    4. Count each approach's power audit problems; callers decide how to fail
    """
    restrictions = list(restrictions or RESTRICTIONS)
    if baseline not in RESTRICTIONS:
        raise InvalidParameterError(f"Unknown baseline approach {baseline}")
    if baseline not in restrictions:
        restrictions.append(baseline)
    if not scenario.topology.datacenter_sites and "att-sites" in restrictions:
        if baseline == "att-sites":
            raise InvalidParameterError("att-sites baseline needs topology.datacenter_sites")
        logger.warning("Topology has no datacenter_sites, skipping the att-sites approach")
        restrictions.remove("att-sites")

    variants = [scenario.with_rate(rate) for rate in rates] if rates else [scenario]
    cells = [(variant, restriction) for variant in variants for restriction in restrictions]
    logger.info(f"Comparing {len(restrictions)} approaches over {len(variants)} data rate(s)")

    if workers > 1 and len(cells) > 1:
        outcomes = Parallel(n_jobs=workers)(
            delayed(_run_cell)(variant, restriction, persist_table, models_dir)
            for variant, restriction in cells
        )
    else:
        outcomes = [
            _run_cell(variant, restriction, persist_table, models_dir) for variant, restriction in cells
        ]

    rows = []
    for (variant, restriction), outcome in zip(cells, outcomes):
        rate, baseline_pct = scenario_rate_and_baseline(variant)
        segments = outcome.evaluation.breakdown.by_segment()
        rows.append(
            {
                "approach": restriction,
                "solver": outcome.solver,
                "rate_mbps": rate,
                "baseline_pct": baseline_pct,
                "total_w": outcome.total_w,
                **{f"{segment}_w": watts for segment, watts in segments.items()},
                "baseline_approach": baseline,
                "audit_problems": len(outcome.audit_problems),
            }
        )
    df = pd.DataFrame(rows)
    reference = df[df["approach"] == baseline].set_index("rate_mbps")["total_w"]
    df["saving_pct"] = [
        savings_pct(total, reference[rate]) for total, rate in zip(df["total_w"], df["rate_mbps"])
    ]
    df = df[SUMMARY_COLUMNS]

    if out_dir is not None:
        out_dir = Path(out_dir)
        for (variant, restriction), outcome in zip(cells, outcomes):
            rate, _ = scenario_rate_and_baseline(variant)
            write_run_reports(
                out_dir / f"{restriction}-{rate:g}mbps",
                outcome.evaluation.breakdown,
                outcome.placement,
                outcome.evaluation.core_state,
                build_demand(variant),
            )
        write_csv(df, out_dir / SUMMARY_FILE)
    for row in df.itertuples(index=False):
        logger.info(
            f"{row.approach} @ {row.rate_mbps:g} Mbps: {row.total_w:.1f} W, "
            f"saving {row.saving_pct:.2f}% vs {row.baseline_approach}"
        )
    return df
