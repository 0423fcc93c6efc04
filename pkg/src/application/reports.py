from pathlib import Path

import pandas as pd

from ..constants import (
    CORE_STATE_FILE,
    CSV_FLOAT_FORMAT,
    DEMAND_FILE,
    POWER_BREAKDOWN_FILE,
    REPLICAS_FILE,
    SERVINGS_FILE,
    VIOLATIONS_FILE,
)
from ..entities.catalog import DemandMatrix
from ..entities.placement import Placement, Violation
from ..entities.power import PowerBreakdown
from ..entities.routing import CoreState


def write_csv(df: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, lineterminator="\n", float_format=CSV_FLOAT_FORMAT)
    return path


def servings_frame(placement: Placement) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "vm": entry.vm,
                "pon": entry.pon,
                "node": entry.node,
                "location_kind": entry.location.kind.value,
                "location_node": entry.location.node,
                "location_pon": entry.location.pon,
                "traffic_mbps": entry.traffic_mbps,
            }
            for entry in placement.servings
        ],
        columns=["vm", "pon", "node", "location_kind", "location_node", "location_pon", "traffic_mbps"],
    ).astype({"location_pon": "Int64"})


def replicas_frame(placement: Placement) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "vm": replica.vm,
                "location_kind": replica.location.kind.value,
                "location_node": replica.location.node,
                "location_pon": replica.location.pon,
                "instances": replica.instances,
            }
            for replica in placement.replicas
        ],
        columns=["vm", "location_kind", "location_node", "location_pon", "instances"],
    ).astype({"location_pon": "Int64", "instances": "Int64"})


def core_state_frame(state: CoreState) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "link": f"{arc.src}-{arc.dst}",
                "traffic_mbps": arc.traffic_mbps,
                "wavelengths": arc.wavelengths,
                "fibers": arc.fibers,
                "edfas": arc.fibers * arc.edfas_per_fiber,
                "regens": arc.wavelengths * arc.regens_per_wavelength,
            }
            for arc in state.arcs
        ],
        columns=["link", "traffic_mbps", "wavelengths", "fibers", "edfas", "regens"],
    )


def violations_frame(violations: list[Violation]) -> pd.DataFrame:
    return pd.DataFrame(
        [violation.model_dump() for violation in violations],
        columns=["constraint", "vm", "pon", "node", "location", "detail"],
    )


def write_run_reports(
    out_dir: Path,
    breakdown: PowerBreakdown,
    placement: Placement,
    state: CoreState,
    demand: DemandMatrix,
) -> list[Path]:
    out_dir = Path(out_dir)
    return [
        write_csv(breakdown.to_dataframe(), out_dir / POWER_BREAKDOWN_FILE),
        write_csv(servings_frame(placement), out_dir / SERVINGS_FILE),
        write_csv(replicas_frame(placement), out_dir / REPLICAS_FILE),
        write_csv(core_state_frame(state), out_dir / CORE_STATE_FILE),
        write_csv(demand.get_pandas_dataframe(), out_dir / DEMAND_FILE),
    ]


def write_violations(out_dir: Path, violations: list[Violation]) -> Path:
    return write_csv(violations_frame(violations), Path(out_dir) / VIOLATIONS_FILE)
