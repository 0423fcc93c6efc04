import logging

import pandas as pd

from ..entities.catalog import DemandMatrix, PopularityModel, VmSpec, WorkloadProfile
from ..entities.scenario import Scenario
from ..entities.topology import AttachmentPlan
from ..errors import InconsistentReplicaError, InvalidParameterError, InvalidScenarioError
from .sizing import ceil_count, round_half_up

logger = logging.getLogger(__name__)


def users_per_pon(popularity: PopularityModel, attachment: AttachmentPlan) -> int:
    """Users per PON, given directly or derived as OLT capacity / average rate."""
    if popularity.users_per_pon is not None:
        return popularity.users_per_pon
    olt_capacity_mbps = attachment.olt_capacity_gbps * 1000.0
    return round_half_up(
        olt_capacity_mbps / popularity.average_rate_mbps * popularity.served_fraction
    )


def users_for_share(users: int, share: float) -> int:
    return round_half_up(users * share)


def derive_users(
    popularity: PopularityModel,
    attachment: AttachmentPlan,
    specs: list[VmSpec],
    node_ids: list[int],
) -> DemandMatrix:
    """Users per (vm, pon, node): round_half_up(users_per_pon * share), uniform over demand nodes and PONs."""
    total_share = sum(spec.popularity_share for spec in specs)
    if total_share > 1.0 + 1e-9:
        raise InvalidScenarioError(
            f"Popularity shares add up to {total_share * 100:.4f}%, above 100%"
        )

    per_pon = users_per_pon(popularity, attachment)
    demand_nodes = set(popularity.demand_nodes) if popularity.demand_nodes is not None else set(node_ids)
    pons = range(1, attachment.pons_per_node + 1)

    records = []
    residuals = {}
    for spec in specs:
        users = users_for_share(per_pon, spec.popularity_share)
        hosting = 0
        for node in node_ids:
            for pon in pons:
                count = users if node in demand_nodes else 0
                hosting += count
                records.append({"vm": spec.id, "pon": pon, "node": node, "users": count})
        expected = per_pon * spec.popularity_share * len(demand_nodes) * len(pons)
        residuals[spec.id] = hosting - expected

    df = pd.DataFrame(records, columns=["vm", "pon", "node", "users"])
    df["traffic_mbps"] = 0.0
    largest = max(residuals.values(), key=abs, default=0.0)
    logger.info(
        f"Derived users for {len(specs)} VMs at {per_pon} users per PON "
        f"(largest rounding residual {largest:+.3f} users)"
    )
    return DemandMatrix(pandas_df=df, residuals=residuals)


def derive_traffic(users: DemandMatrix, specs: list[VmSpec]) -> DemandMatrix:
    """Traffic per demand unit: users times the VM data rate, in Mbps."""
    rates = {spec.id: spec.rate_mbps for spec in specs}
    df = users.get_pandas_dataframe().copy()
    df["traffic_mbps"] = df["users"] * df["vm"].map(rates)
    return users.model_copy(update={"pandas_df": df})


def build_demand(scenario: Scenario) -> DemandMatrix:
    specs = scenario.vm_specs()
    users = derive_users(
        scenario.popularity, scenario.attachment, specs, scenario.topology.node_ids
    )
    return derive_traffic(users, specs)


def replica_instances(
    spec: VmSpec, served_traffic_mbps: float, replica_present: bool, declared: int | None = None
) -> int:
    """Copies of a VM at one site: the declared count, else one per x users served and at least one."""
    if not replica_present:
        return 0
    if declared is not None:
        return declared
    return max(1, ceil_count(served_traffic_mbps / spec.replica_traffic_mbps))


def replica_workload(
    spec: VmSpec,
    served_traffic_mbps: float,
    replica_present: bool,
    mode: str = "default",
    instances: int | None = None,
) -> float:
    """CPU workload (% of one server) of a VM replica serving the given traffic."""
    if served_traffic_mbps < 0:
        raise InvalidParameterError(f"Negative served traffic {served_traffic_mbps} for {spec.id}")
    if served_traffic_mbps > 0 and not replica_present:
        raise InconsistentReplicaError(
            f"VM {spec.id} serves {served_traffic_mbps} Mbps without a replica"
        )
    instances = replica_instances(spec, served_traffic_mbps, replica_present, instances)
    if spec.profile is WorkloadProfile.CONSTANT:
        return spec.peak_workload_pct * instances
    slope = spec.workload_slope * served_traffic_mbps
    if mode == "literal":
        return served_traffic_mbps / spec.replica_traffic_mbps * spec.baseline_pct + slope
    return spec.baseline_pct * instances + slope
