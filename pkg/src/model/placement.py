import logging
from collections import defaultdict

from ..entities.catalog import DemandMatrix, VmSpec
from ..entities.placement import (
    LocationKind,
    Placement,
    ReplicaWorkload,
    Violation,
    WorkloadLedger,
)
from .catalog import replica_instances, replica_workload

logger = logging.getLogger(__name__)

TRAFFIC_TOL = 1e-6


def demand_index(demand: DemandMatrix) -> dict[tuple[str, int, int], float]:
    return {(vm, pon, node): traffic for vm, pon, node, traffic in demand.units()}


def validate(
    placement: Placement,
    demand: DemandMatrix,
    specs: dict[str, VmSpec],
    node_ids: list[int] | None = None,
) -> list[Violation]:
    """Every violated serving constraint of the placement; empty when feasible."""
    violations = []
    units = demand_index(demand)
    known_nodes = set(node_ids) if node_ids is not None else None
    served: dict[tuple[str, int, int], float] = defaultdict(float)
    replica_traffic: dict[tuple[str, object], float] = defaultdict(float)

    for entry in placement.servings:
        unit = (entry.vm, entry.pon, entry.node)
        location = entry.location
        if entry.traffic_mbps < 0:
            violations.append(
                Violation(
                    constraint="nonnegative",
                    vm=entry.vm,
                    pon=entry.pon,
                    node=entry.node,
                    location=location.key,
                    detail=f"negative traffic {entry.traffic_mbps}",
                )
            )
            continue
        if entry.vm not in specs or (entry.traffic_mbps > 0 and unit not in units):
            violations.append(
                Violation(
                    constraint="unknown-demand",
                    vm=entry.vm,
                    pon=entry.pon,
                    node=entry.node,
                    location=location.key,
                    detail="serving entry for a demand unit without traffic",
                )
            )
        if known_nodes is not None and location.node not in known_nodes:
            violations.append(
                Violation(
                    constraint="unknown-location",
                    vm=entry.vm,
                    pon=entry.pon,
                    node=entry.node,
                    location=location.key,
                    detail=f"core node {location.node} does not exist",
                )
            )
        if location.kind is LocationKind.METRO_FOG and location.node != entry.node:
            violations.append(
                Violation(
                    constraint="locality",
                    vm=entry.vm,
                    pon=entry.pon,
                    node=entry.node,
                    location=location.key,
                    detail="metro fog serves users of another core node",
                )
            )
        if location.kind is LocationKind.ACCESS_FOG and (location.pon, location.node) != (
            entry.pon,
            entry.node,
        ):
            violations.append(
                Violation(
                    constraint="locality",
                    vm=entry.vm,
                    pon=entry.pon,
                    node=entry.node,
                    location=location.key,
                    detail="access fog serves users of another PON",
                )
            )
        served[unit] += entry.traffic_mbps
        replica_traffic[(entry.vm, location)] += entry.traffic_mbps

    for unit in sorted(set(units) | set(served)):
        expected = units.get(unit, 0.0)
        got = served.get(unit, 0.0)
        if abs(got - expected) > TRAFFIC_TOL * max(1.0, expected):
            vm, pon, node = unit
            violations.append(
                Violation(
                    constraint="conservation",
                    vm=vm,
                    pon=pon,
                    node=node,
                    detail=f"served {got:.6f} Mbps of {expected:.6f} Mbps",
                )
            )

    replicas = {(replica.vm, replica.location) for replica in placement.replicas}
    for (vm, location), traffic in sorted(
        replica_traffic.items(), key=lambda item: (item[0][0], item[0][1].sort_key())
    ):
        if traffic > 0 and (vm, location) not in replicas:
            violations.append(
                Violation(
                    constraint="replica-linking",
                    vm=vm,
                    location=location.key,
                    detail=f"{traffic:.6f} Mbps served without a replica",
                )
            )
    for replica in placement.replicas:
        if replica_traffic.get((replica.vm, replica.location), 0.0) <= 0:
            violations.append(
                Violation(
                    constraint="replica-linking",
                    vm=replica.vm,
                    location=replica.location.key,
                    detail="replica present without served traffic",
                )
            )
        spec = specs.get(replica.vm)
        if replica.instances is None or spec is None:
            continue
        capacity = replica.instances * spec.replica_traffic_mbps
        traffic = replica_traffic.get((replica.vm, replica.location), 0.0)
        if traffic - capacity > TRAFFIC_TOL * max(1.0, capacity):
            violations.append(
                Violation(
                    constraint="capacity",
                    vm=replica.vm,
                    location=replica.location.key,
                    detail=(
                        f"{replica.instances} instance(s) carry at most {capacity:.6f} Mbps, "
                        f"served {traffic:.6f} Mbps"
                    ),
                )
            )

    if violations:
        logger.warning(f"Placement has {len(violations)} violation(s), first: {violations[0]}")
    return violations


def workloads(placement: Placement, specs: dict[str, VmSpec], mode: str = "default") -> WorkloadLedger:
    """Per-replica workloads; replicas without traffic count at their idle workload."""
    traffic: dict[tuple[str, object], float] = defaultdict(float)
    for entry in placement.servings:
        traffic[(entry.vm, entry.location)] += entry.traffic_mbps
    declared = {(replica.vm, replica.location): replica.instances for replica in placement.replicas}

    records = []
    for vm, location in sorted(
        set(traffic) | set(declared), key=lambda item: (item[0], item[1].sort_key())
    ):
        spec = specs[vm]
        served = traffic.get((vm, location), 0.0)
        is_present = (vm, location) in declared
        instances = declared.get((vm, location))
        records.append(
            ReplicaWorkload(
                vm=vm,
                location=location,
                served_mbps=served,
                instances=replica_instances(spec, served, is_present, instances),
                workload_pct=replica_workload(spec, served, is_present, mode, instances),
            )
        )
    return WorkloadLedger(replicas=tuple(records))


def cloud_demand_matrix(placement: Placement) -> dict[tuple[int, int], float]:
    """Cloud traffic from each hosting site to the users at each node, local traffic included."""
    matrix: dict[tuple[int, int], float] = defaultdict(float)
    for entry in placement.servings:
        if entry.location.kind is LocationKind.CLOUD and entry.traffic_mbps > 0:
            matrix[(entry.location.node, entry.node)] += entry.traffic_mbps
    return dict(sorted(matrix.items()))
