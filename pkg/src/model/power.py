import logging
from collections import defaultdict
from functools import cached_property

import numpy as np
from pydantic import BaseModel

from ..entities.catalog import DemandMatrix, VmSpec
from ..entities.params import PowerParams
from ..entities.placement import Location, LocationKind, Placement, Violation, WorkloadLedger
from ..entities.power import (
    EquipmentLedger,
    MetroEquipment,
    PowerBreakdown,
    PowerTerm,
    Segment,
    SiteEquipment,
)
from ..entities.routing import CoreState
from ..entities.scenario import Scenario
from ..entities.topology import AttachmentPlan
from ..errors import AuditError, InfeasiblePlacementError
from ..network.routing import check_core_state, route_all
from ..network.topology import CoreGraph
from .catalog import build_demand
from .placement import cloud_demand_matrix, validate, workloads
from .sizing import ceil_count

logger = logging.getLogger(__name__)

GBPS = 1000.0

TIER_SEGMENT = {
    LocationKind.CLOUD: Segment.CLOUD,
    LocationKind.METRO_FOG: Segment.METRO_FOG,
    LocationKind.ACCESS_FOG: Segment.ACCESS_FOG,
}


def size_servers(total_workload_pct: float, server_max_workload: float) -> int:
    return ceil_count(total_workload_pct / server_max_workload)


def size_ports_switches(traffic_mbps: float, port_rate: float, switch_rate: float) -> tuple[int, int]:
    """Router ports and Ethernet switches for a traffic volume, rates in the same unit."""
    return ceil_count(traffic_mbps / port_rate), ceil_count(traffic_mbps / switch_rate)


def tier_rates(kind: LocationKind, params: PowerParams) -> dict[str, float]:
    compute = params.compute
    if kind is LocationKind.CLOUD:
        return {
            "port_rate": compute.cloud_port_rate_gbps * GBPS,
            "port_w": compute.cloud_port_w,
            "switch_rate": compute.cloud_switch_rate_gbps * GBPS,
            "switch_w": compute.cloud_switch_w,
            "pue": params.pue.cloud,
        }
    if kind is LocationKind.METRO_FOG:
        return {
            "port_rate": compute.metro_fog_port_rate_gbps * GBPS,
            "port_w": compute.metro_fog_port_w,
            "switch_rate": compute.metro_fog_switch_rate_gbps * GBPS,
            "switch_w": compute.metro_fog_switch_w,
            "pue": params.pue.metro_fog,
        }
    return {
        "port_rate": compute.access_fog_port_rate_gbps * GBPS,
        "port_w": compute.access_fog_port_w,
        "switch_rate": compute.access_fog_switch_rate_gbps * GBPS,
        "switch_w": compute.access_fog_switch_w,
        "pue": params.pue.access_fog,
    }


def size_site(location: Location, traffic_mbps: float, workload_pct: float, params: PowerParams) -> SiteEquipment:
    rates = tier_rates(location.kind, params)
    ports, switches = size_ports_switches(traffic_mbps, rates["port_rate"], rates["switch_rate"])
    return SiteEquipment(
        location=location,
        traffic_mbps=traffic_mbps,
        workload_pct=workload_pct,
        servers=size_servers(workload_pct, params.compute.server_max_workload_pct),
        ports=ports,
        switches=switches,
    )


def size_metro(node: int, traffic_mbps: float, params: PowerParams) -> MetroEquipment:
    ports, switches = size_ports_switches(
        traffic_mbps, params.metro.port_rate_gbps * GBPS, params.metro.switch_rate_gbps * GBPS
    )
    return MetroEquipment(node=node, traffic_mbps=traffic_mbps, ports=ports, switches=switches)


def compute_terms(sites: list[SiteEquipment], params: PowerParams) -> list[PowerTerm]:
    terms = []
    for site in sites:
        rates = tier_rates(site.location.kind, params)
        segment = TIER_SEGMENT[site.location.kind]
        for device_class, count, unit in (
            ("servers", site.servers, params.compute.server_w),
            ("switches", site.switches * params.compute.switch_redundancy, rates["switch_w"]),
            ("ports", site.ports, rates["port_w"]),
        ):
            if count:
                terms.append(
                    PowerTerm(
                        segment=segment,
                        device_class=device_class,
                        location=site.location.key,
                        count=count,
                        unit_watts=unit,
                        pue=rates["pue"],
                    )
                )
    return terms


def compute_power(sites: list[SiteEquipment], params: PowerParams, kind: LocationKind | None = None) -> float:
    """Servers, switches and ports of one compute tier (all tiers when kind is None)."""
    selected = [site for site in sites if kind is None or site.location.kind is kind]
    return sum(term.watts for term in compute_terms(selected, params))


def pon_terms(attachment: AttachmentPlan, params: PowerParams, node_ids: list[int]) -> list[PowerTerm]:
    terms = []
    for node in node_ids:
        for device_class, count, unit in (
            ("olt", attachment.pons_per_node * attachment.olts_per_pon, params.pon.olt_w),
            ("onu", attachment.pons_per_node * attachment.onus_per_pon, params.pon.onu_w),
        ):
            terms.append(
                PowerTerm(
                    segment=Segment.PON,
                    device_class=device_class,
                    location=f"node:{node}",
                    count=count,
                    unit_watts=unit,
                    pue=params.pue.network,
                )
            )
    return terms


def pon_power(attachment: AttachmentPlan, params: PowerParams, node_ids: list[int]) -> float:
    """OLT and ONU power; the same for every placement of a scenario."""
    return sum(term.watts for term in pon_terms(attachment, params, node_ids))


def metro_terms(metro: list[MetroEquipment], params: PowerParams) -> list[PowerTerm]:
    terms = []
    for equipment in metro:
        for device_class, count, unit in (
            ("ports", equipment.ports * params.metro.redundancy, params.metro.port_w),
            ("switches", equipment.switches, params.metro.switch_w),
        ):
            if count:
                terms.append(
                    PowerTerm(
                        segment=Segment.METRO,
                        device_class=device_class,
                        location=f"node:{equipment.node}",
                        count=count,
                        unit_watts=unit,
                        pue=params.pue.network,
                    )
                )
    return terms


def metro_power(metro: list[MetroEquipment], params: PowerParams) -> float:
    return sum(term.watts for term in metro_terms(metro, params))


def core_terms(
    state: CoreState,
    params: PowerParams,
    node_ids: list[int],
    optical_switches: str = "always",
) -> list[PowerTerm]:
    core = params.core
    network = params.pue.network
    terms = []

    def add(device_class: str, location: str, count: float, unit: float) -> None:
        if count:
            terms.append(
                PowerTerm(
                    segment=Segment.CORE,
                    device_class=device_class,
                    location=location,
                    count=count,
                    unit_watts=unit,
                    pue=network,
                )
            )

    for node, ports in state.aggregation_ports_cloud.items():
        add("cloud_aggregation_ports", f"node:{node}", ports, core.router_port_w)
    for node, ports in state.aggregation_ports_edge.items():
        add("edge_aggregation_ports", f"node:{node}", ports, core.router_port_w)
    for arc in state.arcs:
        where = f"arc:{arc.src}-{arc.dst}"
        add("link_ports", where, arc.wavelengths, core.router_port_w)
        add("transponders", where, arc.wavelengths, core.transponder_w)
        add("edfas", where, arc.fibers * arc.edfas_per_fiber, core.edfa_w)
        add("regenerators", where, arc.regens_per_wavelength * arc.wavelengths, core.regen_w)

    switched = node_ids if optical_switches == "always" else sorted(state.active_nodes())
    for node in switched:
        add("optical_switches", f"node:{node}", 1, core.optical_switch_w)
    return terms


def core_power(
    state: CoreState,
    params: PowerParams,
    node_ids: list[int],
    optical_switches: str = "always",
) -> float:
    return sum(term.watts for term in core_terms(state, params, node_ids, optical_switches))


class Evaluation(BaseModel):
    model_config = {"frozen": True}

    breakdown: PowerBreakdown
    workloads: WorkloadLedger
    equipment: EquipmentLedger
    core_state: CoreState


class EnergyModel:
    """A scenario bound to its demand, VM specs and routed core graph."""

    def __init__(
        self,
        scenario: Scenario,
        demand: DemandMatrix | None = None,
        graph: CoreGraph | None = None,
        specs: dict[str, VmSpec] | None = None,
    ):
        self.scenario = scenario
        self.run = scenario.run
        self.params = scenario.effective_power
        self.graph = graph or CoreGraph(scenario.topology)
        self.specs = specs if specs is not None else {spec.id: spec for spec in scenario.vm_specs()}
        self.demand = demand if demand is not None else build_demand(scenario)

    @property
    def node_ids(self) -> list[int]:
        return self.scenario.topology.node_ids

    @cached_property
    def units(self) -> list[tuple[str, int, int, float]]:
        return self.demand.units()

    @property
    def cloud_sites(self) -> list[int]:
        if self.run.restriction == "att-sites":
            return sorted(self.scenario.topology.datacenter_sites)
        return self.node_ids

    @property
    def allows_metro_fog(self) -> bool:
        return self.run.restriction in ("none", "clouds+metro")

    @property
    def allows_access_fog(self) -> bool:
        return self.run.restriction == "none"

    def restricted_to(self, vm_ids: list[str]) -> "EnergyModel":
        """The same substrate with only the given VMs' demand."""
        keep = set(vm_ids)
        df = self.demand.get_pandas_dataframe()
        demand = self.demand.model_copy(
            update={
                "pandas_df": df[df["vm"].isin(keep)].reset_index(drop=True),
                "residuals": {vm: r for vm, r in self.demand.residuals.items() if vm in keep},
            }
        )
        specs = {vm: spec for vm, spec in self.specs.items() if vm in keep}
        return EnergyModel(self.scenario, demand=demand, graph=self.graph, specs=specs)

    def with_run(self, **updates) -> "EnergyModel":
        scenario = self.scenario.with_run(**updates)
        return EnergyModel(scenario, demand=self.demand, graph=self.graph, specs=self.specs)

    def validate(self, placement: Placement) -> list[Violation]:
        return validate(placement, self.demand, self.specs, self.node_ids)

    def equipment(self, placement: Placement, ledger: WorkloadLedger, demand_matrix: dict) -> EquipmentLedger:
        site_traffic: dict[Location, float] = defaultdict(float)
        for entry in placement.servings:
            site_traffic[entry.location] += entry.traffic_mbps
        site_workload = ledger.site_totals()
        locations = sorted(set(site_traffic) | set(site_workload), key=Location.sort_key)
        sites = tuple(
            size_site(location, site_traffic.get(location, 0.0), site_workload.get(location, 0.0), self.params)
            for location in locations
        )

        metro_traffic: dict[int, float] = defaultdict(float)
        for (_, dst), traffic in demand_matrix.items():
            metro_traffic[dst] += traffic
        for location, traffic in site_traffic.items():
            if location.kind is LocationKind.METRO_FOG:
                metro_traffic[location.node] += traffic
        metro = tuple(
            size_metro(node, traffic, self.params)
            for node, traffic in sorted(metro_traffic.items())
            if traffic > 0
        )
        return EquipmentLedger(sites=sites, metro=metro)

    def evaluate(self, placement: Placement, check: bool = True) -> Evaluation:
        if check:
            violations = self.validate(placement)
            if violations:
                raise InfeasiblePlacementError(violations)

        ledger = workloads(placement, self.specs, self.run.linear_mode)
        demand_matrix = cloud_demand_matrix(placement)
        state = route_all(
            demand_matrix,
            self.graph,
            edge_port_redundancy=self.params.metro.redundancy,
            grooming=self.run.grooming,
            aggregation_ports=self.run.aggregation_ports,
            edfa_mode=self.run.edfa_mode,
        )
        if check:
            problems = check_core_state(
                state,
                self.scenario.topology.wavelength_rate_mbps,
                self.scenario.topology.wavelengths_per_fiber,
            )
            if problems:
                raise AuditError(problems)
        equipment = self.equipment(placement, ledger, demand_matrix)

        terms = (
            core_terms(state, self.params, self.node_ids, self.run.optical_switches)
            + metro_terms(list(equipment.metro), self.params)
            + pon_terms(self.scenario.attachment, self.params, self.node_ids)
            + compute_terms(list(equipment.sites), self.params)
        )
        return Evaluation(
            breakdown=PowerBreakdown(terms=tuple(terms)),
            workloads=ledger,
            equipment=equipment,
            core_state=state,
        )

    def total_power(self, placement: Placement, check: bool = True) -> PowerBreakdown:
        return self.evaluate(placement, check=check).breakdown

    def pon_floor(self) -> float:
        return pon_power(self.scenario.attachment, self.params, self.node_ids)


def _expected_unit_and_pue(term: PowerTerm, params: PowerParams) -> tuple[float, float]:
    compute = params.compute
    pue = params.pue
    table = {
        (Segment.CORE, "cloud_aggregation_ports"): (params.core.router_port_w, pue.network),
        (Segment.CORE, "edge_aggregation_ports"): (params.core.router_port_w, pue.network),
        (Segment.CORE, "link_ports"): (params.core.router_port_w, pue.network),
        (Segment.CORE, "transponders"): (params.core.transponder_w, pue.network),
        (Segment.CORE, "edfas"): (params.core.edfa_w, pue.network),
        (Segment.CORE, "regenerators"): (params.core.regen_w, pue.network),
        (Segment.CORE, "optical_switches"): (params.core.optical_switch_w, pue.network),
        (Segment.METRO, "ports"): (params.metro.port_w, pue.network),
        (Segment.METRO, "switches"): (params.metro.switch_w, pue.network),
        (Segment.PON, "olt"): (params.pon.olt_w, pue.network),
        (Segment.PON, "onu"): (params.pon.onu_w, pue.network),
        (Segment.CLOUD, "servers"): (compute.server_w, pue.cloud),
        (Segment.CLOUD, "switches"): (compute.cloud_switch_w, pue.cloud),
        (Segment.CLOUD, "ports"): (compute.cloud_port_w, pue.cloud),
        (Segment.METRO_FOG, "servers"): (compute.server_w, pue.metro_fog),
        (Segment.METRO_FOG, "switches"): (compute.metro_fog_switch_w, pue.metro_fog),
        (Segment.METRO_FOG, "ports"): (compute.metro_fog_port_w, pue.metro_fog),
        (Segment.ACCESS_FOG, "servers"): (compute.server_w, pue.access_fog),
        (Segment.ACCESS_FOG, "switches"): (compute.access_fog_switch_w, pue.access_fog),
        (Segment.ACCESS_FOG, "ports"): (compute.access_fog_port_w, pue.access_fog),
    }
    return table[(term.segment, term.device_class)]


def audit_breakdown(
    breakdown: PowerBreakdown,
    params: PowerParams,
    sample_size: int = 10,
    seed: int = 0,
) -> list[str]:
    """Recompute a random sample of terms from the parameter tables."""
    problems = []
    terms = list(breakdown.terms)
    if terms:
        rng = np.random.default_rng(seed)
        picked = rng.choice(len(terms), size=min(sample_size, len(terms)), replace=False)
        for index in sorted(int(i) for i in picked):
            term = terms[index]
            unit, pue = _expected_unit_and_pue(term, params)
            if term.unit_watts != unit or term.pue != pue:
                problems.append(
                    f"{term.segment.value}/{term.device_class}@{term.location}: "
                    f"unit {term.unit_watts} W x PUE {term.pue}, expected {unit} W x PUE {pue}"
                )
            elif term.watts != term.count * unit * pue:
                problems.append(f"{term.segment.value}/{term.device_class}@{term.location}: watts mismatch")
    segments = sum(breakdown.by_segment().values())
    if abs(segments - breakdown.total_w) > 1e-6:
        problems.append(f"total {breakdown.total_w} differs from segment sum {segments}")
    return problems
