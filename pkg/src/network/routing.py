import logging
from collections import defaultdict

from ..entities.routing import ArcState, CommodityFlow, CoreState
from ..model.sizing import ceil_count
from .topology import CoreGraph, edfa_count, regen_count

logger = logging.getLogger(__name__)


def route_all(
    demand: dict[tuple[int, int], float],
    graph: CoreGraph,
    edge_port_redundancy: int = 2,
    grooming: str = "shared",
    aggregation_ports: str = "ceil",
    edfa_mode: str = "clamped",
) -> CoreState:
    """Route the cloud demand matrix (Mbps, site to node) over min-hop paths, non-bypass.

    Every physical hop terminates in the IP layer, so each arc is dimensioned on
    its own: wavelengths from the arc traffic, fibers from the wavelengths.
    """
    topology = graph.topology
    wavelength_mbps = topology.wavelength_rate_mbps
    literal = edfa_mode == "literal"

    flows = []
    arc_traffic: dict[tuple[int, int], float] = defaultdict(float)
    arc_wavelengths: dict[tuple[int, int], int] = defaultdict(int)
    from_cloud: dict[int, float] = defaultdict(float)
    to_edge: dict[int, float] = defaultdict(float)

    for (src, dst), traffic in sorted(demand.items()):
        if traffic <= 0:
            continue
        path = tuple(graph.node_path(src, dst))
        flow = CommodityFlow(src=src, dst=dst, traffic_mbps=traffic, path=path)
        flows.append(flow)
        from_cloud[src] += traffic
        to_edge[dst] += traffic
        for arc in flow.arcs():
            arc_traffic[arc] += traffic
            if grooming == "per-demand":
                arc_wavelengths[arc] += ceil_count(traffic / wavelength_mbps)

    arcs = []
    for src, dst in topology.arcs():
        traffic = arc_traffic.get((src, dst), 0.0)
        if grooming == "per-demand":
            wavelengths = arc_wavelengths.get((src, dst), 0)
        else:
            wavelengths = ceil_count(traffic / wavelength_mbps)
        distance = graph.distance(src, dst)
        arcs.append(
            ArcState(
                src=src,
                dst=dst,
                distance_km=distance,
                traffic_mbps=traffic,
                wavelengths=wavelengths,
                fibers=ceil_count(wavelengths / topology.wavelengths_per_fiber),
                edfas_per_fiber=edfa_count(distance, topology.span_km, literal),
                regens_per_wavelength=regen_count(distance, topology.regen_reach_km, literal),
            )
        )

    def ports(traffic: float) -> float:
        if aggregation_ports == "fractional":
            return traffic / wavelength_mbps
        return float(ceil_count(traffic / wavelength_mbps))

    state = CoreState(
        flows=tuple(flows),
        arcs=tuple(arcs),
        aggregation_ports_cloud={node: ports(traffic) for node, traffic in sorted(from_cloud.items())},
        aggregation_ports_edge={
            node: edge_port_redundancy * ports(traffic) for node, traffic in sorted(to_edge.items())
        },
    )
    logger.debug(
        f"Routed {len(flows)} commodities, {state.total_wavelengths} wavelengths in use"
    )
    return state


def check_core_state(state: CoreState, wavelength_mbps: float, wavelengths_per_fiber: int) -> list[str]:
    """Re-derive flow conservation and capacity limits from the routed state."""
    problems = []
    summed: dict[tuple[int, int], float] = defaultdict(float)
    for flow in state.flows:
        if flow.path[0] != flow.src or flow.path[-1] != flow.dst:
            problems.append(f"flow {flow.src}->{flow.dst} path {list(flow.path)} has wrong endpoints")
            continue
        balance: dict[int, float] = defaultdict(float)
        for m, n in flow.arcs():
            balance[m] += flow.traffic_mbps
            balance[n] -= flow.traffic_mbps
            summed[(m, n)] += flow.traffic_mbps
        for node, net in balance.items():
            expected = 0.0
            if flow.src != flow.dst and node == flow.src:
                expected = flow.traffic_mbps
            elif flow.src != flow.dst and node == flow.dst:
                expected = -flow.traffic_mbps
            if abs(net - expected) > 1e-6:
                problems.append(
                    f"flow conservation broken for {flow.src}->{flow.dst} at node {node}"
                )
    for arc in state.arcs:
        if abs(summed.get((arc.src, arc.dst), 0.0) - arc.traffic_mbps) > 1e-6:
            problems.append(f"arc {arc.src}->{arc.dst} traffic differs from its flows")
        if arc.traffic_mbps > arc.wavelengths * wavelength_mbps + 1e-6:
            problems.append(f"arc {arc.src}->{arc.dst} traffic exceeds its wavelengths")
        if arc.wavelengths > wavelengths_per_fiber * arc.fibers:
            problems.append(f"arc {arc.src}->{arc.dst} wavelengths exceed fiber capacity")
    return problems
