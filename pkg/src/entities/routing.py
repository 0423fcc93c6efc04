from pydantic import BaseModel, Field


class CommodityFlow(BaseModel):
    """Cloud traffic of one (site, node) pair routed hop by hop over the min-hop path."""

    model_config = {"extra": "forbid", "frozen": True}

    src: int
    dst: int
    traffic_mbps: float = Field(ge=0)
    path: tuple[int, ...]

    def arcs(self) -> list[tuple[int, int]]:
        return list(zip(self.path[:-1], self.path[1:]))


class ArcState(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    src: int
    dst: int
    distance_km: float
    traffic_mbps: float = Field(ge=0)
    wavelengths: int = Field(ge=0)
    fibers: int = Field(ge=0)
    edfas_per_fiber: int
    regens_per_wavelength: int


class CoreState(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    flows: tuple[CommodityFlow, ...] = ()
    arcs: tuple[ArcState, ...] = ()
    # cloud-side and edge-side aggregation ports; fractional when not rounded
    aggregation_ports_cloud: dict[int, float] = {}
    aggregation_ports_edge: dict[int, float] = {}

    def arc(self, src: int, dst: int) -> ArcState:
        for arc in self.arcs:
            if (arc.src, arc.dst) == (src, dst):
                return arc
        raise KeyError(f"no arc {src}->{dst}")

    def active_nodes(self) -> set[int]:
        active = {node for node, ports in self.aggregation_ports_cloud.items() if ports > 0}
        active |= {node for node, ports in self.aggregation_ports_edge.items() if ports > 0}
        for arc in self.arcs:
            if arc.traffic_mbps > 0:
                active |= {arc.src, arc.dst}
        return active

    @property
    def total_wavelengths(self) -> int:
        return sum(arc.wavelengths for arc in self.arcs)
