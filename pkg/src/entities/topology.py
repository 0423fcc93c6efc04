from pydantic import BaseModel, Field, model_validator


class CoreNode(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    id: int
    name: str = ""


class CoreLink(BaseModel):
    """Undirected physical link; traffic is accounted per direction (arc)."""

    model_config = {"extra": "forbid", "frozen": True}

    a: int
    b: int
    distance_km: float = Field(gt=0)


class CoreTopology(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    name: str = "custom"
    span_km: float = Field(default=80.0, gt=0)
    regen_reach_km: float = Field(default=2000.0, gt=0)
    wavelengths_per_fiber: int = Field(default=32, gt=0)
    wavelength_rate_gbps: float = Field(default=40.0, gt=0)
    datacenter_sites: tuple[int, ...] = ()
    nodes: tuple[CoreNode, ...]
    links: tuple[CoreLink, ...]

    @model_validator(mode="after")
    def _check_references(self):
        ids = [node.id for node in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")
        known = set(ids)
        seen = set()
        for link in self.links:
            if link.a not in known or link.b not in known:
                raise ValueError(f"link {link.a}-{link.b} references an unknown node")
            if link.a == link.b:
                raise ValueError(f"self-loop on node {link.a}")
            pair = (min(link.a, link.b), max(link.a, link.b))
            if pair in seen:
                raise ValueError(f"duplicate link {pair[0]}-{pair[1]}")
            seen.add(pair)
        unknown_sites = sorted(set(self.datacenter_sites) - known)
        if unknown_sites:
            raise ValueError(f"datacenter_sites reference unknown nodes {unknown_sites}")
        return self

    @property
    def node_ids(self) -> list[int]:
        return sorted(node.id for node in self.nodes)

    @property
    def wavelength_rate_mbps(self) -> float:
        return self.wavelength_rate_gbps * 1000.0

    def neighbors(self) -> dict[int, list[int]]:
        adjacency: dict[int, list[int]] = {node_id: [] for node_id in self.node_ids}
        for link in self.links:
            adjacency[link.a].append(link.b)
            adjacency[link.b].append(link.a)
        return {node_id: sorted(peers) for node_id, peers in adjacency.items()}

    def distance(self, m: int, n: int) -> float:
        for link in self.links:
            if (link.a, link.b) in ((m, n), (n, m)):
                return link.distance_km
        raise KeyError(f"no link between {m} and {n}")

    def arcs(self) -> list[tuple[int, int]]:
        """Both directions of every link, sorted."""
        return sorted(
            [(link.a, link.b) for link in self.links]
            + [(link.b, link.a) for link in self.links]
        )


class AttachmentPlan(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    pons_per_node: int = Field(default=2, ge=1)
    onus_per_pon: int = Field(default=512, gt=0)
    olts_per_pon: int = Field(default=1, gt=0)
    olt_capacity_gbps: float = Field(default=1280.0, gt=0)
