from enum import Enum

from pydantic import BaseModel, Field, model_validator


class LocationKind(str, Enum):
    CLOUD = "cloud"
    METRO_FOG = "metro_fog"
    ACCESS_FOG = "access_fog"


class Location(BaseModel):
    """A compute site: cloud or metro fog at a core node, access fog inside one PON."""

    model_config = {"extra": "forbid", "frozen": True}

    kind: LocationKind
    node: int
    pon: int | None = None

    @model_validator(mode="after")
    def _check_pon(self):
        if self.kind is LocationKind.ACCESS_FOG and self.pon is None:
            raise ValueError("access fog locations need a pon index")
        if self.kind is not LocationKind.ACCESS_FOG and self.pon is not None:
            raise ValueError(f"{self.kind.value} locations do not carry a pon index")
        return self

    @classmethod
    def cloud(cls, node: int) -> "Location":
        return cls(kind=LocationKind.CLOUD, node=node)

    @classmethod
    def metro_fog(cls, node: int) -> "Location":
        return cls(kind=LocationKind.METRO_FOG, node=node)

    @classmethod
    def access_fog(cls, pon: int, node: int) -> "Location":
        return cls(kind=LocationKind.ACCESS_FOG, node=node, pon=pon)

    @property
    def key(self) -> str:
        if self.kind is LocationKind.ACCESS_FOG:
            return f"{self.kind.value}:{self.node}:{self.pon}"
        return f"{self.kind.value}:{self.node}"

    @classmethod
    def parse(cls, key: str) -> "Location":
        parts = key.split(":")
        kind = LocationKind(parts[0])
        if kind is LocationKind.ACCESS_FOG:
            return cls.access_fog(pon=int(parts[2]), node=int(parts[1]))
        return cls(kind=kind, node=int(parts[1]))

    def sort_key(self) -> tuple[int, int, int]:
        order = list(LocationKind).index(self.kind)
        return (order, self.node, self.pon or 0)

    def __str__(self) -> str:
        return self.key


class ServingEntry(BaseModel):
    """Traffic of demand unit (vm, pon, node) served from one location."""

    model_config = {"extra": "forbid", "frozen": True}

    vm: str
    pon: int
    node: int
    location: Location
    traffic_mbps: float

    def sort_key(self) -> tuple:
        return (self.vm, self.node, self.pon, self.location.sort_key())


class Replica(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    vm: str
    location: Location
    # copies declared at the site; derived from the served traffic when unset
    instances: int | None = Field(default=None, ge=1)

    def sort_key(self) -> tuple:
        return (self.vm, self.location.sort_key())


class Placement(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    servings: tuple[ServingEntry, ...] = ()
    replicas: tuple[Replica, ...] = ()

    @classmethod
    def from_servings(cls, servings: list[ServingEntry]) -> "Placement":
        """Build a placement whose replica set is exactly the locations carrying traffic."""
        ordered = sorted(servings, key=ServingEntry.sort_key)
        replicas = {
            (entry.vm, entry.location): Replica(vm=entry.vm, location=entry.location)
            for entry in ordered
            if entry.traffic_mbps > 0
        }
        return cls(
            servings=tuple(ordered),
            replicas=tuple(sorted(replicas.values(), key=Replica.sort_key)),
        )

    def replicas_of(self, vm: str) -> list[Location]:
        return [replica.location for replica in self.replicas if replica.vm == vm]

    def sites(self) -> list[Location]:
        """Locations hosting any replica."""
        unique = {replica.location for replica in self.replicas}
        return sorted(unique, key=Location.sort_key)

    def serialization(self) -> str:
        """Canonical text form, used as the total tie-break order between placements."""
        lines = [
            f"{entry.vm},{entry.pon},{entry.node},{entry.location.key},{entry.traffic_mbps:.6f}"
            for entry in sorted(self.servings, key=ServingEntry.sort_key)
        ]
        lines += [
            f"replica,{replica.vm},{replica.location.key}"
            + (f",{replica.instances}" if replica.instances is not None else "")
            for replica in sorted(self.replicas, key=Replica.sort_key)
        ]
        return "\n".join(lines)


class Violation(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    constraint: str
    vm: str
    pon: int | None = None
    node: int | None = None
    location: str | None = None
    detail: str = ""

    def __str__(self) -> str:
        where = ", ".join(
            f"{name}={value}"
            for name, value in (
                ("vm", self.vm),
                ("pon", self.pon),
                ("node", self.node),
                ("location", self.location),
            )
            if value is not None
        )
        return f"{self.constraint}({where}): {self.detail}"


class ReplicaWorkload(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    vm: str
    location: Location
    served_mbps: float = Field(ge=0)
    instances: int = Field(ge=0)
    workload_pct: float = Field(ge=0)


class WorkloadLedger(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    replicas: tuple[ReplicaWorkload, ...] = ()

    def site_totals(self) -> dict[Location, float]:
        totals: dict[Location, float] = {}
        for replica in self.replicas:
            totals[replica.location] = totals.get(replica.location, 0.0) + replica.workload_pct
        return dict(sorted(totals.items(), key=lambda item: item[0].sort_key()))

    def site_workload(self, location: Location) -> float:
        return self.site_totals().get(location, 0.0)

    @property
    def total_pct(self) -> float:
        return sum(replica.workload_pct for replica in self.replicas)
