from enum import Enum

import pandas as pd
from pydantic import BaseModel, Field

from .placement import Location


class Segment(str, Enum):
    CORE = "core"
    METRO = "metro"
    PON = "pon"
    CLOUD = "cloud"
    METRO_FOG = "metro_fog"
    ACCESS_FOG = "access_fog"


class PowerTerm(BaseModel):
    """One line of the audit trail: count x unit watts x PUE."""

    model_config = {"extra": "forbid", "frozen": True}

    segment: Segment
    device_class: str
    location: str
    # Negative only for literal EDFA/regenerator floors on short links
    count: float
    unit_watts: float = Field(ge=0)
    pue: float = Field(ge=1)

    @property
    def watts(self) -> float:
        return self.count * self.unit_watts * self.pue


class PowerBreakdown(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    terms: tuple[PowerTerm, ...] = ()

    def segment_w(self, segment: Segment) -> float:
        return sum(term.watts for term in self.terms if term.segment is segment)

    @property
    def core_w(self) -> float:
        return self.segment_w(Segment.CORE)

    @property
    def metro_w(self) -> float:
        return self.segment_w(Segment.METRO)

    @property
    def pon_w(self) -> float:
        return self.segment_w(Segment.PON)

    @property
    def cloud_w(self) -> float:
        return self.segment_w(Segment.CLOUD)

    @property
    def metro_fog_w(self) -> float:
        return self.segment_w(Segment.METRO_FOG)

    @property
    def access_fog_w(self) -> float:
        return self.segment_w(Segment.ACCESS_FOG)

    @property
    def total_w(self) -> float:
        return sum(self.segment_w(segment) for segment in Segment)

    def by_segment(self) -> dict[str, float]:
        return {segment.value: self.segment_w(segment) for segment in Segment}

    def by_device_class(self) -> dict[tuple[str, str], float]:
        totals: dict[tuple[str, str], float] = {}
        for term in self.terms:
            key = (term.segment.value, term.device_class)
            totals[key] = totals.get(key, 0.0) + term.watts
        return totals

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "segment": term.segment.value,
                    "device_class": term.device_class,
                    "location": term.location,
                    "count": term.count,
                    "unit_watts": term.unit_watts,
                    "pue": term.pue,
                    "watts": term.watts,
                }
                for term in self.terms
            ],
            columns=["segment", "device_class", "location", "count", "unit_watts", "pue", "watts"],
        )


class SiteEquipment(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    location: Location
    traffic_mbps: float = Field(ge=0)
    workload_pct: float = Field(ge=0)
    servers: int = Field(ge=0)
    ports: int = Field(ge=0)
    switches: int = Field(ge=0)


class MetroEquipment(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    node: int
    traffic_mbps: float = Field(ge=0)
    ports: int = Field(ge=0)
    switches: int = Field(ge=0)


class EquipmentLedger(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    sites: tuple[SiteEquipment, ...] = ()
    metro: tuple[MetroEquipment, ...] = ()

    def site(self, location: Location) -> SiteEquipment | None:
        for site in self.sites:
            if site.location == location:
                return site
        return None

    @property
    def total_servers(self) -> int:
        return sum(site.servers for site in self.sites)
