from enum import Enum

from pydantic import BaseModel, Field

from .catalog import VmSpec, WorkloadProfile

OFFLINE_SCHEMA_VERSION = 1


class VmTypeKey(BaseModel):
    """VM type: data rate, workload profile with its (peak, baseline) and popularity."""

    model_config = {"extra": "forbid", "frozen": True}

    profile: WorkloadProfile
    rate_mbps: float
    peak_workload_pct: float
    baseline_pct: float
    popularity_share: float

    @classmethod
    def from_spec(cls, spec: VmSpec) -> "VmTypeKey":
        return cls(
            profile=spec.profile,
            rate_mbps=spec.rate_mbps,
            peak_workload_pct=spec.peak_workload_pct,
            baseline_pct=spec.baseline_pct if spec.profile is WorkloadProfile.LINEAR else 0.0,
            popularity_share=spec.popularity_share,
        )

    def sort_key(self) -> tuple:
        return (
            self.profile.value,
            self.rate_mbps,
            self.peak_workload_pct,
            self.baseline_pct,
            self.popularity_share,
        )

    @property
    def label(self) -> str:
        return (
            f"{self.profile.value}/{self.rate_mbps:g}Mbps/"
            f"{self.peak_workload_pct:g}-{self.baseline_pct:g}pct/{self.popularity_share:g}"
        )


class RecipeKind(str, Enum):
    CLOUDS = "clouds"
    ALL_METRO_FOGS = "all_metro_fogs"
    ALL_ACCESS_FOGS = "all_access_fogs"


class PlacementRecipe(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    kind: RecipeKind
    sites: tuple[int, ...] = ()
    # exhaustive | greedy for cloud recipes
    subset_mode: str | None = None

    @property
    def label(self) -> str:
        if self.kind is RecipeKind.CLOUDS:
            return f"clouds(k={len(self.sites)}, sites={list(self.sites)})"
        return self.kind.value


class CandidateRecipe(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    recipe: PlacementRecipe
    power_w: float


class OfflineEntry(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    key: VmTypeKey
    representative_vm: str
    recipe: PlacementRecipe
    power_w: float
    # Power before idle fog replicas (no assigned traffic) are pruned
    unpruned_power_w: float
    pruned_replicas: int = Field(default=0, ge=0)
    candidates: tuple[CandidateRecipe, ...] = ()


class OfflineTable(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    schema_version: int = OFFLINE_SCHEMA_VERSION
    scenario_fingerprint: str
    restriction: str
    entries: tuple[OfflineEntry, ...] = ()

    def keys(self) -> list[VmTypeKey]:
        return [entry.key for entry in self.entries]

    def lookup(self, key: VmTypeKey) -> OfflineEntry | None:
        for entry in self.entries:
            if entry.key == key:
                return entry
        return None
