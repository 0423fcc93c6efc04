from enum import Enum

import pandas as pd
from pydantic import BaseModel, Field, model_validator


class WorkloadProfile(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"


class VmTemplate(BaseModel):
    """Shared workload/traffic parameters for VMs generated from popularity groups."""

    model_config = {"extra": "forbid", "frozen": True}

    profile: WorkloadProfile = WorkloadProfile.LINEAR
    peak_workload_pct: float = Field(gt=0, le=100)
    baseline_pct: float = Field(default=0.0, ge=0)
    rate_mbps: float = Field(gt=0)
    max_users_per_replica: int = Field(default=800, gt=0)

    @model_validator(mode="after")
    def _check_baseline(self):
        if self.profile is WorkloadProfile.LINEAR and self.baseline_pct > self.peak_workload_pct:
            raise ValueError("baseline_pct must not exceed peak_workload_pct")
        return self


class VmSpec(VmTemplate):
    id: str
    popularity_share: float = Field(gt=0, le=1)

    @property
    def replica_traffic_mbps(self) -> float:
        """Traffic of one replica serving its full user cap."""
        return self.max_users_per_replica * self.rate_mbps

    @property
    def workload_slope(self) -> float:
        """Workload percent per Mbps served (linear profile)."""
        if self.profile is WorkloadProfile.CONSTANT:
            return 0.0
        return (self.peak_workload_pct - self.baseline_pct) / self.replica_traffic_mbps


class CatalogSection(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    vms: tuple[VmSpec, ...] = ()
    template: VmTemplate | None = None

    @model_validator(mode="after")
    def _check_ids(self):
        ids = [vm.id for vm in self.vms]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate VM ids in catalog")
        return self


class PopularityGroup(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    share_pct: float = Field(gt=0, le=100)
    vm_count: int = Field(ge=1)


class PopularityModel(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    groups: tuple[PopularityGroup, ...] = ()
    users_per_pon: int | None = Field(default=None, ge=0)
    # Alternative to users_per_pon: OLT capacity / average broadband rate
    average_rate_mbps: float | None = Field(default=None, gt=0)
    served_fraction: float = Field(default=1.0, gt=0, le=1)
    demand_nodes: tuple[int, ...] | None = None

    @model_validator(mode="after")
    def _check_user_source(self):
        if self.users_per_pon is None and self.average_rate_mbps is None:
            raise ValueError("either users_per_pon or average_rate_mbps is required")
        return self


class DemandMatrix(BaseModel):
    """Users and traffic per demand unit (vm, pon, node)."""

    model_config = {"arbitrary_types_allowed": True}

    vm_col: str = "vm"
    pon_col: str = "pon"
    node_col: str = "node"
    users_col: str = "users"
    traffic_col: str = "traffic_mbps"
    pandas_df: pd.DataFrame
    # Rounded users minus the expected user count, per VM
    residuals: dict[str, float] = {}

    def get_pandas_dataframe(self) -> pd.DataFrame:
        return self.pandas_df

    def units(self) -> list[tuple[str, int, int, float]]:
        """(vm, pon, node, traffic_mbps) for every unit with positive traffic."""
        df = self.pandas_df
        df = df[df[self.traffic_col] > 0]
        return [
            (str(vm), int(pon), int(node), float(traffic))
            for vm, pon, node, traffic in zip(
                df[self.vm_col], df[self.pon_col], df[self.node_col], df[self.traffic_col]
            )
        ]
