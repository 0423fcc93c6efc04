import hashlib
import json
from typing import Literal

from pydantic import BaseModel, Field, model_validator

from ..constants import DEFAULT_ENUMERATION_BOUND, DEFAULT_SUBSET_BOUND
from .catalog import CatalogSection, PopularityModel, VmSpec
from .params import PowerParams
from .topology import AttachmentPlan, CoreTopology

Solver = Literal["oracle", "heuristic"]
Restriction = Literal["none", "clouds-only", "att-sites", "clouds+metro"]
RESTRICTIONS: tuple[str, ...] = ("none", "clouds-only", "att-sites", "clouds+metro")


class RunSection(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    solver: Solver = "heuristic"
    restriction: Restriction = "none"
    pue_profile: Literal["best-practice", "2014", "custom"] = "best-practice"
    linear_mode: Literal["default", "literal"] = "default"
    aggregation_ports: Literal["ceil", "fractional"] = "ceil"
    grooming: Literal["shared", "per-demand"] = "shared"
    edfa_mode: Literal["clamped", "literal"] = "clamped"
    optical_switches: Literal["always", "active"] = "always"
    subset_mode: Literal["auto", "exhaustive", "greedy"] = "auto"
    subset_bound: int = Field(default=DEFAULT_SUBSET_BOUND, gt=0)
    enumeration_bound: int = Field(default=DEFAULT_ENUMERATION_BOUND, gt=0)
    online_order: Literal["popularity-desc", "catalog"] = "popularity-desc"
    nearest_key: bool = True
    seed: int = 0


class Scenario(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    name: str = "scenario"
    topology: CoreTopology
    attachment: AttachmentPlan = AttachmentPlan()
    power: PowerParams = PowerParams()
    catalog: CatalogSection
    popularity: PopularityModel
    run: RunSection = RunSection()

    @model_validator(mode="after")
    def _check_node_references(self):
        known = set(self.topology.node_ids)
        demand_nodes = self.popularity.demand_nodes or ()
        unknown = sorted(set(demand_nodes) - known)
        if unknown:
            raise ValueError(f"popularity.demand_nodes reference unknown nodes {unknown}")
        if self.run.restriction == "att-sites" and not self.topology.datacenter_sites:
            raise ValueError("restriction att-sites needs topology.datacenter_sites")
        if not self.catalog.vms and self.catalog.template is None:
            raise ValueError("catalog needs vms or a template")
        if self.catalog.template is not None and not self.popularity.groups:
            raise ValueError("a catalog template needs popularity.groups")
        return self

    @property
    def effective_power(self) -> PowerParams:
        return self.power.with_pue_profile(self.run.pue_profile)

    @property
    def demand_nodes(self) -> list[int]:
        if self.popularity.demand_nodes is None:
            return self.topology.node_ids
        return sorted(set(self.popularity.demand_nodes))

    def vm_specs(self) -> list[VmSpec]:
        """Explicit VMs followed by template VMs expanded over the popularity groups."""
        specs = list(self.catalog.vms)
        template = self.catalog.template
        if template is not None:
            for group_index, group in enumerate(self.popularity.groups, start=1):
                for member in range(1, group.vm_count + 1):
                    specs.append(
                        VmSpec(
                            id=f"g{group_index}-{member:03d}",
                            popularity_share=group.share_pct / 100.0,
                            **template.model_dump(),
                        )
                    )
        return specs

    def with_run(self, **updates) -> "Scenario":
        return self.model_copy(update={"run": self.run.model_copy(update=updates)})

    def with_rate(self, rate_mbps: float) -> "Scenario":
        """Same scenario with every VM's per-user data rate replaced."""
        vms = tuple(vm.model_copy(update={"rate_mbps": rate_mbps}) for vm in self.catalog.vms)
        template = self.catalog.template
        if template is not None:
            template = template.model_copy(update={"rate_mbps": rate_mbps})
        catalog = self.catalog.model_copy(update={"vms": vms, "template": template})
        return self.model_copy(update={"catalog": catalog})

    def fingerprint(self) -> str:
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()
