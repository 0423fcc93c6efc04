import logging
from collections import defaultdict

from pydantic import BaseModel

from ...base import BasePlacementSolver
from ...constants import WORKERS
from ...entities.catalog import VmSpec
from ...entities.offline import OfflineTable
from ...entities.placement import Location, Placement, ServingEntry
from ...entities.power import PowerBreakdown
from ...errors import UnclassifiedVmError
from ...model.catalog import replica_workload
from ...model.power import EnergyModel, size_servers
from .classify import TypeClassifier
from .offline import instantiate_recipe, offline_phase

logger = logging.getLogger(__name__)


class OnlineLedger:
    """Cumulative per-site workload as VMs arrive; single writer."""

    def __init__(self, server_max_workload: float, linear_mode: str = "default"):
        self.server_max_workload = server_max_workload
        self.linear_mode = linear_mode
        self.site_workload: dict[Location, float] = defaultdict(float)
        self.consolidated = 0

    def servers(self, location: Location) -> int:
        return size_servers(self.site_workload.get(location, 0.0), self.server_max_workload)

    def add(self, spec: VmSpec, servings: list[ServingEntry]) -> None:
        served: dict[Location, float] = defaultdict(float)
        for entry in servings:
            served[entry.location] += entry.traffic_mbps
        for location, traffic in sorted(served.items(), key=lambda item: item[0].sort_key()):
            before = self.servers(location)
            self.site_workload[location] += replica_workload(spec, traffic, True, self.linear_mode)
            if before and self.servers(location) == before:
                self.consolidated += 1
                logger.debug(f"{spec.id} consolidated into the {before} server(s) at {location}")

    def server_counts(self) -> dict[Location, int]:
        return {location: self.servers(location) for location in self.site_workload}


class HeuristicResult(BaseModel):
    model_config = {"frozen": True}

    placement: Placement
    breakdown: PowerBreakdown
    order: tuple[str, ...]
    consolidated: int


def order_stream(specs: list[VmSpec], online_order: str) -> list[VmSpec]:
    if online_order == "catalog":
        return list(specs)
    return sorted(specs, key=lambda spec: (-spec.popularity_share, spec.id))


class OnlinePlacer(BasePlacementSolver):
    def __init__(self, model: EnergyModel, table: OfflineTable):
        self.model = model
        self.table = table
        self.classifier = TypeClassifier(table.keys(), nearest=model.run.nearest_key)

    def solve(self, stream: list[VmSpec] | None = None) -> HeuristicResult:
        """Place VMs one at a time by their type's recipe, then price the result once."""
        model = self.model
        if stream is None:
            stream = order_stream(list(model.specs.values()), model.run.online_order)
        ledger = OnlineLedger(model.params.compute.server_max_workload_pct, model.run.linear_mode)

        servings: list[ServingEntry] = []
        for spec in stream:
            key = self.classifier.classify(spec)
            entry = self.table.lookup(key)
            if entry is None:
                raise UnclassifiedVmError(f"Offline table has no recipe for {key.label}")
            placed = instantiate_recipe(entry.recipe, model, spec.id)
            ledger.add(spec, placed)
            servings.extend(placed)

        placement = Placement.from_servings(servings)
        # priced against the streamed VMs' demand only
        evaluation = model.restricted_to([spec.id for spec in stream]).evaluate(placement)
        for site in evaluation.equipment.sites:
            if site.servers != ledger.servers(site.location):
                logger.warning(
                    f"Online ledger counts {ledger.servers(site.location)} servers at "
                    f"{site.location}, power model sized {site.servers}"
                )
        logger.info(
            f"Online phase placed {len(stream)} VM(s) on {len(placement.sites())} site(s), "
            f"{ledger.consolidated} consolidated into existing servers, "
            f"total {evaluation.breakdown.total_w:.3f} W"
        )
        return HeuristicResult(
            placement=placement,
            breakdown=evaluation.breakdown,
            order=tuple(spec.id for spec in stream),
            consolidated=ledger.consolidated,
        )


def online_phase(
    stream: list[VmSpec], table: OfflineTable, model: EnergyModel
) -> tuple[Placement, PowerBreakdown]:
    result = OnlinePlacer(model, table).solve(stream)
    return result.placement, result.breakdown


class HeuristicSolver(BasePlacementSolver):
    """Offline recipe search followed by the online phase over the scenario's catalog."""

    def __init__(self, model: EnergyModel, table: OfflineTable | None = None, workers: int = WORKERS):
        self.model = model
        self.table = table
        self.workers = workers

    def solve(self) -> HeuristicResult:
        if self.table is None:
            self.table = offline_phase(self.model, workers=self.workers)
        return OnlinePlacer(self.model, self.table).solve()
