import logging
import math

from joblib import Parallel, delayed

from ...constants import WORKERS
from ...entities.catalog import VmSpec
from ...entities.offline import (
    CandidateRecipe,
    OfflineEntry,
    OfflineTable,
    PlacementRecipe,
    RecipeKind,
    VmTypeKey,
)
from ...entities.placement import Location, LocationKind, Placement, ServingEntry
from ...model.catalog import replica_workload
from ...model.power import EnergyModel, size_servers
from ..subsets import CloudSubsetEvaluator, SubsetResult

logger = logging.getLogger(__name__)


def instantiate_recipe(recipe: PlacementRecipe, model: EnergyModel, vm: str) -> list[ServingEntry]:
    """Serving entries for one VM's demand units under a recipe."""
    servings = []
    for unit_vm, pon, node, traffic in model.units:
        if unit_vm != vm:
            continue
        if recipe.kind is RecipeKind.CLOUDS:
            location = Location.cloud(model.graph.nearest(list(recipe.sites), node))
        elif recipe.kind is RecipeKind.ALL_METRO_FOGS:
            location = Location.metro_fog(node)
        else:
            location = Location.access_fog(pon, node)
        servings.append(
            ServingEntry(vm=vm, pon=pon, node=node, location=location, traffic_mbps=traffic)
        )
    return servings


def recipe_locations(recipe: PlacementRecipe, model: EnergyModel) -> list[Location]:
    """Every replica a recipe creates before idle ones are pruned."""
    if recipe.kind is RecipeKind.CLOUDS:
        return [Location.cloud(site) for site in recipe.sites]
    if recipe.kind is RecipeKind.ALL_METRO_FOGS:
        return [Location.metro_fog(node) for node in model.node_ids]
    pons = range(1, model.scenario.attachment.pons_per_node + 1)
    return [Location.access_fog(pon, node) for node in model.node_ids for pon in pons]


def idle_replica_power(spec: VmSpec, location: Location, model: EnergyModel) -> float:
    """Servers an idle replica would keep on at a site hosting nothing else."""
    params = model.params
    workload = replica_workload(spec, 0.0, True, model.run.linear_mode)
    pue = {
        LocationKind.CLOUD: params.pue.cloud,
        LocationKind.METRO_FOG: params.pue.metro_fog,
        LocationKind.ACCESS_FOG: params.pue.access_fog,
    }[location.kind]
    servers = size_servers(workload, params.compute.server_max_workload_pct)
    return pue * servers * params.compute.server_w


def _subset_modes(model: EnergyModel, size: int) -> list[str]:
    run = model.run
    modes = []
    for k in range(1, size + 1):
        if run.subset_mode == "exhaustive" or k == 1:
            modes.append("exhaustive")
        elif run.subset_mode == "greedy":
            modes.append("greedy")
        else:
            modes.append("exhaustive" if math.comb(size, k) <= run.subset_bound else "greedy")
    return modes


def plan_type(model: EnergyModel, key: VmTypeKey, vm: str) -> OfflineEntry:
    """Cheapest recipe for one VM type, evaluated on its representative VM alone."""
    single = model.restricted_to([vm])
    candidates: list[CandidateRecipe] = []

    if single.units:
        evaluator = CloudSubsetEvaluator(model, vm)
        previous: SubsetResult | None = None
        for k, mode in enumerate(_subset_modes(model, evaluator.size), start=1):
            if mode == "exhaustive":
                result = evaluator.best_exhaustive(k, model.run.subset_bound)
            else:
                result = evaluator.best_extension(previous.sites)
            previous = result
            candidates.append(
                CandidateRecipe(
                    recipe=PlacementRecipe(kind=RecipeKind.CLOUDS, sites=result.sites, subset_mode=mode),
                    power_w=result.power_w,
                )
            )
    else:
        candidates.append(
            CandidateRecipe(
                recipe=PlacementRecipe(kind=RecipeKind.CLOUDS, sites=()),
                power_w=single.total_power(Placement()).total_w,
            )
        )

    fog_kinds = []
    if model.allows_metro_fog:
        fog_kinds.append(RecipeKind.ALL_METRO_FOGS)
    if model.allows_access_fog:
        fog_kinds.append(RecipeKind.ALL_ACCESS_FOGS)
    for kind in fog_kinds:
        recipe = PlacementRecipe(kind=kind)
        placement = Placement.from_servings(instantiate_recipe(recipe, single, vm))
        candidates.append(
            CandidateRecipe(recipe=recipe, power_w=single.total_power(placement, check=False).total_w)
        )

    ordered = sorted(enumerate(candidates), key=lambda item: (round(item[1].power_w, 6), item[0]))
    chosen = ordered[0][1].recipe
    placement = Placement.from_servings(instantiate_recipe(chosen, single, vm))
    power = single.total_power(placement).total_w

    hosting = set(placement.sites())
    idle = [location for location in recipe_locations(chosen, single) if location not in hosting]
    spec = single.specs[vm]
    unpruned = power + sum(idle_replica_power(spec, location, single) for location in idle)
    logger.info(
        f"Type {key.label} (via {vm}): {chosen.label} at {power:.3f} W, "
        f"{len(idle)} idle replica(s) pruned"
    )
    return OfflineEntry(
        key=key,
        representative_vm=vm,
        recipe=chosen,
        power_w=power,
        unpruned_power_w=unpruned,
        pruned_replicas=len(idle),
        candidates=tuple(candidates),
    )


def representatives(model: EnergyModel) -> list[tuple[VmTypeKey, str]]:
    """The first VM of each type in catalog order, types sorted by key."""
    seen: dict[VmTypeKey, str] = {}
    for vm, spec in model.specs.items():
        seen.setdefault(VmTypeKey.from_spec(spec), vm)
    return sorted(seen.items(), key=lambda item: item[0].sort_key())


def offline_phase(model: EnergyModel, workers: int = WORKERS) -> OfflineTable:
    types = representatives(model)
    logger.info(
        f"Offline phase: {len(types)} VM type(s), {len(model.cloud_sites)} candidate cloud sites, "
        f"restriction {model.run.restriction}"
    )
    if workers > 1 and len(types) > 1:
        entries = Parallel(n_jobs=workers)(delayed(plan_type)(model, key, vm) for key, vm in types)
    else:
        entries = [plan_type(model, key, vm) for key, vm in types]
    return OfflineTable(
        scenario_fingerprint=model.scenario.fingerprint(),
        restriction=model.run.restriction,
        entries=tuple(entries),
    )
