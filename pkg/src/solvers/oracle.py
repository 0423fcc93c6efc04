import itertools
import logging
import math

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel

from ..base import BasePlacementSolver
from ..constants import WORKERS
from ..entities.placement import Location, Placement, ServingEntry
from ..entities.power import PowerBreakdown
from ..entities.scenario import Scenario
from ..errors import SearchSpaceTooLargeError
from ..model.power import EnergyModel

logger = logging.getLogger(__name__)


class SearchSpace(BaseModel):
    """Candidate serving locations for every demand unit with traffic."""

    model_config = {"extra": "forbid", "frozen": True}

    units: tuple[tuple[str, int, int, float], ...]
    candidates: tuple[tuple[Location, ...], ...]

    @property
    def size(self) -> int:
        return math.prod(len(options) for options in self.candidates)


class OracleResult(BaseModel):
    model_config = {"frozen": True}

    placement: Placement
    breakdown: PowerBreakdown
    evaluated: int


def build_search_space(model: EnergyModel) -> SearchSpace:
    units = tuple(model.units)
    candidates = []
    for _, pon, node, _ in units:
        options = [Location.cloud(site) for site in model.cloud_sites]
        if model.allows_metro_fog:
            options.append(Location.metro_fog(node))
        if model.allows_access_fog:
            options.append(Location.access_fog(pon, node))
        candidates.append(tuple(options))
    return SearchSpace(units=units, candidates=tuple(candidates))


def placement_from_choice(space: SearchSpace, choice: tuple[Location, ...]) -> Placement:
    return Placement.from_servings(
        [
            ServingEntry(vm=vm, pon=pon, node=node, location=location, traffic_mbps=traffic)
            for (vm, pon, node, traffic), location in zip(space.units, choice)
        ]
    )


def _best_in_range(model: EnergyModel, space: SearchSpace, start: int, stop: int):
    best = None
    for choice in itertools.islice(itertools.product(*space.candidates), start, stop):
        placement = placement_from_choice(space, choice)
        power = round(model.total_power(placement, check=False).total_w, 6)
        key = (power, placement.serialization())
        if best is None or key < best[0]:
            best = (key, choice)
    return best


class ExactSolver(BasePlacementSolver):
    def __init__(self, model: EnergyModel, bound: int | None = None, workers: int = WORKERS):
        self.model = model
        self.bound = bound if bound is not None else model.run.enumeration_bound
        self.workers = max(1, workers)

    def solve(self) -> OracleResult:
        """Exhaustive argmin over integral serving assignments.

        Ties on power (rounded to 1e-6 W) go to the smallest placement serialization.
        """
        space = build_search_space(self.model)
        size = space.size
        if size > self.bound:
            raise SearchSpaceTooLargeError(size, self.bound)
        logger.info(
            f"Enumerating {size} placements of {len(space.units)} demand units "
            f"with {self.workers} worker(s)"
        )

        chunks = max(1, min(self.workers * 4, size))
        edges = np.linspace(0, size, chunks + 1).astype(int)
        ranges = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        if self.workers == 1:
            partial = [_best_in_range(self.model, space, a, b) for a, b in ranges]
        else:
            partial = Parallel(n_jobs=self.workers)(
                delayed(_best_in_range)(self.model, space, a, b) for a, b in ranges
            )
        _, choice = min(item for item in partial if item is not None)

        placement = placement_from_choice(space, choice)
        breakdown = self.model.total_power(placement)
        logger.info(f"Exact optimum {breakdown.total_w:.3f} W over {size} placements")
        return OracleResult(placement=placement, breakdown=breakdown, evaluated=size)


def solve_exact(
    scenario: Scenario | EnergyModel,
    bound: int | None = None,
    workers: int = WORKERS,
) -> tuple[Placement, PowerBreakdown]:
    model = scenario if isinstance(scenario, EnergyModel) else EnergyModel(scenario)
    result = ExactSolver(model, bound=bound, workers=workers).solve()
    return result.placement, result.breakdown


def sample_random_placement(model: EnergyModel, rng: np.random.Generator) -> Placement:
    """A feasible integral placement with one uniformly drawn candidate per demand unit."""
    space = build_search_space(model)
    choice = tuple(options[int(rng.integers(len(options)))] for options in space.candidates)
    return placement_from_choice(space, choice)
