import math

import networkx as nx
import numpy as np
import pytest

from src.loaders import YamlScenarioLoader
from src.model.power import EnergyModel
from src.scripts.generate_random_scenario import (
    MAX_CANDIDATE_PLACEMENTS,
    dump_scenario,
    generate_random_scenario,
    random_topology,
    write_random_scenario,
)
from src.solvers.heuristic.online import HeuristicSolver
from src.solvers.oracle import ExactSolver, build_search_space, sample_random_placement

SEEDS = list(range(50))
RANDOM_PLACEMENTS = 1000


@pytest.mark.parametrize("seed", SEEDS)
def test_heuristic_stays_within_five_percent_of_the_oracle(seed):
    model = EnergyModel(generate_random_scenario(seed))
    exact = ExactSolver(model, workers=1).solve()
    heuristic = HeuristicSolver(model, workers=1).solve()

    assert model.validate(exact.placement) == []
    assert model.validate(heuristic.placement) == []
    assert exact.breakdown.total_w <= heuristic.breakdown.total_w + 1e-6
    assert heuristic.breakdown.total_w <= 1.05 * exact.breakdown.total_w


@pytest.mark.slow
@pytest.mark.parametrize("seed", SEEDS)
def test_oracle_dominates_random_feasible_placements(seed):
    model = EnergyModel(generate_random_scenario(seed))
    best = ExactSolver(model, workers=1).solve().breakdown.total_w
    rng = np.random.default_rng(seed)
    for _ in range(RANDOM_PLACEMENTS):
        assert best <= model.total_power(sample_random_placement(model, rng)).total_w + 1e-6


@pytest.mark.parametrize("seed", SEEDS)
def test_generated_scenarios_are_small_and_connected(seed):
    scenario = generate_random_scenario(seed)
    assert 4 <= len(scenario.topology.nodes) <= 6
    assert 1 <= len(scenario.catalog.vms) <= 3
    assert nx.is_connected(nx.Graph([(link.a, link.b) for link in scenario.topology.links]))
    assert build_search_space(EnergyModel(scenario)).size <= MAX_CANDIDATE_PLACEMENTS


def test_generation_is_deterministic():
    assert generate_random_scenario(3) == generate_random_scenario(3)
    assert generate_random_scenario(3).fingerprint() != generate_random_scenario(4).fingerprint()


def test_random_topology_distances():
    topology = random_topology(np.random.default_rng(0), 6)
    assert all(100 <= link.distance_km <= 1500 for link in topology.links)
    assert all(math.isclose(link.distance_km, round(link.distance_km)) for link in topology.links)


def test_dumped_scenario_loads_back(tmp_path):
    scenario = generate_random_scenario(11)
    path = write_random_scenario(11, tmp_path / "random.yaml")
    assert path.read_text(encoding="utf-8") == dump_scenario(scenario)
    loaded = YamlScenarioLoader().load(file_path=path)
    assert loaded.fingerprint() == scenario.fingerprint()
