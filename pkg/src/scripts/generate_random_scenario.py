import logging
import math
from pathlib import Path

import networkx as nx
import numpy as np
import yaml

from ..constants import SCENARIOS_DIR
from ..entities.catalog import CatalogSection, PopularityModel, VmSpec, WorkloadProfile
from ..entities.scenario import RunSection, Scenario
from ..entities.topology import AttachmentPlan, CoreLink, CoreNode, CoreTopology

logger = logging.getLogger(__name__)

PEAK_CHOICES = (10.0, 50.0, 100.0)
BASELINE_CHOICES = (0.0, 1.0, 5.0, 40.0)
RATE_CHOICES = (0.1, 1.0, 10.0, 25.0)
SHARE_CHOICES = (0.05, 0.1, 0.2, 0.3)
MAX_CANDIDATE_PLACEMENTS = 2000


def random_topology(rng: np.random.Generator, num_nodes: int) -> CoreTopology:
    """Connected random graph: a random tree plus a few chords, 100-1500 km links."""
    graph = nx.Graph()
    graph.add_nodes_from(range(1, num_nodes + 1))
    for node in range(2, num_nodes + 1):
        graph.add_edge(node, int(rng.integers(1, node)))
    for a in range(1, num_nodes + 1):
        for b in range(a + 1, num_nodes + 1):
            if not graph.has_edge(a, b) and rng.random() < 0.3:
                graph.add_edge(a, b)
    assert nx.is_connected(graph)

    links = tuple(
        CoreLink(a=min(a, b), b=max(a, b), distance_km=float(rng.integers(100, 1501)))
        for a, b in sorted(graph.edges(), key=lambda edge: (min(edge), max(edge)))
    )
    return CoreTopology(
        name=f"random-{num_nodes}",
        nodes=tuple(CoreNode(id=node) for node in sorted(graph.nodes())),
        links=links,
    )


def _random_vm(rng: np.random.Generator, index: int) -> VmSpec:
    profile = WorkloadProfile.CONSTANT if rng.random() < 0.5 else WorkloadProfile.LINEAR
    peak = float(rng.choice(PEAK_CHOICES))
    baselines = [b for b in BASELINE_CHOICES if b <= peak]
    baseline = float(rng.choice(baselines)) if profile is WorkloadProfile.LINEAR else 0.0
    return VmSpec(
        id=f"vm{index}",
        profile=profile,
        peak_workload_pct=peak,
        baseline_pct=baseline,
        rate_mbps=float(rng.choice(RATE_CHOICES)),
        popularity_share=float(rng.choice(SHARE_CHOICES)),
    )


def generate_random_scenario(seed: int, max_candidates: int = MAX_CANDIDATE_PLACEMENTS) -> Scenario:
    """
    Small random scenario the exact oracle can enumerate.

    One PON per node; demand nodes are limited so the number of candidate
    placements stays within max_candidates.
    """
    rng = np.random.default_rng(seed)
    num_nodes = int(rng.integers(4, 7))
    topology = random_topology(rng, num_nodes)

    # Each unit can go to any cloud node, its metro fog or its access fog
    per_unit = num_nodes + 2
    max_units = max(1, int(math.floor(math.log(max_candidates) / math.log(per_unit))))

    num_vms = min(int(rng.integers(1, 4)), max_units)
    vms = tuple(_random_vm(rng, index) for index in range(1, num_vms + 1))
    num_demand_nodes = max(1, min(num_nodes, max_units // num_vms))
    demand_nodes = tuple(
        sorted(int(n) for n in rng.choice(topology.node_ids, size=num_demand_nodes, replace=False))
    )

    scenario = Scenario(
        name=f"random-{seed}",
        topology=topology,
        attachment=AttachmentPlan(pons_per_node=1),
        catalog=CatalogSection(vms=vms),
        popularity=PopularityModel(
            users_per_pon=int(rng.integers(100, 801)), demand_nodes=demand_nodes
        ),
        run=RunSection(
            solver="oracle",
            restriction="none",
            pue_profile=str(rng.choice(["best-practice", "2014"])),
            seed=seed,
        ),
    )
    logger.info(
        f"Generated {scenario.name}: {num_nodes} nodes, {len(topology.links)} links, "
        f"{num_vms} VM(s), demand at {list(demand_nodes)}"
    )
    return scenario


def dump_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(
        scenario.model_dump(mode="json", exclude_defaults=True),
        sort_keys=False,
        default_flow_style=False,
    )


def write_random_scenario(seed: int, output_path: str | Path) -> Path:
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(dump_scenario(generate_random_scenario(seed)), encoding="utf-8")
    logger.info(f"Scenario written to {output_path}")
    return output_path


if __name__ == "__main__":
    write_random_scenario(0, SCENARIOS_DIR / "random-0.yaml")
