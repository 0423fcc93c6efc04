import pytest

from src.constants import ATT_TOPOLOGY_PATH
from src.entities.catalog import CatalogSection, PopularityModel, VmSpec
from src.entities.scenario import RunSection, Scenario
from src.entities.topology import AttachmentPlan, CoreLink, CoreNode, CoreTopology
from src.loaders import load_topology


def make_topology(links: list[tuple[int, int, float]], nodes: list[int] | None = None, **kwargs) -> CoreTopology:
    ids = nodes or sorted({a for a, _, _ in links} | {b for _, b, _ in links})
    return CoreTopology(
        nodes=tuple(CoreNode(id=node) for node in ids),
        links=tuple(CoreLink(a=a, b=b, distance_km=d) for a, b, d in links),
        **kwargs,
    )


def make_vm(vm_id: str = "vm1", **kwargs) -> VmSpec:
    fields = {
        "profile": "linear",
        "peak_workload_pct": 50.0,
        "baseline_pct": 1.0,
        "rate_mbps": 25.0,
        "popularity_share": 0.5,
    }
    fields.update(kwargs)
    return VmSpec(id=vm_id, **fields)


def make_scenario(
    topology: CoreTopology,
    vms: list[VmSpec],
    users_per_pon: int = 100,
    demand_nodes: tuple[int, ...] | None = None,
    pons_per_node: int = 1,
    **run,
) -> Scenario:
    return Scenario(
        name="toy",
        topology=topology,
        attachment=AttachmentPlan(pons_per_node=pons_per_node),
        catalog=CatalogSection(vms=tuple(vms)),
        popularity=PopularityModel(users_per_pon=users_per_pon, demand_nodes=demand_nodes),
        run=RunSection(**run),
    )


@pytest.fixture
def triangle() -> CoreTopology:
    return make_topology([(1, 2, 400.0), (2, 3, 400.0), (1, 3, 400.0)])


@pytest.fixture
def line3() -> CoreTopology:
    return make_topology([(1, 2, 400.0), (2, 3, 600.0)], datacenter_sites=(2,))


@pytest.fixture
def line4() -> CoreTopology:
    return make_topology([(1, 2, 100.0), (2, 3, 100.0), (3, 4, 100.0)])


@pytest.fixture
def star() -> CoreTopology:
    # hub 3
    return make_topology([(3, leaf, 100.0) for leaf in (1, 2, 4, 5)])


@pytest.fixture(scope="session")
def att() -> CoreTopology:
    return load_topology(ATT_TOPOLOGY_PATH)


@pytest.fixture
def toy_scenario(line3) -> Scenario:
    """Two VMs with demand at the line's end nodes."""
    return make_scenario(
        line3,
        [
            make_vm("video", rate_mbps=10.0, baseline_pct=5.0, popularity_share=0.3),
            make_vm("web", profile="constant", peak_workload_pct=10.0, baseline_pct=0.0, rate_mbps=1.0, popularity_share=0.2),
        ],
        users_per_pon=400,
        demand_nodes=(1, 3),
        solver="oracle",
    )
