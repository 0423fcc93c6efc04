import numpy as np
import pytest

from src.entities.params import PowerParams, PueParams
from src.entities.placement import Location, Placement, ServingEntry
from src.entities.power import SiteEquipment
from src.entities.topology import AttachmentPlan
from src.errors import AuditError, InfeasiblePlacementError
from src.model.power import (
    EnergyModel,
    audit_breakdown,
    compute_power,
    core_power,
    metro_power,
    pon_power,
    size_metro,
    size_ports_switches,
    size_servers,
)
from src.network.routing import route_all
from src.network.topology import CoreGraph
from src.scripts.generate_random_scenario import generate_random_scenario
from src.solvers.oracle import sample_random_placement

from .conftest import make_scenario, make_topology, make_vm

PARAMS = PowerParams()


@pytest.mark.parametrize("workload, expected", [(125.0, 2), (0.0, 0), (900.0, 9), (100.0, 1)])
def test_size_servers(workload, expected):
    assert size_servers(workload, 100.0) == expected


@pytest.mark.parametrize(
    "traffic, expected",
    [(52000.0, (2, 1)), (0.0, (0, 0)), (600000.0, (15, 1))],
)
def test_size_ports_switches(traffic, expected):
    assert size_ports_switches(traffic, 40000.0, 600000.0) == expected


def _site(**counts) -> SiteEquipment:
    fields = {"traffic_mbps": 0.0, "workload_pct": 0.0, "servers": 0, "ports": 0, "switches": 0}
    fields.update(counts)
    return SiteEquipment(location=Location.cloud(1), **fields)


def test_compute_power_single_server():
    assert compute_power([_site(servers=1, workload_pct=100.0)], PARAMS) == pytest.approx(432.9)


def test_compute_power_redundant_switches():
    assert compute_power([_site(switches=2)], PARAMS) == pytest.approx(2444.0)


def test_compute_power_empty():
    assert compute_power([], PARAMS) == 0.0


def test_pon_power():
    assert pon_power(AttachmentPlan(pons_per_node=1), PARAMS, [1]) == pytest.approx(6603.0)
    assert pon_power(AttachmentPlan(pons_per_node=1), PARAMS, []) == 0.0


def test_pon_power_on_att(att):
    assert pon_power(AttachmentPlan(), PARAMS, att.node_ids) == pytest.approx(330150.0)


@pytest.mark.parametrize("traffic, expected", [(52000.0, 885.0), (600000.0, 2055.0)])
def test_metro_power(traffic, expected):
    assert metro_power([size_metro(1, traffic, PARAMS)], PARAMS) == pytest.approx(expected)


def test_metro_power_without_transit():
    assert metro_power([], PARAMS) == 0.0


def test_idle_core_is_optical_switches_only(att):
    graph = CoreGraph(att)
    state = route_all({}, graph)
    assert core_power(state, PARAMS, att.node_ids) == pytest.approx(3187.5)
    assert core_power(state, PARAMS, att.node_ids, optical_switches="active") == 0.0


def test_core_power_one_demand_over_one_link():
    topology = make_topology([(1, 2, 160.0)])
    state = route_all({(1, 2): 40000.0}, CoreGraph(topology))
    expected = 1.5 * (638 * (1 + 2 + 1) + 129 + 11 + 2 * 85)
    assert core_power(state, PARAMS, topology.node_ids) == pytest.approx(expected)


def test_pue_profiles():
    assert PARAMS.with_pue_profile("2014").pue == PueParams(cloud=1.7, metro_fog=1.9, access_fog=2.5)
    assert PARAMS.with_pue_profile("custom") == PARAMS


def _single_vm_model(topology, **run) -> EnergyModel:
    scenario = make_scenario(
        topology,
        [make_vm(rate_mbps=10.0, popularity_share=0.5)],
        users_per_pon=200,
        demand_nodes=(1, 3),
        **run,
    )
    return EnergyModel(scenario)


def _all_at(model: EnergyModel, location_for) -> Placement:
    return Placement.from_servings(
        [
            ServingEntry(vm=vm, pon=pon, node=node, location=location_for(pon, node), traffic_mbps=traffic)
            for vm, pon, node, traffic in model.units
        ]
    )


def test_empty_placement_costs_the_floor(line3):
    scenario = make_scenario(line3, [make_vm()], demand_nodes=())
    model = EnergyModel(scenario)
    assert model.units == []
    breakdown = model.total_power(Placement())
    switches = 3 * 85 * 1.5
    assert breakdown.pon_w == pytest.approx(model.pon_floor())
    assert breakdown.total_w == pytest.approx(model.pon_floor() + switches)


def test_pon_power_does_not_depend_on_placement(line3):
    model = _single_vm_model(line3)
    clouds = model.total_power(_all_at(model, lambda pon, node: Location.cloud(2)))
    fogs = model.total_power(_all_at(model, lambda pon, node: Location.access_fog(pon, node)))
    assert clouds.pon_w == pytest.approx(model.pon_floor())
    assert fogs.pon_w == pytest.approx(model.pon_floor())
    assert clouds.total_w != fogs.total_w


def test_access_fogs_need_no_core_or_metro(line3):
    model = _single_vm_model(line3, optical_switches="active")
    breakdown = model.total_power(_all_at(model, lambda pon, node: Location.access_fog(pon, node)))
    assert breakdown.core_w == 0.0
    assert breakdown.metro_w == 0.0
    assert breakdown.cloud_w == 0.0
    # two sites, one server each
    assert breakdown.by_device_class()[("access_fog", "servers")] == pytest.approx(2 * 333 * 1.5)


def test_remote_cloud_routes_over_the_core(line3):
    model = _single_vm_model(line3)
    evaluation = model.evaluate(_all_at(model, lambda pon, node: Location.cloud(2)))
    state = evaluation.core_state
    assert state.arc(2, 1).wavelengths == 1
    assert state.arc(2, 3).wavelengths == 1
    assert state.arc(1, 2).wavelengths == 0
    assert state.aggregation_ports_cloud == {2: 1.0}
    assert state.aggregation_ports_edge == {1: 2.0, 3: 2.0}
    # cloud traffic terminates in the metro of each demand node
    assert [m.node for m in evaluation.equipment.metro] == [1, 3]


def test_metro_fog_traffic_counts_in_the_metro(line3):
    model = _single_vm_model(line3)
    evaluation = model.evaluate(_all_at(model, lambda pon, node: Location.metro_fog(node)))
    assert [(m.node, m.traffic_mbps) for m in evaluation.equipment.metro] == [(1, 1000.0), (3, 1000.0)]
    assert evaluation.breakdown.core_w == pytest.approx(3 * 85 * 1.5)


def test_equal_pue_scaling_scales_total(line3):
    def model_with(pue: float) -> EnergyModel:
        scenario = make_scenario(
            line3, [make_vm(rate_mbps=10.0)], users_per_pon=200, demand_nodes=(1, 3), pue_profile="custom"
        )
        power = PowerParams(pue=PueParams(cloud=pue, metro_fog=pue, access_fog=pue, network=pue))
        return EnergyModel(scenario.model_copy(update={"power": power}))

    low, high = model_with(1.0), model_with(2.0)
    placement = _all_at(low, lambda pon, node: Location.cloud(2))
    assert high.total_power(placement).total_w == pytest.approx(2 * low.total_power(placement).total_w)


def test_evaluate_rejects_infeasible_placements(line3):
    model = _single_vm_model(line3)
    placement = _all_at(model, lambda pon, node: Location.access_fog(1, 2))
    with pytest.raises(InfeasiblePlacementError, match="locality"):
        model.evaluate(placement)


def test_audit_recomputes_every_sampled_term(line3):
    model = _single_vm_model(line3)
    breakdown = model.total_power(_all_at(model, lambda pon, node: Location.cloud(1)))
    assert audit_breakdown(breakdown, model.params, sample_size=10, seed=3) == []
    assert audit_breakdown(breakdown, PowerParams().with_pue_profile("2014"), sample_size=len(breakdown.terms))


def test_breakdown_frame_columns(line3):
    model = _single_vm_model(line3)
    df = model.total_power(_all_at(model, lambda pon, node: Location.cloud(1))).to_dataframe()
    assert list(df.columns) == ["segment", "device_class", "location", "count", "unit_watts", "pue", "watts"]
    assert df["watts"].sum() == pytest.approx(model.total_power(_all_at(model, lambda pon, node: Location.cloud(1))).total_w)


def test_evaluate_raises_on_core_audit_problems(line3, monkeypatch):
    model = _single_vm_model(line3)
    placement = _all_at(model, lambda pon, node: Location.cloud(2))
    monkeypatch.setattr("src.model.power.check_core_state", lambda *args, **kwargs: ["arc 1->2 over capacity"])
    with pytest.raises(AuditError, match="over capacity") as info:
        model.evaluate(placement)
    assert info.value.exit_code == 5
    assert model.evaluate(placement, check=False).breakdown.total_w > 0


def _mixed_catalog(rate: float):
    return [
        make_vm(rate_mbps=rate, popularity_share=0.5),
        make_vm("vm2", profile="constant", peak_workload_pct=10.0, baseline_pct=0.0, rate_mbps=rate, popularity_share=0.3),
    ]


SITE_RULES = {
    "cloud": lambda pon, node: Location.cloud(2),
    "metro_fog": lambda pon, node: Location.metro_fog(node),
    "access_fog": lambda pon, node: Location.access_fog(pon, node),
    "mixed": lambda pon, node: Location.cloud(1) if node == 1 else Location.access_fog(pon, node),
}


@pytest.mark.parametrize("aggregation_ports", ["ceil", "fractional"])
@pytest.mark.parametrize("rule", sorted(SITE_RULES))
@pytest.mark.parametrize("low, high", [(0.1, 1.0), (1.0, 10.0), (10.0, 25.0), (25.0, 200.0)])
def test_total_power_is_monotone_in_demand(line3, low, high, rule, aggregation_ports):
    scenario = make_scenario(
        line3, _mixed_catalog(low), users_per_pon=200, demand_nodes=(1, 3), aggregation_ports=aggregation_ports
    )
    totals = []
    for rate in (low, high):
        model = EnergyModel(scenario.with_rate(rate))
        totals.append(model.total_power(_all_at(model, SITE_RULES[rule])).total_w)
    assert totals[1] >= totals[0] - 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_random_placement_costs_more_at_a_higher_rate(seed):
    scenario = generate_random_scenario(seed)
    low = EnergyModel(scenario.with_rate(1.0))
    placement = sample_random_placement(low, np.random.default_rng(seed))
    chosen = {(entry.vm, entry.pon, entry.node): entry.location for entry in placement.servings}

    previous = low.total_power(placement).total_w
    for rate in (5.0, 25.0):
        model = EnergyModel(scenario.with_rate(rate))
        scaled = Placement.from_servings(
            [
                ServingEntry(vm=vm, pon=pon, node=node, location=chosen[(vm, pon, node)], traffic_mbps=traffic)
                for vm, pon, node, traffic in model.units
            ]
        )
        total = model.total_power(scaled).total_w
        assert total >= previous - 1e-9
        previous = total
