from collections import deque

import networkx as nx
import pytest

from src.constants import ATT_TOPOLOGY_PATH
from src.errors import InvalidParameterError, InvalidScenarioError, NoPathError
from src.loaders import dump_topology, load_topology
from src.network.topology import CoreGraph, core_hop_count, edfa_count, min_hop_path, regen_count

from .conftest import make_topology


@pytest.mark.parametrize(
    "distance, span, expected",
    [(160.0, 80.0, 1), (80.0, 80.0, 0), (50.0, 80.0, 0), (400.0, 80.0, 4)],
)
def test_edfa_count(distance, span, expected):
    assert edfa_count(distance, span) == expected


@pytest.mark.parametrize(
    "distance, reach, expected",
    [(4500.0, 2000.0, 1), (2000.0, 2000.0, 0), (500.0, 2000.0, 0)],
)
def test_regen_count(distance, reach, expected):
    assert regen_count(distance, reach) == expected


def test_literal_counts_are_not_clamped():
    assert edfa_count(50.0, 80.0, literal=True) == -1
    assert regen_count(500.0, 2000.0, literal=True) == -1


@pytest.mark.parametrize("distance, reach", [(0.0, 80.0), (-5.0, 80.0), (100.0, 0.0)])
def test_reach_counts_reject_nonpositive_inputs(distance, reach):
    with pytest.raises(InvalidParameterError):
        edfa_count(distance, reach)
    with pytest.raises(InvalidParameterError):
        regen_count(distance, reach)


def test_min_hop_path_prefers_direct_link(triangle):
    assert min_hop_path(triangle, 1, 3) == [(1, 3)]


def test_min_hop_path_on_line(line3):
    assert min_hop_path(line3, 1, 3) == [(1, 2), (2, 3)]
    assert min_hop_path(line3, 3, 1) == [(3, 2), (2, 1)]
    assert core_hop_count(line3, 1, 3) == 2


def test_zero_length_path(line3):
    assert min_hop_path(line3, 2, 2) == []
    assert core_hop_count(line3, 2, 2) == 0


def test_ties_take_lexicographically_smallest_path():
    # square 1-2-4 and 1-3-4
    square = make_topology([(1, 2, 100.0), (1, 3, 100.0), (2, 4, 100.0), (3, 4, 100.0)])
    assert CoreGraph(square).node_path(1, 4) == [1, 2, 4]
    assert CoreGraph(square).node_path(4, 1) == [4, 2, 1]


def test_disconnected_pair_raises_no_path():
    topology = make_topology([(1, 2, 100.0)], nodes=[1, 2, 3])
    graph = CoreGraph(topology)
    assert not graph.is_connected()
    with pytest.raises(NoPathError):
        graph.hop_count(1, 3)
    assert graph.hop_matrix[0, 2] == -1


def test_unknown_node_is_rejected(line3):
    with pytest.raises(InvalidParameterError):
        CoreGraph(line3).hop_count(1, 9)


def test_nearest_breaks_ties_on_node_id(line3):
    graph = CoreGraph(line3)
    assert graph.nearest([1, 3], 2) == 1
    assert graph.nearest([3, 1], 3) == 3


def _bfs(adjacency: dict[int, list[int]], dst: int) -> dict[int, int]:
    seen = {dst: 0}
    queue = deque([dst])
    while queue:
        node = queue.popleft()
        for peer in adjacency[node]:
            if peer not in seen:
                seen[peer] = seen[node] + 1
                queue.append(peer)
    return seen


@pytest.mark.parametrize("seed", range(100))
def test_hop_counts_match_independent_bfs(seed):
    random_graph = nx.gnp_random_graph(8, 0.3, seed=seed)
    topology = make_topology(
        [(a + 1, b + 1, 100.0) for a, b in random_graph.edges()],
        nodes=[node + 1 for node in random_graph.nodes()],
    )
    graph = CoreGraph(topology)
    adjacency = topology.neighbors()
    for dst in topology.node_ids:
        expected = _bfs(adjacency, dst)
        for src in topology.node_ids:
            if src in expected:
                assert graph.hop_count(src, dst) == expected[src]
                assert len(min_hop_path(graph, src, dst)) == expected[src]
            else:
                with pytest.raises(NoPathError):
                    graph.hop_count(src, dst)


def test_bundled_att_topology(att):
    assert len(att.nodes) == 25
    assert len(att.links) == 54
    assert len(att.arcs()) == 108
    assert len(att.datacenter_sites) == 12
    assert CoreGraph(att).is_connected()


def test_att_topology_round_trip_is_byte_identical(att):
    assert dump_topology(att) == ATT_TOPOLOGY_PATH.read_text(encoding="utf-8")


def test_topology_rejects_unknown_link_endpoints(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("nodes:\n- id: 1\nlinks:\n- a: 1\n  b: 2\n  distance_km: 10.0\n", encoding="utf-8")
    with pytest.raises(InvalidScenarioError, match="unknown node"):
        load_topology(path)
