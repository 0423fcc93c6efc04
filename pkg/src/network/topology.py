import logging
import math
from functools import cached_property

import networkx as nx
import numpy as np

from ..entities.topology import CoreTopology
from ..errors import InvalidParameterError, NoPathError

logger = logging.getLogger(__name__)


def _reach_count(distance_km: float, reach_km: float, literal: bool, what: str) -> int:
    if distance_km <= 0 or reach_km <= 0:
        raise InvalidParameterError(
            f"{what} needs positive distance and reach, got {distance_km} and {reach_km}"
        )
    count = math.floor(distance_km / reach_km - 1)
    return count if literal else max(0, count)


def edfa_count(distance_km: float, span_km: float, literal: bool = False) -> int:
    """In-line amplifiers on a fiber: floor(D/S - 1), clamped at zero unless literal."""
    return _reach_count(distance_km, span_km, literal, "edfa_count")


def regen_count(distance_km: float, regen_reach_km: float, literal: bool = False) -> int:
    """Regenerators per wavelength: floor(D/R - 1), clamped at zero unless literal."""
    return _reach_count(distance_km, regen_reach_km, literal, "regen_count")


class CoreGraph:
    """Hop-count view of a core topology with deterministic shortest paths."""

    def __init__(self, topology: CoreTopology):
        self.topology = topology
        self.graph = nx.Graph()
        self.graph.add_nodes_from(topology.node_ids)
        self.graph.add_edges_from(
            (link.a, link.b, {"distance_km": link.distance_km}) for link in topology.links
        )
        self._distances: dict[int, dict[int, int]] = {}
        self._paths: dict[tuple[int, int], list[int]] = {}

    def _check_node(self, node: int) -> None:
        if node not in self.graph:
            raise InvalidParameterError(f"Unknown core node {node}")

    def distances_to(self, dst: int) -> dict[int, int]:
        if dst not in self._distances:
            self._check_node(dst)
            self._distances[dst] = nx.single_source_shortest_path_length(self.graph, dst)
        return self._distances[dst]

    def hop_count(self, src: int, dst: int) -> int:
        self._check_node(src)
        distances = self.distances_to(dst)
        if src not in distances:
            raise NoPathError(src, dst)
        return distances[src]

    def node_path(self, src: int, dst: int) -> list[int]:
        """Lexicographically smallest node sequence among the min-hop paths."""
        if (src, dst) in self._paths:
            return self._paths[(src, dst)]
        remaining = self.hop_count(src, dst)
        distances = self.distances_to(dst)
        path = [src]
        node = src
        while remaining > 0:
            node = next(
                peer
                for peer in sorted(self.graph.neighbors(node))
                if distances.get(peer) == remaining - 1
            )
            path.append(node)
            remaining -= 1
        self._paths[(src, dst)] = path
        return path

    def distance(self, m: int, n: int) -> float:
        return self.graph.edges[m, n]["distance_km"]

    def is_connected(self) -> bool:
        return self.graph.number_of_nodes() > 0 and nx.is_connected(self.graph)

    @cached_property
    def hop_matrix(self) -> np.ndarray:
        """hops[i, j] between node_ids[i] and node_ids[j]; -1 when disconnected."""
        ids = self.topology.node_ids
        hops = np.full((len(ids), len(ids)), -1, dtype=np.int64)
        for j, dst in enumerate(ids):
            distances = self.distances_to(dst)
            for i, src in enumerate(ids):
                if src in distances:
                    hops[i, j] = distances[src]
        return hops

    def nearest(self, sites: list[int], dst: int) -> int:
        """Min-hop site serving ``dst``; lowest node id on ties."""
        return min(sites, key=lambda site: (self.hop_count(site, dst), site))


def min_hop_path(topology: CoreTopology | CoreGraph, src: int, dst: int) -> list[tuple[int, int]]:
    graph = topology if isinstance(topology, CoreGraph) else CoreGraph(topology)
    nodes = graph.node_path(src, dst)
    return list(zip(nodes[:-1], nodes[1:]))


def core_hop_count(topology: CoreTopology | CoreGraph, src: int, dst: int) -> int:
    graph = topology if isinstance(topology, CoreGraph) else CoreGraph(topology)
    return graph.hop_count(src, dst)
