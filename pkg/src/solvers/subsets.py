import itertools
import logging
import math
from collections import defaultdict

import numpy as np
from pydantic import BaseModel

from ..constants import CEIL_EPS, SUBSET_BATCH_SIZE
from ..entities.catalog import WorkloadProfile
from ..entities.placement import Location, Placement, ServingEntry
from ..errors import InvalidParameterError, NoPathError, SearchSpaceTooLargeError
from ..model.power import GBPS, EnergyModel
from ..network.topology import edfa_count, regen_count

logger = logging.getLogger(__name__)


def _ceil(values: np.ndarray) -> np.ndarray:
    return np.where(values > CEIL_EPS, np.ceil(values - CEIL_EPS), 0.0)


class SubsetResult(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    vm: str
    k: int
    sites: tuple[int, ...]
    power_w: float
    evaluated: int
    mode: str


class CloudSubsetEvaluator:
    """Vectorised total power of one VM served from sets of cloud sites.

    Each demand node is served by its min-hop site in the set (lowest node id on
    ties). Terms that do not depend on the set (PON, metro, edge aggregation and,
    by default, optical switches) enter through a constant offset calibrated once
    against the full power model.
    """

    def __init__(self, model: EnergyModel, vm: str):
        if vm not in model.specs:
            raise InvalidParameterError(f"Unknown VM {vm}")
        self.vm = vm
        self.model = model.restricted_to([vm])
        self.spec = self.model.specs[vm]
        self.sites = list(model.cloud_sites)
        topology = model.scenario.topology
        node_ids = topology.node_ids
        index = {node: i for i, node in enumerate(node_ids)}

        per_node: dict[int, float] = defaultdict(float)
        for _, _, node, traffic in self.model.units:
            per_node[node] += traffic
        self.demand_nodes = sorted(per_node)
        self.traffic = np.array([per_node[node] for node in self.demand_nodes], dtype=float)

        site_rows = [index[site] for site in self.sites]
        demand_cols = [index[node] for node in self.demand_nodes]
        hops = model.graph.hop_matrix[np.ix_(site_rows, demand_cols)]
        for i, j in zip(*np.nonzero(hops < 0)):
            raise NoPathError(self.sites[i], self.demand_nodes[j])
        self.keys = hops * (max(node_ids) + 1) + np.array(self.sites, dtype=np.int64)[:, None]
        self.site_rows = np.array(site_rows, dtype=np.int64)
        self.demand_cols = np.array(demand_cols, dtype=np.int64)

        arcs = topology.arcs()
        arc_index = {arc: i for i, arc in enumerate(arcs)}
        self.n_arcs = len(arcs)
        paths = [
            [
                [arc_index[arc] for arc in zip(nodes[:-1], nodes[1:])]
                for nodes in (model.graph.node_path(site, node) for node in self.demand_nodes)
            ]
            for site in self.sites
        ]
        self.max_hops = max((len(p) for row in paths for p in row), default=0)
        # padded with a dummy arc index that is dropped after accumulation
        self.path_arcs = np.full(
            (len(self.sites), len(self.demand_nodes), self.max_hops), self.n_arcs, dtype=np.int64
        )
        for i, row in enumerate(paths):
            for j, path in enumerate(row):
                self.path_arcs[i, j, : len(path)] = path

        run = model.run
        literal = run.edfa_mode == "literal"
        distances = np.array([model.graph.distance(m, n) for m, n in arcs], dtype=float)
        self.edfas = np.array([edfa_count(d, topology.span_km, literal) for d in distances], dtype=float)
        self.regens = np.array(
            [regen_count(d, topology.regen_reach_km, literal) for d in distances], dtype=float
        )
        self.incidence = np.zeros((self.n_arcs, len(node_ids)), dtype=np.int64)
        for i, (m, n) in enumerate(arcs):
            self.incidence[i, index[m]] = 1
            self.incidence[i, index[n]] = 1
        self.n_nodes = len(node_ids)
        self._offset: float | None = None

    @property
    def size(self) -> int:
        return len(self.sites)

    def _variable_power(self, subsets: np.ndarray) -> np.ndarray:
        model = self.model
        params = model.params
        run = model.run
        topology = model.scenario.topology
        wavelength_mbps = topology.wavelength_rate_mbps
        batch = subsets.shape[0]
        rows = np.arange(batch)

        if len(self.demand_nodes) == 0:
            return np.zeros(batch)

        choice = self.keys[subsets].argmin(axis=1)
        assign = np.take_along_axis(subsets, choice, axis=1)

        site_traffic = np.zeros((batch, self.size))
        loads = np.zeros((batch, self.n_arcs + 1))
        direct = np.zeros((batch, self.n_arcs + 1))
        for j, traffic in enumerate(self.traffic):
            site_traffic[rows, assign[:, j]] += traffic
            demand_wavelengths = math.ceil(traffic / wavelength_mbps - CEIL_EPS)
            for h in range(self.max_hops):
                arc = self.path_arcs[assign[:, j], j, h]
                loads[rows, arc] += traffic
                direct[rows, arc] += demand_wavelengths
        loads = loads[:, : self.n_arcs]
        if run.grooming == "per-demand":
            wavelengths = direct[:, : self.n_arcs]
        else:
            wavelengths = _ceil(loads / wavelength_mbps)
        fibers = _ceil(wavelengths / topology.wavelengths_per_fiber)

        core = params.core
        core_w = (core.router_port_w + core.transponder_w) * wavelengths.sum(axis=1)
        core_w += core.edfa_w * (fibers * self.edfas).sum(axis=1)
        core_w += core.regen_w * (wavelengths * self.regens).sum(axis=1)
        if run.aggregation_ports == "fractional":
            cloud_ports = site_traffic / wavelength_mbps
        else:
            cloud_ports = _ceil(site_traffic / wavelength_mbps)
        core_w += core.router_port_w * cloud_ports.sum(axis=1)
        if run.optical_switches == "active":
            active = np.zeros((batch, self.n_nodes), dtype=bool)
            active[:, self.demand_cols] = True
            active[:, self.site_rows] |= site_traffic > 0
            active |= ((loads > 0).astype(np.int64) @ self.incidence) > 0
            core_w += core.optical_switch_w * active.sum(axis=1)
        core_w *= params.pue.network

        spec = self.spec
        present = site_traffic > 0
        instances = np.where(present, np.maximum(1.0, _ceil(site_traffic / spec.replica_traffic_mbps)), 0.0)
        if spec.profile is WorkloadProfile.CONSTANT:
            workload = spec.peak_workload_pct * instances
        elif run.linear_mode == "literal":
            workload = (
                site_traffic / spec.replica_traffic_mbps * spec.baseline_pct
                + spec.workload_slope * site_traffic
            )
        else:
            workload = spec.baseline_pct * instances + spec.workload_slope * site_traffic
        compute = params.compute
        servers = _ceil(workload / compute.server_max_workload_pct)
        ports = _ceil(site_traffic / (compute.cloud_port_rate_gbps * GBPS))
        switches = _ceil(site_traffic / (compute.cloud_switch_rate_gbps * GBPS))
        cloud_w = params.pue.cloud * (
            servers * compute.server_w
            + switches * compute.switch_redundancy * compute.cloud_switch_w
            + ports * compute.cloud_port_w
        ).sum(axis=1)
        return core_w + cloud_w

    def offset(self) -> float:
        if self._offset is None:
            first = (self.sites[0],)
            full = self.model.total_power(self.placement_for(first), check=False).total_w
            variable = float(self._variable_power(np.array([[0]], dtype=np.int64))[0])
            self._offset = full - variable
        return self._offset

    def evaluate(self, subsets: np.ndarray) -> np.ndarray:
        """Total power for each row of site positions (indices into ``sites``)."""
        return self._variable_power(subsets) + self.offset()

    def positions(self, sites: tuple[int, ...]) -> list[int]:
        lookup = {site: i for i, site in enumerate(self.sites)}
        return [lookup[site] for site in sites]

    def assignment(self, sites: tuple[int, ...]) -> dict[int, int]:
        """Serving site for every demand node."""
        return {node: self.model.graph.nearest(list(sites), node) for node in self.demand_nodes}

    def placement_for(self, sites: tuple[int, ...]) -> Placement:
        serving = self.assignment(sites)
        return Placement.from_servings(
            [
                ServingEntry(
                    vm=vm,
                    pon=pon,
                    node=node,
                    location=Location.cloud(serving[node]),
                    traffic_mbps=traffic,
                )
                for vm, pon, node, traffic in self.model.units
            ]
        )

    def best_exhaustive(self, k: int, bound: int) -> SubsetResult:
        """Exact best k-subset; combinations come in lexicographic order so the
        first minimum after rounding is the lexicographically smallest tie."""
        if not 1 <= k <= self.size:
            raise InvalidParameterError(f"k must be in 1..{self.size}, got {k}")
        count = math.comb(self.size, k)
        if count > bound:
            raise SearchSpaceTooLargeError(count, bound, f"{k}-site cloud subsets")
        best_power = math.inf
        best_subset: tuple[int, ...] = ()
        combos = itertools.combinations(range(self.size), k)
        while True:
            chunk = list(itertools.islice(combos, SUBSET_BATCH_SIZE))
            if not chunk:
                break
            subsets = np.array(chunk, dtype=np.int64)
            powers = np.round(self.evaluate(subsets), 6)
            i = int(np.argmin(powers))
            if powers[i] < best_power:
                best_power = float(powers[i])
                best_subset = chunk[i]
        return SubsetResult(
            vm=self.vm,
            k=k,
            sites=tuple(self.sites[i] for i in best_subset),
            power_w=best_power,
            evaluated=count,
            mode="exhaustive",
        )

    def best_extension(self, base: tuple[int, ...]) -> SubsetResult:
        """Greedy step: add the site with the lowest resulting power to ``base``."""
        chosen = set(self.positions(base))
        extra = [i for i in range(self.size) if i not in chosen]
        if not extra:
            raise InvalidParameterError("no site left to add")
        subsets = np.array([sorted(chosen | {i}) for i in extra], dtype=np.int64)
        powers = np.round(self.evaluate(subsets), 6)
        i = int(np.argmin(powers))
        return SubsetResult(
            vm=self.vm,
            k=len(base) + 1,
            sites=tuple(self.sites[p] for p in subsets[i]),
            power_w=float(powers[i]),
            evaluated=len(extra),
            mode="greedy",
        )


def enumerate_k_cloud_subsets(
    model: EnergyModel, vm: str, k: int, bound: int | None = None
) -> tuple[SubsetResult, Placement]:
    """Best set of k cloud sites for one VM, each demand served by its nearest site."""
    evaluator = CloudSubsetEvaluator(model, vm)
    result = evaluator.best_exhaustive(k, bound if bound is not None else model.run.subset_bound)
    logger.info(
        f"Best {k}-site cloud subset for {vm}: {list(result.sites)} "
        f"at {result.power_w:.3f} W ({result.evaluated} subsets)"
    )
    return result, evaluator.placement_for(result.sites)
