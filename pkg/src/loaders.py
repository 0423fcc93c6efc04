import logging
from pathlib import Path

import pandas as pd
import yaml
from pydantic import ValidationError

from .base import BaseScenarioLoader
from .entities.placement import Location, LocationKind, Placement, Replica, ServingEntry
from .entities.scenario import Scenario
from .entities.topology import CoreTopology
from .errors import InvalidScenarioError

logger = logging.getLogger(__name__)


def _describe(error: ValidationError) -> str:
    lines = []
    for issue in error.errors():
        path = ".".join(str(part) for part in issue["loc"]) or "<root>"
        lines.append(f"{path}: {issue['msg']}")
    return "; ".join(lines)


def _read_yaml(file_path: Path) -> dict:
    try:
        with open(file_path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise InvalidScenarioError(f"{file_path}: file not found")
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" line {mark.line + 1}" if mark is not None else ""
        raise InvalidScenarioError(f"{file_path}{where}: {getattr(e, 'problem', e)}")
    if not isinstance(data, dict):
        raise InvalidScenarioError(f"{file_path}: expected a mapping at the top level")
    return data


def load_topology(file_path: str | Path) -> CoreTopology:
    file_path = Path(file_path)
    try:
        return CoreTopology.model_validate(_read_yaml(file_path))
    except ValidationError as e:
        raise InvalidScenarioError(f"{file_path}: {_describe(e)}")


def dump_topology(topology: CoreTopology) -> str:
    return yaml.safe_dump(
        topology.model_dump(mode="json"), sort_keys=False, default_flow_style=False
    )


class YamlScenarioLoader(BaseScenarioLoader):
    def load(self, *, file_path: str | Path) -> Scenario:
        """
        Load a scenario file, resolve a referenced topology file relative to it,
        and return the validated Scenario entity.
        """
        file_path = Path(file_path)
        data = _read_yaml(file_path)
        topology = data.get("topology")
        if isinstance(topology, dict) and set(topology) == {"file"}:
            data["topology"] = _read_yaml(file_path.parent / topology["file"])
        data.setdefault("name", file_path.stem)
        try:
            scenario = Scenario.model_validate(data)
        except ValidationError as e:
            raise InvalidScenarioError(f"{file_path}: {_describe(e)}")
        logger.info(
            f"Loaded scenario {scenario.name}: {len(scenario.topology.nodes)} nodes, "
            f"{len(scenario.topology.links)} links, restriction {scenario.run.restriction}"
        )
        return scenario


def _location(kind: str, node, pon) -> Location:
    kind = LocationKind(kind)
    if kind is LocationKind.ACCESS_FOG:
        return Location.access_fog(pon=int(pon), node=int(node))
    return Location(kind=kind, node=int(node))


def _instances(value) -> int | None:
    if value is None or pd.isna(value):
        return None
    return int(value)


class PlacementCsvLoader:
    def load(self, *, file_path: str | Path, replicas_path: str | Path | None = None) -> Placement:
        """
        Read serving rows (vm, pon, node, location_kind, location_node,
        [location_pon], traffic_mbps) and, optionally, the replicas CSV with
        an optional instances column.
        Without a replicas file the replica set is derived from the servings.
        """
        try:
            df = pd.read_csv(file_path)
            servings = []
            for row in df.itertuples(index=False):
                location_pon = getattr(row, "location_pon", None)
                if location_pon is None or pd.isna(location_pon):
                    location_pon = row.pon
                servings.append(
                    ServingEntry(
                        vm=str(row.vm),
                        pon=int(row.pon),
                        node=int(row.node),
                        location=_location(row.location_kind, row.location_node, location_pon),
                        traffic_mbps=float(row.traffic_mbps),
                    )
                )
            if replicas_path is None:
                return Placement.from_servings(servings)
            replicas_df = pd.read_csv(replicas_path)
            replicas = [
                Replica(
                    vm=str(row.vm),
                    location=_location(row.location_kind, row.location_node, row.location_pon),
                    instances=_instances(getattr(row, "instances", None)),
                )
                for row in replicas_df.itertuples(index=False)
            ]
        except (FileNotFoundError, KeyError, AttributeError, ValueError) as e:
            raise InvalidScenarioError(f"{file_path}: malformed placement file ({e})")
        return Placement(
            servings=tuple(sorted(servings, key=ServingEntry.sort_key)),
            replicas=tuple(sorted(replicas, key=Replica.sort_key)),
        )
