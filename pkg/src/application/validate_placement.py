import logging
from pathlib import Path

from ..entities.placement import Violation
from ..entities.scenario import Scenario
from ..loaders import PlacementCsvLoader
from ..model.power import EnergyModel
from .reports import write_violations

logger = logging.getLogger(__name__)


def validate_placement(
    scenario: Scenario,
    servings_path: Path,
    replicas_path: Path | None = None,
    out_dir: Path | None = None,
) -> list[Violation]:
    """
    Application layer function to check a placement file against a scenario.

    1. Load the serving rows (and replicas, when given)
    2. Validate against the scenario's demand and VM catalog
    3. Write the violations CSV when an output directory is given
    """
    placement = PlacementCsvLoader().load(file_path=servings_path, replicas_path=replicas_path)
    model = EnergyModel(scenario)
    violations = model.validate(placement)
    if violations:
        logger.warning(f"{servings_path}: {len(violations)} violation(s)")
    else:
        logger.info(f"{servings_path}: placement is feasible")

    if out_dir is not None:
        write_violations(out_dir, violations)
    return violations
