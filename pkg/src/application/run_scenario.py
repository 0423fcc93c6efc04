import logging
from pathlib import Path

from pydantic import BaseModel

from ..constants import MODELS_DIR, WORKERS
from ..entities.placement import Placement
from ..entities.scenario import Scenario
from ..model.power import EnergyModel, Evaluation, audit_breakdown
from ..solvers.heuristic.online import OnlinePlacer
from ..solvers.oracle import ExactSolver
from .offline_training import load_or_train_offline_table
from .reports import write_run_reports

logger = logging.getLogger(__name__)


class RunOutcome(BaseModel):
    model_config = {"frozen": True}

    scenario: str
    solver: str
    restriction: str
    placement: Placement
    evaluation: Evaluation
    evaluated: int = 0
    audit_problems: tuple[str, ...] = ()

    @property
    def total_w(self) -> float:
        return self.evaluation.breakdown.total_w


def run_scenario(
    scenario: Scenario,
    solver: str | None = None,
    restriction: str | None = None,
    out_dir: Path | None = None,
    persist_table: bool = True,
    models_dir: Path = MODELS_DIR,
    workers: int = WORKERS,
) -> RunOutcome:
    """
    Application layer function to solve one scenario.

    1. Apply solver / restriction overrides to the run section
    2. Solve with the exact oracle or the two-phase heuristic
    3. Re-price the placement, audit power terms and the PON floor
    4. Write the report CSVs when an output directory is given
    """
    updates = {}
    if solver is not None:
        updates["solver"] = solver
    if restriction is not None:
        updates["restriction"] = restriction
    if updates:
        scenario = scenario.with_run(**updates)
    model = EnergyModel(scenario)

    # Solve
    evaluated = 0
    if scenario.run.solver == "oracle":
        result = ExactSolver(model, workers=workers).solve()
        placement = result.placement
        evaluated = result.evaluated
    else:
        table = load_or_train_offline_table(
            model, persist=persist_table, models_dir=models_dir, workers=workers
        )
        placement = OnlinePlacer(model, table).solve().placement

    # Re-price and audit
    evaluation = model.evaluate(placement)
    problems = audit_breakdown(evaluation.breakdown, model.params, seed=scenario.run.seed)
    if abs(evaluation.breakdown.pon_w - model.pon_floor()) > 1e-6:
        problems.append(
            f"PON power {evaluation.breakdown.pon_w} differs from the scenario floor {model.pon_floor()}"
        )
    for problem in problems:
        logger.error(f"Power audit: {problem}")

    logger.info(
        f"{scenario.name} [{scenario.run.solver}, {scenario.run.restriction}]: "
        f"total {evaluation.breakdown.total_w:.3f} W {evaluation.breakdown.by_segment()}"
    )

    if out_dir is not None:
        paths = write_run_reports(
            out_dir, evaluation.breakdown, placement, evaluation.core_state, model.demand
        )
        logger.info(f"Reports written: {[str(p) for p in paths]}")

    return RunOutcome(
        scenario=scenario.name,
        solver=scenario.run.solver,
        restriction=scenario.run.restriction,
        placement=placement,
        evaluation=evaluation,
        evaluated=evaluated,
        audit_problems=tuple(problems),
    )
