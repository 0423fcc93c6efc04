import json
import logging
from datetime import datetime
from pathlib import Path

from pydantic import ValidationError

from ..constants import MODELS_DIR, OFFLINE_METADATA_FILE, OFFLINE_TABLE_FILE, WORKERS
from ..entities.offline import OFFLINE_SCHEMA_VERSION, OfflineTable
from ..model.power import EnergyModel
from ..solvers.heuristic.offline import offline_phase

logger = logging.getLogger(__name__)


class OfflineTrainingApp:
    def __init__(self, model: EnergyModel, models_dir: Path = MODELS_DIR, workers: int = WORKERS):
        self.model = model
        self.workers = workers
        scenario = model.scenario
        self.model_dir = Path(models_dir) / scenario.name / scenario.run.restriction
        self.table_path = self.model_dir / OFFLINE_TABLE_FILE
        self.metadata_path = self.model_dir / OFFLINE_METADATA_FILE

    def train(self, persist: bool = True) -> OfflineTable:
        """Run the offline phase and store the table with its metadata."""
        started = datetime.now()
        logger.info(f"Starting offline phase for {self.model.scenario.name}...")
        table = offline_phase(self.model, workers=self.workers)
        elapsed = (datetime.now() - started).total_seconds()

        if persist:
            try:
                self.model_dir.mkdir(parents=True, exist_ok=True)
                self.table_path.write_text(table.model_dump_json(indent=2) + "\n", encoding="utf-8")
                metadata = {
                    "training_time": started.isoformat(timespec="seconds"),
                    "elapsed_seconds": round(elapsed, 3),
                    "scenario_fingerprint": table.scenario_fingerprint,
                    "schema_version": table.schema_version,
                    "restriction": table.restriction,
                    "num_types": len(table.entries),
                    "subset_modes": sorted(
                        {
                            candidate.recipe.subset_mode
                            for entry in table.entries
                            for candidate in entry.candidates
                            if candidate.recipe.subset_mode
                        }
                    ),
                }
                self.metadata_path.write_text(json.dumps(metadata, indent=2) + "\n", encoding="utf-8")
                logger.info(f"Offline table saved to {self.table_path}")
                logger.info(f"Training metadata: {metadata}")
            except OSError as e:
                logger.error(f"Error saving offline table: {e}")
        return table

    def get_training_metadata(self) -> dict:
        """Get training metadata if exists"""
        try:
            if self.metadata_path.exists():
                return json.loads(self.metadata_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error loading metadata: {e}")
        return {}

    def should_retrain(self) -> bool:
        metadata = self.get_training_metadata()
        if metadata.get("schema_version") != OFFLINE_SCHEMA_VERSION:
            return True
        return metadata.get("scenario_fingerprint") != self.model.scenario.fingerprint()

    def load_table(self) -> OfflineTable | None:
        try:
            return OfflineTable.model_validate_json(self.table_path.read_text(encoding="utf-8"))
        except (OSError, ValidationError) as e:
            logger.error(f"Error loading offline table: {e}")
            return None


def load_or_train_offline_table(
    model: EnergyModel,
    force_retrain: bool = False,
    persist: bool = True,
    models_dir: Path = MODELS_DIR,
    workers: int = WORKERS,
) -> OfflineTable:
    """Reuse the stored table when it was built for this exact scenario, else retrain."""
    app = OfflineTrainingApp(model, models_dir=models_dir, workers=workers)
    if persist and not force_retrain and not app.should_retrain():
        table = app.load_table()
        if table is not None and table.scenario_fingerprint == model.scenario.fingerprint():
            logger.info("Offline table is up to date, skipping training")
            return table
    return app.train(persist=persist)
