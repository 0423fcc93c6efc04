import os
from pathlib import Path

PROJECT_ROOT_DIR = Path(__file__).parent.parent.resolve()
DATA_DIR = PROJECT_ROOT_DIR / "data"
TOPOLOGIES_DIR = DATA_DIR / "topologies"
SCENARIOS_DIR = DATA_DIR / "scenarios"
ATT_TOPOLOGY_PATH = TOPOLOGIES_DIR / "att.yaml"

REPORTS_DIR = Path(os.getenv("FOGPLACE_REPORTS_DIR", str(DATA_DIR / "reports")))
MODELS_DIR = Path(os.getenv("FOGPLACE_MODELS_DIR", str(DATA_DIR / "models")))

POWER_BREAKDOWN_FILE = "power_breakdown.csv"
SERVINGS_FILE = "placement_servings.csv"
REPLICAS_FILE = "placement_replicas.csv"
CORE_STATE_FILE = "core_state.csv"
DEMAND_FILE = "demand_matrix.csv"
SUMMARY_FILE = "comparison_summary.csv"
SWEEP_FILE = "single_vm_sweep.csv"
VIOLATIONS_FILE = "violations.csv"
OFFLINE_TABLE_FILE = "offline_table.json"
OFFLINE_METADATA_FILE = "offline_metadata.json"

# Process settings
WORKERS = int(os.getenv("FOGPLACE_WORKERS", "1"))
LOG_LEVEL = os.getenv("FOGPLACE_LOG_LEVEL", "INFO")

# Search bounds
DEFAULT_ENUMERATION_BOUND = 10_000_000
DEFAULT_SUBSET_BOUND = 1_000_000
SUBSET_BATCH_SIZE = 4096

# Floating tolerance used before taking ceilings of equipment counts
CEIL_EPS = 1e-9

CSV_FLOAT_FORMAT = "%.6f"
