"""
OVERRIDERADAR - Configuration
Settings come from the environment (optionally a .env file); all have defaults.
"""

import os
import logging
from dotenv import load_dotenv

load_dotenv()

# =============================================================================
# SETTINGS
# =============================================================================

LOG_LEVEL = os.getenv("OVERRIDERADAR_LOG_LEVEL", "WARNING")

# Gauss-Hermite nodes for the correlated binomial profile
QUADRATURE_NODES = int(os.getenv("OVERRIDERADAR_QUADRATURE_NODES", "96"))

# Thread pool size for table / figure grids
REPRO_WORKERS = int(os.getenv("OVERRIDERADAR_REPRO_WORKERS", "4"))

# Monitoring tolerances (see monitoring.MonitoringConfig)
MONITORING_DEFAULTS = {
    "bound_slack": float(os.getenv("OVERRIDERADAR_BOUND_SLACK", "0.0")),
    "imbalance_minority_share": float(os.getenv("OVERRIDERADAR_IMBALANCE_MINORITY_SHARE", "0.25")),
    "imbalance_min_overrides": int(os.getenv("OVERRIDERADAR_IMBALANCE_MIN_OVERRIDES", "20")),
    "ar_drop_tolerance": float(os.getenv("OVERRIDERADAR_AR_DROP_TOLERANCE", "0.02")),
    "min_defaults_for_ar": int(os.getenv("OVERRIDERADAR_MIN_DEFAULTS_FOR_AR", "1")),
}

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level=None):
    """Install the root handler once; later calls only adjust the level"""
    level = (level or LOG_LEVEL).upper()
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)
    return logging.getLogger("overrideradar")
