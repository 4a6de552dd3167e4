from .config import PROFILES, SEED_ENV, ConfigError, ExperimentConfig, from_mapping, load_config
from .data import InfeasiblePacking, generate_synthetic_principals, split_holdout
from .experiment import ExperimentResult, World, build_world, derive_seed, run_experiment, run_pair
from .metrics import Cell, CoverageMatrix, MetricsReport, compute_metrics
from .report import ReportIOError, export_report, load_report, recompute_metrics
