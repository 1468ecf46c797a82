"""Experiment configuration, orchestration and result files."""

from lib.evaluation.config import ConfigError, RunSpec, PROFILES, load_config, save_config
from lib.evaluation.experiment import ResultTable, run_experiment
from lib.evaluation.outputs import write_outputs, read_rmse

__all__ = [
    "ConfigError",
    "RunSpec",
    "PROFILES",
    "load_config",
    "save_config",
    "ResultTable",
    "run_experiment",
    "write_outputs",
    "read_rmse",
]
