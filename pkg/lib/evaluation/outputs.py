"""
Result file writers.

Files:
- rmse.csv: step, bound, one rmse_<mode> column per mode
- cdf_<mode>.csv: error_m, cumulative_probability
- diagnostics_<mode>.csv: step, mean_ess, mean_position_spread
- summary.txt: divergence fractions, collapse and degenerate-ESS counts, wall
  time and the config echo (YAML)
- diagnostics mean_ess and mean_position_spread skip steps after a collapse
"""

import logging
from pathlib import Path
from typing import Dict, Optional

import pandas as pd
import yaml

from lib.evaluation.config import RunSpec, spec_entries
from lib.evaluation.experiment import ResultTable

logger = logging.getLogger(__name__)

# 12 significant digits keeps CSV re-parses within 1e-9 of the table.
FLOAT_FORMAT = "%.12g"


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as error:
        raise OSError(f"cannot write {path}: {error}") from error
    logger.info(f"Wrote {path}")
    return path


def summary_dict(table: ResultTable, spec: Optional[RunSpec] = None) -> Dict:
    summary = {
        "realizations": table.realizations,
        "wall_time_s": round(float(table.wall_time), 3),
        "generator_rejection_rate": float(table.rejection_rate),
        "modes": {},
    }
    for mode in table.modes:
        summary["modes"][mode.value] = {
            "divergence_fraction": float(table.divergence_fraction(mode)),
            "diverged": int(table.diverged[mode]),
            "collapsed": int(table.collapsed[mode]),
            "degenerate": int(table.degenerate.get(mode, 0)),
            "final_rmse_m": float(table.rmse[mode][-1]),
            "mean_rmse_m": float(table.rmse[mode].mean()),
        }
    if spec is not None:
        summary["config"] = spec_entries(spec)
    return summary


def write_outputs(table: ResultTable, output_dir, spec: Optional[RunSpec] = None) -> Dict[str, Path]:
    """
    Write all result files of an experiment.

    Args:
        table: Experiment results
        output_dir: Destination directory (created if missing)
        spec: Run specification echoed into summary.txt

    Returns:
        Mapping of file name to written path
    """
    output_dir = Path(output_dir)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as error:
        raise OSError(f"cannot create output directory {output_dir}: {error}") from error

    written = {"rmse.csv": _write_frame(table.rmse_frame(), output_dir / "rmse.csv")}
    for mode in table.modes:
        name = f"cdf_{mode.value}.csv"
        written[name] = _write_frame(table.cdf_frame(mode), output_dir / name)
        name = f"diagnostics_{mode.value}.csv"
        written[name] = _write_frame(table.diagnostics_frame(mode), output_dir / name)

    summary_path = output_dir / "summary.txt"
    try:
        with open(summary_path, "w") as f:
            yaml.safe_dump(summary_dict(table, spec), f, sort_keys=False)
    except OSError as error:
        raise OSError(f"cannot write {summary_path}: {error}") from error
    logger.info(f"Wrote {summary_path}")
    written["summary.txt"] = summary_path
    return written


def read_rmse(path) -> pd.DataFrame:
    """Load an rmse.csv written by write_outputs."""
    return pd.read_csv(path)
