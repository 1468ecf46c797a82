"""
Monte Carlo experiment across estimator modes.

Every realization draws one measurement record and runs all requested modes
on it, so mode contrasts are paired. Realization r seeds its streams from
SeedSequence(base_seed + r): the first child drives the generator, the
remaining children drive the modes in a fixed order, independent of which
modes are requested.
"""

import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from lib.bounds.pcrlb import pcrlb_recursion
from lib.data.schemas import MeasurementSet
from lib.evaluation.config import ALL_MODES, RunSpec
from lib.likelihood.association import EstimatorMode
from lib.simulation.amplitude import AmplitudeModel
from lib.simulation.measurements import MeasurementGenerator
from lib.simulation.trajectory import GroundTruth, build_trajectory
from lib.tracking.tracker import ParticleTracker, TrackerOutput
from lib.utils.failure_modes import EnsembleCollapseError, FailureModeHandler

logger = logging.getLogger(__name__)


@dataclass
class RealizationResult:
    """Per-mode traces of one realization."""

    index: int
    errors: Dict[EstimatorMode, np.ndarray]
    ess: Dict[EstimatorMode, np.ndarray]
    spread: Dict[EstimatorMode, np.ndarray]
    failures: Dict[EstimatorMode, Dict]
    rejection_rate: float


@dataclass(eq=False)
class ResultTable:
    """Aggregated experiment results."""

    steps: np.ndarray                                   # (N,) 1-based
    bound: np.ndarray                                   # (N,) meters
    errors: Dict[EstimatorMode, np.ndarray]             # (R, N) position errors
    mean_ess: Dict[EstimatorMode, np.ndarray]           # (N,)
    mean_spread: Dict[EstimatorMode, np.ndarray]        # (N,)
    diverged: Dict[EstimatorMode, int]
    collapsed: Dict[EstimatorMode, int]
    degenerate: Dict[EstimatorMode, int] = field(default_factory=dict)
    rejection_rate: float = 0.0
    wall_time: float = field(default=0.0, compare=False)

    @property
    def modes(self) -> List[EstimatorMode]:
        return list(self.errors)

    @property
    def realizations(self) -> int:
        return next(iter(self.errors.values())).shape[0]

    @property
    def rmse(self) -> Dict[EstimatorMode, np.ndarray]:
        """sqrt of the mean squared position error over realizations, per step."""
        return {mode: np.sqrt(np.mean(errors ** 2, axis=0)) for mode, errors in self.errors.items()}

    def cdf(self, mode: EstimatorMode) -> Tuple[np.ndarray, np.ndarray]:
        """Sorted errors pooled over steps and realizations, with their probabilities."""
        samples = np.sort(self.errors[EstimatorMode.parse(mode)].ravel())
        return samples, np.arange(1, len(samples) + 1) / len(samples)

    def divergence_fraction(self, mode: EstimatorMode) -> float:
        return self.diverged[EstimatorMode.parse(mode)] / self.realizations

    def rmse_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"step": self.steps, "bound": self.bound})
        for mode, values in self.rmse.items():
            frame[f"rmse_{mode.value}"] = values
        return frame

    def cdf_frame(self, mode: EstimatorMode) -> pd.DataFrame:
        samples, probabilities = self.cdf(mode)
        return pd.DataFrame({"error_m": samples, "cumulative_probability": probabilities})

    def diagnostics_frame(self, mode: EstimatorMode) -> pd.DataFrame:
        mode = EstimatorMode.parse(mode)
        return pd.DataFrame({
            "step": self.steps,
            "mean_ess": self.mean_ess[mode],
            "mean_position_spread": self.mean_spread[mode],
        })


def realization_record(
    spec: RunSpec,
    truth: GroundTruth,
    amplitude: AmplitudeModel,
    index: int
) -> Tuple[List[MeasurementSet], float, List[np.random.SeedSequence]]:
    """
    Measurement record of one realization.

    Returns:
        (record, generator rejection rate, per-mode seed sequences in ALL_MODES order)
    """
    children = np.random.SeedSequence(spec.base_seed + index).spawn(1 + len(ALL_MODES))
    generator = MeasurementGenerator(spec.scenario, amplitude, np.random.default_rng(children[0]))
    record = generator.generate_record(truth)
    return record, generator.rejection_rate, children[1:]


def _padded(output: TrackerOutput, num_steps: int, start: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Extend a truncated output by holding the last estimate; ESS and spread become NaN."""
    positions = output.positions
    ess = output.ess
    spread = output.position_spread
    missing = num_steps - len(positions)
    if missing > 0:
        last = positions[-1] if len(positions) else start
        positions = np.vstack([positions.reshape(-1, 2), np.tile(last, (missing, 1))])
        ess = np.concatenate([ess, np.full(missing, np.nan)])
        spread = np.concatenate([spread, np.full(missing, np.nan)])
    return positions, ess, spread


def _step_mean(traces: List[np.ndarray]) -> np.ndarray:
    """Per-step mean over realizations, skipping steps after a collapse (NaN)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=RuntimeWarning)
        return np.nanmean(np.vstack(traces), axis=0)


def run_realization(
    spec: RunSpec,
    truth: GroundTruth,
    amplitude: AmplitudeModel,
    index: int
) -> RealizationResult:
    """
    Run every requested mode on one shared measurement record.

    Args:
        spec: Run specification
        truth: Ground truth trajectory
        amplitude: Calibrated amplitude model
        index: Realization index r

    Returns:
        Per-mode position errors, ESS, spread and failure summary
    """
    record, rejection_rate, mode_seeds = realization_record(spec, truth, amplitude, index)
    tracker = ParticleTracker(spec.scenario, spec.filter)
    handler = FailureModeHandler(spec.filter.divergence_threshold_m)
    num_steps = len(truth)

    result = RealizationResult(
        index=index, errors={}, ess={}, spread={}, failures={}, rejection_rate=rejection_rate
    )
    for mode in spec.modes:
        rng = np.random.default_rng(mode_seeds[ALL_MODES.index(mode)])
        collapsed_at: Optional[int] = None
        try:
            output = tracker.run(record, mode, truth.initial_state, truth.initial_orientation, rng)
        except EnsembleCollapseError as error:
            output = error.partial_output
            collapsed_at = error.step

        positions, ess, spread = _padded(output, num_steps, truth.initial_state.position)
        errors = np.linalg.norm(positions - truth.positions, axis=1)
        failure = handler.classify(errors, ess, spec.filter.num_particles, collapsed_at)
        if failure["diverged"]:
            where = f" from step {failure['lost_at']}" if failure["lost_at"] else ""
            logger.warning(
                f"Realization {index} {mode.value}: diverged ({', '.join(failure['signals'])}{where})"
            )
        elif failure["degenerate"]:
            logger.warning(f"Realization {index} {mode.value}: effective sample size stayed degenerate")

        result.errors[mode] = errors
        result.ess[mode] = ess
        result.spread[mode] = spread
        result.failures[mode] = failure

    logger.info(
        f"Realization {index} done: "
        + ", ".join(f"{m.value} mean error {result.errors[m].mean():.3f} m" for m in spec.modes)
    )
    return result


def run_experiment(spec: RunSpec) -> ResultTable:
    """
    Monte Carlo evaluation of every requested mode.

    Args:
        spec: Run specification

    Returns:
        Result table with RMSE, CDF samples, bound and divergence counts
    """
    start = time.perf_counter()
    truth = build_trajectory(spec.scenario)
    amplitude = AmplitudeModel.calibrated(spec.scenario, truth)
    bound = pcrlb_recursion(truth, spec.scenario, spec.filter, amplitude).position_bound

    logger.info(
        f"Running {spec.realizations} realizations of {[m.value for m in spec.modes]} "
        f"with {spec.filter.num_particles} particles ({spec.workers} workers)"
    )
    slots: List[Optional[RealizationResult]] = [None] * spec.realizations
    indices = range(spec.realizations)
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as executor:
            results = executor.map(run_realization, repeat(spec), repeat(truth), repeat(amplitude), indices)
            for result in results:
                slots[result.index] = result
    else:
        for index in indices:
            slots[index] = run_realization(spec, truth, amplitude, index)

    table = ResultTable(
        steps=np.arange(1, len(truth) + 1),
        bound=bound,
        errors={m: np.vstack([s.errors[m] for s in slots]) for m in spec.modes},
        mean_ess={m: _step_mean([s.ess[m] for s in slots]) for m in spec.modes},
        mean_spread={m: _step_mean([s.spread[m] for s in slots]) for m in spec.modes},
        diverged={m: sum(s.failures[m]["diverged"] for s in slots) for m in spec.modes},
        collapsed={m: sum(s.failures[m]["collapsed"] for s in slots) for m in spec.modes},
        degenerate={m: sum(s.failures[m]["degenerate"] for s in slots) for m in spec.modes},
        rejection_rate=float(np.mean([s.rejection_rate for s in slots])),
    )
    table.wall_time = time.perf_counter() - start

    for mode in spec.modes:
        logger.info(
            f"{mode.value}: final RMSE {table.rmse[mode][-1]:.4f} m, "
            f"divergence {table.divergence_fraction(mode):.1%}"
        )
    return table
