"""
Failure mode detection for tracking runs.

Handles:
- Ensemble collapse (every particle weight vanishes)
- Track loss (estimate far from the truth)
- Weight degeneracy (persistently low effective sample size)
"""

from typing import Dict, List, Optional

import numpy as np


class EnsembleCollapseError(RuntimeError):
    """All particles received zero likelihood."""

    def __init__(self, step: int, partial_output=None):
        """
        Args:
            step: 1-based step at which the collapse happened
            partial_output: Tracker output for the steps before the collapse
        """
        super().__init__(f"ensemble collapse at step {step}")
        self.step = step
        self.partial_output = partial_output


class TrackLossDetector:
    """Detects realizations whose estimate wandered off the truth."""

    def __init__(self, threshold_m: float = 1.0):
        """
        Initialize track loss detector.

        Args:
            threshold_m: Position error above which the track counts as lost
        """
        self.threshold_m = threshold_m

    def detect(self, position_errors: np.ndarray) -> tuple[bool, Optional[int]]:
        """
        Detect track loss.

        Args:
            position_errors: Per-step position error (m)

        Returns:
            (is_lost, first 1-based step above threshold) tuple
        """
        above = np.flatnonzero(np.asarray(position_errors) > self.threshold_m)
        if len(above) == 0:
            return False, None
        return True, int(above[0]) + 1


class DegeneracyMonitor:
    """Flags runs whose effective sample size stays low."""

    def __init__(self, min_fraction: float = 0.01, max_run: int = 10):
        """
        Args:
            min_fraction: ESS fraction of I regarded as degenerate
            max_run: Consecutive degenerate steps tolerated
        """
        self.min_fraction = min_fraction
        self.max_run = max_run

    def detect(self, ess: np.ndarray, count: int) -> bool:
        degenerate = np.asarray(ess) < self.min_fraction * count
        run = 0
        for flag in degenerate:
            run = run + 1 if flag else 0
            if run > self.max_run:
                return True
        return False


class FailureModeHandler:
    """Main handler for all failure modes of one realization."""

    def __init__(self, divergence_threshold_m: float = 1.0):
        """Initialize failure mode handler."""
        self.track_loss_detector = TrackLossDetector(divergence_threshold_m)
        self.degeneracy_monitor = DegeneracyMonitor()

    def classify(
        self,
        position_errors: np.ndarray,
        ess: np.ndarray,
        count: int,
        collapsed_at: Optional[int] = None
    ) -> Dict:
        """
        Summarize the failure modes of one run.

        Args:
            position_errors: Per-step position errors
            ess: Per-step effective sample size
            count: Number of particles
            collapsed_at: Step of an ensemble collapse, if any

        Returns:
            Dict with "diverged", "collapsed", "lost_at" and "degenerate"
        """
        lost, lost_at = self.track_loss_detector.detect(position_errors)
        signals: List[str] = []
        if collapsed_at is not None:
            signals.append("collapse")
        if lost:
            signals.append("track_loss")
        return {
            "diverged": bool(signals),
            "collapsed": collapsed_at is not None,
            "lost_at": lost_at,
            "degenerate": self.degeneracy_monitor.detect(ess, count),
            "signals": signals,
        }
