import numpy as np

from lib.utils.failure_modes import DegeneracyMonitor, FailureModeHandler, TrackLossDetector


def test_track_loss_first_step():
    lost, step = TrackLossDetector(1.0).detect(np.array([0.1, 0.5, 1.2, 0.3]))
    assert lost and step == 3
    assert TrackLossDetector(1.0).detect(np.array([0.1, 1.0])) == (False, None)


def test_degeneracy_needs_a_long_run():
    monitor = DegeneracyMonitor(min_fraction=0.01, max_run=3)
    assert not monitor.detect(np.array([5, 5, 5, 500, 5, 5]), count=1000)
    assert monitor.detect(np.array([5, 5, 5, 5, 500]), count=1000)


def test_classify():
    handler = FailureModeHandler(divergence_threshold_m=1.0)
    healthy = handler.classify(np.full(5, 0.1), np.full(5, 100.0), count=200)
    assert not healthy["diverged"] and healthy["signals"] == []

    collapsed = handler.classify(np.full(5, 0.1), np.full(5, 100.0), count=200, collapsed_at=4)
    assert collapsed["diverged"] and collapsed["collapsed"]
    assert collapsed["signals"] == ["collapse"]

    lost = handler.classify(np.array([0.1, 2.0, 0.1]), np.full(3, 100.0), count=200)
    assert lost["diverged"] and lost["lost_at"] == 2


def test_classify_reports_degenerate_ess():
    handler = FailureModeHandler(divergence_threshold_m=1.0)
    stuck = handler.classify(np.full(20, 0.1), np.full(20, 5.0), count=2000)
    assert stuck["degenerate"] and not stuck["diverged"]
    # Steps after a collapse carry NaN ESS and do not count as degenerate.
    padded = handler.classify(np.full(20, 0.1), np.r_[np.full(5, 500.0), np.full(15, np.nan)], count=2000)
    assert not padded["degenerate"]
