import importlib.util
from pathlib import Path

import pandas as pd
import pytest

SCRIPT = Path(__file__).resolve().parents[2] / "scripts" / "simulate.py"


@pytest.fixture(scope="module")
def simulate():
    spec = importlib.util.spec_from_file_location("simulate", SCRIPT)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def _config(tmp_path, text):
    path = tmp_path / "run.conf"
    path.write_text(text)
    return path


def test_successful_run(simulate, tmp_path, capsys):
    config = _config(tmp_path, "num_steps = 8\nolos_window = 3, 5\n")
    out = tmp_path / "out"
    code = simulate.main([
        "--config", str(config), "--out", str(out), "--modes", "a-pda,ap-eopda",
        "--realizations", "1", "--particles", "100", "--seed", "3", "--log-level", "WARNING",
    ])
    assert code == 0
    frame = pd.read_csv(out / "rmse.csv")
    assert list(frame.columns) == ["step", "bound", "rmse_a-pda", "rmse_ap-eopda"]
    assert len(frame) == 8
    assert (out / "cdf_ap-eopda.csv").exists()
    assert "Realizations: 1" in capsys.readouterr().out


def test_flags_override_profile(simulate, tmp_path):
    args = simulate.build_parser().parse_args(["--profile", "desk", "--particles", "10"])
    spec = simulate.resolve_spec(args)
    assert spec.realizations == 50
    assert spec.filter.num_particles == 10


def test_config_values_win_over_profile(simulate, tmp_path):
    config = _config(tmp_path, "realizations = 7\nparticles = 123\n")
    args = simulate.build_parser().parse_args(["--config", str(config), "--profile", "desk"])
    spec = simulate.resolve_spec(args)
    assert spec.profile == "desk"
    assert spec.realizations == 7
    assert spec.filter.num_particles == 123


def test_profile_fills_keys_the_config_leaves_unset(simulate, tmp_path):
    config = _config(tmp_path, "profile = full\nrealizations = 7\n")
    args = simulate.build_parser().parse_args(["--config", str(config), "--profile", "desk"])
    spec = simulate.resolve_spec(args)
    assert spec.realizations == 7
    assert spec.filter.num_particles == 2000


def test_invalid_config_exit_code(simulate, tmp_path):
    config = _config(tmp_path, "gamma = -1\n")
    assert simulate.main(["--config", str(config), "--out", str(tmp_path)]) == 2


def test_invalid_mode_exit_code(simulate, tmp_path):
    assert simulate.main(["--modes", "kalman", "--out", str(tmp_path)]) == 2


def test_missing_config_exit_code(simulate, tmp_path):
    assert simulate.main(["--config", str(tmp_path / "absent.conf")]) == 1
