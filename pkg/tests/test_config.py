import json

import pytest

from src.core import config
from src.core.errors import DataFileError, InvalidArgumentError


def _write(tmp_path, payload, name="user.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_preset_defaults(paper_config):
    assert paper_config.nucleus == "13C"
    assert paper_config.nuclei == {"1H": 285.3, "13C": 71.3}
    assert paper_config.line.n_points == 201
    assert paper_config.lattice.mw_ghz == 188.0
    assert paper_config.lattice.gamma_exponent == 9.0
    assert paper_config.thresholds.localization == 0.8
    assert paper_config.sweep.c_grid == "10:100:19"


def test_user_file_is_deep_merged(tmp_path):
    cfg = config.load_run_config(_write(tmp_path, {"lattice": {"mw_ghz": 188.1}, "thresholds": {"localization": 0.7}}))
    assert cfg.lattice.mw_ghz == 188.1
    assert cfg.lattice.t1_ref_s == 1.0
    assert cfg.thresholds.localization == 0.7
    assert cfg.thresholds.tanh_residual == 0.1


def test_nucleus_table_is_replaced(tmp_path):
    cfg = config.load_run_config(_write(tmp_path, {"nuclei": {"13C": 75.0}}))
    assert cfg.nuclei == {"13C": 75.0}


def test_overrides_apply_last(tmp_path):
    cfg = config.load_run_config(_write(tmp_path, {"nucleus": "1H"}), overrides={"nucleus": "13C"})
    assert cfg.nucleus == "13C"


@pytest.mark.parametrize(
    "payload",
    [
        {"lattice": {"unknown_knob": 1}},
        {"surprise": True},
        {"line": {"n_points": 200}},
        {"line": {"width_ghz": -0.1}},
        {"nuclei": {"13C": -1.0}},
        {"analysis": {"baseline_degree": 9}},
    ],
)
def test_invalid_configs_are_rejected(tmp_path, payload):
    with pytest.raises(InvalidArgumentError):
        config.load_run_config(_write(tmp_path, payload))


def test_missing_or_corrupt_file(tmp_path):
    with pytest.raises(DataFileError):
        config.load_run_config(str(tmp_path / "absent.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(DataFileError):
        config.load_run_config(str(broken))


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("TMDNP_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("TMDNP_WORKERS", "3")
    settings = config.Settings()
    assert settings.log_level == "DEBUG"
    assert settings.workers == 3
    assert settings.preset_path == config.PAPER_PRESET
