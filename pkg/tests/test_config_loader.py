"""
配置加载、校验与哈希测试
"""

import copy
import json
import math
from pathlib import Path

import numpy as np
import pytest
import yaml

from src.core.exceptions import ConfigError
from src.utils.config_loader import ConfigLoader
from src.utils.validator import ConfigValidator

CONFIG_DIR = Path(__file__).parent.parent / "config"
TEST_CONFIG = CONFIG_DIR / "test.yaml"

MINIMAL = {
    "ion": {"species": "Yb171", "count": 2},
    "trap": {"rf_frequency": "50 MHz", "a": [-0.04, 0.0, 0.04], "q": [0.3, -0.3, 0.0]},
    "laser": {"wavelength": "355 nm", "direction": [0.0, 0.0, 1.0], "detuning": "6.5 MHz",
              "gate_time": "2.55 us", "segments": 4, "ions": [0, 1]},
    "thermal": {"temperature": "0.5 mK"},
}


def _config(**sections):
    data = copy.deepcopy(MINIMAL)
    for name, section in sections.items():
        if section is None:
            data.pop(name, None)
        else:
            data[name] = section
    return data


class TestLoading:
    """文件加载与模型构造"""

    @pytest.mark.parametrize("name", ["desk.yaml", "large.yaml", "test.yaml"])
    def test_shipped_configs_are_valid(self, name):
        config = ConfigLoader(CONFIG_DIR / name, apply_env=False)
        assert config.validate_config()["errors"] == []

    def test_physical_models(self, test_config):
        drive = test_config.trap_drive()
        assert drive.rf_frequency == pytest.approx(2.0 * math.pi * 50e6)
        np.testing.assert_array_equal(np.diag(drive.A), [-0.04, 0.0, 0.04])
        laser = test_config.laser_config()
        assert laser.delta_k == pytest.approx(4.0 * math.pi / 355e-9)
        assert laser.detuning == pytest.approx(2.0 * math.pi * 6.5e6)
        assert laser.gate_time == pytest.approx(2.55e-6)
        assert laser.ions == (0, 1)
        assert laser.include_equilibrium_phase is False
        assert test_config.ion_species().label == "171Yb+"

    def test_json_config(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(MINIMAL), encoding="utf-8")
        assert ConfigLoader(path, apply_env=False).n_ions == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ConfigLoader(tmp_path / "absent.yaml")

    def test_unsupported_extension(self, tmp_path):
        path = tmp_path / "config.ini"
        path.write_text("[ion]\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            ConfigLoader(path)

    def test_default_solver_settings(self):
        config = ConfigLoader(data=MINIMAL, apply_env=False)
        assert config.t0_points() == 32
        assert config.segment_counts() == [1, 2, 4, 8, 16]
        assert config.detuning_grid() is None
        excitations = config.excitations()
        assert [e.mode_index for e in excitations] == [0, 5]
        drift = config.drift_settings()
        assert len(drift["detuning"]) == 9
        assert drift["detuning"][-1] == pytest.approx(2.0 * math.pi * 2e3)
        assert drift["gate_time"][0] == pytest.approx(-4e-9)
        assert drift["samples"] == 200

    def test_detuning_grid_from_config(self, test_config):
        grid = test_config.detuning_grid()
        np.testing.assert_allclose(grid, 2.0 * math.pi * np.array([6.4e6, 6.5e6, 6.6e6]), rtol=1e-12)

    def test_robust_settings_parse_units(self, test_config):
        settings = test_config.robust_settings()
        assert settings.starts == 2
        assert settings.sensitivity_step == pytest.approx(2.0 * math.pi * 1e3)


class TestValidation:
    """结构与约束校验"""

    def test_unknown_key_is_error(self):
        data = _config()
        data["laser"]["colour"] = "blue"
        with pytest.raises(ConfigError) as excinfo:
            ConfigLoader(data=data, apply_env=False)
        assert "colour" in excinfo.value.message

    def test_unknown_section_is_error(self):
        data = _config(plots={"dpi": 300})
        with pytest.raises(ConfigError):
            ConfigLoader(data=data, apply_env=False)

    def test_missing_required_section(self):
        with pytest.raises(ConfigError):
            ConfigLoader(data=_config(thermal=None), apply_env=False)

    def test_wrong_unit(self):
        data = _config()
        data["laser"]["gate_time"] = "2.55 MHz"
        result = ConfigValidator().validate(data)
        assert any(message.startswith("laser.gate_time") for message in result["errors"])

    def test_wavelength_and_delta_k_exclusive(self):
        data = _config()
        data["laser"]["delta_k"] = "3.5e7 1/m"
        assert ConfigValidator().validate(data)["errors"]

    def test_diagonal_and_matrix_exclusive(self):
        data = _config()
        data["trap"]["A"] = np.diag([0.1, 0.1, 0.1]).tolist()
        data["trap"]["Q"] = np.zeros((3, 3)).tolist()
        assert ConfigValidator().validate(data)["errors"]

    def test_ion_index_out_of_range(self):
        data = _config()
        data["laser"]["ions"] = [0, 2]
        result = ConfigValidator().validate(data)
        assert any("laser.ions" in message for message in result["errors"])

    def test_large_crystal_warns(self):
        data = _config(ion={"species": "Yb171", "count": 100})
        result = ConfigValidator().validate(data)
        assert result["errors"] == []
        assert result["warnings"]


class TestOverridesAndHash:
    """覆盖顺序与配置哈希"""

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("PAULTRAP_PRECISION", "1.0e-6")
        monkeypatch.setenv("PAULTRAP_LOG_LEVEL", "debug")
        config = ConfigLoader(data=MINIMAL)
        assert config.get("truncation.precision") == pytest.approx(1e-6)
        assert config.log_level == "DEBUG"

    def test_invalid_environment_override(self, monkeypatch):
        monkeypatch.setenv("PAULTRAP_THREADS", "0")
        with pytest.raises(ConfigError):
            ConfigLoader(data=MINIMAL)

    def test_cli_overrides_skip_none(self):
        config = ConfigLoader(data=MINIMAL, apply_env=False)
        config.apply_overrides({"truncation.phase_order": 0, "truncation.sideband_order": None})
        assert config.truncation().phase_order == 0
        assert config.get("truncation.sideband_order") is None

    def test_invalid_override_rejected(self):
        config = ConfigLoader(data=MINIMAL, apply_env=False)
        with pytest.raises(ConfigError):
            config.apply_overrides({"truncation.precision": 2.0})

    def test_hash_is_stable_and_sensitive(self):
        first = ConfigLoader(data=MINIMAL, apply_env=False)
        second = ConfigLoader(data=copy.deepcopy(MINIMAL), apply_env=False)
        assert first.config_hash() == second.config_hash()
        assert len(first.config_hash()) == 16
        second.set("laser.segments", 8)
        assert first.config_hash() != second.config_hash()

    def test_runtime_keys_excluded_from_hash(self):
        first = ConfigLoader(data=_config(run={"seed": 0, "threads": 1}), apply_env=False)
        second = ConfigLoader(data=_config(run={"seed": 0, "threads": 8, "output": "elsewhere"},
                                           logging={"level": "DEBUG"}), apply_env=False)
        assert first.config_hash() == second.config_hash()

    def test_crystal_hash_ignores_laser(self):
        first = ConfigLoader(data=MINIMAL, apply_env=False)
        second = ConfigLoader(data=MINIMAL, apply_env=False)
        second.set("laser.detuning", "6.6 MHz")
        assert first.crystal_hash() == second.crystal_hash()
        assert first.config_hash() != second.config_hash()
        second.set("truncation.fourier_order", 3)
        assert first.crystal_hash() != second.crystal_hash()

    def test_crystal_hash_ignores_gate_truncation(self, test_config):
        """相位、边带阶数与级数精度只影响门设计，不使晶体快照失效"""
        modified = ConfigLoader(data=test_config.config_data, apply_env=False)
        modified.set("truncation.phase_order", 0)
        modified.set("truncation.sideband_order", 0)
        modified.set("truncation.precision", 1.0e-4)
        assert modified.crystal_hash() == test_config.crystal_hash()
        assert modified.config_hash() != test_config.config_hash()

    @pytest.mark.parametrize("key", ["fourier_order", "mode_order", "hessian_order"])
    def test_crystal_hash_tracks_crystal_orders(self, test_config, key):
        modified = ConfigLoader(data=test_config.config_data, apply_env=False)
        modified.set(f"truncation.{key}", modified.get(f"truncation.{key}") + 1)
        assert modified.crystal_hash() != test_config.crystal_hash()

    def test_save_config_round_trip(self, tmp_path, test_config):
        path = tmp_path / "effective.yaml"
        test_config.save_config(path)
        with open(path, encoding="utf-8") as f:
            saved = yaml.safe_load(f)
        assert ConfigLoader(data=saved, apply_env=False).config_hash() == test_config.config_hash()

    def test_loader_requires_source(self):
        with pytest.raises(ConfigError):
            ConfigLoader()

    def test_test_config_file_exists(self):
        assert TEST_CONFIG.exists()
