"""
命令行与流水线运行器测试
"""

import json
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from src.cli.main import cli
from src.core.exceptions import ConfigError, ConvergenceError
from src.exporters.result_exporter import read_header, read_result
from src.runners import pipeline_runner
from src.runners.pipeline_runner import JobSpec, PipelineRunner

TEST_CONFIG = Path(__file__).resolve().parent.parent / "config" / "test.yaml"


def _write_config(path: Path, **sections) -> Path:
    with open(TEST_CONFIG, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    for name, values in sections.items():
        data[name].update(values)
    path.write_text(yaml.safe_dump(data, allow_unicode=True), encoding="utf-8")
    return path


@pytest.fixture
def runner():
    return CliRunner()


class TestJobSpec:
    """作业描述校验"""

    def test_unknown_subcommand(self, tmp_path):
        with pytest.raises(ConfigError):
            JobSpec("optimize", TEST_CONFIG, tmp_path)

    def test_invalid_grid(self, tmp_path):
        with pytest.raises(ConfigError):
            JobSpec("scan", TEST_CONFIG, tmp_path, grid=(6.8, 6.0, 0.01))
        with pytest.raises(ConfigError):
            JobSpec("scan", TEST_CONFIG, tmp_path, grid=(6.0, 6.8, 0.0))

    def test_invalid_threads_and_pulse(self, tmp_path):
        with pytest.raises(ConfigError):
            JobSpec("design", TEST_CONFIG, tmp_path, threads=0)
        with pytest.raises(ConfigError):
            JobSpec("drift", TEST_CONFIG, tmp_path, pulse="fancy")

    def test_overrides_include_run_options(self, tmp_path):
        job = JobSpec("design", TEST_CONFIG, tmp_path, seed=3, overrides={"truncation.precision": 1e-7})
        merged = job.effective_overrides()
        assert merged["run.seed"] == 3
        assert merged["run.threads"] is None
        assert merged["truncation.precision"] == 1e-7


class TestPipelineRunner:
    """阶段编排、快照复用与失败清理"""

    def test_equilibrium_writes_snapshot(self, tmp_path):
        result = PipelineRunner(JobSpec("equilibrium", TEST_CONFIG, tmp_path)).run()
        assert result.success
        assert (tmp_path / pipeline_runner.SNAPSHOT_FILE).exists()
        frame = read_result(tmp_path / "equilibrium_positions.csv")
        assert list(frame.columns) == ["ion", "x_m", "y_m", "z_m"]
        assert len(frame) == 2
        assert (tmp_path / pipeline_runner.PERFORMANCE_FILE).exists()

    def test_snapshot_is_reused(self, tmp_path, monkeypatch):
        assert PipelineRunner(JobSpec("modes", TEST_CONFIG, tmp_path)).run().success

        def forbidden(*args, **kwargs):
            raise AssertionError("快照应被复用")

        monkeypatch.setattr(pipeline_runner, "solve_equilibrium", forbidden)
        monkeypatch.setattr(pipeline_runner, "solve_normal_modes", forbidden)
        result = PipelineRunner(JobSpec("design", TEST_CONFIG, tmp_path)).run()
        assert result.success
        pulse = read_result(tmp_path / "pulse.csv")
        assert list(pulse.columns) == ["segment_index", "t_start_s", "t_end_s", "Omega_rad_s"]
        assert read_header(tmp_path / "pulse.csv")["kind"] == "pulse-sequence"
        assert (tmp_path / "gate_report.txt").exists()

    def test_gate_truncation_override_reuses_snapshot(self, tmp_path, monkeypatch):
        """分阶段运行 --phase-order 0 --ncut 0 design 仍复用已存快照"""
        assert PipelineRunner(JobSpec("modes", TEST_CONFIG, tmp_path)).run().success
        snapshot = (tmp_path / pipeline_runner.SNAPSHOT_FILE).read_bytes()

        def forbidden(*args, **kwargs):
            raise AssertionError("快照应被复用")

        monkeypatch.setattr(pipeline_runner, "solve_equilibrium", forbidden)
        monkeypatch.setattr(pipeline_runner, "solve_normal_modes", forbidden)
        overrides = {"truncation.phase_order": 0, "truncation.sideband_order": 0}
        assert PipelineRunner(JobSpec("design", TEST_CONFIG, tmp_path, overrides=overrides)).run().success
        assert (tmp_path / pipeline_runner.SNAPSHOT_FILE).read_bytes() == snapshot

    def test_design_with_truncated_comparison(self, tmp_path):
        job = JobSpec("design", TEST_CONFIG, tmp_path, overrides={"gate.compare_truncated": True})
        assert PipelineRunner(job).run().success
        comparison = read_result(tmp_path / "truncation_comparison.csv")
        assert len(comparison) == 4
        assert read_header(tmp_path / "truncation_comparison.csv")["kind"] == "truncation-comparison"
        report = json.loads((tmp_path / "gate_report.json").read_text(encoding="utf-8"))
        cross = comparison.set_index(["design_model", "evaluation_model"])["delta_F"]
        assert report["delta_F_on_truncated_model"] == pytest.approx(cross["full", "truncated"])
        assert report["delta_F_truncated_design_on_full_model"] == pytest.approx(cross["truncated", "full"])

    def test_changed_crystal_settings_invalidate_snapshot(self, tmp_path, monkeypatch):
        assert PipelineRunner(JobSpec("equilibrium", TEST_CONFIG, tmp_path)).run().success
        calls = []
        original = pipeline_runner.solve_equilibrium

        def counting(*args, **kwargs):
            calls.append(kwargs.get("order"))
            return original(*args, **kwargs)

        monkeypatch.setattr(pipeline_runner, "solve_equilibrium", counting)
        job = JobSpec("equilibrium", TEST_CONFIG, tmp_path, overrides={"truncation.fourier_order": 3})
        assert PipelineRunner(job).run().success
        assert calls == [3]

    def test_failed_stage_is_cleaned_up(self, tmp_path, monkeypatch):
        def failing(context, problem=None):
            raise ConvergenceError("广义本征值全部为无穷")

        monkeypatch.setattr(pipeline_runner, "optimize_pulse", failing)
        result = PipelineRunner(JobSpec("design", TEST_CONFIG, tmp_path)).run()
        assert result.exit_code == 4
        assert isinstance(result.error, ConvergenceError)
        assert not (tmp_path / "pulse.csv").exists()
        # 之前阶段的快照保留
        assert (tmp_path / pipeline_runner.SNAPSHOT_FILE).exists()

    def test_scan_without_grid(self, tmp_path):
        config = tmp_path / "config.yaml"
        with open(TEST_CONFIG, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
        del data["scan"]["grid"]
        config.write_text(yaml.safe_dump(data, allow_unicode=True), encoding="utf-8")
        result = PipelineRunner(JobSpec("scan", config, tmp_path / "out")).run()
        assert result.exit_code == 2


class TestCommandLine:
    """click 命令行"""

    def test_help_lists_subcommands(self, runner):
        result = runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        for name in ("equilibrium", "modes", "verify-md", "design", "scan", "robust", "t0-scan", "drift",
                     "segments"):
            assert name in result.output

    def test_missing_config(self, runner, tmp_path):
        result = runner.invoke(cli, ["--out", str(tmp_path), "equilibrium"])
        assert result.exit_code == 2

    def test_missing_config_file(self, runner, tmp_path):
        result = runner.invoke(cli, ["--config", str(tmp_path / "none.yaml"), "--out", str(tmp_path), "design"])
        assert result.exit_code == 2

    def test_design(self, runner, tmp_path):
        result = runner.invoke(cli, ["--config", str(TEST_CONFIG), "--out", str(tmp_path), "design"])
        assert result.exit_code == 0, result.output
        assert "Θ" in result.output
        assert (tmp_path / "pulse.csv").exists()
        assert (tmp_path / "alpha.csv").exists()
        assert (tmp_path / "gate_report.json").exists()

    def test_scan_with_grid(self, runner, tmp_path):
        result = runner.invoke(cli, ["--config", str(TEST_CONFIG), "--out", str(tmp_path), "scan",
                                     "--grid", "6.45:6.55:0.05"])
        assert result.exit_code == 0, result.output
        frame = read_result(tmp_path / "scan.csv")
        assert len(frame) == 3
        assert (frame["status"] == "ok").all()

    def test_malformed_grid(self, runner, tmp_path):
        result = runner.invoke(cli, ["--config", str(TEST_CONFIG), "--out", str(tmp_path), "scan", "--grid", "6.4:6.6"])
        assert result.exit_code == 2
        result = runner.invoke(cli, ["--config", str(TEST_CONFIG), "--out", str(tmp_path), "scan",
                                     "--grid", "6.6:6.4:0.1"])
        assert result.exit_code == 2

    def test_unstable_trap(self, runner, tmp_path):
        config = _write_config(tmp_path / "unstable.yaml", trap={"q": [0.95, -0.95, 0.0]})
        result = runner.invoke(cli, ["--config", str(config), "--out", str(tmp_path / "out"), "equilibrium"])
        assert result.exit_code == 3
        assert "InstabilityError" in result.output

    def test_conventional_truncation_flags(self, runner, tmp_path):
        result = runner.invoke(cli, ["--config", str(TEST_CONFIG), "--out", str(tmp_path),
                                     "--phase-order", "0", "--ncut", "0", "design"])
        assert result.exit_code == 0, result.output
        header = read_header(tmp_path / "pulse.csv")
        truncation = yaml.safe_load(header["truncation"])
        assert truncation["phase_order"] == 0
        assert truncation["sideband_order"] == 0

    def test_design_compare_truncated_flag(self, runner, tmp_path):
        result = runner.invoke(cli, ["--config", str(TEST_CONFIG), "--out", str(tmp_path), "design",
                                     "--compare-truncated"])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "truncation_comparison.csv").exists()
