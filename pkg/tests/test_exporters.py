"""
快照、结果导出与报告测试
"""

import json

import numpy as np
import pandas as pd
import pytest

from src.core.exceptions import ConfigError
from src.exporters.result_exporter import ResultExporter, read_header, read_result
from src.exporters.snapshot import FORMAT_VERSION, SnapshotWriter
from src.gate.optimizer import optimize_pulse
from src.runners.report_generator import ReportGenerator

HEADER = {"config_hash": "abc123", "crystal_hash": "def456", "truncation": {"fourier_order": 4}}


class TestSnapshot:
    """晶体快照的确定性与往返"""

    def test_output_is_deterministic(self, pair_crystal, pair_modes):
        writer = SnapshotWriter()
        first = writer.dumps(pair_crystal, HEADER, pair_modes)
        second = writer.dumps(pair_crystal, HEADER, pair_modes)
        assert first == second
        assert "timestamp" not in first

    def test_trajectory_round_trip(self, pair_crystal, tmp_path):
        writer = SnapshotWriter()
        path = writer.write(tmp_path / "crystal.yaml", pair_crystal, HEADER)
        snapshot = writer.read(path)
        np.testing.assert_array_equal(snapshot.trajectory.coefficients, pair_crystal.coefficients)
        assert snapshot.trajectory.residual == pair_crystal.residual
        assert snapshot.trajectory.converged
        assert snapshot.modes is None
        assert snapshot.crystal_hash == "def456"
        assert snapshot.header["format_version"] == FORMAT_VERSION
        assert not list(tmp_path.glob("*.tmp"))

    def test_modes_round_trip(self, pair_crystal, pair_modes, tmp_path):
        writer = SnapshotWriter()
        snapshot = writer.read(writer.write(tmp_path / "crystal.yaml", pair_crystal, HEADER, pair_modes))
        assert len(snapshot.modes) == len(pair_modes)
        np.testing.assert_array_equal(snapshot.modes.betas, pair_modes.betas)
        for restored, original in zip(snapshot.modes, pair_modes):
            np.testing.assert_array_equal(restored.sidebands, original.sidebands)
            assert restored.stable == original.stable
        assert snapshot.modes.normalized

    def test_rewrite_is_byte_identical(self, pair_crystal, pair_modes, tmp_path):
        """读回再写出的快照与原文件逐字节相同"""
        writer = SnapshotWriter()
        path = writer.write(tmp_path / "a.yaml", pair_crystal, HEADER, pair_modes)
        snapshot = writer.read(path)
        again = writer.write(tmp_path / "b.yaml", snapshot.trajectory, HEADER, snapshot.modes)
        assert path.read_bytes() == again.read_bytes()

    def test_rejects_foreign_documents(self, tmp_path):
        path = tmp_path / "other.yaml"
        path.write_text("kind: something-else\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            SnapshotWriter().read(path)
        with pytest.raises(ConfigError):
            SnapshotWriter().read(tmp_path / "missing.yaml")

    def test_rejects_other_format_version(self, pair_crystal, tmp_path):
        writer = SnapshotWriter()
        path = writer.write(tmp_path / "crystal.yaml", pair_crystal, HEADER)
        text = path.read_text(encoding="utf-8").replace(f"format_version: '{FORMAT_VERSION}'",
                                                        "format_version: '0.9'")
        path.write_text(text, encoding="utf-8")
        with pytest.raises(ConfigError):
            writer.read(path)


class TestResultExporter:
    """带注释头的 CSV 与 JSON"""

    def test_csv_header_and_body(self, tmp_path):
        exporter = ResultExporter(tmp_path, "abc123", {"precision": 1e-6})
        frame = pd.DataFrame({"mu_rad_s": [1.0, 2.0], "delta_F": [0.1, 1.0 / 3.0]})
        path = exporter.export_frame(frame, "scan.csv", "detuning-scan", {"pulse": "standard"})
        header = read_header(path)
        assert header["format_version"] == FORMAT_VERSION
        assert header["kind"] == "detuning-scan"
        assert header["config_hash"] == "abc123"
        assert json.loads(header["truncation"]) == {"precision": 1e-6}
        assert header["pulse"] == "standard"
        restored = read_result(path)
        assert list(restored.columns) == ["mu_rad_s", "delta_F"]
        # 17 位有效数字，读回逐位相同
        assert restored["delta_F"].iloc[1] == 1.0 / 3.0
        assert exporter.written == [path]

    def test_json_document(self, tmp_path):
        exporter = ResultExporter(tmp_path / "nested", "abc123", {})
        path = exporter.export_json({"delta_F": 1e-3}, "report.json", "gate-report")
        document = json.loads(path.read_text(encoding="utf-8"))
        assert document["kind"] == "gate-report"
        assert document["delta_F"] == 1e-3
        assert document["config_hash"] == "abc123"


class TestReportGenerator:
    """文本报告"""

    def test_gate_report_sections(self, pair_context):
        pulse, report = optimize_pulse(pair_context)
        text = ReportGenerator("abc123", {"precision": 1e-6}).gate_report(report, pulse)
        assert "config_hash: abc123" in text
        assert "残余耦合" in text
        assert "分段脉冲" in text
        assert f"{report.theta:+.15f}" in text
        assert text.count("\n") > 20

    def test_mode_table(self, pair_modes, test_config):
        text = ReportGenerator("abc123", {}).mode_table(pair_modes, pair_modes.frequencies(test_config.units()))
        assert "正交误差" in text
        assert f"{pair_modes.betas[0]:.12f}" in text
