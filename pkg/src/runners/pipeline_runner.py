"""
流水线运行器模块
按子命令编排 平衡 → 模式 → 校验 → 门设计/扫描/鲁棒 各阶段，管理快照复用与产物清理
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..core.exceptions import ConfigError, TrapToolkitError
from ..crystal.equilibrium import EquilibriumTrajectory, solve_equilibrium
from ..crystal.modes import ModeSet, solve_normal_modes
from ..dynamics.verification import verify_mode
from ..exporters.result_exporter import ResultExporter
from ..exporters.snapshot import SnapshotWriter
from ..gate.context import GateContext, build_context
from ..gate.drift import amplitude_noise_table, detuning_drift_table, gate_time_drift_table
from ..gate.optimizer import compare_truncated_model, optimize_pulse
from ..gate.robust import design_robust
from ..gate.scan import parse_grid, rf_period_offsets, scan_detuning, scan_segments, scan_start_offset
from ..integrals.series import phase_cache_info
from ..utils.config_loader import ConfigLoader
from ..utils.performance_monitor import PerformanceMonitor
from .report_generator import ReportGenerator

SUBCOMMANDS = ("equilibrium", "modes", "verify-md", "design", "scan", "robust", "t0-scan", "drift", "segments")
SNAPSHOT_FILE = "crystal.yaml"
PERFORMANCE_FILE = "performance.json"
MHZ = 2.0 * np.pi * 1e6


@dataclass
class JobSpec:
    """
    作业描述

    grid: (min, max, step)，单位 MHz（循环频率）
    overrides: 点号路径 → 值，None 表示不覆盖
    """
    subcommand: str
    config_path: Path
    output_dir: Path
    seed: Optional[int] = None
    threads: Optional[int] = None
    overrides: Dict[str, Any] = field(default_factory=dict)
    grid: Optional[Tuple[float, float, float]] = None
    pulse: str = "standard"

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"未知子命令: {self.subcommand}")
        self.config_path = Path(self.config_path)
        self.output_dir = Path(self.output_dir)
        if self.grid is not None:
            minimum, maximum, step = self.grid
            if not minimum < maximum:
                raise ConfigError(f"--grid 要求 MIN < MAX: {minimum} ≥ {maximum}")
            if not step > 0:
                raise ConfigError(f"--grid 步长必须为正: {step}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"线程数必须为正: {self.threads}")
        if self.pulse not in ("standard", "robust"):
            raise ConfigError(f"脉冲类型必须是 standard 或 robust: {self.pulse}")

    def effective_overrides(self) -> Dict[str, Any]:
        merged = dict(self.overrides)
        merged["run.seed"] = self.seed
        merged["run.threads"] = self.threads
        return merged


@dataclass
class RunResult:
    """运行结果"""
    exit_code: int
    artifacts: List[Path] = field(default_factory=list)
    messages: List[str] = field(default_factory=list)
    error: Optional[TrapToolkitError] = None

    @property
    def success(self) -> bool:
        return self.exit_code == 0


class PipelineRunner:
    """流水线运行器"""

    def __init__(self, job: JobSpec):
        """
        初始化运行器

        Raises:
            ConfigError: 配置无效或输出目录不可写
        """
        self.job = job
        self.logger = logging.getLogger(self.__class__.__name__)
        self.config = ConfigLoader(job.config_path)
        self.config.apply_overrides(job.effective_overrides())
        self.output_dir = job.output_dir
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"输出目录不可写: {self.output_dir}: {e}") from e
        self.config_hash = self.config.config_hash()
        self.truncation = self.config.truncation()
        self.exporter = ResultExporter(self.output_dir, self.config_hash, self.truncation.to_dict())
        self.reports = ReportGenerator(self.config_hash, self.truncation.to_dict())
        self.snapshots = SnapshotWriter()
        self.monitor = PerformanceMonitor()
        self.messages: List[str] = []
        self.species = self.config.ion_species()
        self.drive = self.config.trap_drive()
        self.units = self.config.units()

    @property
    def snapshot_path(self) -> Path:
        return self.output_dir / SNAPSHOT_FILE

    def run(self) -> RunResult:
        """
        执行作业

        Returns:
            RunResult: 退出码 0 表示成功；工具包异常映射到各自的退出码，失败阶段的产物被删除
        """
        handlers: Dict[str, Callable[[], None]] = {
            "equilibrium": self.run_equilibrium,
            "modes": self.run_modes,
            "verify-md": self.run_verify,
            "design": self.run_design,
            "scan": self.run_scan,
            "robust": self.run_robust,
            "t0-scan": self.run_t0_scan,
            "drift": self.run_drift,
            "segments": self.run_segments,
        }
        self.logger.info(f"开始作业 {self.job.subcommand}: 配置哈希 {self.config_hash}, 输出目录 {self.output_dir}")
        try:
            handlers[self.job.subcommand]()
        except TrapToolkitError as error:
            self._cleanup()
            self.monitor.export_metrics(self.output_dir / PERFORMANCE_FILE)
            return RunResult(exit_code=error.exit_code, messages=self.messages, error=error)
        except BaseException:
            self._cleanup()
            raise
        self.logger.debug(f"相位展开缓存: {phase_cache_info()}")
        self.monitor.export_metrics(self.output_dir / PERFORMANCE_FILE)
        return RunResult(exit_code=0, artifacts=list(self.exporter.written), messages=self.messages)

    def _cleanup(self):
        for path in self.exporter.written:
            if path.exists():
                path.unlink()
                self.logger.info(f"已删除失败阶段的产物: {path}")
        for temporary in self.output_dir.glob("*.tmp"):
            temporary.unlink()
        self.exporter.written.clear()

    # ------------------------------------------------------------------
    # 晶体阶段
    # ------------------------------------------------------------------

    def _snapshot_header(self) -> Dict[str, Any]:
        return {
            "config_hash": self.config_hash,
            "crystal_hash": self.config.crystal_hash(),
            "species": self.species.to_dict(),
            "drive": self.drive.to_dict(),
            "units": self.units.to_dict(),
            "truncation": self.truncation.to_dict(),
        }

    def _reusable_snapshot(self):
        if not self.snapshot_path.exists():
            return None
        snapshot = self.snapshots.read(self.snapshot_path)
        if snapshot.crystal_hash != self.config.crystal_hash():
            self.logger.info("快照的晶体哈希与当前配置不符，重新计算")
            return None
        return snapshot

    def crystal(self) -> EquilibriumTrajectory:
        """平衡轨道：哈希匹配时复用快照，否则求解并写出，随后总是从快照读回"""
        snapshot = self._reusable_snapshot()
        if snapshot is not None:
            self.logger.info(f"复用平衡快照: {self.snapshot_path}")
            return snapshot.trajectory
        with self.monitor.stage("equilibrium", n_ions=self.config.n_ions):
            trajectory = solve_equilibrium(self.drive, self.config.n_ions, self.config.iteration_settings(),
                                           seed=self.config.seed, order=self.truncation.fourier_order)
        self.snapshots.write(self.snapshot_path, trajectory, self._snapshot_header())
        return self.snapshots.read(self.snapshot_path).trajectory

    def crystal_and_modes(self) -> Tuple[EquilibriumTrajectory, ModeSet]:
        trajectory = self.crystal()
        snapshot = self._reusable_snapshot()
        if snapshot is not None and snapshot.modes is not None:
            self.logger.info("复用快照中的模式集")
            return snapshot.trajectory, snapshot.modes
        with self.monitor.stage("modes", n_ions=trajectory.n_ions):
            modes = solve_normal_modes(trajectory, self.drive, self.truncation, self.config.mode_settings(),
                                       threads=self.config.threads, source_hash=self.config.crystal_hash())
        self.snapshots.write(self.snapshot_path, trajectory, self._snapshot_header(), modes)
        snapshot = self.snapshots.read(self.snapshot_path)
        return snapshot.trajectory, snapshot.modes

    def context(self) -> GateContext:
        trajectory, modes = self.crystal_and_modes()
        return build_context(trajectory, modes, self.species, self.units, self.config.laser_config(),
                             self.config.thermal_spectrum(), self.truncation)

    # ------------------------------------------------------------------
    # 子命令
    # ------------------------------------------------------------------

    def run_equilibrium(self):
        trajectory = self.crystal()
        frame = pd.DataFrame({
            "ion": np.arange(trajectory.n_ions),
            "x_m": trajectory.coefficients[0, :, 0] * self.units.length,
            "y_m": trajectory.coefficients[0, :, 1] * self.units.length,
            "z_m": trajectory.coefficients[0, :, 2] * self.units.length,
        })
        self.exporter.export_frame(frame, "equilibrium_positions.csv", "equilibrium-positions")
        self.messages.append(f"平衡轨道: N={trajectory.n_ions}, M={trajectory.order}, 残差 {trajectory.residual:.3e}")

    def run_modes(self):
        _, modes = self.crystal_and_modes()
        omegas = modes.frequencies(self.units)
        frame = pd.DataFrame({
            "mode": np.arange(len(modes)),
            "beta": modes.betas,
            "omega_rad_s": omegas,
            "residual": [mode.residual for mode in modes],
            "stable": [mode.stable for mode in modes],
        })
        self.exporter.export_frame(frame, "modes.csv", "mode-spectrum")
        self.exporter.export_text(self.reports.mode_table(modes, omegas), "modes.txt")
        self.messages.append(f"模式集: {len(modes)} 个模式, β ∈ [{modes.betas.min():.6f}, {modes.betas.max():.6f}]")

    def run_verify(self):
        trajectory, modes = self.crystal_and_modes()
        settings = self.config.integrator_settings()
        for excitation in self.config.excitations():
            with self.monitor.stage("verify-md", mode=excitation.mode_index):
                result = verify_mode(trajectory, self.drive, modes, excitation, settings)
            self.exporter.export_frame(result.to_frame(), f"verify_mode{excitation.mode_index}.csv", "mode-verification",
                                       {"mode": excitation.mode_index, "beta": repr(result.beta),
                                        "amplitude": excitation.amplitude, "ion": excitation.ion,
                                        "axis": excitation.axis, "max_deviation": repr(result.max_deviation)})
            self.messages.append(f"模式 {excitation.mode_index}: 最大偏差 {result.max_deviation:.3e} L0 "
                                 f"(全部坐标 {result.max_deviation_all:.3e})")

    def _design(self, context: GateContext):
        with self.monitor.stage("design", segments=context.segments):
            return optimize_pulse(context)

    def run_design(self):
        context = self.context()
        pulse, report = self._design(context)
        self.exporter.export_frame(pulse.to_frame(), "pulse.csv", "pulse-sequence",
                                   {"theta_target_rad": repr(pulse.target)})
        self.exporter.export_frame(report.alpha_frame(), "alpha.csv", "residual-coupling")
        self.exporter.export_text(self.reports.gate_report(report, pulse), "gate_report.txt")
        payload = report.to_dict()
        if self.config.compare_truncated():
            with self.monitor.stage("compare-truncated", segments=context.segments):
                comparison = compare_truncated_model(context, pulse, report)
            self.exporter.export_frame(comparison, "truncation_comparison.csv", "truncation-comparison")
            cross = comparison.set_index(["design_model", "evaluation_model"])["delta_F"]
            payload["delta_F_on_truncated_model"] = float(cross["full", "truncated"])
            payload["delta_F_truncated_design_on_full_model"] = float(cross["truncated", "full"])
            self.messages.append(f"截断模型对比: 忽略微运动设计的脉冲在完整模型下 δF = "
                                 f"{cross['truncated', 'full']:.4e}（完整设计 {report.delta_f:.4e}）")
        self.exporter.export_json(payload, "gate_report.json", "gate-report")
        self.messages.append(f"门设计: Θ = {report.theta:+.12f}, δF = {report.delta_f:.4e}")

    def _detuning_grid(self) -> np.ndarray:
        if self.job.grid is not None:
            minimum, maximum, step = self.job.grid
            return parse_grid(minimum * MHZ, maximum * MHZ, step * MHZ)
        grid = self.config.detuning_grid()
        if grid is None:
            raise ConfigError("scan 需要 --grid MIN:MAX:STEP 或配置 scan.grid")
        return grid

    def run_scan(self):
        context = self.context()
        grid = self._detuning_grid()
        with self.monitor.stage("scan", points=len(grid)):
            frame = scan_detuning(context, grid, threads=self.config.threads)
        self.exporter.export_frame(frame, "scan.csv", "detuning-scan")
        valid = frame[frame["status"] == "ok"]
        if len(valid):
            best = valid.loc[valid["delta_F"].idxmin()]
            self.messages.append(f"失谐扫描: {len(frame)} 点, 最优 μ/2π = {best['mu_rad_s'] / MHZ:.6f} MHz, "
                                 f"δF = {best['delta_F']:.4e}")
        else:
            self.messages.append(f"失谐扫描: {len(frame)} 点全部失败")

    def run_robust(self):
        context = self.context()
        with self.monitor.stage("robust", segments=context.segments):
            design = design_robust(context, self.config.robust_settings())
        self.exporter.export_frame(design.pulse.to_frame(), "robust_pulse.csv", "pulse-sequence",
                                   {"symmetric": True, "theta_target_rad": repr(design.pulse.target)})
        drifts = self.config.drift_settings()["detuning"]
        standard = detuning_drift_table(context, design.standard_pulse, drifts, self.config.threads)
        robust = detuning_drift_table(context, design.pulse, drifts, self.config.threads)
        table = pd.DataFrame({"delta_mu_rad_s": standard["delta_mu_rad_s"],
                              "delta_F_standard": standard["delta_F"], "delta_F_robust": robust["delta_F"]})
        self.exporter.export_frame(table, "robust_sensitivity.csv", "detuning-sensitivity")
        self.exporter.export_text(self.reports.robust_report(design), "robust_report.txt")
        self.exporter.export_json(design.to_dict(), "robust_report.json", "robust-report")
        self.messages.append(f"鲁棒设计: δF = {design.report.delta_f:.4e} (标准 {design.standard_report.delta_f:.4e}), "
                             f"|∂δF/∂μ| 降低 {design.standard_sensitivity / max(design.sensitivity, 1e-300):.1f} 倍")

    def run_t0_scan(self):
        context = self.context()
        pulse, _ = self._design(context)
        offsets = rf_period_offsets(context, self.config.t0_points())
        with self.monitor.stage("t0-scan", points=len(offsets)):
            frame = scan_start_offset(context, pulse, offsets, threads=self.config.threads)
        self.exporter.export_frame(frame, "t0_scan.csv", "start-offset-scan")
        valid = frame.loc[frame["status"] == "ok", "delta_F"]
        if len(valid):
            self.messages.append(f"t0 扫描: 平均保真度 {1.0 - valid.mean():.6f}, "
                                 f"δF 变化 {valid.max() - valid.min():.3e}")

    def run_drift(self):
        context = self.context()
        if self.job.pulse == "robust":
            pulse = design_robust(context, self.config.robust_settings()).pulse
        else:
            pulse, _ = self._design(context)
        settings = self.config.drift_settings()
        threads = self.config.threads
        with self.monitor.stage("drift"):
            detuning = detuning_drift_table(context, pulse, settings["detuning"], threads)
            gate_time = gate_time_drift_table(context, pulse, settings["gate_time"], threads)
            noise = amplitude_noise_table(context, pulse, settings["amplitude_sigma"], settings["samples"],
                                          settings["seed"])
        extra = {"pulse": self.job.pulse}
        self.exporter.export_frame(detuning, "drift_detuning.csv", "detuning-drift", extra)
        self.exporter.export_frame(gate_time, "drift_gate_time.csv", "gate-time-drift", extra)
        self.exporter.export_frame(noise, "drift_amplitude.csv", "amplitude-noise", extra)
        self.messages.append(f"漂移分析（{self.job.pulse} 脉冲）: δμ 最大 δF {detuning['delta_F'].max():.4e}, "
                             f"δτ 最大 δF {gate_time['delta_F'].max():.4e}")

    def run_segments(self):
        context = self.context()
        counts = self.config.segment_counts()
        with self.monitor.stage("segments", counts=list(counts)):
            frame = scan_segments(context, counts, threads=self.config.threads)
        self.exporter.export_frame(frame, "segments.csv", "segment-study")
        self.messages.append(f"分段数研究: {len(frame)} 组")
