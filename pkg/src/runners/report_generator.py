"""
报告生成器模块
负责生成门设计、模式与鲁棒设计的纯文本报告（tabulate 表格）
"""

import json
import logging
from typing import Any, Dict, Iterable, Optional

import numpy as np
from tabulate import tabulate

from ..crystal.modes import ModeSet
from ..exporters.snapshot import FORMAT_VERSION
from ..gate.optimizer import GateReport, PulseSequence
from ..gate.robust import RobustDesign


class ReportGenerator:
    """文本报告生成器"""

    def __init__(self, config_hash: str, truncation: Dict[str, Any]):
        """
        初始化报告生成器

        Args:
            config_hash: 配置哈希（写入报告头）
            truncation: 截断设置
        """
        self.config_hash = config_hash
        self.truncation = dict(truncation)
        self.logger = logging.getLogger(self.__class__.__name__)

    def _header(self, title: str) -> str:
        lines = [
            "=" * 72,
            title,
            "=" * 72,
            f"format_version: {FORMAT_VERSION}",
            f"config_hash: {self.config_hash}",
            f"truncation: {json.dumps(self.truncation, sort_keys=True)}",
            "",
        ]
        return "\n".join(lines)

    @staticmethod
    def _summary_table(report: GateReport) -> str:
        rows = [
            ["Θ_ij (rad)", f"{report.theta:+.15f}"],
            ["目标 (rad)", f"{report.target:+.15f}"],
            ["δF", f"{report.delta_f:.6e}"],
            ["保真度", f"{report.fidelity:.8f}"],
            ["max |α|", f"{report.max_alpha:.6e}"],
            ["起点偏移 t0 (s)", f"{report.start_offset:.6e}"],
            ["被驱动离子", f"{report.ions[0]}, {report.ions[1]}"],
            ["截断丢弃上界", f"{report.dropped_bound:.3e}"],
        ]
        if report.rabi_bound is not None:
            rows.append(["Rabi 上限 (rad/s)", f"{report.rabi_bound:.6e}"
                         + ("  [超出]" if report.rabi_violation else "")])
        return tabulate(rows, headers=["量", "值"], tablefmt="simple")

    @staticmethod
    def _alpha_table(report: GateReport) -> str:
        contributions = report.contributions
        rows = []
        for mode in range(report.alpha.shape[1]):
            for slot, ion in enumerate(report.ions):
                value = report.alpha[slot, mode]
                rows.append([mode, ion, f"{value.real:+.6e}", f"{value.imag:+.6e}", f"{abs(value):.6e}",
                             f"{report.occupations[mode]:.4f}", f"{contributions[mode]:.4e}" if slot == 0 else ""])
        return tabulate(rows, headers=["mode", "ion", "Re α", "Im α", "|α|", "n̄", "贡献"], tablefmt="simple")

    @staticmethod
    def _pulse_table(pulse: PulseSequence) -> str:
        rows = [[index + 1, f"{start:.6e}", f"{end:.6e}", f"{omega:+.6e}"]
                for index, (start, end, omega) in enumerate(zip(pulse.edges[:-1], pulse.edges[1:],
                                                                pulse.amplitudes))]
        return tabulate(rows, headers=["段", "t_start (s)", "t_end (s)", "Ω (rad/s)"], tablefmt="simple")

    def gate_report(self, report: GateReport, pulse: PulseSequence, title: str = "门设计报告") -> str:
        """门报告：摘要、α 表（模式、Re、Im、|α|、贡献）、脉冲表"""
        parts = [self._header(title), self._summary_table(report), "", "残余耦合 α_j^k", self._alpha_table(report),
                 "", "分段脉冲", self._pulse_table(pulse)]
        if pulse.multiplier is not None:
            parts.extend(["", f"拉格朗日乘子 λ: {pulse.multiplier:.12e}"])
        if report.notes:
            parts.extend(["", "备注:"] + [f"  - {note}" for note in report.notes])
        return "\n".join(parts) + "\n"

    def robust_report(self, design: RobustDesign) -> str:
        rows = [
            ["δF (零漂移)", f"{design.report.delta_f:.6e}", f"{design.standard_report.delta_f:.6e}"],
            ["|∂δF/∂μ| (1/(rad/s))", f"{design.sensitivity:.6e}", f"{design.standard_sensitivity:.6e}"],
            ["鲁棒代价", f"{design.cost:.6e}", f"{design.standard_cost:.6e}"],
            ["max |Ω| (rad/s)", f"{design.pulse.peak:.6e}", f"{design.standard_pulse.peak:.6e}"],
        ]
        parts = [self._header("鲁棒设计报告"),
                 tabulate(rows, headers=["量", "鲁棒", "标准"], tablefmt="simple"),
                 "", f"可行起点: {design.feasible_starts}/{design.total_starts}",
                 "", "残余耦合 α_j^k（鲁棒脉冲）", self._alpha_table(design.report),
                 "", "分段脉冲（鲁棒）", self._pulse_table(design.pulse)]
        return "\n".join(parts) + "\n"

    def mode_table(self, modes: ModeSet, frequencies: Optional[Iterable[float]] = None) -> str:
        omegas = list(frequencies) if frequencies is not None else [None] * len(modes)
        rows = []
        for index, (mode, omega) in enumerate(zip(modes, omegas)):
            rows.append([index, f"{mode.beta:.12f}",
                         "" if omega is None else f"{omega / (2.0 * np.pi) / 1e6:.6f}",
                         f"{mode.residual:.2e}", "是" if mode.stable else "否"])
        parts = [self._header("简正模"),
                 tabulate(rows, headers=["k", "β_k", "ω_k/2π (MHz)", "残差", "稳定"], tablefmt="simple"),
                 "", f"正交误差: {modes.orthogonality_error():.3e}"]
        return "\n".join(parts) + "\n"
