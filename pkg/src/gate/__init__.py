"""
门设计模块

主要组件：
- context: 门设计上下文（η、n̄、运动相位、边带调制）
- coupling: 耦合行向量 A 与双比特相位矩阵 γ
- optimizer: 广义本征问题脉冲优化、门报告与截断模型对比
- robust: 抗失谐漂移的对称鲁棒脉冲
- scan: 失谐、起点偏移、分段数扫描
- drift: 固定脉冲的漂移与噪声分析
"""

from .context import LAMB_DICKE_LIMIT, LAMB_DICKE_WARNING, OMEGA_RF, GateContext, build_context
from .coupling import CouplingMatrix, GammaMatrices, build_coupling, build_gamma, diagonal_pair_integrals
from .drift import amplitude_noise_table, detuning_drift_table, detuning_sensitivity, gate_time_drift_table
from .optimizer import (TARGET_ANGLE, GateReport, OptimizationProblem, PulseSequence, build_problem,
                        compare_truncated_model, evaluate_sequence, infidelity, optimize_pulse, report_for,
                        scale_to_target)
from .robust import (RobustDesign, RobustnessProblem, RobustSettings, design_robust, robust_cost,
                     segment_weights, symmetric_map)
from .scan import parse_grid, rf_period_offsets, scan_detuning, scan_segments, scan_start_offset

__all__ = [
    "LAMB_DICKE_LIMIT", "LAMB_DICKE_WARNING", "OMEGA_RF", "GateContext", "build_context",
    "CouplingMatrix", "GammaMatrices", "build_coupling", "build_gamma", "diagonal_pair_integrals",
    "amplitude_noise_table", "detuning_drift_table", "detuning_sensitivity", "gate_time_drift_table",
    "TARGET_ANGLE", "GateReport", "OptimizationProblem", "PulseSequence", "build_problem",
    "compare_truncated_model", "evaluate_sequence", "infidelity", "optimize_pulse", "report_for",
    "scale_to_target",
    "RobustDesign", "RobustnessProblem", "RobustSettings", "design_robust", "robust_cost",
    "segment_weights", "symmetric_map",
    "parse_grid", "rf_period_offsets", "scan_detuning", "scan_segments", "scan_start_offset",
]
