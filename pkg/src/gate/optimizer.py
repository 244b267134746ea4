"""
=============================================================================
Paul 阱门设计工具包 - 分段脉冲优化
=============================================================================

在约束 Ωᵀ γ Ω = ±π/4 下最小化 ΩᵀMΩ，M = Re Σ_{j,k} (2n̄_k+1) A_j^k† A_j^k：
拉格朗日条件 MΩ = λγΩ 是广义本征问题，取 |λ| 最小的本征对并缩放到约束面。

数值上求解 γv = κMv（M 正定时用 eigh），λ = 1/κ，|κ| 最大者即 |λ| 最小者；
目标符号取 sign(κ)，使 δF = (4/5)|λ|π/4 最小。M 奇异时退回一般本征问题 eig(M, γ)。

门报告中的 δF 由存储的 α、Θ、n̄ 重新计算：

    δF = (4/5)[(Θ − target)² + Σ_{j,k} |α_j^k|² (2n̄_k + 1)]

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
import scipy.linalg

from ..core.exceptions import ConvergenceError
from .context import GateContext
from .coupling import CouplingMatrix, GammaMatrices, build_coupling, build_gamma

logger = logging.getLogger(__name__)

TARGET_ANGLE = math.pi / 4.0


@dataclass(frozen=True, eq=False)
class OptimizationProblem:
    """实对称 M、γ 及其来源"""
    M: np.ndarray
    gamma: np.ndarray
    coupling: CouplingMatrix
    gammas: GammaMatrices
    occupations: np.ndarray

    @property
    def segments(self) -> int:
        return self.M.shape[0]


@dataclass(frozen=True, eq=False)
class PulseSequence:
    """
    分段 Rabi 幅度

    amplitudes: Ω_p (rad/s)
    sign: Θ 目标的符号 ±1
    edges: 物理分段边界 (s)
    """
    amplitudes: np.ndarray
    sign: int
    edges: np.ndarray
    symmetric: bool = False
    multiplier: Optional[float] = None

    @property
    def target(self) -> float:
        return self.sign * TARGET_ANGLE

    @property
    def segments(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.amplitudes)))

    def with_amplitudes(self, amplitudes: np.ndarray) -> "PulseSequence":
        return PulseSequence(np.asarray(amplitudes, dtype=float), self.sign, self.edges, self.symmetric,
                             self.multiplier)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "segment_index": np.arange(1, self.segments + 1),
            "t_start_s": self.edges[:-1],
            "t_end_s": self.edges[1:],
            "Omega_rad_s": self.amplitudes,
        })


@dataclass(frozen=True, eq=False)
class GateReport:
    """门性能报告"""
    theta: float
    target: float
    alpha: np.ndarray
    occupations: np.ndarray
    delta_f: float
    start_offset: float
    ions: tuple
    rabi_bound: Optional[float] = None
    rabi_violation: bool = False
    dropped_bound: float = 0.0
    notes: tuple = field(default_factory=tuple)

    @property
    def contributions(self) -> np.ndarray:
        """各模式的不保真度贡献 (4/5) Σ_j |α_j^k|² (2n̄_k+1)"""
        return 0.8 * np.sum(np.abs(self.alpha) ** 2, axis=0) * (2.0 * self.occupations + 1.0)

    @property
    def fidelity(self) -> float:
        return 1.0 - self.delta_f

    @property
    def max_alpha(self) -> float:
        return float(np.max(np.abs(self.alpha))) if self.alpha.size else 0.0

    def recompute_infidelity(self) -> float:
        return infidelity(self.theta, self.target, self.alpha, self.occupations)

    def alpha_frame(self) -> pd.DataFrame:
        rows = []
        for slot, ion in enumerate(self.ions):
            for mode, value in enumerate(self.alpha[slot]):
                rows.append({"ion": ion, "mode": mode, "re": value.real, "im": value.imag,
                             "abs": abs(value), "n_bar": self.occupations[mode]})
        return pd.DataFrame(rows)

    def to_dict(self) -> dict:
        return {
            "theta_rad": self.theta,
            "target_rad": self.target,
            "delta_F": self.delta_f,
            "fidelity": self.fidelity,
            "max_alpha_abs": self.max_alpha,
            "start_offset_s": self.start_offset,
            "ions": list(self.ions),
            "rabi_bound_rad_s": self.rabi_bound,
            "rabi_violation": self.rabi_violation,
            "dropped_bound": self.dropped_bound,
        }


def infidelity(theta: float, target: float, alpha: np.ndarray, occupations: np.ndarray) -> float:
    thermal = float(np.sum(np.abs(alpha) ** 2 * (2.0 * occupations + 1.0)[None, :]))
    return 0.8 * ((theta - target) ** 2 + thermal)


def build_problem(context: GateContext) -> OptimizationProblem:
    """组装 M 与 γ"""
    coupling = build_coupling(context)
    gammas = build_gamma(context, coupling)
    weights = 2.0 * context.occupations + 1.0
    M = np.zeros((coupling.segments, coupling.segments))
    for slot in range(2):
        rows = coupling.rows[slot]
        M += np.real(rows.conj().T @ (weights[:, None] * rows))
    M = 0.5 * (M + M.T)
    return OptimizationProblem(M=M, gamma=gammas.symmetric, coupling=coupling, gammas=gammas,
                               occupations=context.occupations)


def _smallest_multiplier(M: np.ndarray, gamma: np.ndarray):
    """返回 (λ, v)：MΩ = λγΩ 中 |λ| 最小的有限实本征对"""
    try:
        kappas, vectors = scipy.linalg.eigh(gamma, M)
        index = int(np.argmax(np.abs(kappas)))
        if kappas[index] == 0.0:
            raise ConvergenceError("γ 在 M 度量下恒为零，无法达到目标相位")
        return 1.0 / kappas[index], vectors[:, index]
    except np.linalg.LinAlgError:
        logger.info("M 非正定，改用一般广义本征问题")

    lambdas, vectors = scipy.linalg.eig(M, gamma)
    finite = np.isfinite(lambdas) & (np.abs(lambdas.imag) <= 1e-9 * np.maximum(1.0, np.abs(lambdas.real)))
    if not np.any(finite):
        raise ConvergenceError("广义本征值全部为无穷或复数，无法构造脉冲",
                               {"eigenvalues": [complex(v) for v in lambdas]})
    candidates = np.flatnonzero(finite)
    index = candidates[int(np.argmin(np.abs(lambdas[candidates].real)))]
    return float(lambdas[index].real), np.real(vectors[:, index])


def scale_to_target(vector: np.ndarray, gamma: np.ndarray, sign: Optional[int] = None):
    """把 v 缩放到 vᵀγv = ±π/4；sign 缺省取 vᵀγv 的符号"""
    form = float(vector @ gamma @ vector)
    if form == 0.0:
        raise ConvergenceError("脉冲向量在 γ 下的二次型为零，无法缩放到目标相位")
    if sign is None:
        sign = 1 if form > 0 else -1
    if sign * form < 0:
        raise ConvergenceError("二次型符号与目标符号相反")
    return vector * math.sqrt(TARGET_ANGLE / abs(form)), sign


def optimize_pulse(context: GateContext, problem: Optional[OptimizationProblem] = None):
    """
    求解广义本征问题得到最优分段脉冲

    Returns:
        (PulseSequence, GateReport)

    Raises:
        ConvergenceError: 所有本征值无穷或 γ 恒为零
    """
    problem = problem or build_problem(context)
    multiplier, vector = _smallest_multiplier(problem.M, problem.gamma)
    sign = 1 if multiplier > 0 else -1
    amplitudes, sign = scale_to_target(vector, problem.gamma, sign)
    # 确定性输出：绝对值最大的段取正
    if amplitudes[int(np.argmax(np.abs(amplitudes)))] < 0:
        amplitudes = -amplitudes
    pulse = PulseSequence(amplitudes=amplitudes, sign=sign, edges=context.segment_edges_physical(),
                          multiplier=multiplier)
    report = report_for(context, problem, pulse)
    logger.info(f"脉冲优化: λ = {multiplier:.6e}, Θ = {report.theta:+.12f}, δF = {report.delta_f:.6e}, "
                f"最大 |Ω| = {pulse.peak:.4e} rad/s")
    return pulse, report


def report_for(context: GateContext, problem: OptimizationProblem, pulse: PulseSequence) -> GateReport:
    """由已组装的问题与脉冲生成报告；Rabi 幅度越界（缺省上限 |μ|）只标记不截断"""
    alpha = problem.coupling.alpha(pulse.amplitudes)
    theta = problem.gammas.theta(pulse.amplitudes)
    delta_f = infidelity(theta, pulse.target, alpha, problem.occupations)
    bound = context.laser.effective_rabi_bound
    violation = bound is not None and pulse.peak >= bound
    notes = ()
    if violation:
        logger.warning(f"最大 Rabi 幅度 {pulse.peak:.4e} rad/s 超过上限 {bound:.4e} rad/s（仅标记，不截断）")
        notes = (f"rabi bound exceeded: {pulse.peak:.6e} >= {bound:.6e}",)
    dropped = (problem.coupling.dropped_bound * float(np.sum(np.abs(pulse.amplitudes)))
               + problem.gammas.dropped_bound * float(np.sum(pulse.amplitudes ** 2)))
    return GateReport(theta=theta, target=pulse.target, alpha=alpha, occupations=problem.occupations,
                      delta_f=delta_f, start_offset=context.laser.start_offset, ions=context.laser.ions,
                      rabi_bound=bound, rabi_violation=violation, dropped_bound=dropped, notes=notes)


def evaluate_sequence(context: GateContext, pulse: PulseSequence, start_offset: Optional[float] = None) -> GateReport:
    """
    在给定起点偏移 t0 (s) 下重新计算 α、Θ、δF

    t0 缺省沿用上下文；分段边界整体平移，载波相位以门起点为参考。
    """
    if pulse.segments != context.segments:
        raise ValueError(f"脉冲段数 {pulse.segments} 与上下文 {context.segments} 不一致")
    if start_offset is not None and start_offset != context.laser.start_offset:
        context = context.with_start_offset(start_offset)
    return report_for(context, build_problem(context), pulse)


def compare_truncated_model(context: GateContext, pulse: PulseSequence, report: GateReport) -> pd.DataFrame:
    """
    完整模型与忽略微运动模型（L = 0、n_cut = 0）的交叉评估

    两个模型各自设计一次，每个脉冲在两个模型上各评估一次。

    Returns:
        DataFrame: design_model, evaluation_model, theta_rad, delta_F, max_alpha_abs，共 4 行
    """
    truncated = context.with_truncation(phase_order=0, sideband_order=0)
    truncated_pulse, truncated_report = optimize_pulse(truncated)
    rows = [
        ("full", "full", report),
        ("full", "truncated", evaluate_sequence(truncated, pulse)),
        ("truncated", "truncated", truncated_report),
        ("truncated", "full", evaluate_sequence(context, truncated_pulse)),
    ]
    frame = pd.DataFrame([{"design_model": design, "evaluation_model": evaluation, "theta_rad": item.theta,
                           "delta_F": item.delta_f, "max_alpha_abs": item.max_alpha}
                          for design, evaluation, item in rows])
    logger.info(f"截断模型对比: 完整设计 δF = {report.delta_f:.4e}, "
                f"忽略微运动的设计在完整模型下 δF = {rows[3][2].delta_f:.4e}")
    return frame
