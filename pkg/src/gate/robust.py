"""
=============================================================================
Paul 阱门设计工具包 - 抗失谐漂移的鲁棒脉冲
=============================================================================

把段权重 w_p = n_seg − p + 1 乘到耦合行向量上得到 Ã，
γ̃ 取 Γ' 实部并按行乘以 w_p。在约束 ΩᵀγΩ = ±π/4 下最小化

    cost(Ω) = ΩᵀM̃Ω + (Ωᵀγ̃Ω)² + ζ·ΩᵀMΩ

并要求脉冲对称 Ω(p) = Ω(n_seg − p + 1)，自由变量 ⌈n_seg/2⌉ 个。
用 scipy trust-constr 做带解析梯度与 Hessian 的约束优化，多起点取最优可行解。

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.optimize import NonlinearConstraint, minimize

from ..core.exceptions import ConfigError, ConvergenceError
from .context import GateContext
from .optimizer import (TARGET_ANGLE, GateReport, OptimizationProblem, PulseSequence, build_problem,
                        optimize_pulse, report_for)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RobustSettings:
    """鲁棒设计设置"""
    starts: int = 16
    seed: int = 0
    fidelity_weight: float = 0.0
    max_iterations: int = 2000
    constraint_tolerance: float = 1e-8
    sensitivity_step: float = 2.0 * math.pi * 1e3

    def __post_init__(self):
        if self.starts < 0:
            raise ConfigError(f"起点数不能为负: {self.starts}")
        if self.fidelity_weight < 0:
            raise ConfigError(f"fidelity_weight 不能为负: {self.fidelity_weight}")


def segment_weights(segments: int) -> np.ndarray:
    """(n_seg, n_seg − 1, …, 1)"""
    return np.arange(segments, 0, -1, dtype=float)


def symmetric_map(segments: int) -> np.ndarray:
    """P: ⌈n_seg/2⌉ 个自由变量 → n_seg 个段，Ω = P x"""
    free = (segments + 1) // 2
    P = np.zeros((segments, free))
    for p in range(segments):
        P[p, min(p, segments - 1 - p)] = 1.0
    return P


@dataclass(frozen=True, eq=False)
class RobustnessProblem:
    """约化到对称变量后的 M̃、γ̃、M、γ"""
    weighted_M: np.ndarray
    weighted_gamma: np.ndarray
    M: np.ndarray
    gamma: np.ndarray
    projection: np.ndarray
    fidelity_weight: float = 0.0

    @classmethod
    def from_problem(cls, problem: OptimizationProblem, fidelity_weight: float = 0.0) -> "RobustnessProblem":
        segments = problem.segments
        weights = segment_weights(segments)
        occupation_weights = 2.0 * problem.occupations + 1.0
        weighted = problem.coupling.weighted(weights)
        weighted_M = np.zeros((segments, segments))
        for slot in range(2):
            rows = weighted.rows[slot]
            weighted_M += np.real(rows.conj().T @ (occupation_weights[:, None] * rows))
        weighted_gamma = weights[:, None] * problem.gammas.pre_imaginary.real
        weighted_gamma = 0.5 * (weighted_gamma + weighted_gamma.T)
        P = symmetric_map(segments)
        return cls(weighted_M=P.T @ (0.5 * (weighted_M + weighted_M.T)) @ P,
                   weighted_gamma=P.T @ weighted_gamma @ P,
                   M=P.T @ problem.M @ P, gamma=P.T @ problem.gamma @ P,
                   projection=P, fidelity_weight=fidelity_weight)

    @property
    def free_variables(self) -> int:
        return self.projection.shape[1]

    def cost(self, x: np.ndarray) -> float:
        drift = float(x @ self.weighted_gamma @ x)
        return float(x @ self.weighted_M @ x) + drift ** 2 + self.fidelity_weight * float(x @ self.M @ x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        drift = float(x @ self.weighted_gamma @ x)
        return (2.0 * self.weighted_M @ x + 4.0 * drift * (self.weighted_gamma @ x)
                + 2.0 * self.fidelity_weight * (self.M @ x))

    def hessian(self, x: np.ndarray) -> np.ndarray:
        drift = float(x @ self.weighted_gamma @ x)
        gx = self.weighted_gamma @ x
        return (2.0 * self.weighted_M + 8.0 * np.outer(gx, gx) + 4.0 * drift * self.weighted_gamma
                + 2.0 * self.fidelity_weight * self.M)

    def rescaled(self, scale: float) -> "RobustnessProblem":
        """变量代换 x = scale·y 后的问题（四次项按 scale⁴ 缩放）"""
        s2 = scale * scale
        return RobustnessProblem(weighted_M=s2 * self.weighted_M, weighted_gamma=s2 * self.weighted_gamma,
                                 M=s2 * self.M, gamma=s2 * self.gamma, projection=self.projection,
                                 fidelity_weight=self.fidelity_weight)


@dataclass(frozen=True, eq=False)
class RobustDesign:
    """鲁棒设计结果与诊断"""
    pulse: PulseSequence
    report: GateReport
    standard_pulse: PulseSequence
    standard_report: GateReport
    cost: float
    standard_cost: float
    feasible_starts: int
    total_starts: int
    sensitivity: float
    standard_sensitivity: float

    def to_dict(self) -> dict:
        return {
            "cost": self.cost,
            "standard_cost": self.standard_cost,
            "feasible_starts": self.feasible_starts,
            "total_starts": self.total_starts,
            "delta_F": self.report.delta_f,
            "standard_delta_F": self.standard_report.delta_f,
            "sensitivity_per_rad_s": self.sensitivity,
            "standard_sensitivity_per_rad_s": self.standard_sensitivity,
        }


def _project_to_constraint(y: np.ndarray, gamma: np.ndarray, target: float) -> Optional[np.ndarray]:
    form = float(y @ gamma @ y)
    if form == 0.0 or form * target < 0:
        return None
    return y * math.sqrt(target / form)


def _starting_points(reduced: RobustnessProblem, standard: np.ndarray, target: float,
                     settings: RobustSettings) -> List[np.ndarray]:
    points = []
    first = _project_to_constraint(standard, reduced.gamma, target)
    if first is not None:
        points.append(first)
    rng = np.random.default_rng(settings.seed)
    attempts = 0
    while len(points) < settings.starts + (1 if first is not None else 0) and attempts < 20 * max(settings.starts, 1):
        attempts += 1
        candidate = _project_to_constraint(rng.standard_normal(reduced.free_variables), reduced.gamma, target)
        if candidate is not None:
            points.append(candidate)
    return points


def design_robust(context: GateContext, settings: Optional[RobustSettings] = None,
                  problem: Optional[OptimizationProblem] = None) -> RobustDesign:
    """
    多起点约束优化得到对称鲁棒脉冲

    Raises:
        ConfigError: n_seg < 2
        ConvergenceError: 没有任何起点收敛到可行点
    """
    from .drift import detuning_sensitivity

    settings = settings or RobustSettings()
    if context.segments < 2:
        raise ConfigError(f"鲁棒设计要求 n_seg ≥ 2: {context.segments}")
    problem = problem or build_problem(context)
    standard_pulse, standard_report = optimize_pulse(context, problem)
    target = standard_pulse.target

    reduced = RobustnessProblem.from_problem(problem, settings.fidelity_weight)
    # 无量纲化：y = x/scale 使约束矩阵范数为 π/4
    scale = math.sqrt(TARGET_ANGLE / max(float(np.linalg.norm(reduced.gamma, 2)), 1e-300))
    scaled = reduced.rescaled(scale)
    symmetric_standard = np.linalg.pinv(reduced.projection) @ standard_pulse.amplitudes / scale
    starts = _starting_points(scaled, symmetric_standard, target, settings)
    normalizer = max(abs(scaled.cost(starts[0])) if starts else 1.0, 1e-300)

    constraint = NonlinearConstraint(
        lambda y: np.array([y @ scaled.gamma @ y]), target, target,
        jac=lambda y: (2.0 * scaled.gamma @ y)[None, :],
        hess=lambda y, v: 2.0 * v[0] * scaled.gamma)

    best = None
    feasible = 0
    for index, start in enumerate(starts):
        result = minimize(lambda y: scaled.cost(y) / normalizer, start, method="trust-constr",
                          jac=lambda y: scaled.gradient(y) / normalizer,
                          hess=lambda y: scaled.hessian(y) / normalizer,
                          constraints=[constraint],
                          options={"maxiter": settings.max_iterations, "gtol": 1e-12, "xtol": 1e-14})
        violation = abs(float(result.x @ scaled.gamma @ result.x) - target)
        if violation > settings.constraint_tolerance * abs(target):
            logger.debug(f"起点 {index}: 约束偏差 {violation:.3e}，舍弃")
            continue
        y = _project_to_constraint(result.x, scaled.gamma, target)
        if y is None:
            continue
        feasible += 1
        cost = scaled.cost(y)
        logger.debug(f"起点 {index}: cost = {cost:.6e}")
        if best is None or cost < best[0]:
            best = (cost, y)

    if best is None:
        raise ConvergenceError(f"鲁棒设计的 {len(starts)} 个起点均未到达可行点",
                               {"starts": len(starts)})

    amplitudes = reduced.projection @ (best[1] * scale)
    if amplitudes[int(np.argmax(np.abs(amplitudes)))] < 0:
        amplitudes = -amplitudes
    pulse = PulseSequence(amplitudes=amplitudes, sign=standard_pulse.sign, edges=standard_pulse.edges,
                          symmetric=True)
    report = report_for(context, problem, pulse)
    cost = reduced.cost(best[1] * scale)
    standard_cost = robust_cost(problem, standard_pulse.amplitudes, settings.fidelity_weight)
    sensitivity = detuning_sensitivity(context, pulse, settings.sensitivity_step)
    standard_sensitivity = detuning_sensitivity(context, standard_pulse, settings.sensitivity_step)
    logger.info(f"鲁棒设计: 可行起点 {feasible}/{len(starts)}, δF = {report.delta_f:.4e} "
                f"(标准 {standard_report.delta_f:.4e}), 失谐灵敏度 {sensitivity:.3e} "
                f"(标准 {standard_sensitivity:.3e}) /(rad/s)")
    return RobustDesign(pulse=pulse, report=report, standard_pulse=standard_pulse,
                        standard_report=standard_report, cost=cost, standard_cost=standard_cost,
                        feasible_starts=feasible, total_starts=len(starts), sensitivity=sensitivity,
                        standard_sensitivity=standard_sensitivity)


def robust_cost(problem: OptimizationProblem, amplitudes: np.ndarray, fidelity_weight: float = 0.0) -> float:
    """任意（不必对称）脉冲的鲁棒代价，物理单位"""
    segments = problem.segments
    weights = segment_weights(segments)
    occupation_weights = 2.0 * problem.occupations + 1.0
    alpha = problem.coupling.weighted(weights).alpha(amplitudes)
    weighted_m = float(np.sum(np.abs(alpha) ** 2 * occupation_weights[None, :]))
    weighted_gamma = weights[:, None] * problem.gammas.pre_imaginary.real
    drift = float(amplitudes @ weighted_gamma @ amplitudes)
    return weighted_m + drift ** 2 + fidelity_weight * float(amplitudes @ problem.M @ amplitudes)
