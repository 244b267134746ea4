"""
=============================================================================
Paul 阱门设计工具包 - 周期平衡轨道求解
=============================================================================

求解 N 离子晶体的 π 周期平衡轨道

    R'' + (A − 2Q cos 2t) R − D(R) = F_dc

两阶段流程：
1. find_equilibrium_damped - 阻尼分子动力学搜索近似周期解，
   阻尼逐级减半模拟冷却过程，直到无阻尼演化的周期失配小于 ε_pos
2. refine_fourier - 余弦级数 R = B_0 + 2Σ B_n cos 2nt 的混合迭代：
   每步以 α ≥ 1 混合的线性方程组求解新的 B；收敛停滞或残差证书不满足时
   转为牛顿迭代（雅可比为 β = 0 的 Floquet 分块矩阵）

主要功能：
1. IterationSettings - 阻尼时间表、迭代容差与混合参数
2. EquilibriumTrajectory - 傅里叶系数 B_n（n = 0..M）与残差证书
3. equilibrium_residual - 在 2048 点网格上代入运动方程的最大缺陷
4. solve_equilibrium - 稳定性预检 → 阻尼搜索 → 傅里叶精化

使用示例：
    drive = TrapDrive.from_diagonal(omega_rf, (-0.015, -0.015, 0.03), (0.3, -0.3, 0.0))
    crystal = solve_equilibrium(drive, n_ions=2, settings=IterationSettings(), seed=7, order=6)
    print(crystal.residual, crystal.positions(0.0))

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from ..core.exceptions import (ConfigError, ConvergenceError, InstabilityError, SingularityError)
from ..core.models import TrapDrive
from .coulomb import coulomb_acceleration, coulomb_hessian, coulomb_series, fourier_coefficients
from .stability import check_trap_stability

logger = logging.getLogger(__name__)

RESIDUAL_GRID_POINTS = 2048


@dataclass(frozen=True)
class IterationSettings:
    """
    平衡求解设置

    mixing: 混合参数 α ≥ 1
    initial_damping / damping_reduction / damping_floor: 阻尼时间表
    relax_periods (N1) / check_periods (N2): 两阶段的 RF 周期数
    position_tolerance: 阻尼搜索的周期失配阈值 ε_pos
    tolerance: 傅里叶迭代相邻两步变化阈值
    residual_tolerance: 残差证书阈值
    """
    mixing: float = 1.0
    initial_damping: float = 0.1
    damping_reduction: float = 0.5
    damping_floor: float = 1e-4
    relax_periods: int = 50
    check_periods: int = 50
    position_tolerance: float = 1e-3
    max_relax_rounds: int = 200
    tolerance: float = 1e-12
    residual_tolerance: float = 1e-8
    max_iterations: int = 500
    newton_iterations: int = 30
    escape_radius: float = 1e3
    md_rtol: float = 1e-10
    md_atol: float = 1e-12

    def __post_init__(self):
        if self.mixing < 1.0:
            raise ConfigError(f"混合参数 α 必须 ≥ 1: {self.mixing}")
        if not self.initial_damping > 0 or not self.damping_floor > 0:
            raise ConfigError("阻尼参数必须为正")
        if not 0.0 < self.damping_reduction < 1.0:
            raise ConfigError(f"阻尼缩减因子必须位于 (0, 1): {self.damping_reduction}")
        for name in ("position_tolerance", "tolerance", "residual_tolerance"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} 必须为正")
        if self.relax_periods < 1 or self.check_periods < 1:
            raise ConfigError("阻尼搜索的周期数必须为正")


@dataclass(frozen=True, eq=False)
class EquilibriumTrajectory:
    """
    π 周期平衡轨道 R(t) = B_0 + 2 Σ_{n=1}^{M} B_n cos(2nt)

    coefficients: (M+1, N, 3) 实数组
    """
    coefficients: np.ndarray
    residual: float = math.inf
    converged: bool = False
    iterations: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=float)
        if coefficients.ndim != 3 or coefficients.shape[2] != 3:
            raise ValueError(f"系数形状应为 (M+1, N, 3)，实际 {coefficients.shape}")
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def n_ions(self) -> int:
        return self.coefficients.shape[1]

    @property
    def order(self) -> int:
        return self.coefficients.shape[0] - 1

    def _harmonic_sum(self, t, derivative: int) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        orders = np.arange(1, self.order + 1)
        angles = 2.0 * np.multiply.outer(t, orders)
        freq = (2.0 * orders) ** derivative
        if derivative % 2 == 0:
            basis = np.cos(angles) * freq * (-1) ** (derivative // 2)
        else:
            basis = np.sin(angles) * freq * (-1) ** ((derivative + 1) // 2)
        result = 2.0 * np.tensordot(basis, self.coefficients[1:], axes=([-1], [0]))
        if derivative == 0:
            result = result + self.coefficients[0]
        return result

    def positions(self, t) -> np.ndarray:
        return self._harmonic_sum(t, 0)

    def velocities(self, t) -> np.ndarray:
        return self._harmonic_sum(t, 1)

    def accelerations(self, t) -> np.ndarray:
        return self._harmonic_sum(t, 2)

    def sample_times(self, count: int) -> np.ndarray:
        return math.pi * np.arange(count) / count

    def samples(self, count: int) -> np.ndarray:
        """[0, π) 上 count 个均匀采样点的位置 (count, N, 3)"""
        return self.positions(self.sample_times(count))

    def full_coefficients(self) -> np.ndarray:
        """n ∈ [−M, M] 的对称系数 (2M+1, N, 3)"""
        return np.concatenate([self.coefficients[:0:-1], self.coefficients], axis=0)

    def with_order(self, order: int) -> "EquilibriumTrajectory":
        """截断或零填充到 order 阶（不再视为已收敛）"""
        coefficients = np.zeros((order + 1, self.n_ions, 3))
        keep = min(order, self.order) + 1
        coefficients[:keep] = self.coefficients[:keep]
        return EquilibriumTrajectory(coefficients, iterations=self.iterations, seed=self.seed)

    def with_certificate(self, residual: float, converged: bool, iterations: int) -> "EquilibriumTrajectory":
        return replace(self, residual=residual, converged=converged, iterations=iterations)

    @classmethod
    def from_samples(cls, samples: np.ndarray, order: int, seed: Optional[int] = None) -> "EquilibriumTrajectory":
        """由 [0, π) 均匀采样投影到余弦系数（取实部）"""
        count = samples.shape[0]
        spectrum = np.fft.fft(samples, axis=0) / count
        return cls(np.ascontiguousarray(spectrum[: order + 1].real), seed=seed)

    def to_dict(self) -> dict:
        return {
            "n_ions": self.n_ions,
            "fourier_order": self.order,
            "residual": self.residual,
            "converged": self.converged,
            "iterations": self.iterations,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class DampedSearchResult:
    """阻尼搜索结果：一个周期的采样与诊断"""
    times: np.ndarray
    positions: np.ndarray
    mismatch: float
    damping: float
    periods: int
    seed: Optional[int]

    def trajectory(self, order: int) -> EquilibriumTrajectory:
        return EquilibriumTrajectory.from_samples(self.positions, order, seed=self.seed)


def sample_count(order: int) -> int:
    """每周期采样点数 8(2M+1)"""
    return 8 * (2 * order + 1)


def _drive_acceleration(drive: TrapDrive, positions: np.ndarray, t) -> np.ndarray:
    """阱力与杂散直流力 −(A − 2Q cos 2t) R + F_dc，t 可带批量维度"""
    cos_term = np.cos(2.0 * np.asarray(t, dtype=float))[..., None, None]
    return -positions @ drive.A + 2.0 * cos_term * (positions @ drive.Q) + drive.dc_force


def equilibrium_residual(trajectory: EquilibriumTrajectory, drive: TrapDrive,
                         points: int = RESIDUAL_GRID_POINTS, batch: int = 256) -> float:
    """在一个周期 points 个点上代入运动方程的最大缺陷"""
    times = trajectory.sample_times(points)
    worst = 0.0
    for start in range(0, points, batch):
        t = times[start:start + batch]
        positions = trajectory.positions(t)
        defect = (trajectory.accelerations(t) - _drive_acceleration(drive, positions, t)
                  - coulomb_acceleration(positions))
        worst = max(worst, float(np.max(np.abs(defect))))
    return worst


# ---------------------------------------------------------------------------
# 阻尼分子动力学搜索
# ---------------------------------------------------------------------------

class _DampedDynamics:
    """阻尼运动方程的积分器封装"""

    def __init__(self, drive: TrapDrive, n_ions: int, settings: IterationSettings):
        self.drive = drive
        self.n_ions = n_ions
        self.settings = settings

    def rhs(self, t: float, y: np.ndarray, damping: float) -> np.ndarray:
        size = 3 * self.n_ions
        positions = y[:size].reshape(self.n_ions, 3)
        velocities = y[size:]
        acceleration = (_drive_acceleration(self.drive, positions, t)
                        + coulomb_acceleration(positions)).ravel() - damping * velocities
        return np.concatenate([velocities, acceleration])

    def evolve(self, y: np.ndarray, periods: int, damping: float,
               t_eval: Optional[np.ndarray] = None):
        """从 t = 0 演化整数个周期（方程 π 周期，时间原点可复位）"""
        try:
            solution = solve_ivp(self.rhs, (0.0, periods * math.pi), y, method="DOP853",
                                 args=(damping,), rtol=self.settings.md_rtol,
                                 atol=self.settings.md_atol, t_eval=t_eval)
        except SingularityError as exc:
            raise InstabilityError(f"阻尼搜索中离子碰撞: {exc.message}", exc.details) from exc
        if solution.status != 0:
            raise ConvergenceError(f"阻尼演化积分失败: {solution.message}", {"damping": damping})
        end = solution.y[:, -1]
        radius = float(np.max(np.abs(end[: 3 * self.n_ions])))
        if not radius < self.settings.escape_radius:
            raise InstabilityError(f"离子逃逸: 最大坐标 {radius:.3e} 超出 {self.settings.escape_radius}",
                                   {"radius": radius})
        return end, solution

    def mismatch(self, start: np.ndarray, end: np.ndarray) -> float:
        size = 3 * self.n_ions
        return float(np.max(np.abs(end[:size] - start[:size])))


def _initial_positions(n_ions: int, rng: np.random.Generator) -> np.ndarray:
    """半径 2N^{1/3} 球内均匀分布"""
    radius = 2.0 * n_ions ** (1.0 / 3.0)
    directions = rng.standard_normal((n_ions, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.random(n_ions) ** (1.0 / 3.0)
    return directions * radii[:, None]


def find_equilibrium_damped(drive: TrapDrive, n_ions: int, settings: IterationSettings,
                            seed: Optional[int] = None, order: int = 6) -> DampedSearchResult:
    """
    阻尼分子动力学搜索近似周期解

    阶段 1 以阻尼 γ 反复演化 N1 个周期直到单周期失配 < ε_pos；
    阶段 2 无阻尼演化 N2 个周期检查最大失配，失败则 γ 减半重来。

    Returns:
        DampedSearchResult: [0, π) 上 8(2M+1) 个采样点
    """
    count = sample_count(order)
    times = math.pi * np.arange(count) / count
    if n_ions < 1:
        raise ConfigError(f"离子数必须为正: {n_ions}")
    if n_ions == 1 and not drive.has_dc_force:
        return DampedSearchResult(times=times, positions=np.zeros((count, 1, 3)), mismatch=0.0,
                                  damping=0.0, periods=0, seed=seed)

    rng = np.random.default_rng(seed)
    dynamics = _DampedDynamics(drive, n_ions, settings)
    y = np.concatenate([_initial_positions(n_ions, rng).ravel(), np.zeros(3 * n_ions)])
    damping = settings.initial_damping
    periods = 0
    logger.info(f"阻尼搜索开始: N={n_ions}, seed={seed}, γ={damping}")

    while True:
        relax_mismatch = math.inf
        for _ in range(settings.max_relax_rounds):
            y, _ = dynamics.evolve(y, settings.relax_periods, damping)
            following, _ = dynamics.evolve(y, 1, damping)
            periods += settings.relax_periods + 1
            relax_mismatch = dynamics.mismatch(y, following)
            y = following
            if relax_mismatch < settings.position_tolerance:
                break
        else:
            raise ConvergenceError(
                f"阻尼阶段未收敛: γ={damping:.3e}, 失配 {relax_mismatch:.3e}",
                {"damping": damping, "mismatch": relax_mismatch, "periods": periods})

        worst = 0.0
        current = y
        for _ in range(settings.check_periods):
            following, _ = dynamics.evolve(current, 1, 0.0)
            worst = max(worst, dynamics.mismatch(current, following))
            current = following
        periods += settings.check_periods
        logger.debug(f"γ={damping:.3e}: 阻尼失配 {relax_mismatch:.3e}, 无阻尼最大失配 {worst:.3e}")

        if worst < settings.position_tolerance:
            break
        damping *= settings.damping_reduction
        if damping < settings.damping_floor:
            raise ConvergenceError(
                f"阻尼降至下限仍未找到周期解，最终失配 {worst:.3e}",
                {"damping": damping, "mismatch": worst, "periods": periods})

    _, solution = dynamics.evolve(y, 1, 0.0, t_eval=times)
    positions = solution.y[: 3 * n_ions].T.reshape(count, n_ions, 3)
    logger.info(f"阻尼搜索完成: γ={damping:.3e}, 失配 {worst:.3e}, 共 {periods} 个周期")
    return DampedSearchResult(times=times, positions=positions, mismatch=worst, damping=damping,
                              periods=periods, seed=seed)


# ---------------------------------------------------------------------------
# 傅里叶迭代
# ---------------------------------------------------------------------------

class _FourierSystem:
    """n ∈ [−M, M] 的傅里叶分块线性系统"""

    def __init__(self, drive: TrapDrive, n_ions: int, order: int):
        self.drive = drive
        self.n_ions = n_ions
        self.order = order
        self.block = 3 * n_ions
        self.size = (2 * order + 1) * self.block
        self.samples = sample_count(order)
        self.static = self._static_matrix()

    def _static_matrix(self) -> np.ndarray:
        """kron(I_N, A − 4n²) 对角块与 −kron(I_N, Q) 相邻块"""
        eye = np.eye(self.n_ions)
        matrix = np.zeros((self.size, self.size))
        coupling = -np.kron(eye, self.drive.Q)
        for index, n in enumerate(range(-self.order, self.order + 1)):
            rows = slice(index * self.block, (index + 1) * self.block)
            matrix[rows, rows] = np.kron(eye, self.drive.A - 4.0 * n * n * np.eye(3))
            if index + 1 < 2 * self.order + 1:
                cols = slice((index + 1) * self.block, (index + 2) * self.block)
                matrix[rows, cols] = coupling
                matrix[cols, rows] = coupling
        return matrix

    def pack(self, full: np.ndarray) -> np.ndarray:
        return full.reshape(-1)

    def unpack(self, vector: np.ndarray) -> np.ndarray:
        full = vector.reshape(2 * self.order + 1, self.n_ions, 3)
        return 0.5 * (full + full[::-1])

    def trajectory(self, full: np.ndarray) -> EquilibriumTrajectory:
        return EquilibriumTrajectory(full[self.order:])

    def toeplitz(self, blocks: np.ndarray, expand) -> np.ndarray:
        """blocks[k + 2M] 对应差 n − m = k 的块，expand 把 N×N 或 3N×3N 块映射到 3N×3N"""
        matrix = np.zeros((self.size, self.size))
        span = 2 * self.order + 1
        for row in range(span):
            for col in range(span):
                k = row - col
                matrix[row * self.block:(row + 1) * self.block,
                       col * self.block:(col + 1) * self.block] = expand(blocks[k + 2 * self.order])
        return matrix

    def forcing(self) -> np.ndarray:
        rhs = np.zeros((2 * self.order + 1, self.n_ions, 3))
        rhs[self.order] = self.drive.dc_force
        return rhs

    def mixing_step(self, full: np.ndarray, mixing: float) -> np.ndarray:
        traj = self.trajectory(full)
        series = coulomb_series(traj.samples(self.samples), 2 * self.order)
        eye3 = np.eye(3)
        matrix = self.static + 4.0 * mixing * self.toeplitz(series.G, lambda g: np.kron(g, eye3))
        rhs = (1.0 + mixing) * series.D[self.order:3 * self.order + 1] + self.forcing()
        solution = scipy.linalg.solve(matrix, self.pack(rhs), assume_a="sym")
        return self.unpack(solution)

    def newton_step(self, full: np.ndarray) -> np.ndarray:
        traj = self.trajectory(full)
        samples = traj.samples(self.samples)
        series = coulomb_series(samples, 2 * self.order)
        hessian = fourier_coefficients(coulomb_hessian(samples), 2 * self.order, name="K")
        jacobian = self.static + 4.0 * self.toeplitz(hessian, lambda k: k)
        defect = self.static @ self.pack(full) - self.pack(series.D[self.order:3 * self.order + 1] + self.forcing())
        step, *_ = scipy.linalg.lstsq(jacobian, -defect)
        return self.unpack(self.pack(full) + step)


def refine_fourier(trajectory: EquilibriumTrajectory, drive: TrapDrive, settings: IterationSettings,
                   order: Optional[int] = None) -> EquilibriumTrajectory:
    """
    傅里叶混合迭代精化平衡轨道

    Args:
        trajectory: 近似解（通常来自阻尼搜索）
        drive: 阱驱动
        settings: 迭代设置
        order: 傅里叶阶数 M，缺省沿用输入

    Returns:
        converged=True 且残差证书满足的轨道

    Raises:
        ConvergenceError: 迭代发散或残差证书无法满足
    """
    order = trajectory.order if order is None else order
    system = _FourierSystem(drive, trajectory.n_ions, order)
    full = trajectory.with_order(order).full_coefficients()

    changes = []
    best = (math.inf, full)
    growth = 0
    stalled = 0
    iterations = 0
    reason = "max_iterations"
    for iterations in range(1, settings.max_iterations + 1):
        updated = system.mixing_step(full, settings.mixing)
        change = float(np.max(np.abs(updated - full)))
        full = updated
        if change < best[0]:
            best = (change, full)
        if changes:
            growth = growth + 1 if change > changes[-1] else 0
            stalled = stalled + 1 if change > 0.95 * changes[-1] else 0
        changes.append(change)
        if change < settings.tolerance:
            reason = "converged"
            break
        if growth >= 3:
            reason = "diverged"
            break
        if stalled >= 5:
            reason = "stalled"
            break

    logger.info(f"混合迭代结束 ({reason}): {iterations} 步, 最后变化 {changes[-1]:.3e}")
    if reason == "diverged":
        full = best[1]

    residual = equilibrium_residual(system.trajectory(full), drive)
    if reason != "converged" or residual >= settings.residual_tolerance:
        logger.info(f"转入牛顿迭代: 当前残差 {residual:.3e}")
        for step in range(1, settings.newton_iterations + 1):
            updated = system.newton_step(full)
            change = float(np.max(np.abs(updated - full)))
            full = updated
            iterations += 1
            residual = equilibrium_residual(system.trajectory(full), drive)
            logger.debug(f"牛顿第 {step} 步: 变化 {change:.3e}, 残差 {residual:.3e}")
            if change < settings.tolerance or (residual < settings.residual_tolerance
                                               and change < math.sqrt(settings.tolerance)):
                break

    if not residual < settings.residual_tolerance:
        suggestion = "增大混合参数 α 或改进初值" if reason == "diverged" else "检查阱参数或提高傅里叶阶数"
        raise ConvergenceError(
            f"傅里叶迭代未满足残差证书: 残差 {residual:.3e} ≥ {settings.residual_tolerance:.1e}（{suggestion}）",
            {"residual": residual, "iterations": iterations, "reason": reason,
             "last_change": changes[-1] if changes else None})

    result = system.trajectory(full).with_certificate(residual, True, iterations)
    logger.info(f"平衡轨道收敛: M={order}, 迭代 {iterations} 次, 残差 {residual:.3e}")
    return replace(result, seed=trajectory.seed)


def solve_equilibrium(drive: TrapDrive, n_ions: int, settings: IterationSettings,
                      seed: Optional[int] = None, order: int = 6) -> EquilibriumTrajectory:
    """稳定性预检 → 阻尼搜索 → 傅里叶精化"""
    check_trap_stability(drive)
    damped = find_equilibrium_damped(drive, n_ions, settings, seed=seed, order=order)
    return refine_fourier(damped.trajectory(order), drive, settings, order=order)
