"""
=============================================================================
Paul 阱门设计工具包 - 四阶辛积分器
=============================================================================

完整非线性运动方程的直接分子动力学积分，作为平衡轨道与简正模的独立校验。

采用 Forest-Ruth 四阶对称组合（θ = 1/(2 − 2^{1/3})）：

    D(θ/2) K(θ) D((1−θ)/2) K(1−2θ) D((1−θ)/2) K(θ) D(θ/2)

时间显式依赖的力在各级对应的时刻求值（时间随漂移推进），保持四阶精度与时间可逆性。

主要功能：
1. IntegratorSettings - 每 RF 周期步数、周期数、记录间隔
2. integrate - 从给定初始位置/速度积分，返回 DynamicsTrace
3. frozen_energy - 冻结时间势能下的能量（自检用）

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.exceptions import CollisionError, ConfigError, SingularityError
from ..core.models import TrapDrive
from ..crystal.coulomb import coulomb_acceleration, pair_potential

logger = logging.getLogger(__name__)

_THETA = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
DRIFT_COEFFICIENTS = (_THETA / 2.0, (1.0 - _THETA) / 2.0, (1.0 - _THETA) / 2.0, _THETA / 2.0)
KICK_COEFFICIENTS = (0.0, _THETA, 1.0 - 2.0 * _THETA, _THETA)


@dataclass(frozen=True)
class IntegratorSettings:
    """
    分子动力学积分设置

    steps_per_period: 每个 RF 周期（无量纲 π）的步数
    periods: 积分的 RF 周期数
    record_stride: 每隔多少步记录一次
    min_distance: 碰撞判据（L0）
    frozen_time: 若给定，力在该时刻冻结（能量守恒自检）
    """
    steps_per_period: int = 1000
    periods: int = 10
    record_stride: int = 1
    min_distance: float = 1e-6
    frozen_time: Optional[float] = None

    def __post_init__(self):
        if self.steps_per_period < 100:
            raise ConfigError(f"每周期步数必须 ≥ 100: {self.steps_per_period}")
        if self.periods < 0:
            raise ConfigError(f"周期数不能为负: {self.periods}")
        if self.record_stride < 1:
            raise ConfigError(f"记录间隔必须为正: {self.record_stride}")

    @property
    def step(self) -> float:
        return math.pi / self.steps_per_period

    @property
    def total_steps(self) -> int:
        return self.steps_per_period * self.periods


@dataclass(frozen=True, eq=False)
class DynamicsTrace:
    """积分记录：times (K,)，positions / velocities (K, N, 3)"""
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray

    @property
    def final_positions(self) -> np.ndarray:
        return self.positions[-1]

    @property
    def final_velocities(self) -> np.ndarray:
        return self.velocities[-1]

    @property
    def periods(self) -> np.ndarray:
        """记录时刻（以 RF 周期计）"""
        return self.times / math.pi


def _trap_acceleration(drive: TrapDrive, positions: np.ndarray, t: float) -> np.ndarray:
    return -positions @ drive.A + 2.0 * math.cos(2.0 * t) * (positions @ drive.Q) + drive.dc_force


def acceleration(drive: TrapDrive, positions: np.ndarray, t: float, min_distance: float = 0.0) -> np.ndarray:
    """完整加速度：阱力 + 库仑力 + 直流力；离子间距低于 min_distance 抛出 CollisionError"""
    try:
        coulomb = coulomb_acceleration(positions, min_distance)
    except SingularityError as exc:
        raise CollisionError(f"t = {t:.6f} 时离子碰撞: {exc.message}", time=t, pair=exc.pair,
                             details=exc.details) from exc
    return _trap_acceleration(drive, positions, t) + coulomb


def frozen_energy(drive: TrapDrive, positions: np.ndarray, velocities: np.ndarray, t: float) -> float:
    """时间冻结在 t 时的总能量：动能 + 阱势 + 库仑势 − F·R"""
    stiffness = drive.A - 2.0 * math.cos(2.0 * t) * drive.Q
    kinetic = 0.5 * float(np.sum(velocities * velocities))
    trap = 0.5 * float(np.sum((positions @ stiffness) * positions))
    coulomb = pair_potential(positions) if positions.shape[0] > 1 else 0.0
    return kinetic + trap + coulomb - float(np.sum(positions @ drive.dc_force))


def integrate(positions: np.ndarray, velocities: np.ndarray, drive: TrapDrive,
              settings: IntegratorSettings, t_start: float = 0.0, reverse: bool = False) -> DynamicsTrace:
    """
    四阶辛积分

    Args:
        positions, velocities: (N, 3) 初始状态（无量纲）
        drive: 阱驱动
        settings: 积分设置
        t_start: 起始时刻
        reverse: 逆时间积分（步长取负）

    Returns:
        DynamicsTrace，包含起点与每 record_stride 步的记录（终点总被记录）

    Raises:
        CollisionError: 离子间距低于 settings.min_distance
    """
    position = np.array(positions, dtype=float)
    velocity = np.array(velocities, dtype=float)
    if position.shape != velocity.shape or position.ndim != 2 or position.shape[1] != 3:
        raise ConfigError(f"初始状态形状必须为 (N, 3): {position.shape}, {velocity.shape}")

    dt = -settings.step if reverse else settings.step
    total = settings.total_steps
    frozen = settings.frozen_time
    record_count = total // settings.record_stride + 1 + (1 if total % settings.record_stride else 0)
    times = np.empty(record_count)
    trace_positions = np.empty((record_count,) + position.shape)
    trace_velocities = np.empty((record_count,) + position.shape)
    times[0] = t_start
    trace_positions[0] = position
    trace_velocities[0] = velocity
    record = 1

    logger.debug(f"辛积分: N={position.shape[0]}, {total} 步, dt={dt:.3e}")
    for step in range(1, total + 1):
        start = t_start + (step - 1) * dt
        elapsed = 0.0
        for drift, kick in zip(DRIFT_COEFFICIENTS, KICK_COEFFICIENTS):
            if kick:
                stage_time = start + elapsed if frozen is None else frozen
                velocity += kick * dt * acceleration(drive, position, stage_time, settings.min_distance)
            position += drift * dt * velocity
            elapsed += drift * dt
        if step % settings.record_stride == 0 or step == total:
            times[record] = t_start + step * dt
            trace_positions[record] = position
            trace_velocities[record] = velocity
            record += 1

    return DynamicsTrace(times=times[:record], positions=trace_positions[:record],
                         velocities=trace_velocities[:record])
