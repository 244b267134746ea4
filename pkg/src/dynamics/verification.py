"""
简正模的分子动力学校验

在平衡轨道上叠加单个模式的位移与速度作为初值，直接积分完整运动方程，
减去平衡轨道后与模式展开 2c Σ C_{2n} cos((2n+β)t) 逐点比较。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..core.exceptions import ConfigError, InstabilityError
from ..core.models import TrapDrive
from ..crystal.equilibrium import EquilibriumTrajectory
from ..crystal.modes import ModeSet
from ..crystal.stability import AXES
from .integrator import IntegratorSettings, integrate

logger = logging.getLogger(__name__)

LINEAR_REGIME_AMPLITUDE = 0.1


@dataclass(frozen=True)
class ExcitationSpec:
    """激发设置：模式序号、实振幅 c、观测的离子与坐标轴"""
    mode_index: int
    amplitude: float = 0.01
    ion: int = 0
    axis: str = "x"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"观测轴必须是 x/y/z 之一: {self.axis}")
        if abs(self.amplitude) > LINEAR_REGIME_AMPLITUDE:
            logger.warning(f"激发振幅 {self.amplitude} 超过 {LINEAR_REGIME_AMPLITUDE}，可能偏离线性区")

    @property
    def axis_index(self) -> int:
        return AXES.index(self.axis)


@dataclass(frozen=True, eq=False)
class ModeVerification:
    """
    校验结果

    times: 以 RF 周期计的时刻
    md / prediction: 观测坐标相对平衡轨道的位移（分子动力学 / 模式展开）
    max_deviation: 观测坐标的最大 |差值|；max_deviation_all 为全部坐标的最大值
    """
    excitation: ExcitationSpec
    beta: float
    times: np.ndarray
    md: np.ndarray
    prediction: np.ndarray
    max_deviation: float
    max_deviation_all: float

    @property
    def difference(self) -> np.ndarray:
        return self.md - self.prediction

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "coordinate_md": self.md,
            "coordinate_modes": self.prediction,
            "difference": self.difference,
        })


def verify_mode(trajectory: EquilibriumTrajectory, drive: TrapDrive, modes: ModeSet,
                excitation: ExcitationSpec, settings: IntegratorSettings) -> ModeVerification:
    """
    以模式展开为初值做分子动力学积分并比较

    Raises:
        InstabilityError: 模式集不稳定或未归一化
        ConfigError: 模式序号或离子序号越界
    """
    if not modes.stable:
        raise InstabilityError("模式集包含虚指数，拒绝校验")
    if not 0 <= excitation.mode_index < len(modes):
        raise ConfigError(f"模式序号越界: {excitation.mode_index} (共 {len(modes)} 个)")
    if not 0 <= excitation.ion < trajectory.n_ions:
        raise ConfigError(f"离子序号越界: {excitation.ion}")
    mode = modes[excitation.mode_index]
    if not mode.normalized:
        raise InstabilityError(f"模式 {excitation.mode_index} 未归一化，拒绝校验")

    amplitude = excitation.amplitude
    positions = trajectory.positions(0.0) + mode.displacement(0.0, amplitude)
    velocities = trajectory.velocities(0.0) + mode.velocity(0.0, amplitude)
    logger.info(f"校验模式 {excitation.mode_index} (β={mode.beta:.8f}), 振幅 {amplitude}, "
                f"{settings.periods} 个周期 × {settings.steps_per_period} 步")
    trace = integrate(positions, velocities, drive, settings)

    offsets = trace.positions - trajectory.positions(trace.times)
    predicted = mode.displacement(trace.times, amplitude)
    deviation = offsets - predicted
    md = offsets[:, excitation.ion, excitation.axis_index]
    prediction = predicted[:, excitation.ion, excitation.axis_index]
    observed = float(np.max(np.abs(md - prediction)))
    overall = float(np.max(np.abs(deviation)))
    logger.info(f"模式 {excitation.mode_index} 最大偏差: 观测坐标 {observed:.3e}, 全部坐标 {overall:.3e}")
    return ModeVerification(excitation=excitation, beta=mode.beta, times=trace.periods, md=md,
                            prediction=prediction, max_deviation=observed, max_deviation_all=overall)
