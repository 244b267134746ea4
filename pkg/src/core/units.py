"""
=============================================================================
Paul 阱门设计工具包 - 单位系统
=============================================================================

所有求解器在无量纲单位下工作，物理单位只出现在输入/输出边界：
- 长度单位 L0 = (Z²e²/4πε0 m ω_rf²)^{1/3}
- 时间单位 T0 = 2/ω_rf（一个 RF 周期对应无量纲时间 π）
- 频率单位 ω_rf/2，能量单位 m L0²/T0²

主要功能：
1. PhysicalConstants - CODATA 常数（来自 scipy.constants）
2. build_units - 由离子种类与阱驱动导出 UnitSystem
3. nondimensionalize / dimensionalize - 按量纲标签互相转换
4. delta_k_counterprop / lamb_dicke / thermal_occupation - 激光与热声子辅助量

使用示例：
    units = build_units(IonSpecies.ytterbium_171(), drive)
    x = nondimensionalize(0.2e-6, Dimension.LENGTH, units)

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Union

import numpy as np
from scipy import constants as sc

from .exceptions import ConfigError

if TYPE_CHECKING:
    from .models import IonSpecies, TrapDrive


@dataclass(frozen=True)
class PhysicalConstants:
    """物理常数（SI 单位，CODATA 取值）"""
    hbar: float = sc.hbar
    k_boltzmann: float = sc.k
    elementary_charge: float = sc.e
    vacuum_permittivity: float = sc.epsilon_0
    atomic_mass_unit: float = sc.atomic_mass


CODATA = PhysicalConstants()


class Dimension(Enum):
    """物理量量纲标签"""
    LENGTH = "length"
    TIME = "time"
    FREQUENCY = "frequency"
    VELOCITY = "velocity"
    ENERGY = "energy"
    WAVENUMBER = "wavenumber"


@dataclass(frozen=True)
class UnitSystem:
    """无量纲单位尺度，由 build_units 导出，不应直接构造"""
    length: float
    time: float
    energy: float

    @property
    def frequency(self) -> float:
        """频率尺度 ω_rf/2 (rad/s)"""
        return 1.0 / self.time

    @property
    def velocity(self) -> float:
        return self.length / self.time

    @property
    def rf_period(self) -> float:
        """一个 RF 周期 (s)，即无量纲时间 π"""
        return math.pi * self.time

    def scale(self, dimension: Union[Dimension, str]) -> float:
        dim = _as_dimension(dimension)
        return {
            Dimension.LENGTH: self.length,
            Dimension.TIME: self.time,
            Dimension.FREQUENCY: self.frequency,
            Dimension.VELOCITY: self.velocity,
            Dimension.ENERGY: self.energy,
            Dimension.WAVENUMBER: 1.0 / self.length,
        }[dim]

    def to_dict(self) -> dict:
        return {"L0_m": self.length, "T0_s": self.time, "energy_J": self.energy}


def _as_dimension(dimension: Union[Dimension, str]) -> Dimension:
    if isinstance(dimension, Dimension):
        return dimension
    try:
        return Dimension(str(dimension).lower())
    except ValueError:
        raise ConfigError(f"未知的量纲标签: {dimension}", {"dimension": str(dimension)}) from None


def build_units(species: "IonSpecies", drive: "TrapDrive",
                constants: PhysicalConstants = CODATA) -> UnitSystem:
    """
    由离子种类与 RF 频率导出单位系统

    Args:
        species: 离子种类（质量、电荷数）
        drive: 阱驱动（只使用 rf_frequency）
        constants: 物理常数

    Returns:
        UnitSystem: L0、T0 与能量尺度
    """
    charge = species.charge * constants.elementary_charge
    coulomb = charge ** 2 / (4.0 * math.pi * constants.vacuum_permittivity)
    length = (coulomb / (species.mass * drive.rf_frequency ** 2)) ** (1.0 / 3.0)
    time = 2.0 / drive.rf_frequency
    energy = species.mass * length ** 2 / time ** 2
    return UnitSystem(length=length, time=time, energy=energy)


def nondimensionalize(value, dimension: Union[Dimension, str], units: UnitSystem):
    """物理量 → 无量纲量"""
    scale = units.scale(dimension)
    if np.ndim(value):
        return np.asarray(value, dtype=float) / scale
    return float(value) / scale


def dimensionalize(value, dimension: Union[Dimension, str], units: UnitSystem):
    """无量纲量 → 物理量"""
    scale = units.scale(dimension)
    if np.ndim(value):
        return np.asarray(value, dtype=float) * scale
    return float(value) * scale


def delta_k_counterprop(wavelength: float) -> float:
    """对向传播 Raman 光束的波矢差 Δk = 2·(2π/λ)，λ → ∞ 时返回 0"""
    if wavelength <= 0:
        raise ConfigError(f"波长必须为正: {wavelength}")
    if math.isinf(wavelength):
        return 0.0
    return 4.0 * math.pi / wavelength


def lamb_dicke(delta_k: float, mass: float, omega, constants: PhysicalConstants = CODATA):
    """η = Δk·sqrt(ħ/2mω)，omega 可为数组"""
    omega = np.asarray(omega, dtype=float)
    eta = delta_k * np.sqrt(constants.hbar / (2.0 * mass * omega))
    return float(eta) if eta.ndim == 0 else eta


def thermal_occupation(omega, temperature: float, constants: PhysicalConstants = CODATA):
    """玻色占据数 n̄ = 1/(exp(ħω/k_B T) − 1)；T = 0 时为 0"""
    omega = np.asarray(omega, dtype=float)
    if temperature <= 0:
        occupation = np.zeros_like(omega)
    else:
        occupation = 1.0 / np.expm1(constants.hbar * omega / (constants.k_boltzmann * temperature))
    return float(occupation) if occupation.ndim == 0 else occupation
