"""
=============================================================================
Paul 阱门设计工具包 - 物理模型数据类
=============================================================================

本模块定义所有模块共享的不可变配置类型：
- IonSpecies: 离子种类（质量 kg、电荷数）
- TrapDrive: RF 频率与 3×3 无量纲 A、Q 矩阵，可选杂散直流力
- LaserConfig: 激光几何、失谐、门时间、分段数与目标离子
- ThermalSpectrum: 温度定义（显式温度或多普勒线宽）
- TruncationSettings: 各级截断阶数与级数精度

全部类型构造后不可变，可在线程间安全共享。

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .exceptions import ConfigError
from .units import CODATA, PhysicalConstants, thermal_occupation

_SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class IonSpecies:
    """离子种类"""
    mass: float
    charge: int = 1
    label: str = "ion"

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigError(f"离子质量必须为正: {self.mass}")
        if int(self.charge) != self.charge or self.charge < 1:
            raise ConfigError(f"电荷数必须是正整数: {self.charge}")

    @classmethod
    def ytterbium_171(cls) -> "IonSpecies":
        return cls(mass=170.936323 * CODATA.atomic_mass_unit, charge=1, label="171Yb+")

    def to_dict(self) -> dict:
        return {"mass_kg": self.mass, "charge": self.charge, "label": self.label}


def _symmetric_matrix(name: str, value) -> np.ndarray:
    matrix = np.array(value, dtype=float)
    if matrix.shape != (3, 3):
        raise ConfigError(f"{name} 必须是 3×3 矩阵，实际形状 {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if np.max(np.abs(matrix - matrix.T)) > _SYMMETRY_TOLERANCE * scale:
        raise ConfigError(f"{name} 矩阵不对称", {"matrix": matrix.tolist()})
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class TrapDrive:
    """
    阱驱动

    无量纲运动方程: R'' + (A − 2Q cos 2t) R − Coulomb(R) = dc_force
    """
    rf_frequency: float
    A: np.ndarray
    Q: np.ndarray
    dc_force: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if not self.rf_frequency > 0:
            raise ConfigError(f"RF 频率必须为正: {self.rf_frequency}")
        object.__setattr__(self, "A", _symmetric_matrix("A", self.A))
        object.__setattr__(self, "Q", _symmetric_matrix("Q", self.Q))
        force = np.array(self.dc_force, dtype=float).reshape(3)
        force.setflags(write=False)
        object.__setattr__(self, "dc_force", force)

    @classmethod
    def from_diagonal(cls, rf_frequency: float, a: Sequence[float], q: Sequence[float],
                      dc_force: Optional[Sequence[float]] = None) -> "TrapDrive":
        """由对角 (a, q) 简写构造"""
        return cls(rf_frequency=rf_frequency, A=np.diag(np.asarray(a, dtype=float)),
                   Q=np.diag(np.asarray(q, dtype=float)),
                   dc_force=np.zeros(3) if dc_force is None else dc_force)

    @property
    def is_diagonal(self) -> bool:
        return (np.count_nonzero(self.A - np.diag(np.diag(self.A))) == 0
                and np.count_nonzero(self.Q - np.diag(np.diag(self.Q))) == 0)

    @property
    def has_dc_force(self) -> bool:
        return bool(np.any(self.dc_force))

    def to_dict(self) -> dict:
        return {
            "rf_frequency_rad_s": self.rf_frequency,
            "A": self.A.tolist(),
            "Q": self.Q.tolist(),
            "dc_force": self.dc_force.tolist(),
        }


@dataclass(frozen=True, eq=False)
class LaserConfig:
    """双色 Raman 激光与门参数（物理单位）"""
    delta_k: float
    direction: np.ndarray
    detuning: float
    gate_time: float
    segments: int
    ions: Tuple[int, int]
    static_phase: float = 0.0
    start_offset: float = 0.0
    rabi_bound: Optional[float] = None
    include_equilibrium_phase: bool = False
    rabi_check: bool = True

    def __post_init__(self):
        direction = np.array(self.direction, dtype=float).reshape(3)
        if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
            raise ConfigError(f"激光方向必须是单位向量，|m̂| = {np.linalg.norm(direction)!r}")
        direction.setflags(write=False)
        object.__setattr__(self, "direction", direction)
        i, j = (int(k) for k in self.ions)
        if i == j:
            raise ConfigError(f"目标离子必须不同: ({i}, {j})")
        object.__setattr__(self, "ions", (i, j))
        if not self.gate_time > 0:
            raise ConfigError(f"门时间必须为正: {self.gate_time}")
        if int(self.segments) != self.segments or self.segments < 1:
            raise ConfigError(f"分段数必须是正整数: {self.segments}")
        if self.delta_k < 0:
            raise ConfigError(f"波矢差不能为负: {self.delta_k}")

    @property
    def effective_rabi_bound(self) -> Optional[float]:
        """Rabi 幅度上限：显式配置优先，否则取 |μ|；关闭检查时为 None"""
        if not self.rabi_check:
            return None
        return self.rabi_bound if self.rabi_bound is not None else abs(self.detuning)

    def with_updates(self, **changes) -> "LaserConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "delta_k_per_m": self.delta_k,
            "direction": self.direction.tolist(),
            "detuning_rad_s": self.detuning,
            "gate_time_s": self.gate_time,
            "segments": self.segments,
            "ions": list(self.ions),
            "static_phase_rad": self.static_phase,
            "start_offset_s": self.start_offset,
            "rabi_bound_rad_s": self.rabi_bound,
            "include_equilibrium_phase": self.include_equilibrium_phase,
            "rabi_check": self.rabi_check,
        }


@dataclass(frozen=True)
class ThermalSpectrum:
    """温度定义：显式温度 T 或多普勒线宽 Γ（k_B T = ħΓ/2）"""
    temperature: Optional[float] = None
    doppler_linewidth: Optional[float] = None

    def __post_init__(self):
        if (self.temperature is None) == (self.doppler_linewidth is None):
            raise ConfigError("thermal 段必须且只能给出 temperature 或 doppler_linewidth 之一")
        if self.temperature is not None and self.temperature < 0:
            raise ConfigError(f"温度不能为负: {self.temperature}")
        if self.doppler_linewidth is not None and self.doppler_linewidth <= 0:
            raise ConfigError(f"多普勒线宽必须为正: {self.doppler_linewidth}")

    def resolved_temperature(self, constants: PhysicalConstants = CODATA) -> float:
        if self.temperature is not None:
            return self.temperature
        return constants.hbar * self.doppler_linewidth / (2.0 * constants.k_boltzmann)

    def occupations(self, omega, constants: PhysicalConstants = CODATA):
        """各模式平均声子数 n̄_k"""
        return thermal_occupation(omega, self.resolved_temperature(constants), constants)

    def to_dict(self) -> dict:
        return {"temperature_K": self.temperature, "doppler_linewidth_rad_s": self.doppler_linewidth}


@dataclass(frozen=True)
class TruncationSettings:
    """
    截断设置

    fourier_order: 平衡轨道傅里叶阶数 M
    phase_order: 运动相位谐波阶数 L
    sideband_order: 模式边带阶数 n_cut
    mode_order: 模式分块矩阵阶数 n
    hessian_order: Hessian 谐波阶数 m_trunc
    precision: 级数剪枝精度 ε
    bessel_cutoff: Bessel 阶数上限 n_max
    max_terms: 单次展开的项数预算
    """
    fourier_order: int = 6
    phase_order: int = 5
    sideband_order: int = 5
    mode_order: int = 5
    hessian_order: int = 5
    precision: float = 1e-8
    bessel_cutoff: int = 20
    max_terms: int = 200_000

    def __post_init__(self):
        for name in ("fourier_order", "phase_order", "sideband_order", "mode_order",
                     "hessian_order", "bessel_cutoff"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ConfigError(f"截断阶数 {name} 必须是非负整数: {value}")
        if not 0.0 < self.precision < 1.0:
            raise ConfigError(f"级数精度必须位于 (0, 1): {self.precision}")
        if self.max_terms < 1:
            raise ConfigError(f"项数预算必须为正: {self.max_terms}")

    def with_updates(self, **changes) -> "TruncationSettings":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "fourier_order": self.fourier_order,
            "phase_order": self.phase_order,
            "sideband_order": self.sideband_order,
            "mode_order": self.mode_order,
            "hessian_order": self.hessian_order,
            "precision": self.precision,
            "bessel_cutoff": self.bessel_cutoff,
            "max_terms": self.max_terms,
        }
