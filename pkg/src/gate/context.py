"""
=============================================================================
Paul 阱门设计工具包 - 门设计上下文
=============================================================================

把平衡轨道、模式集、激光与温度设置转换成振荡积分所需的全部无量纲输入：

- η_k = Δk·sqrt(ħ/2mω_k)，ω_k = β_k/T0
- n̄_k = 1/(exp(ħω_k/k_B T) − 1)
- 被驱动离子 j 的运动相位 φ_j(t) = φ^{(0)} + Σ_l φ^{(l)} cos(2lt)，
  φ^{(l)} = 2Δk·(m̂·B_{2l,j})·L0；静态相位为配置偏置（可选加上 Δk·(m̂·B_0,j)·L0）
- 离子 j、模式 k 的边带调制 c_n = m̂·C_{2n,j}^{(k)}

载波相位以门起点为参考：起点偏移 t0 对应的静态相位为 φ^{(0)} − μt0，
因此 δF(t0) 严格以 RF 周期为周期。

上下文构造后不可变，可在线程池中共享。

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.exceptions import ConfigError, InstabilityError, LambDickeError
from ..core.models import IonSpecies, LaserConfig, ThermalSpectrum, TruncationSettings
from ..core.units import UnitSystem, lamb_dicke
from ..crystal.equilibrium import EquilibriumTrajectory
from ..crystal.modes import ModeSet
from ..integrals.series import ModulationSpec, PhaseSpec, SeriesBudget, as_budget

logger = logging.getLogger(__name__)

LAMB_DICKE_WARNING = 0.3
LAMB_DICKE_LIMIT = 1.0
# 无量纲 RF 角频率（时间单位 T0 = 2/ω_rf）
OMEGA_RF = 2.0


@dataclass(frozen=True, eq=False)
class GateContext:
    """
    门设计上下文

    sideband_amplitudes: (2, K, 2n_cut+1)，两个被驱动离子对各模式的 m̂·C_{2n,j}
    phases: 两个被驱动离子的运动相位（静态部分尚未计入 −μt0）
    """
    crystal: EquilibriumTrajectory
    modes: ModeSet
    species: IonSpecies
    units: UnitSystem
    laser: LaserConfig
    thermal: ThermalSpectrum
    truncation: TruncationSettings
    eta: np.ndarray
    occupations: np.ndarray
    phases: Tuple[PhaseSpec, PhaseSpec]
    sideband_amplitudes: np.ndarray

    @property
    def betas(self) -> np.ndarray:
        return self.modes.betas

    @property
    def mode_count(self) -> int:
        return len(self.modes)

    @property
    def mu(self) -> float:
        """无量纲失谐 μT0"""
        return self.laser.detuning * self.units.time

    @property
    def gate_time(self) -> float:
        return self.laser.gate_time / self.units.time

    @property
    def start_offset(self) -> float:
        return self.laser.start_offset / self.units.time

    @property
    def segments(self) -> int:
        return self.laser.segments

    @property
    def budget(self) -> SeriesBudget:
        return as_budget(self.truncation.precision, self.truncation.bessel_cutoff, self.truncation.max_terms)

    def segment_edges(self) -> np.ndarray:
        """无量纲分段边界 t0 + pτ/n_seg，p = 0..n_seg"""
        return self.start_offset + self.gate_time * np.arange(self.segments + 1) / self.segments

    def segment_edges_physical(self) -> np.ndarray:
        return self.segment_edges() * self.units.time

    def carrier_phase(self, slot: int) -> PhaseSpec:
        """第 slot 个被驱动离子的相位，静态部分以门起点为参考"""
        return self.phases[slot].shifted(-self.mu * self.start_offset)

    def modulation(self, slot: int, mode: int) -> ModulationSpec:
        amplitudes = self.sideband_amplitudes[slot, mode]
        return ModulationSpec(tuple(amplitudes), float(self.betas[mode]),
                              tuple(self.sideband_bounds(slot)))

    def sideband_bounds(self, slot: int) -> np.ndarray:
        """各边带阶数在全部模式上的均方根幅度，作为剪枝界"""
        return np.sqrt(np.sum(self.sideband_amplitudes[slot] ** 2, axis=0))

    def pruned_amplitudes(self, slot: int) -> np.ndarray:
        bounds = self.sideband_bounds(slot)
        return np.where(bounds[None, :] < self.truncation.precision, 0.0, self.sideband_amplitudes[slot])

    def with_truncation(self, **changes) -> "GateContext":
        return build_context(self.crystal, self.modes, self.species, self.units, self.laser, self.thermal,
                             self.truncation.with_updates(**changes))

    def with_laser(self, **changes) -> "GateContext":
        return build_context(self.crystal, self.modes, self.species, self.units,
                             self.laser.with_updates(**changes), self.thermal, self.truncation)

    def with_detuning(self, detuning: float) -> "GateContext":
        return self.with_laser(detuning=detuning)

    def with_gate_time(self, gate_time: float) -> "GateContext":
        return self.with_laser(gate_time=gate_time)

    def with_start_offset(self, start_offset: float) -> "GateContext":
        return self.with_laser(start_offset=start_offset)

    def with_segments(self, segments: int) -> "GateContext":
        return self.with_laser(segments=segments)


def _phase_spec(crystal: EquilibriumTrajectory, ion: int, laser: LaserConfig, units: UnitSystem,
                order: int) -> PhaseSpec:
    scale = laser.delta_k * units.length
    projections = crystal.coefficients[:, ion, :] @ laser.direction
    static = laser.static_phase
    if laser.include_equilibrium_phase:
        static += scale * float(projections[0])
    harmonics = tuple(2.0 * scale * float(projections[level]) if level <= crystal.order else 0.0
                      for level in range(1, order + 1))
    return PhaseSpec(static, harmonics)


def build_context(crystal: EquilibriumTrajectory, modes: ModeSet, species: IonSpecies, units: UnitSystem,
                  laser: LaserConfig, thermal: ThermalSpectrum, truncation: TruncationSettings) -> GateContext:
    """
    构造门设计上下文

    Raises:
        InstabilityError: 模式集不稳定或未归一化
        LambDickeError: 某个模式 η_k > 1
        ConfigError: 被驱动离子序号越界
    """
    if not modes.stable:
        raise InstabilityError("模式集包含虚指数，拒绝门设计")
    if not modes.normalized:
        raise InstabilityError("模式集未完成归一化，拒绝门设计")
    for ion in laser.ions:
        if not 0 <= ion < crystal.n_ions:
            raise ConfigError(f"被驱动离子序号越界: {ion}（共 {crystal.n_ions} 个离子，序号从 0 开始）")

    omegas = modes.frequencies(units)
    eta = np.asarray(lamb_dicke(laser.delta_k, species.mass, omegas), dtype=float).reshape(-1)
    worst = float(np.max(eta)) if eta.size else 0.0
    if worst > LAMB_DICKE_LIMIT:
        raise LambDickeError(f"Lamb-Dicke 参数 η = {worst:.3f} > 1，一阶展开失效",
                             {"eta_max": worst, "mode": int(np.argmax(eta))})
    if worst > LAMB_DICKE_WARNING:
        logger.warning(f"Lamb-Dicke 参数 η = {worst:.3f} 超过 {LAMB_DICKE_WARNING}")

    occupations = np.asarray(thermal.occupations(omegas), dtype=float).reshape(-1)
    phases = tuple(_phase_spec(crystal, ion, laser, units, truncation.phase_order) for ion in laser.ions)

    n_cut = truncation.sideband_order
    sideband_amplitudes = np.zeros((2, len(modes), 2 * n_cut + 1))
    for index, mode in enumerate(modes):
        truncated = mode.truncated(n_cut)
        offset = n_cut - truncated.order
        projected = truncated.sidebands.reshape(truncated.sidebands.shape[0], -1, 3) @ laser.direction
        for slot, ion in enumerate(laser.ions):
            sideband_amplitudes[slot, index, offset:offset + projected.shape[0]] = projected[:, ion]

    context = GateContext(crystal=crystal, modes=modes, species=species, units=units, laser=laser,
                          thermal=thermal, truncation=truncation, eta=eta, occupations=occupations,
                          phases=phases, sideband_amplitudes=sideband_amplitudes)
    logger.debug(f"门上下文: μT0={context.mu:.6f}, τ/T0={context.gate_time:.3f}, n_seg={context.segments}, "
                 f"φ_i^(l)={phases[0].harmonics}, φ_j^(l)={phases[1].harmonics}")
    return context
