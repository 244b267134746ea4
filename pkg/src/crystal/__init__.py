"""
离子晶体模块

主要组件：
- coulomb: 库仑加速度、(D, G) 场、Hessian 与傅里叶级数
- stability: 单离子 Mathieu 稳定性与特征指数
- equilibrium: 阻尼搜索与傅里叶迭代求周期平衡轨道
- hessian: 线性化方程的 Hessian 级数
- modes: Floquet 简正模的种子、精化、简并处理与归一化
"""

from .coulomb import (CoulombSeries, coulomb_acceleration, coulomb_fields, coulomb_hessian,
                      coulomb_series, fourier_coefficients, pair_potential)
from .equilibrium import (DampedSearchResult, EquilibriumTrajectory, IterationSettings,
                          equilibrium_residual, find_equilibrium_damped, refine_fourier,
                          sample_count, solve_equilibrium)
from .hessian import HessianSeries, build_hessian_series
from .modes import (ModeRefinementProblem, ModeSet, ModeSettings, NormalMode, SeedPencil,
                    cluster_seeds, normalize_modeset, refine_mode, resolve_degeneracy, seed_modes,
                    solve_normal_modes)
from .stability import check_trap_stability, mathieu_exponent, monodromy

__all__ = [
    "CoulombSeries", "coulomb_acceleration", "coulomb_fields", "coulomb_hessian", "coulomb_series",
    "fourier_coefficients", "pair_potential",
    "DampedSearchResult", "EquilibriumTrajectory", "IterationSettings", "equilibrium_residual",
    "find_equilibrium_damped", "refine_fourier", "sample_count", "solve_equilibrium",
    "HessianSeries", "build_hessian_series",
    "ModeRefinementProblem", "ModeSet", "ModeSettings", "NormalMode", "SeedPencil", "cluster_seeds",
    "normalize_modeset", "refine_mode", "resolve_degeneracy", "seed_modes", "solve_normal_modes",
    "check_trap_stability", "mathieu_exponent", "monodromy",
]
