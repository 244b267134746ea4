"""
核心模块

提供整个工具包共享的基础组件：

主要组件：
- exceptions: 异常层级，每类错误对应一个命令行退出码
- units: 自然单位制（L0、T0）与量纲换算、Lamb-Dicke 参数、热占据数
- models: 离子种类、阱驱动、激光、热谱与截断设置

示例:
    from src.core import IonSpecies, TrapDrive, build_units

    species = IonSpecies.ytterbium_171()
    drive = TrapDrive.from_diagonal(2 * 3.141592653589793 * 50e6, (-0.04, 0.0, 0.04), (0.3, -0.3, 0.0))
    units = build_units(species, drive)

版本: 1.0.0
作者: Paul 阱门设计工具包团队
"""

__version__ = "1.0.0"
__author__ = "Paul 阱门设计工具包团队"

from .exceptions import (BudgetExhaustedError, CollisionError, ConfigError, ConvergenceError, InstabilityError,
                         LambDickeError, SingularityError, SymmetryViolationError, TrapToolkitError)
from .models import IonSpecies, LaserConfig, ThermalSpectrum, TrapDrive, TruncationSettings
from .units import (CODATA, Dimension, PhysicalConstants, UnitSystem, build_units, delta_k_counterprop,
                    dimensionalize, lamb_dicke, nondimensionalize, thermal_occupation)

__all__ = [
    "TrapToolkitError", "ConfigError", "LambDickeError", "InstabilityError", "CollisionError",
    "ConvergenceError", "BudgetExhaustedError", "SingularityError", "SymmetryViolationError",
    "IonSpecies", "TrapDrive", "LaserConfig", "ThermalSpectrum", "TruncationSettings",
    "CODATA", "Dimension", "PhysicalConstants", "UnitSystem", "build_units", "nondimensionalize",
    "dimensionalize", "delta_k_counterprop", "lamb_dicke", "thermal_occupation",
]
