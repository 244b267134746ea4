"""
分子动力学校验模块

主要组件：
- integrator: 四阶辛组合积分器（IntegratorSettings, DynamicsTrace, integrate）
- verification: 简正模的分子动力学校验（ExcitationSpec, ModeVerification, verify_mode）
"""

from .integrator import (DRIFT_COEFFICIENTS, KICK_COEFFICIENTS, DynamicsTrace, IntegratorSettings,
                         acceleration, frozen_energy, integrate)
from .verification import ExcitationSpec, ModeVerification, verify_mode

__all__ = [
    "DRIFT_COEFFICIENTS", "KICK_COEFFICIENTS", "DynamicsTrace", "IntegratorSettings", "acceleration",
    "frozen_energy", "integrate", "ExcitationSpec", "ModeVerification", "verify_mode",
]
