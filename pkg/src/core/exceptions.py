"""
=============================================================================
Paul 阱门设计工具包 - 异常体系
=============================================================================

所有可预期的失败都以 TrapToolkitError 的子类抛出，每个异常携带：
- exit_code: CLI 退出码（0 成功，1 内部错误，2 配置错误，3 不稳定，4 不收敛）
- details: 诊断信息字典（最终失配、离子对编号、轴名称等）

使用示例：
    try:
        check_trap_stability(drive)
    except InstabilityError as e:
        print(e.exit_code, e.details["axis"])

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

from typing import Any, Dict, Optional


class TrapToolkitError(Exception):
    """工具包异常基类（内部错误，退出码 1）"""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.__class__.__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "details": self.details,
        }


class ConfigError(TrapToolkitError):
    """配置文件或参数无效"""

    exit_code = 2


class LambDickeError(ConfigError):
    """Lamb-Dicke 参数超出一阶展开的适用范围 (η > 1)"""


class InstabilityError(TrapToolkitError):
    """阱参数、晶体或模式不稳定"""

    exit_code = 3


class CollisionError(InstabilityError):
    """分子动力学积分中离子碰撞"""

    def __init__(self, message: str, time: float, pair: tuple, details: Optional[Dict[str, Any]] = None):
        merged = {"time": time, "pair": pair}
        merged.update(details or {})
        super().__init__(message, merged)
        self.time = time
        self.pair = pair


class ConvergenceError(TrapToolkitError):
    """迭代求解未收敛"""

    exit_code = 4


class BudgetExhaustedError(ConvergenceError):
    """级数展开超出项数预算或 Bessel 截断"""


class SingularityError(TrapToolkitError):
    """离子重合导致库仑项奇异"""

    def __init__(self, message: str, pair: tuple, details: Optional[Dict[str, Any]] = None):
        merged = {"pair": pair}
        merged.update(details or {})
        super().__init__(message, merged)
        self.pair = pair


class SymmetryViolationError(TrapToolkitError):
    """傅里叶系数的虚部或矩阵非对称部分超出容差"""
