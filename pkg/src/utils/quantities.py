"""
带单位后缀的物理量解析

配置文件中的物理量写成 "50 MHz"、"355 nm"、"300 us" 这样的字符串；
纯数字按 SI 基本单位（频率为 rad/s）解释，非零时记录警告。循环频率单位 Hz/kHz/MHz/GHz 自动乘以 2π。
"""

from __future__ import annotations

import logging
import math
import re
from typing import Any, Dict

from scipy import constants as sc

from ..core.exceptions import ConfigError

logger = logging.getLogger(__name__)

_TWO_PI = 2.0 * math.pi

UNIT_TABLE: Dict[str, Dict[str, float]] = {
    "frequency": {
        "Hz": _TWO_PI, "kHz": _TWO_PI * sc.kilo, "MHz": _TWO_PI * sc.mega, "GHz": _TWO_PI * sc.giga,
        "rad/s": 1.0, "krad/s": sc.kilo, "Mrad/s": sc.mega,
    },
    "length": {"m": 1.0, "mm": sc.milli, "um": sc.micro, "μm": sc.micro, "nm": sc.nano, "pm": sc.pico},
    "time": {"s": 1.0, "ms": sc.milli, "us": sc.micro, "μs": sc.micro, "ns": sc.nano},
    "mass": {"kg": 1.0, "u": sc.atomic_mass, "amu": sc.atomic_mass, "Da": sc.atomic_mass},
    "temperature": {"K": 1.0, "mK": sc.milli, "uK": sc.micro, "μK": sc.micro},
    "wavenumber": {"1/m": 1.0, "1/um": 1.0 / sc.micro, "1/nm": 1.0 / sc.nano},
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S+)?\s*$")


def _bare_number(value: float, kind: str) -> float:
    if value != 0.0:
        base = next(unit for unit, factor in UNIT_TABLE[kind].items() if factor == 1.0)
        logger.warning(f"{kind} 缺少单位后缀，按 {base} 解释: {value!r}")
    return value


def parse_quantity(value: Any, kind: str) -> float:
    """
    解析物理量为 SI 数值

    Args:
        value: 数字或 "数值 单位" 字符串
        kind: frequency / length / time / mass / temperature / wavenumber

    Returns:
        float: SI 数值（频率为 rad/s）

    Raises:
        ConfigError: 格式错误或单位与量纲不符
    """
    if kind not in UNIT_TABLE:
        raise ConfigError(f"未知的物理量类型: {kind}")
    if isinstance(value, bool):
        raise ConfigError(f"无法把布尔值解析为 {kind}: {value}")
    if isinstance(value, (int, float)):
        return _bare_number(float(value), kind)
    if not isinstance(value, str):
        raise ConfigError(f"无法解析 {kind}: {value!r}")
    match = _QUANTITY.match(value)
    if match is None:
        raise ConfigError(f"物理量格式错误: {value!r}（应为 '数值 单位'）")
    number, unit = match.groups()
    if unit is None:
        return _bare_number(float(number), kind)
    units = UNIT_TABLE[kind]
    if unit not in units:
        raise ConfigError(f"{kind} 不支持单位 '{unit}'，可用: {', '.join(units)}",
                          {"value": value, "kind": kind})
    return float(number) * units[unit]


def is_quantity(value: Any, kind: str) -> bool:
    try:
        parse_quantity(value, kind)
    except ConfigError:
        return False
    return True
