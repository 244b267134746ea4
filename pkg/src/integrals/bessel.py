"""
Bessel 函数与 Jacobi–Anger 系数

    exp(iφ cos θ) = J_0(φ) + Σ_{n≥1} 2 iⁿ J_n(φ) cos(nθ)

tail bound 使用 |J_n(x)| ≤ |x/2|ⁿ/n!。
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy import special


def bessel_J(n: int, phi: float) -> float:
    """第一类 Bessel 函数 J_n(φ)，n ≥ 0"""
    if int(n) != n or n < 0:
        raise ValueError(f"Bessel 阶数必须是非负整数: {n}")
    return float(special.jv(int(n), phi))


def bessel_magnitude_bound(n: int, phi: float) -> float:
    """|J_n(φ)| 的上界 |φ/2|ⁿ/n!"""
    return math.exp(n * math.log(abs(phi) / 2.0) - math.lgamma(n + 1)) if phi else float(n == 0)


def jacobi_anger_tail_bound(n_start: int, phi: float) -> float:
    """
    Σ_{n≥n_start} |2 iⁿ J_n(φ)| 的上界

    n_start 处的比值 r = |φ|/(2(n_start+1)) < 1 时按几何级数求和，否则返回 inf。
    """
    n_start = max(int(n_start), 1)
    if phi == 0.0:
        return 0.0
    ratio = abs(phi) / (2.0 * (n_start + 1))
    if ratio >= 1.0:
        return math.inf
    return 2.0 * bessel_magnitude_bound(n_start, phi) / (1.0 - ratio)


@lru_cache(maxsize=4096)
def jacobi_anger_coefficients(phi: float, n_max: int) -> Tuple[complex, ...]:
    """cos(nθ) 展开系数 (J_0, 2i J_1, 2i² J_2, …, 2i^{n_max} J_{n_max})"""
    values = special.jv(np.arange(n_max + 1), phi)
    unit_powers = (1.0, 1j, -1.0, -1j)
    return (complex(values[0]),) + tuple(2.0 * unit_powers[n % 4] * values[n] for n in range(1, n_max + 1))
