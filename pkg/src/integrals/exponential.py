"""
=============================================================================
Paul 阱门设计工具包 - 指数积分闭式原语
=============================================================================

所有振荡积分最终归结为两类闭式：

1. 单重积分  S(ν; t1, t2) = ∫_{t1}^{t2} e^{iνt} dt
            = Δ·e^{iν(t1+t2)/2}·sinc(νΔ/2π)，Δ = t2 − t1
   sinc 形式在共振 ν → 0 处连续，不需要分支。

2. 有序二重积分
   J(a, b; t1, t2) = ∫_{t1}^{t2} dt e^{iat} ∫_{t1}^{t} dt' e^{ibt'}
                   = Δ²·e^{i(a+b)t1}·k(aΔ, bΔ)
   k(x, y) = [E(x+y) − E(x)]/(iy)，E(z) = ∫_0^1 e^{izu} du。
   |y| 很小时差商会严重相消，改用矩级数
   k(x, y) = Σ_m (iy)^m/(m+1)! · P_{m+1}(x)，P_m(x) = ∫_0^1 u^m e^{ixu} du。

全部函数按 numpy 广播向量化；标量输入返回 Python complex。

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import math

import numpy as np

# |bΔ| 低于该值时走矩级数分支；级数截断误差 ~ |y|^6/7! < 1e-21
SMALL_SCALED_FREQUENCY = 1e-3
_MOMENT_SERIES_ORDER = 6
# |x| < 2 时 P_m 用幂级数，否则用分部积分递推
_MOMENT_RECURRENCE_THRESHOLD = 2.0
_MOMENT_POWER_TERMS = 40


def _output(value):
    value = np.asarray(value)
    return complex(value) if value.ndim == 0 else value


def unit_exp_mean(z):
    """E(z) = ∫_0^1 e^{izu} du = e^{iz/2}·sinc(z/2π)"""
    z = np.asarray(z, dtype=float)
    return np.exp(0.5j * z) * np.sinc(z / (2.0 * math.pi))


def exp_integral_single(t1, t2, mu, omega):
    """
    ∫_{t1}^{t2} e^{i(μ+ω)t} dt

    μ+ω = 0 时精确返回 t2 − t1。
    """
    nu = np.asarray(mu, dtype=float) + np.asarray(omega, dtype=float)
    return _output(frequency_integral(t1, t2, nu))


def frequency_integral(t1, t2, nu):
    """∫_{t1}^{t2} e^{iνt} dt（ν 已合成）"""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    nu = np.asarray(nu, dtype=float)
    width = t2 - t1
    return width * np.exp(0.5j * nu * (t1 + t2)) * np.sinc(nu * width / (2.0 * math.pi))


def power_moments(x, order: int) -> np.ndarray:
    """
    P_m(x) = ∫_0^1 u^m e^{ixu} du，m = 0..order

    Returns:
        形状 (order+1, *x.shape) 的复数组
    """
    x = np.asarray(x, dtype=float)
    moments = np.empty((order + 1,) + x.shape, dtype=complex)
    small = np.abs(x) < _MOMENT_RECURRENCE_THRESHOLD

    if np.any(small):
        xs = x[small]
        # (ix)^k/k! 逐项累积
        term = np.ones_like(xs, dtype=complex)
        sums = np.zeros((order + 1,) + xs.shape, dtype=complex)
        for k in range(_MOMENT_POWER_TERMS):
            for m in range(order + 1):
                sums[m] += term / (m + k + 1)
            term = term * (1j * xs) / (k + 1)
        for m in range(order + 1):
            moments[m][small] = sums[m]

    large = ~small
    if np.any(large):
        xl = x[large]
        phase = np.exp(1j * xl)
        previous = unit_exp_mean(xl)
        moments[0][large] = previous
        for m in range(1, order + 1):
            previous = (phase - m * previous) / (1j * xl)
            moments[m][large] = previous
    return moments


def ordered_kernel(x, y):
    """
    k(x, y) = ∫_0^1 du e^{ixu} ∫_0^u dv e^{iyv}

    k(0, 0) = 1/2。
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    result = np.empty(x.shape, dtype=complex)
    small = np.abs(y) < SMALL_SCALED_FREQUENCY

    large = ~small
    if np.any(large):
        xl = x[large]
        yl = y[large]
        result[large] = (unit_exp_mean(xl + yl) - unit_exp_mean(xl)) / (1j * yl)

    if np.any(small):
        xs = x[small]
        ys = y[small]
        moments = power_moments(xs, _MOMENT_SERIES_ORDER)
        acc = np.zeros(xs.shape, dtype=complex)
        for m in range(_MOMENT_SERIES_ORDER):
            acc += (1j * ys) ** m / math.factorial(m + 1) * moments[m + 1]
        result[small] = acc
    return result


def ordered_exp_integral(t1, t2, a, b):
    """∫_{t1}^{t2} dt e^{iat} ∫_{t1}^{t} dt' e^{ibt'}，零长度区间为 0"""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    width = t2 - t1
    return width ** 2 * np.exp(1j * (a + b) * t1) * ordered_kernel(a * width, b * width)


def exp_integral_double_plus(t1, t2, mu, omega1, omega2):
    """∫_{t1}^{t2} dt ∫_{t1}^{t} dt' e^{iμt} e^{iμt'} e^{iω1 t} e^{−iω2 t'}"""
    mu = np.asarray(mu, dtype=float)
    return _output(ordered_exp_integral(t1, t2, mu + omega1, mu - np.asarray(omega2, dtype=float)))


def exp_integral_double_minus(t1, t2, mu, omega1, omega2):
    """∫_{t1}^{t2} dt ∫_{t1}^{t} dt' e^{iμt} e^{−iμt'} e^{iω1 t} e^{−iω2 t'}"""
    mu = np.asarray(mu, dtype=float)
    return _output(ordered_exp_integral(t1, t2, mu + omega1, -mu - np.asarray(omega2, dtype=float)))
