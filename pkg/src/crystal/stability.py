"""
单离子 Mathieu 稳定性

线性阱方程 r'' + (A − 2Q cos 2t) r = 0 在一个周期 π 上的 monodromy 矩阵决定稳定性：
所有 Floquet 乘子位于单位圆上（且不退化为 ±1）时稳定。
对角驱动逐轴检查并在失败时给出轴名称。
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.integrate import solve_ivp

from ..core.exceptions import InstabilityError
from ..core.models import TrapDrive

logger = logging.getLogger(__name__)

AXES = ("x", "y", "z")
_MARGIN = 1e-12


def monodromy(A: np.ndarray, Q: np.ndarray, rtol: float = 1e-13, atol: float = 1e-15) -> np.ndarray:
    """
    一个周期的 monodromy 矩阵

    Args:
        A, Q: d×d 对称矩阵（d = 1 时可传标量）

    Returns:
        2d×2d 实矩阵，作用于 (r, r')
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    dim = A.shape[0]

    def rhs(t, y):
        state = y.reshape(2 * dim, 2 * dim)
        position, velocity = state[:dim], state[dim:]
        acceleration = -(A - 2.0 * Q * math.cos(2.0 * t)) @ position
        return np.concatenate([velocity, acceleration]).ravel()

    solution = solve_ivp(rhs, (0.0, math.pi), np.eye(2 * dim).ravel(), method="DOP853",
                         rtol=rtol, atol=atol)
    return solution.y[:, -1].reshape(2 * dim, 2 * dim)


def mathieu_exponent(a: float, q: float) -> float:
    """
    标量 Mathieu 方程 r'' + (a − 2q cos 2t) r = 0 的特征指数 β（第一稳定区主值）

    cos(βπ) = tr(M)/2；|tr(M)/2| ≥ 1 时不稳定。
    """
    half_trace = 0.5 * float(np.trace(monodromy(a, q)))
    if abs(half_trace) >= 1.0 - _MARGIN:
        raise InstabilityError(f"Mathieu 参数 (a={a}, q={q}) 不稳定: tr/2 = {half_trace:.12f}",
                               {"a": a, "q": q, "half_trace": half_trace})
    return math.acos(half_trace) / math.pi


def check_trap_stability(drive: TrapDrive) -> None:
    """
    单离子稳定性预检

    Raises:
        InstabilityError: details["axis"] 给出不稳定的轴（非对角驱动为 "coupled"）
    """
    if drive.is_diagonal:
        for index, axis in enumerate(AXES):
            a = float(drive.A[index, index])
            q = float(drive.Q[index, index])
            half_trace = 0.5 * float(np.trace(monodromy(a, q)))
            if abs(half_trace) >= 1.0 - _MARGIN:
                raise InstabilityError(
                    f"阱参数在 {axis} 轴不稳定 (a={a}, q={q}, tr/2={half_trace:.6f})",
                    {"axis": axis, "a": a, "q": q, "half_trace": half_trace})
            logger.debug(f"{axis} 轴稳定: a={a}, q={q}, tr/2={half_trace:.6f}")
        return

    multipliers = np.linalg.eigvals(monodromy(drive.A, drive.Q))
    worst = float(np.max(np.abs(multipliers)))
    if worst > 1.0 + 1e-9 or np.any(np.abs(np.abs(multipliers.real) - 1.0) < _MARGIN):
        raise InstabilityError(f"耦合阱参数不稳定，最大 Floquet 乘子模 {worst:.6f}",
                               {"axis": "coupled", "max_multiplier": worst})
