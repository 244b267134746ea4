"""
线性化 Hessian 级数

围绕平衡轨道的小振动满足

    δR'' + (A_eff − 2 Σ_{n≥1} Q_{2n} cos 2nt) δR = 0

其中 A_eff = I_N⊗A + 4K_0，Q_2 = I_N⊗Q + 4K_2，Q_{2n} = 4K_{2n}（n ≥ 2），
K(t) = K_0 − 2 Σ K_{2n} cos 2nt 为库仑势 Σ 1/r_ij 的 Hessian。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..core.exceptions import SymmetryViolationError
from ..core.models import TrapDrive
from .coulomb import coulomb_hessian, fourier_coefficients
from .equilibrium import EquilibriumTrajectory, sample_count

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class HessianSeries:
    """
    线性化方程的谐波系数

    A: 3N×3N 有效直流矩阵
    harmonics: (m, 3N, 3N)，harmonics[n−1] = Q_{2n}；harmonics[0] 即有效 Q
    """
    A: np.ndarray
    harmonics: np.ndarray

    @property
    def Q(self) -> np.ndarray:
        if self.order == 0:
            return np.zeros_like(self.A)
        return self.harmonics[0]

    @property
    def order(self) -> int:
        return self.harmonics.shape[0]

    @property
    def dimension(self) -> int:
        return self.A.shape[0]

    def harmonic(self, n: int) -> np.ndarray:
        """Q_{2|n|}；超出截断阶数返回零矩阵"""
        n = abs(n)
        if n == 0 or n > self.order:
            return np.zeros_like(self.A)
        return self.harmonics[n - 1]

    def matrix(self, t) -> np.ndarray:
        """A_eff − 2 Σ Q_{2n} cos 2nt，t 可为数组"""
        t = np.asarray(t, dtype=float)
        orders = np.arange(1, self.order + 1)
        cosines = np.cos(2.0 * np.multiply.outer(t, orders))
        return self.A - 2.0 * np.tensordot(cosines, self.harmonics, axes=([-1], [0]))

    def truncated(self, order: int) -> "HessianSeries":
        return HessianSeries(self.A, self.harmonics[:order])


def build_hessian_series(trajectory: EquilibriumTrajectory, drive: TrapDrive, order: int) -> HessianSeries:
    """
    采样 K(t) 并做傅里叶分析，把 K_0、K_2 吸收进 A、Q

    Args:
        trajectory: 已收敛的平衡轨道
        drive: 阱驱动
        order: Hessian 谐波阶数 m_trunc

    Raises:
        SymmetryViolationError: 采样的 K 不对称（轨道损坏）
    """
    n_ions = trajectory.n_ions
    count = sample_count(max(trajectory.order, order, 1))
    hessians = coulomb_hessian(trajectory.samples(count))
    asymmetry = float(np.max(np.abs(hessians - np.swapaxes(hessians, -1, -2))))
    if asymmetry > SYMMETRY_TOLERANCE:
        raise SymmetryViolationError(f"采样 Hessian 不对称 ({asymmetry:.3e})", {"asymmetry": asymmetry})

    # K(t) = Σ_n K̂_n e^{2int}，K_{2n} = −K̂_n
    coefficients = fourier_coefficients(hessians, order, name="K")
    eye = np.eye(n_ions)
    A_eff = np.kron(eye, drive.A) + 4.0 * coefficients[order]
    harmonics = np.array([-4.0 * coefficients[order + n] for n in range(1, order + 1)])
    if order >= 1:
        harmonics[0] = harmonics[0] + np.kron(eye, drive.Q)
    else:
        harmonics = np.zeros((0,) + A_eff.shape)

    A_eff = 0.5 * (A_eff + A_eff.T)
    harmonics = 0.5 * (harmonics + np.swapaxes(harmonics, -1, -2))
    logger.debug(f"Hessian 级数: 维数 {3 * n_ions}, 阶数 {order}, 非对称残余 {asymmetry:.1e}")
    return HessianSeries(A=A_eff, harmonics=harmonics)
