"""
库仑相互作用代数

无量纲库仑项 D_i = 4 Σ_{j≠i} (R_i − R_j)/|R_i − R_j|³ = 4 Σ_j G_ij R_j，
其中 G_ii = Σ_{j≠i} 1/r_ij³，G_ij = −1/r_ij³。
Hessian K 为势 Σ_{i<j} 1/r_ij 的二阶导数；线性化方程中出现 4K。

所有函数支持前置批量维度 (..., N, 3)。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.exceptions import SingularityError, SymmetryViolationError

logger = logging.getLogger(__name__)


def _pair_geometry(positions: np.ndarray, min_distance: float = 0.0):
    positions = np.asarray(positions, dtype=float)
    n_ions = positions.shape[-2]
    diff = positions[..., :, None, :] - positions[..., None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    off_diagonal = ~np.eye(n_ions, dtype=bool)
    if n_ions > 1:
        masked = np.where(off_diagonal, dist, np.inf)
        closest = float(np.min(masked))
        if not closest > min_distance:
            location = np.unravel_index(int(np.argmin(masked)), masked.shape)
            i, j = int(location[-2]), int(location[-1])
            raise SingularityError(f"离子 {i} 与 {j} 距离过近 ({closest:.3e})", pair=(i, j),
                                   details={"distance": float(closest)})
    inv = np.where(off_diagonal, 1.0 / np.where(off_diagonal, dist, 1.0), 0.0)
    return diff, inv


def coulomb_acceleration(positions: np.ndarray, min_distance: float = 0.0) -> np.ndarray:
    """
    库仑加速度 4 Σ_{j≠i} (R_i − R_j)/|R_i − R_j|³

    Args:
        positions: (..., N, 3) 无量纲位置
        min_distance: 最小允许间距，低于该值抛出 SingularityError

    Returns:
        与 positions 同形状的加速度
    """
    diff, inv = _pair_geometry(positions, min_distance)
    return 4.0 * np.sum(diff * (inv ** 3)[..., None], axis=-2)


def pair_potential(positions: np.ndarray) -> float:
    """库仑势能 Σ_{i<j} 4/|R_i − R_j|，其负梯度为 coulomb_acceleration"""
    _, inv = _pair_geometry(positions)
    return 2.0 * float(np.sum(inv))


def coulomb_fields(positions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    (D, G) 对：D = 4 G R

    Returns:
        D: (..., N, 3)；G: (..., N, N) 对称
    """
    positions = np.asarray(positions, dtype=float)
    _, inv = _pair_geometry(positions)
    cubed = inv ** 3
    G = -cubed
    diagonal = np.sum(cubed, axis=-1)
    n_ions = positions.shape[-2]
    G[..., np.arange(n_ions), np.arange(n_ions)] = diagonal
    D = 4.0 * G @ positions
    return D, G


def coulomb_hessian(positions: np.ndarray) -> np.ndarray:
    """
    Σ_{i<j} 1/r_ij 的 Hessian K，形状 (..., 3N, 3N)

    i≠j 块: K_{iσ,jτ} = (r² δ_στ − 3 d_σ d_τ)/r⁵，对角块为同行非对角块之和的相反数。
    """
    positions = np.asarray(positions, dtype=float)
    n_ions = positions.shape[-2]
    diff, inv = _pair_geometry(positions)
    inv3 = inv ** 3
    inv5 = inv ** 5
    eye3 = np.eye(3)
    blocks = (inv3[..., None, None] * eye3
              - 3.0 * inv5[..., None, None] * diff[..., :, :, :, None] * diff[..., :, :, None, :])
    diagonal = -np.sum(blocks, axis=-3)
    index = np.arange(n_ions)
    blocks[..., index, index, :, :] = diagonal
    # (N, N, 3, 3) → (3N, 3N)
    batch = blocks.shape[:-4]
    return np.swapaxes(blocks, -3, -2).reshape(batch + (3 * n_ions, 3 * n_ions))


@dataclass(frozen=True, eq=False)
class CoulombSeries:
    """
    库仑项的傅里叶系数，阶数 n ∈ [−order, order]（对应频率 2n）

    D: (2·order+1, N, 3)；G: (2·order+1, N, N)；索引 n + order。
    """
    D: np.ndarray
    G: np.ndarray
    order: int

    def d(self, n: int) -> np.ndarray:
        return self.D[n + self.order]

    def g(self, n: int) -> np.ndarray:
        return self.G[n + self.order]


def fourier_coefficients(samples: np.ndarray, order: int, tolerance: float = 1e-10,
                         name: str = "series") -> np.ndarray:
    """
    一个周期 [0, π) 上均匀采样的实值函数 → 余弦展开系数 c_n，n ∈ [−order, order]

    f(t) = Σ_n c_n e^{2int}；时间反演对称要求 c_n 为实数，虚部超过容差即报错。
    """
    count = samples.shape[0]
    if count < 2 * order + 1:
        raise ValueError(f"采样点数 {count} 不足以解析 {order} 阶谐波")
    spectrum = np.fft.fft(samples, axis=0) / count
    indices = np.arange(-order, order + 1) % count
    coefficients = spectrum[indices]
    scale = max(1.0, float(np.max(np.abs(coefficients.real))))
    residue = float(np.max(np.abs(coefficients.imag))) if coefficients.size else 0.0
    if residue > tolerance * scale:
        raise SymmetryViolationError(f"{name} 傅里叶系数虚部 {residue:.3e} 超出容差",
                                     {"residue": residue, "tolerance": tolerance})
    return np.ascontiguousarray(coefficients.real)


def coulomb_series(position_samples: np.ndarray, order: int, tolerance: float = 1e-10) -> CoulombSeries:
    """
    由一个周期的位置采样计算 D、G 的傅里叶级数

    Args:
        position_samples: (S, N, 3)，t_s = π s/S
        order: 输出阶数（通常为 2M）
        tolerance: 虚部残余容差
    """
    D, G = coulomb_fields(position_samples)
    return CoulombSeries(D=fourier_coefficients(D, order, tolerance, "D"),
                         G=fourier_coefficients(G, order, tolerance, "G"),
                         order=order)
