"""
=============================================================================
Paul 阱门设计工具包 - 自旋-声子耦合与双比特相位矩阵
=============================================================================

1. 耦合行向量（单位 Rabi 幅度，第 p 段）

    A_j^k(p) = −i η_k T0 ∫_{seg p} sin(μt + φ_j(t)) u_jk(t) dt
    u_jk(t) = Σ_n (m̂·C_{2n,j}^{(k)}) e^{i(β_k + 2n)t}

   残余耦合 α_j^k = A_j^k · Ω。

2. 双比特相位（下三角 p ≥ q）

    Γ'(p > q) = Σ_k [A_i^k(p) A_j^k(q)* + A_j^k(p) A_i^k(q)*]
    Γ'(p = p) = Σ_k η_k² T0² [D_ij^k(p) + D_ji^k(p)]
    D_ij^k(p) = ∫∫_{t'<t ∈ seg p} sin(μt+φ_i) u_ik(t) sin(μt'+φ_j) u_jk*(t')

   γ' = Im Γ'，γ = (γ' + γ'ᵀ)/2，Θ = Ωᵀ γ Ω。

全部积分在无量纲时间中按模式批量求值。

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..integrals.series import pair_branch_sums, phase_table, single_sum, spectral_weights
from .context import OMEGA_RF, GateContext

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """
    rows: (2, K, n_seg) 复数组，rows[s, k, p] = A_{ion_s}^k(p)（单位: 秒，乘以 Ω 后无量纲）
    dropped_bound: 级数剪枝丢弃部分的上界（同单位）
    """
    rows: np.ndarray
    dropped_bound: float
    terms: int

    @property
    def segments(self) -> int:
        return self.rows.shape[-1]

    def alpha(self, amplitudes: np.ndarray) -> np.ndarray:
        """α_j^k = A_j^k · Ω，形状 (2, K)"""
        return self.rows @ np.asarray(amplitudes, dtype=float)

    def weighted(self, weights: np.ndarray) -> "CouplingMatrix":
        """按段加权 Ã(p) = w_p A(p)"""
        return CouplingMatrix(self.rows * np.asarray(weights, dtype=float), self.dropped_bound, self.terms)


@dataclass(frozen=True, eq=False)
class GammaMatrices:
    """
    pre_imaginary: Γ'（复下三角）
    raw: γ' = Im Γ'
    symmetric: γ = (γ' + γ'ᵀ)/2
    """
    pre_imaginary: np.ndarray
    dropped_bound: float

    @property
    def raw(self) -> np.ndarray:
        return self.pre_imaginary.imag

    @property
    def symmetric(self) -> np.ndarray:
        return 0.5 * (self.raw + self.raw.T)

    def theta(self, amplitudes: np.ndarray) -> float:
        amplitudes = np.asarray(amplitudes, dtype=float)
        return float(amplitudes @ self.symmetric @ amplitudes)


def _segment_pairs(edges: np.ndarray):
    return list(zip(edges[:-1], edges[1:]))


def build_coupling(context: GateContext) -> CouplingMatrix:
    """
    两个被驱动离子对全部模式的耦合行向量

    Returns:
        CouplingMatrix，rows[s, k, p] = −i η_k T0 · (第 p 段调制单重积分)
    """
    budget = context.budget
    mu = context.mu
    betas = context.betas
    segments = _segment_pairs(context.segment_edges())
    rows = np.zeros((2, context.mode_count, len(segments)), dtype=complex)
    dropped = 0.0
    terms = 0

    for slot in range(2):
        phase = context.carrier_phase(slot)
        table = phase_table(phase, budget)
        amplitudes = context.pruned_amplitudes(slot)
        n_cut = (amplitudes.shape[-1] - 1) // 2
        pruned_mass = np.sum(np.abs(context.sideband_amplitudes[slot] - amplitudes), axis=1)
        for sign in (1, -1):
            weights = spectral_weights(table.branch(sign), amplitudes)
            factor = sign * np.exp(1j * sign * phase.static) / 2j
            for p, (t1, t2) in enumerate(segments):
                rows[slot, :, p] += factor * single_sum(t1, t2, sign * mu + betas, weights,
                                                        table.offset + n_cut, OMEGA_RF)
        width = context.gate_time / context.segments
        mode_bound = (table.dropped_bound * np.sum(np.abs(amplitudes), axis=1)
                      + (table.mass + table.dropped_bound) * pruned_mass) * width
        dropped = max(dropped, float(np.max(context.eta * mode_bound)) * context.units.time)
        terms += 2 * table.exponentials * int(np.count_nonzero(amplitudes)) * len(segments)

    rows *= (-1j * context.eta * context.units.time)[None, :, None]
    logger.debug(f"耦合行向量: {context.mode_count} 个模式 × {len(segments)} 段, 指数项 {terms}, "
                 f"丢弃上界 {dropped:.3e}")
    return CouplingMatrix(rows=rows, dropped_bound=dropped, terms=terms)


def diagonal_pair_integrals(context: GateContext, first: int, second: int):
    """
    各段的 D^k(p)：first 离子在后、second 离子在前的有序二重积分

    Returns:
        (values (K, n_seg), bounds (K, n_seg))，无量纲时间
    """
    budget = context.budget
    phase_a = context.carrier_phase(first)
    phase_b = context.carrier_phase(second)
    table_a = phase_table(phase_a, budget)
    table_b = phase_table(phase_b, budget)
    amplitudes_a = context.pruned_amplitudes(first)
    amplitudes_b = context.pruned_amplitudes(second)
    segments = _segment_pairs(context.segment_edges())
    values = np.zeros((context.mode_count, len(segments)), dtype=complex)
    bounds = np.zeros((context.mode_count, len(segments)))
    for p, (t1, t2) in enumerate(segments):
        values[:, p], bounds[:, p] = pair_branch_sums(
            t1, t2, context.mu, context.betas, context.betas, OMEGA_RF, table_a, table_b,
            amplitudes_a, amplitudes_b, phase_a.static, phase_b.static, budget.precision)
    return values, bounds


def build_gamma(context: GateContext, coupling: CouplingMatrix) -> GammaMatrices:
    """
    组装 Γ'：p > q 由单重积分乘积给出，p = q 由两种离子次序的有序二重积分之和给出，p < q 为 0
    """
    rows_i, rows_j = coupling.rows[0], coupling.rows[1]
    # Σ_k A_i(p) A_j(q)*，形状 (n_seg, n_seg)
    cross = rows_i.T @ rows_j.conj() + rows_j.T @ rows_i.conj()
    gamma = np.tril(cross, k=-1)

    forward, bound_forward = diagonal_pair_integrals(context, 0, 1)
    backward, bound_backward = diagonal_pair_integrals(context, 1, 0)
    scale = (context.eta * context.units.time) ** 2
    diagonal = scale @ (forward + backward)
    gamma[np.diag_indices_from(gamma)] = diagonal

    dropped = float(np.max(scale @ (bound_forward + bound_backward))) if diagonal.size else 0.0
    dropped += 2.0 * coupling.dropped_bound * float(np.max(np.abs(coupling.rows))) * coupling.segments
    return GammaMatrices(pre_imaginary=gamma, dropped_bound=dropped)
