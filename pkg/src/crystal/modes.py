"""
=============================================================================
Paul 阱门设计工具包 - Floquet 简正模
=============================================================================

模式展开 δR(t) = c Σ_n C_{2n} e^{i(2n+β)t} + c.c.，代入线性化方程得到分块系统

    (A_eff − (2k+β)²) C_{2k} − Σ_{n≥1} Q_{2n} (C_{2k−2n} + C_{2k+2n}) = 0

流程：
1. seed_modes - 小参数广义本征问题给出全部 3N 个 β 与 C_0 初值（含 C_{±2}、C_{±4} 估计）
2. refine_mode / resolve_degeneracy - 在截断分块矩阵上反复求最接近零的本征值 Δ，
   β ← sqrt(β² + Δ) 直到收敛；近简并簇按分支整体精化
3. normalize_modeset - 按对易关系归一化 Σ_n (2n+β) C_{2n}ᵀ Σ_m C_{2m} = β，
   检查交叉正交性

β² + Δ < 0 表示虚指数（不稳定），整个模式集被标记，门设计拒绝使用。

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from ..core.exceptions import ConfigError, ConvergenceError
from ..core.models import TrapDrive, TruncationSettings
from ..core.units import UnitSystem
from .equilibrium import EquilibriumTrajectory
from .hessian import HessianSeries, build_hessian_series

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModeSettings:
    """
    模式精化设置

    tolerance: 相邻两次 β 的变化阈值
    cluster_threshold: 种子阶段的近简并判据 |Δβ|
    degeneracy_tolerance: 精确简并判据（归一化时旋转）
    dense_limit: 分块矩阵维数不超过该值时用稠密求解
    """
    tolerance: float = 1e-11
    max_iterations: int = 100
    cluster_threshold: float = 1e-6
    degeneracy_tolerance: float = 1e-9
    overlap_threshold: float = 0.5
    orthogonality_tolerance: float = 1e-8
    dense_limit: int = 800

    def __post_init__(self):
        if not self.tolerance > 0 or not self.cluster_threshold > 0:
            raise ConfigError("模式精化容差必须为正")
        if self.max_iterations < 1:
            raise ConfigError(f"最大迭代次数必须为正: {self.max_iterations}")


@dataclass(frozen=True, eq=False)
class NormalMode:
    """
    单个 Floquet 简正模

    beta: Floquet 指数（stable=False 时为 |β| 并标记虚指数）
    sidebands: (2n_cut+1, 3N)，sidebands[n + n_cut] = C_{2n}
    """
    beta: float
    sidebands: np.ndarray
    residual: float = 0.0
    normalized: bool = False
    stable: bool = True
    iterations: int = 0

    def __post_init__(self):
        sidebands = np.array(self.sidebands, dtype=float)
        if sidebands.ndim != 2 or sidebands.shape[0] % 2 == 0:
            raise ValueError(f"边带数组形状应为 (2n+1, 3N)，实际 {sidebands.shape}")
        sidebands.setflags(write=False)
        object.__setattr__(self, "sidebands", sidebands)

    @property
    def order(self) -> int:
        return (self.sidebands.shape[0] - 1) // 2

    @property
    def dimension(self) -> int:
        return self.sidebands.shape[1]

    @property
    def n_ions(self) -> int:
        return self.dimension // 3

    @property
    def harmonic_frequencies(self) -> np.ndarray:
        """各边带的无量纲频率 2n + β"""
        return 2.0 * np.arange(-self.order, self.order + 1) + self.beta

    def sideband(self, n: int) -> np.ndarray:
        if abs(n) > self.order:
            return np.zeros(self.dimension)
        return self.sidebands[n + self.order]

    @property
    def zero(self) -> np.ndarray:
        return self.sideband(0)

    def position_sum(self) -> np.ndarray:
        """s = Σ_m C_{2m}（t = 0 处的位移方向）"""
        return self.sidebands.sum(axis=0)

    def momentum_sum(self) -> np.ndarray:
        """w = Σ_n (2n+β) C_{2n}"""
        return self.harmonic_frequencies @ self.sidebands

    def norm_form(self) -> float:
        return float(self.momentum_sum() @ self.position_sum())

    def displacement(self, t, amplitude: float = 1.0) -> np.ndarray:
        """实振幅 c 下的位移 2c Σ C_{2n} cos((2n+β)t)，形状 (..., N, 3)"""
        t = np.asarray(t, dtype=float)
        phases = np.multiply.outer(t, self.harmonic_frequencies)
        flat = 2.0 * amplitude * np.cos(phases) @ self.sidebands
        return flat.reshape(t.shape + (self.n_ions, 3))

    def velocity(self, t, amplitude: float = 1.0) -> np.ndarray:
        """−2c Σ (2n+β) C_{2n} sin((2n+β)t)"""
        t = np.asarray(t, dtype=float)
        phases = np.multiply.outer(t, self.harmonic_frequencies)
        flat = -2.0 * amplitude * (np.sin(phases) * self.harmonic_frequencies) @ self.sidebands
        return flat.reshape(t.shape + (self.n_ions, 3))

    def truncated(self, n_cut: int) -> "NormalMode":
        if n_cut >= self.order:
            return self
        keep = slice(self.order - n_cut, self.order + n_cut + 1)
        return replace(self, sidebands=self.sidebands[keep])

    def to_dict(self) -> dict:
        return {"beta": self.beta, "residual": self.residual, "normalized": self.normalized,
                "stable": self.stable, "iterations": self.iterations}


@dataclass(frozen=True, eq=False)
class ModeSet:
    """按 β 升序排列的 3N 个模式"""
    modes: Tuple[NormalMode, ...]
    source_hash: str = ""

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __getitem__(self, index: int) -> NormalMode:
        return self.modes[index]

    @property
    def stable(self) -> bool:
        return all(mode.stable for mode in self.modes)

    @property
    def normalized(self) -> bool:
        return all(mode.normalized for mode in self.modes)

    @property
    def betas(self) -> np.ndarray:
        return np.array([mode.beta for mode in self.modes])

    def frequencies(self, units: UnitSystem) -> np.ndarray:
        """物理角频率 ω_k = β_k / T0"""
        return self.betas / units.time

    def form_matrix(self) -> np.ndarray:
        """双线性型 F_kl = w_k · s_l；归一化正交后等于 diag(β)"""
        momenta = np.array([mode.momentum_sum() for mode in self.modes])
        positions = np.array([mode.position_sum() for mode in self.modes])
        return momenta @ positions.T

    def orthogonality_error(self) -> float:
        form = self.form_matrix()
        return float(np.max(np.abs(form - np.diag(self.betas)))) if len(self) else 0.0

    def with_source(self, source_hash: str) -> "ModeSet":
        return replace(self, source_hash=source_hash)

    def to_dict(self) -> dict:
        return {"count": len(self), "stable": self.stable, "normalized": self.normalized,
                "betas": self.betas.tolist(), "source_hash": self.source_hash}


@dataclass(frozen=True, eq=False)
class SeedPencil:
    """小参数近似的广义本征问题 LHS·C_0 = β²·RHS·C_0"""
    lhs: np.ndarray
    rhs: np.ndarray

    @classmethod
    def from_hessian(cls, hessian: HessianSeries) -> "SeedPencil":
        A, Q = hessian.A, hessian.Q
        Q2 = Q @ Q
        lhs = A + Q2 / 2.0 + Q @ A @ Q / 8.0 + Q2 @ Q2 / 128.0
        rhs = np.eye(hessian.dimension) - 3.0 * Q2 / 8.0
        return cls(lhs=0.5 * (lhs + lhs.T), rhs=0.5 * (rhs + rhs.T))

    def solve(self) -> Tuple[np.ndarray, np.ndarray]:
        smallest = float(np.min(np.linalg.eigvalsh(self.rhs)))
        if not smallest > 0:
            raise ConfigError(
                f"种子束右端矩阵非正定（最小本征值 {smallest:.3e}），Q 超出小参数近似的适用范围",
                {"min_eigenvalue": smallest})
        return scipy.linalg.eigh(self.lhs, self.rhs)


class ModeRefinementProblem:
    """
    截断阶数 n 的分块矩阵 M(β)

    对角块 A_eff − (2k+β)²，块 (k, k±m) 为 −Q_{2m}；维数 3N(2n+1)。
    """

    def __init__(self, hessian: HessianSeries, order: int, settings: Optional[ModeSettings] = None):
        self.hessian = hessian
        self.order = order
        self.settings = settings or ModeSettings()
        self.block = hessian.dimension
        self.dimension = self.block * (2 * order + 1)
        self.logger = logging.getLogger(self.__class__.__name__)
        self._base = self._assemble_base()
        self._base_sparse = scipy.sparse.csr_matrix(self._base) if not self.dense else None
        self._shifts = np.repeat(2.0 * np.arange(-order, order + 1), self.block)

    @property
    def dense(self) -> bool:
        return self.dimension <= self.settings.dense_limit

    def _assemble_base(self) -> np.ndarray:
        span = 2 * self.order + 1
        base = np.zeros((self.dimension, self.dimension))
        for row in range(span):
            for col in range(span):
                rows = slice(row * self.block, (row + 1) * self.block)
                cols = slice(col * self.block, (col + 1) * self.block)
                if row == col:
                    base[rows, cols] = self.hessian.A
                else:
                    base[rows, cols] = -self.hessian.harmonic(row - col)
        return base

    def diagonal_shift(self, beta: float) -> np.ndarray:
        return (self._shifts + beta) ** 2

    def matrix(self, beta: float) -> np.ndarray:
        return self._base - np.diag(self.diagonal_shift(beta))

    def apply(self, beta: float, vector: np.ndarray) -> np.ndarray:
        return self._base @ vector - self.diagonal_shift(beta) * vector

    def nearest(self, beta: float, count: int = 1,
                guess: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
        """最接近零的 count 个本征值（升序）及本征向量"""
        if not self.dense:
            matrix = self._base_sparse - scipy.sparse.diags(self.diagonal_shift(beta))
            try:
                values, vectors = scipy.sparse.linalg.eigsh(matrix.tocsc(), k=count, sigma=0.0,
                                                            which="LM", v0=guess)
            except (RuntimeError, scipy.sparse.linalg.ArpackError) as exc:
                self.logger.warning(f"移位求逆迭代失败，改用稠密求解: {exc}")
                values, vectors = scipy.linalg.eigh(self.matrix(beta))
        else:
            values, vectors = scipy.linalg.eigh(self.matrix(beta))
        picked = np.argsort(np.abs(values))[:count]
        picked = picked[np.argsort(values[picked])]
        return values[picked], vectors[:, picked]

    def residual(self, beta: float, vector: np.ndarray) -> float:
        return float(np.linalg.norm(self.apply(beta, vector)) / np.linalg.norm(vector))

    def stack(self, sidebands: np.ndarray) -> np.ndarray:
        """(2n'+1, 3N) 边带 → 本问题阶数的堆叠向量（截断或补零）"""
        given = (sidebands.shape[0] - 1) // 2
        padded = np.zeros((2 * self.order + 1, self.block))
        keep = min(given, self.order)
        padded[self.order - keep:self.order + keep + 1] = sidebands[given - keep:given + keep + 1]
        return padded.reshape(-1)

    def unstack(self, vector: np.ndarray) -> np.ndarray:
        return vector.reshape(2 * self.order + 1, self.block)


@dataclass
class _Branch:
    beta: float
    vector: np.ndarray
    delta: float = math.inf
    stable: bool = True


def seed_modes(hessian: HessianSeries, order: int = 2) -> List[NormalMode]:
    """
    由种子束给出全部 3N 个模式的初值

    C_{±2} ≈ −(1∓β) Q C_0 / 4，C_{±4} ≈ (1∓3β/2) Q² C_0 / 64；负本征值记为虚指数。

    Returns:
        按 β 升序的未归一化 NormalMode 列表（stable=False 表示虚指数）
    """
    values, vectors = SeedPencil.from_hessian(hessian).solve()
    Q = hessian.Q
    width = max(order, 2)
    modes = []
    for value, c0 in zip(values, vectors.T):
        stable = value >= 0
        beta = math.sqrt(abs(value))
        sidebands = np.zeros((2 * width + 1, hessian.dimension))
        sidebands[width] = c0
        qc = Q @ c0
        sidebands[width + 1] = -(1.0 - beta) * qc / 4.0
        sidebands[width - 1] = -(1.0 + beta) * qc / 4.0
        sidebands[width + 2] = (1.0 - 1.5 * beta) * (Q @ qc) / 64.0
        sidebands[width - 2] = (1.0 + 1.5 * beta) * (Q @ qc) / 64.0
        modes.append(NormalMode(beta=beta, sidebands=sidebands, stable=stable).truncated(order))
        if not stable:
            logger.warning(f"种子本征值为负 ({value:.3e})，β 为虚数")
    return modes


def cluster_seeds(seeds: Sequence[NormalMode], threshold: float) -> List[List[int]]:
    """把升序种子按相邻 |Δβ| < threshold 分簇"""
    clusters: List[List[int]] = []
    for index, seed in enumerate(seeds):
        if clusters and abs(seed.beta - seeds[clusters[-1][-1]].beta) < threshold:
            clusters[-1].append(index)
        else:
            clusters.append([index])
    return clusters


def _unit(vector: np.ndarray) -> np.ndarray:
    return vector / np.linalg.norm(vector)


def resolve_degeneracy(problem: ModeRefinementProblem, seeds: Sequence[NormalMode]) -> List[NormalMode]:
    """
    近简并簇的整体精化

    每轮对每个成员在其当前 β 处求簇大小个最接近零的本征值并升序排列，
    第 i 个成员沿用第 i 个分支；与上一轮向量重叠 < 0.5 时告警并按最大重叠重新锚定。
    与所选本征值精确简并的本征子空间内取上一轮向量的投影，保持分支连续。
    """
    settings = problem.settings
    count = len(seeds)
    branches = [_Branch(seed.beta, _unit(problem.stack(seed.sidebands)), stable=seed.stable)
                for seed in seeds]
    if not all(branch.stable for branch in branches):
        return [_finish(problem, branch, 0) for branch in branches]

    iterations = 0
    for iterations in range(1, settings.max_iterations + 1):
        change = 0.0
        for index, branch in enumerate(branches):
            values, vectors = problem.nearest(branch.beta, count, guess=branch.vector)
            choice = min(index, len(values) - 1)
            group = np.abs(values - values[choice]) <= settings.degeneracy_tolerance * max(1.0, abs(values[choice]))
            overlap = float(np.linalg.norm(vectors[:, group].T @ branch.vector))
            if overlap < settings.overlap_threshold:
                overlaps = np.abs(vectors.T @ branch.vector)
                choice = int(np.argmax(overlaps))
                problem.logger.warning(
                    f"模式分支交叉 (β={branch.beta:.10f}): 重叠 {overlap:.3f}，重新锚定到第 {choice} 个分支")
                group = np.abs(values - values[choice]) <= settings.degeneracy_tolerance * max(1.0, abs(values[choice]))
            basis = vectors[:, group]
            projected = basis @ (basis.T @ branch.vector)
            if np.linalg.norm(projected) < 1e-12:
                projected = vectors[:, choice]
            branch.vector = _unit(projected)
            branch.delta = float(values[choice])
            squared = branch.beta ** 2 + branch.delta
            if squared < 0:
                problem.logger.warning(f"β² + Δ = {squared:.3e} < 0，模式不稳定")
                branch.stable = False
                return [_finish(problem, item, iterations) for item in branches]
            updated = math.sqrt(squared)
            change = max(change, abs(updated - branch.beta))
            branch.beta = updated
        if change < settings.tolerance:
            break
    else:
        raise ConvergenceError(
            f"模式精化未收敛: 最后 Δ = {[branch.delta for branch in branches]}",
            {"betas": [branch.beta for branch in branches],
             "deltas": [branch.delta for branch in branches]})

    if count > 1:
        _orthonormalize_degenerate(branches, settings.degeneracy_tolerance)
    return [_finish(problem, branch, iterations) for branch in branches]


def _orthonormalize_degenerate(branches: List[_Branch], tolerance: float) -> None:
    """精确简并的成员在欧氏意义下正交化，避免两支塌缩到同一向量"""
    start = 0
    while start < len(branches):
        stop = start + 1
        while stop < len(branches) and abs(branches[stop].beta - branches[start].beta) < tolerance:
            stop += 1
        if stop - start > 1:
            basis, _ = np.linalg.qr(np.array([branch.vector for branch in branches[start:stop]]).T)
            for offset, branch in enumerate(branches[start:stop]):
                vector = basis[:, offset]
                branch.vector = vector if vector @ branch.vector >= 0 else -vector
        start = stop


def _finish(problem: ModeRefinementProblem, branch: _Branch, iterations: int) -> NormalMode:
    residual = problem.residual(branch.beta, branch.vector) if branch.stable else math.inf
    return NormalMode(beta=branch.beta, sidebands=problem.unstack(branch.vector), residual=residual,
                      stable=branch.stable, iterations=iterations)


def refine_mode(problem: ModeRefinementProblem, seed: NormalMode) -> NormalMode:
    """单个模式的最近零本征值迭代"""
    return resolve_degeneracy(problem, [seed])[0]


def _sort_key(mode: NormalMode):
    return (mode.beta, tuple(np.round(mode.zero, 12)))


def normalize_modeset(modes: Sequence[NormalMode], source_hash: str = "",
                      settings: Optional[ModeSettings] = None) -> ModeSet:
    """
    按对易关系归一化并检查正交性

    精确简并的模式先在双线性型下旋转为正交；每个模式缩放到 w·s = β，
    C_0 绝对值最大的分量取正。范数非正的模式标记为不可量子化（normalized=False）。
    """
    settings = settings or ModeSettings()
    ordered = sorted(modes, key=_sort_key)
    if not all(mode.stable for mode in ordered):
        logger.warning("模式集包含虚指数，跳过归一化")
        return ModeSet(tuple(ordered), source_hash)

    ordered = _rotate_degenerate(ordered, settings.degeneracy_tolerance)
    result = []
    for mode in ordered:
        form = mode.norm_form()
        if not form > 0:
            logger.warning(f"模式 β={mode.beta:.10f} 的归一化范数非正 ({form:.3e})，无法量子化")
            result.append(replace(mode, normalized=False))
            continue
        sidebands = mode.sidebands * math.sqrt(mode.beta / form)
        zero = sidebands[mode.order]
        if zero[int(np.argmax(np.abs(zero)))] < 0:
            sidebands = -sidebands
        result.append(replace(mode, sidebands=sidebands, normalized=True))

    mode_set = ModeSet(tuple(sorted(result, key=_sort_key)), source_hash)
    error = mode_set.orthogonality_error()
    if error > settings.orthogonality_tolerance:
        logger.warning(f"模式正交性误差 {error:.3e} 超出 {settings.orthogonality_tolerance:.1e}")
    else:
        logger.debug(f"模式正交性误差 {error:.3e}")
    return mode_set


def _rotate_degenerate(modes: List[NormalMode], tolerance: float) -> List[NormalMode]:
    result = list(modes)
    start = 0
    while start < len(result):
        stop = start + 1
        while stop < len(result) and abs(result[stop].beta - result[start].beta) < tolerance:
            stop += 1
        if stop - start > 1:
            group = result[start:stop]
            momenta = np.array([mode.momentum_sum() for mode in group])
            positions = np.array([mode.position_sum() for mode in group])
            form = momenta @ positions.T
            form = 0.5 * (form + form.T)
            off_diagonal = np.max(np.abs(form - np.diag(np.diag(form))))
            if off_diagonal > 1e-12 * np.max(np.abs(np.diag(form))):
                _, rotation = np.linalg.eigh(form)
                stacked = np.array([mode.sidebands for mode in group])
                rotated = np.tensordot(rotation.T, stacked, axes=([1], [0]))
                result[start:stop] = [replace(mode, sidebands=sidebands)
                                      for mode, sidebands in zip(group, rotated)]
        start = stop
    return result


def solve_normal_modes(trajectory: EquilibriumTrajectory, drive: TrapDrive,
                       truncation: TruncationSettings, settings: Optional[ModeSettings] = None,
                       threads: int = 1, source_hash: str = "") -> ModeSet:
    """
    Hessian 级数 → 种子 → 分簇 → 并行精化 → 归一化

    简并簇作为整体在同一个工作线程上精化；executor.map 保持输出顺序确定。
    """
    settings = settings or ModeSettings()
    hessian = build_hessian_series(trajectory, drive, truncation.hessian_order)
    problem = ModeRefinementProblem(hessian, truncation.mode_order, settings)
    seeds = seed_modes(hessian, truncation.mode_order)
    clusters = cluster_seeds(seeds, settings.cluster_threshold)
    logger.info(f"模式求解: {len(seeds)} 个种子, {len(clusters)} 个簇, 分块维数 {problem.dimension}, "
                f"{'稠密' if problem.dense else '移位求逆'}求解")

    def refine(cluster: List[int]) -> List[NormalMode]:
        return resolve_degeneracy(problem, [seeds[index] for index in cluster])

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        refined = [mode for group in executor.map(refine, clusters) for mode in group]

    for seed, mode in zip(seeds, refined):
        logger.debug(f"β 种子 {seed.beta:.8f} → 精化 {mode.beta:.12f}, 残差 {mode.residual:.2e}, "
                     f"迭代 {mode.iterations}")
    mode_set = normalize_modeset(refined, source_hash, settings)
    if not mode_set.stable:
        logger.warning("模式集不稳定（存在虚 β），门设计将拒绝使用")
    else:
        logger.info(f"模式求解完成: β ∈ [{mode_set.betas.min():.6f}, {mode_set.betas.max():.6f}]")
    return mode_set
