"""
=============================================================================
Paul 阱门设计工具包 - Jacobi–Anger 级数积分引擎
=============================================================================

被积函数中的相位调制因子

    exp(i Σ_l φ^{(l)} cos(l ω_rf t))

按 Jacobi–Anger 恒等式展开为各层 Bessel 系数之积，再把每个 cos 拆成两个指数，
得到移频表 exp(iφ̃(t)) = Σ_K a_K e^{iKω_rf t}。移频表只依赖相位谐波，
按 (harmonics, budget) 缓存，之后所有积分都化为 exponential 模块中的闭式。

深度优先展开的剪枝规则：在第 l 层，当 n > |φ^{(l)}| 且累积系数 |c·c_n| < ε 时
停止该层的后续阶数；进入节点时若累积系数 < ε 则整棵子树丢弃。
所有被丢弃的部分都累积为一个严格的上界 dropped_bound。

主要组件：
- PhaseSpec / ModulationSpec / SeriesBudget / SeriesValue: 数据类型
- JacobiAngerTable, phase_table: 移频表及其缓存
- single_integral, modulated_single_integral: 单重积分
- double_integral, modulated_double_integral: 有序二重积分
- spectral_weights, single_sum, double_sum, pair_branch_sums: 供门组装按模式批量调用的向量化内核

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from ..core.exceptions import BudgetExhaustedError
from .bessel import jacobi_anger_coefficients, jacobi_anger_tail_bound
from .exponential import frequency_integral, ordered_exp_integral

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhaseSpec:
    """运动相位 φ(t) = static + Σ_l harmonics[l−1]·cos(l ω_rf t)"""
    static: float = 0.0
    harmonics: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "static", float(self.static))
        object.__setattr__(self, "harmonics", tuple(float(h) for h in self.harmonics))

    @property
    def order(self) -> int:
        return len(self.harmonics)

    def value(self, t, omega_rf: float):
        t = np.asarray(t, dtype=float)
        total = np.full(t.shape, self.static)
        for level, amplitude in enumerate(self.harmonics, start=1):
            total = total + amplitude * np.cos(level * omega_rf * t)
        return total

    def shifted(self, offset: float) -> "PhaseSpec":
        return PhaseSpec(self.static + offset, self.harmonics)

    def negated(self) -> "PhaseSpec":
        return PhaseSpec(-self.static, tuple(-h for h in self.harmonics))

    def truncated(self, order: int) -> "PhaseSpec":
        return PhaseSpec(self.static, self.harmonics[:order])


@dataclass(frozen=True)
class ModulationSpec:
    """
    模式边带调制 Σ_n amplitudes[n+n_cut]·e^{i(ω + nω_rf)t}

    bounds 为每个 n 的剪枝幅度（门组装时取所有模式的均方根），缺省用 |c_n|。
    """
    amplitudes: Tuple[float, ...]
    frequency: float
    bounds: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        amplitudes = tuple(float(c) for c in self.amplitudes)
        if len(amplitudes) % 2 != 1:
            raise ValueError(f"边带系数个数必须为奇数 2n_cut+1，实际 {len(amplitudes)}")
        object.__setattr__(self, "amplitudes", amplitudes)
        if self.bounds is not None:
            bounds = tuple(float(b) for b in self.bounds)
            if len(bounds) != len(amplitudes):
                raise ValueError("bounds 与 amplitudes 长度不一致")
            object.__setattr__(self, "bounds", bounds)

    @property
    def order(self) -> int:
        return (len(self.amplitudes) - 1) // 2

    def harmonic_orders(self) -> range:
        return range(-self.order, self.order + 1)

    def magnitude_bounds(self) -> np.ndarray:
        if self.bounds is not None:
            return np.asarray(self.bounds)
        return np.abs(np.asarray(self.amplitudes))

    def truncated(self, n_cut: int) -> "ModulationSpec":
        n_cut = min(n_cut, self.order)
        lo = self.order - n_cut
        hi = self.order + n_cut + 1
        bounds = None if self.bounds is None else self.bounds[lo:hi]
        return ModulationSpec(self.amplitudes[lo:hi], self.frequency, bounds)


@dataclass(frozen=True)
class SeriesBudget:
    """级数剪枝精度、Bessel 截断与项数预算"""
    precision: float = 1e-8
    bessel_cutoff: int = 20
    max_terms: int = 200_000


@dataclass(frozen=True)
class SeriesValue:
    """积分值与被丢弃项的上界"""
    value: complex
    dropped_bound: float
    terms: int


@dataclass(frozen=True, eq=False)
class JacobiAngerTable:
    """
    移频表 exp(iφ̃(t)) = Σ_K a_K e^{iKω_rf t}

    coefficients 为 K ∈ [−offset, offset] 的稠密数组，a_K = a_{−K}。
    leaves: 深度优先展开的叶子（Bessel 乘积）数；exponentials: 拆分后的指数项数。
    """
    coefficients: np.ndarray
    offset: int
    leaves: int
    exponentials: int
    dropped_bound: float

    @property
    def shifts(self) -> np.ndarray:
        return np.arange(-self.offset, self.offset + 1)

    @property
    def mass(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    def branch(self, sign: int) -> np.ndarray:
        """sign=+1: e^{iφ̃}；sign=−1: e^{−iφ̃}"""
        return self.coefficients if sign > 0 else np.conj(self.coefficients)

    def evaluate(self, t, omega_rf: float, sign: int = 1):
        t = np.asarray(t, dtype=float)
        phases = np.exp(1j * omega_rf * np.multiply.outer(t, self.shifts))
        return phases @ self.branch(sign)


def _expand_phase(harmonics: Tuple[float, ...], budget: SeriesBudget) -> JacobiAngerTable:
    eps = budget.precision
    n_max = budget.bessel_cutoff
    active = [(level, phi) for level, phi in enumerate(harmonics, start=1) if phi != 0.0]

    for level, phi in active:
        if abs(phi) > n_max:
            raise BudgetExhaustedError(
                f"相位谐波 φ^({level}) = {phi:.4g} 超过 Bessel 截断 n_max = {n_max}",
                {"level": level, "phi": phi, "bessel_cutoff": n_max})

    coefficients = [jacobi_anger_coefficients(phi, n_max) for _, phi in active]
    level_mass = [sum(abs(c) for c in coeffs) + jacobi_anger_tail_bound(n_max + 1, phi)
                  for (_, phi), coeffs in zip(active, coefficients)]
    # subtree_mass[l]: 第 l 层及以下每单位系数的幅度上界
    subtree_mass = [1.0] * (len(active) + 1)
    for index in range(len(active) - 1, -1, -1):
        subtree_mass[index] = subtree_mass[index + 1] * level_mass[index]

    table = defaultdict(complex)
    state = {"leaves": 0, "exponentials": 0, "dropped": 0.0}

    def visit(depth: int, weight: complex, shifts: Tuple[int, ...]):
        if abs(weight) < eps:
            state["dropped"] += abs(weight) * subtree_mass[depth]
            return
        if depth == len(active):
            state["leaves"] += 1
            split = [s for s in shifts if s != 0]
            share = weight / (2 ** len(split))
            for signs in itertools.product((1, -1), repeat=len(split)):
                table[sum(sg * s for sg, s in zip(signs, split))] += share
            state["exponentials"] += 2 ** len(split)
            if state["exponentials"] > budget.max_terms:
                raise BudgetExhaustedError(
                    f"级数展开超出项数预算 {budget.max_terms}",
                    {"partial_bound": state["dropped"], "terms": state["exponentials"]})
            return

        level, phi = active[depth]
        for n, c_n in enumerate(coefficients[depth]):
            child = weight * c_n
            if n > abs(phi) and abs(child) < eps:
                state["dropped"] += (abs(weight) * jacobi_anger_tail_bound(n, phi)
                                     * subtree_mass[depth + 1])
                break
            visit(depth + 1, child, shifts + (level * n,))
        else:
            state["dropped"] += (abs(weight) * jacobi_anger_tail_bound(n_max + 1, phi)
                                 * subtree_mass[depth + 1])

    visit(0, 1.0 + 0.0j, ())

    offset = max((abs(k) for k in table), default=0)
    dense = np.zeros(2 * offset + 1, dtype=complex)
    for shift, value in table.items():
        dense[shift + offset] += value
    dense = 0.5 * (dense + dense[::-1])
    return JacobiAngerTable(coefficients=dense, offset=offset, leaves=state["leaves"],
                            exponentials=state["exponentials"], dropped_bound=state["dropped"])


@lru_cache(maxsize=512)
def _cached_table(harmonics: Tuple[float, ...], budget: SeriesBudget) -> JacobiAngerTable:
    table = _expand_phase(harmonics, budget)
    logger.debug(f"相位展开: 谐波 {len(harmonics)} 阶, 叶子 {table.leaves}, "
                 f"指数项 {table.exponentials}, 移频范围 ±{table.offset}, 丢弃上界 {table.dropped_bound:.3e}")
    return table


def phase_table(phase: PhaseSpec, budget: SeriesBudget) -> JacobiAngerTable:
    """PhaseSpec 的移频表（不含静态相位），按谐波与预算缓存"""
    return _cached_table(phase.harmonics, budget)


# ---------------------------------------------------------------------------
# 向量化内核
# ---------------------------------------------------------------------------

def spectral_weights(coefficients: np.ndarray, amplitudes: np.ndarray, reverse: bool = False) -> np.ndarray:
    """
    移频表与边带系数的卷积

    Args:
        coefficients: 移频表稠密系数，偏移 offset
        amplitudes: 形状 (modes, 2n_cut+1) 的边带系数
        reverse: True 时与 c_{−n} 卷积（共轭模式函数 u*）

    Returns:
        形状 (modes, len(coefficients) + 2n_cut) 的权重，偏移 offset + n_cut
    """
    amplitudes = np.atleast_2d(np.asarray(amplitudes, dtype=float))
    if reverse:
        amplitudes = amplitudes[:, ::-1]
    return np.stack([np.convolve(coefficients, row) for row in amplitudes])


def single_sum(t1: float, t2: float, base: np.ndarray, weights: np.ndarray, offset: int,
               omega_rf: float) -> np.ndarray:
    """Σ_P W[m, P]·∫_{t1}^{t2} e^{i(base[m] + Pω_rf)t} dt"""
    shifts = np.arange(weights.shape[-1]) - offset
    nu = np.asarray(base, dtype=float)[:, None] + shifts[None, :] * omega_rf
    return np.sum(weights * frequency_integral(t1, t2, nu), axis=-1)


def double_sum(t1: float, t2: float, base_a: np.ndarray, base_b: np.ndarray,
               weights_a: np.ndarray, offset_a: int, weights_b: np.ndarray, offset_b: int,
               omega_rf: float, precision: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Σ_{P,P'} W_a[m,P] W_b[m,P'] ∫_{t1}^{t2} dt e^{i(base_a[m]+Pω_rf)t} ∫_{t1}^{t} dt' e^{i(base_b[m]+P'ω_rf)t'}

    |W_a W_b| < precision 的组合被剪枝。

    Returns:
        (values, dropped) 两个形状 (modes,) 的数组
    """
    products = weights_a[:, :, None] * weights_b[:, None, :]
    keep = np.abs(products) >= precision
    width = t2 - t1
    dropped = np.sum(np.where(keep, 0.0, np.abs(products)), axis=(1, 2)) * 0.5 * width ** 2

    shifts_a = (np.arange(weights_a.shape[1]) - offset_a) * omega_rf
    shifts_b = (np.arange(weights_b.shape[1]) - offset_b) * omega_rf
    a = np.asarray(base_a, dtype=float)[:, None, None] + shifts_a[None, :, None]
    b = np.asarray(base_b, dtype=float)[:, None, None] + shifts_b[None, None, :]
    a, b = np.broadcast_arrays(a, b)

    values = np.zeros(products.shape, dtype=complex)
    values[keep] = products[keep] * ordered_exp_integral(t1, t2, a[keep], b[keep])
    return values.sum(axis=(1, 2)), dropped


# ---------------------------------------------------------------------------
# 单重积分
# ---------------------------------------------------------------------------

def phase_branch_integral(t1: float, t2: float, mu: float, omega: float, omega_rf: float,
                          phase: PhaseSpec, budget: SeriesBudget, sign: int = 1) -> complex:
    """∫_{t1}^{t2} e^{isμt} e^{is·φ(t)} e^{iωt} dt，s = sign"""
    table = phase_table(phase, budget)
    weights = table.branch(sign)[None, :]
    value = single_sum(t1, t2, np.array([sign * mu + omega]), weights, table.offset, omega_rf)[0]
    return complex(np.exp(1j * sign * phase.static) * value)


def single_integral(t1: float, t2: float, mu: float, omega: float, omega_rf: float,
                    phase: PhaseSpec, budget: SeriesBudget, amplitude: complex = 1.0) -> SeriesValue:
    """
    amplitude·∫_{t1}^{t2} sin(μt + φ(t)) e^{iωt} dt

    Returns:
        SeriesValue: 积分值、丢弃上界、展开指数项数
    """
    if t2 < t1:
        raise ValueError(f"积分区间要求 t2 ≥ t1: [{t1}, {t2}]")
    table = phase_table(phase, budget)
    plus = phase_branch_integral(t1, t2, mu, omega, omega_rf, phase, budget, sign=1)
    minus = phase_branch_integral(t1, t2, mu, omega, omega_rf, phase, budget, sign=-1)
    value = amplitude * (plus - minus) / 2j
    bound = abs(amplitude) * table.dropped_bound * (t2 - t1)
    return SeriesValue(value=complex(value), dropped_bound=bound, terms=2 * table.exponentials)


def modulated_single_integral(t1: float, t2: float, mu: float, omega_k: float, omega_rf: float,
                              modulation: ModulationSpec, phase: PhaseSpec,
                              budget: SeriesBudget) -> SeriesValue:
    """
    Σ_n c_n ∫_{t1}^{t2} sin(μt + φ(t)) e^{i(ω_k + nω_rf)t} dt

    幅度界 < ε 的边带阶数被剪枝。
    """
    if t2 < t1:
        raise ValueError(f"积分区间要求 t2 ≥ t1: [{t1}, {t2}]")
    table = phase_table(phase, budget)
    amplitudes = np.asarray(modulation.amplitudes)
    pruned = modulation.magnitude_bounds() < budget.precision
    kept = np.where(pruned, 0.0, amplitudes)
    width = t2 - t1

    value = 0.0j
    for sign in (1, -1):
        weights = spectral_weights(table.branch(sign), kept[None, :])
        branch = single_sum(t1, t2, np.array([sign * mu + omega_k]), weights,
                            table.offset + modulation.order, omega_rf)[0]
        value += sign * np.exp(1j * sign * phase.static) * branch
    value /= 2j

    bound = (table.dropped_bound * float(np.sum(np.abs(kept)))
             + (table.mass + table.dropped_bound) * float(np.sum(np.abs(amplitudes[pruned])))) * width
    return SeriesValue(value=complex(value), dropped_bound=bound,
                       terms=2 * table.exponentials * int(np.count_nonzero(~pruned)))


# ---------------------------------------------------------------------------
# 有序二重积分
# ---------------------------------------------------------------------------

def pair_branch_sums(t1: float, t2: float, mu: float, base_a, base_b, omega_rf: float,
                     table_i: JacobiAngerTable, table_j: JacobiAngerTable,
                     amplitudes_i: np.ndarray, amplitudes_j: np.ndarray,
                     static_i: float, static_j: float, precision: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    按模式批量计算 ∫∫_{t'<t} sin(μt+φ_i) u_i(t) sin(μt'+φ_j) u_j*(t')

    u_i(t) = Σ_n amplitudes_i[m, n] e^{i(base_a[m] + nω_rf)t}，
    u_j*(t') = Σ_n amplitudes_j[m, n] e^{−i(base_b[m] + nω_rf)t'}。

    Returns:
        (values, bounds) 两个形状 (modes,) 的数组
    """
    amplitudes_i = np.atleast_2d(amplitudes_i)
    amplitudes_j = np.atleast_2d(amplitudes_j)
    base_a = np.broadcast_to(np.asarray(base_a, dtype=float), (amplitudes_i.shape[0],))
    base_b = np.broadcast_to(np.asarray(base_b, dtype=float), (amplitudes_j.shape[0],))
    order_i = (amplitudes_i.shape[-1] - 1) // 2
    order_j = (amplitudes_j.shape[-1] - 1) // 2
    width = t2 - t1
    total = np.zeros(amplitudes_i.shape[0], dtype=complex)
    bound = np.zeros(amplitudes_i.shape[0])
    tail_i = table_i.dropped_bound * np.sum(np.abs(amplitudes_i), axis=1)
    tail_j = table_j.dropped_bound * np.sum(np.abs(amplitudes_j), axis=1)
    for s1, s2 in itertools.product((1, -1), repeat=2):
        weights_a = spectral_weights(table_i.branch(s1), amplitudes_i)
        weights_b = spectral_weights(table_j.branch(s2), amplitudes_j, reverse=True)
        values, dropped = double_sum(
            t1, t2, s1 * mu + base_a, s2 * mu - base_b,
            weights_a, table_i.offset + order_i, weights_b, table_j.offset + order_j,
            omega_rf, precision)
        total += s1 * s2 * np.exp(1j * (s1 * static_i + s2 * static_j)) * values
        mass_a = np.sum(np.abs(weights_a), axis=1)
        mass_b = np.sum(np.abs(weights_b), axis=1)
        bound += dropped + 0.5 * width ** 2 * (tail_i * (mass_b + tail_j) + tail_j * mass_a)
    return -total / 4.0, bound / 4.0


def double_integral(t1: float, t2: float, mu: float, omega1: float, omega2: float, omega_rf: float,
                    phase_i: PhaseSpec, phase_j: PhaseSpec, budget: SeriesBudget) -> SeriesValue:
    """
    ∫_{t1}^{t2} dt ∫_{t1}^{t} dt' sin(μt + φ_i(t)) sin(μt' + φ_j(t')) e^{iω1 t} e^{−iω2 t'}

    四个 (±μ, ±μ) 分支分别展开，|c1·c2| < ε 的组合被剪枝。
    """
    if t2 < t1:
        raise ValueError(f"积分区间要求 t2 ≥ t1: [{t1}, {t2}]")
    table_i = phase_table(phase_i, budget)
    table_j = phase_table(phase_j, budget)
    unit = np.ones((1, 1))
    values, bounds = pair_branch_sums(t1, t2, mu, omega1, omega2, omega_rf, table_i, table_j,
                                      unit, unit, phase_i.static, phase_j.static, budget.precision)
    return SeriesValue(value=complex(values[0]), dropped_bound=float(bounds[0]),
                       terms=4 * table_i.exponentials * table_j.exponentials)


def modulated_double_integral(t1: float, t2: float, mu: float, omega_k: float, omega_rf: float,
                              modulation_i: ModulationSpec, modulation_j: ModulationSpec,
                              phase_i: PhaseSpec, phase_j: PhaseSpec,
                              budget: SeriesBudget) -> SeriesValue:
    """
    Σ_{n1,n2} c^i_{n1} c^j_{n2} · double_integral(ω1 = ω_k + n1ω_rf, ω2 = ω_k + n2ω_rf)

    即 ∫∫ χ_i(t) u_i(t) χ_j(t') u_j*(t')（单位 Rabi 幅度）。
    """
    if t2 < t1:
        raise ValueError(f"积分区间要求 t2 ≥ t1: [{t1}, {t2}]")
    table_i = phase_table(phase_i, budget)
    table_j = phase_table(phase_j, budget)
    amplitudes_i = np.where(modulation_i.magnitude_bounds() < budget.precision, 0.0,
                            np.asarray(modulation_i.amplitudes))[None, :]
    amplitudes_j = np.where(modulation_j.magnitude_bounds() < budget.precision, 0.0,
                            np.asarray(modulation_j.amplitudes))[None, :]
    values, bounds = pair_branch_sums(t1, t2, mu, omega_k, omega_k, omega_rf, table_i, table_j,
                                      amplitudes_i, amplitudes_j, phase_i.static, phase_j.static,
                                      budget.precision)
    bound = float(bounds[0])
    pruned_mass = (float(np.sum(np.abs(modulation_i.amplitudes))) * float(np.sum(np.abs(modulation_j.amplitudes)))
                   - float(np.sum(np.abs(amplitudes_i))) * float(np.sum(np.abs(amplitudes_j))))
    bound += 0.5 * (t2 - t1) ** 2 * max(pruned_mass, 0.0) * (table_i.mass + table_i.dropped_bound) \
        * (table_j.mass + table_j.dropped_bound)
    return SeriesValue(value=complex(values[0]), dropped_bound=bound,
                       terms=4 * table_i.exponentials * table_j.exponentials)


def as_budget(precision: float, bessel_cutoff: int, max_terms: int) -> SeriesBudget:
    return SeriesBudget(precision=float(precision), bessel_cutoff=int(bessel_cutoff),
                        max_terms=int(max_terms))


def clear_phase_cache() -> None:
    _cached_table.cache_clear()


def phase_cache_info():
    """相位展开缓存的命中统计"""
    return _cached_table.cache_info()
