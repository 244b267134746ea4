"""
=============================================================================
Paul 阱门设计工具包 - 固定脉冲的参数漂移分析
=============================================================================

对已设计的脉冲（标准或鲁棒）评估：
- 失谐漂移 δμ：μ → μ + δμ
- 门时间漂移 δτ：各段等比拉伸，Ω 不变
- 幅度噪声：每段独立乘以 N(1, σ²) 的因子，按固定种子抽样取平均

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import logging
from typing import Iterable

import numpy as np
import pandas as pd

from ..core.exceptions import ConfigError
from .context import GateContext
from .optimizer import PulseSequence, build_problem, report_for
from .scan import _run_pool

logger = logging.getLogger(__name__)


def _delta_f_at(context: GateContext, pulse: PulseSequence) -> float:
    return report_for(context, build_problem(context), pulse).delta_f


def detuning_sensitivity(context: GateContext, pulse: PulseSequence, step: float) -> float:
    """有限差分 max_± |δF(μ ± δ) − δF(μ)| / δ，单位 1/(rad/s)"""
    if not step > 0:
        raise ConfigError(f"有限差分步长必须为正: {step}")
    base = _delta_f_at(context, pulse)
    mu = context.laser.detuning
    return max(abs(_delta_f_at(context.with_detuning(mu + sign * step), pulse) - base) / step
               for sign in (1.0, -1.0))


def detuning_drift_table(context: GateContext, pulse: PulseSequence, drifts: Iterable[float],
                         threads: int = 1) -> pd.DataFrame:
    """δF 随失谐漂移 δμ (rad/s) 的变化"""
    mu = context.laser.detuning

    def evaluate(delta: float) -> dict:
        return {"delta_mu_rad_s": delta, "delta_F": _delta_f_at(context.with_detuning(mu + delta), pulse)}

    return pd.DataFrame(_run_pool(evaluate, [float(d) for d in drifts], threads),
                        columns=["delta_mu_rad_s", "delta_F"])


def gate_time_drift_table(context: GateContext, pulse: PulseSequence, drifts: Iterable[float],
                          threads: int = 1) -> pd.DataFrame:
    """δF 随门时间漂移 δτ (s) 的变化，各段等比拉伸"""
    tau = context.laser.gate_time

    def evaluate(delta: float) -> dict:
        if not tau + delta > 0:
            raise ConfigError(f"门时间漂移使 τ 非正: τ = {tau}, δτ = {delta}")
        return {"delta_tau_s": delta, "delta_F": _delta_f_at(context.with_gate_time(tau + delta), pulse)}

    return pd.DataFrame(_run_pool(evaluate, [float(d) for d in drifts], threads),
                        columns=["delta_tau_s", "delta_F"])


def amplitude_noise_table(context: GateContext, pulse: PulseSequence, sigmas: Iterable[float],
                          samples: int = 200, seed: int = 0) -> pd.DataFrame:
    """
    分段幅度噪声：Ω_p → Ω_p·(1 + σ·ξ_p)，ξ_p ~ N(0, 1)

    每个 σ 使用同一组随机数（固定种子），平均 δF 对 σ 单调可比。
    """
    if samples < 1:
        raise ConfigError(f"抽样数必须为正: {samples}")
    problem = build_problem(context)
    noise = np.random.default_rng(seed).standard_normal((samples, pulse.segments))
    rows = []
    for sigma in sigmas:
        sigma = float(sigma)
        if sigma < 0:
            raise ConfigError(f"噪声强度不能为负: {sigma}")
        values = np.array([report_for(context, problem, pulse.with_amplitudes(pulse.amplitudes * (1.0 + sigma * xi)))
                           .delta_f for xi in noise])
        rows.append({"sigma": sigma, "delta_F_mean": float(values.mean()), "delta_F_std": float(values.std()),
                     "samples": samples})
    logger.debug(f"幅度噪声: {len(rows)} 个 σ, 每个 {samples} 次抽样")
    return pd.DataFrame(rows, columns=["sigma", "delta_F_mean", "delta_F_std", "samples"])
