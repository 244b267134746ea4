"""
=============================================================================
Paul 阱门设计工具包 - 参数扫描
=============================================================================

- scan_detuning: 逐个 μ 重新优化脉冲，输出 δF、Θ、max|α|
- scan_start_offset: 固定脉冲，扫描起点偏移 t0
- scan_segments: 固定 μ、τ，比较不同分段数的最优 δF

上下文不可变，每个网格点独立求值；executor.map 保证输出顺序与网格一致。
单点失败记录在 status 列中，扫描继续。

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Sequence

import numpy as np
import pandas as pd

from ..core.exceptions import ConfigError, TrapToolkitError
from .context import GateContext
from .optimizer import PulseSequence, evaluate_sequence, optimize_pulse

logger = logging.getLogger(__name__)

STATUS_OK = "ok"


def parse_grid(minimum: float, maximum: float, step: float) -> np.ndarray:
    """闭区间 [min, max] 上步长为 step 的网格"""
    if not minimum < maximum:
        raise ConfigError(f"扫描网格要求 min < max: {minimum} ≥ {maximum}")
    if not step > 0:
        raise ConfigError(f"扫描步长必须为正: {step}")
    count = int(np.floor((maximum - minimum) / step + 1e-9)) + 1
    return minimum + step * np.arange(count)


def _run_pool(function: Callable, points: Sequence, threads: int) -> List[dict]:
    if threads <= 1:
        return [function(point) for point in points]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(function, points))


def _failure_row(key: str, value: float, error: TrapToolkitError) -> dict:
    logger.warning(f"{key} = {value:.6e} 处求值失败: {error.message}")
    return {key: value, "delta_F": np.nan, "Theta_rad": np.nan, "max_alpha_abs": np.nan,
            "status": f"{type(error).__name__}: {error.message}"}


def scan_detuning(context: GateContext, detunings: Iterable[float], threads: int = 1) -> pd.DataFrame:
    """
    失谐扫描

    Args:
        context: 模板上下文（其失谐被逐点替换）
        detunings: μ 网格 (rad/s)
        threads: 线程数

    Returns:
        DataFrame: mu_rad_s, delta_F, Theta_rad, max_alpha_abs, status
    """
    grid = [float(mu) for mu in detunings]

    def evaluate(mu: float) -> dict:
        try:
            _, report = optimize_pulse(context.with_detuning(mu))
        except TrapToolkitError as error:
            return _failure_row("mu_rad_s", mu, error)
        return {"mu_rad_s": mu, "delta_F": report.delta_f, "Theta_rad": report.theta,
                "max_alpha_abs": report.max_alpha, "status": STATUS_OK}

    logger.info(f"失谐扫描: {len(grid)} 个点, {threads} 个线程")
    frame = pd.DataFrame(_run_pool(evaluate, grid, threads),
                         columns=["mu_rad_s", "delta_F", "Theta_rad", "max_alpha_abs", "status"])
    failed = int((frame["status"] != STATUS_OK).sum())
    if failed:
        logger.warning(f"失谐扫描有 {failed} 个点失败")
    return frame


def scan_start_offset(context: GateContext, pulse: PulseSequence, offsets: Iterable[float],
                      threads: int = 1) -> pd.DataFrame:
    """
    固定脉冲下 δF 随起点偏移 t0 (s) 的变化

    Returns:
        DataFrame: t0_s, delta_F, Theta_rad, max_alpha_abs, status
    """
    grid = [float(t0) for t0 in offsets]

    def evaluate(t0: float) -> dict:
        try:
            report = evaluate_sequence(context, pulse, t0)
        except TrapToolkitError as error:
            return _failure_row("t0_s", t0, error)
        return {"t0_s": t0, "delta_F": report.delta_f, "Theta_rad": report.theta,
                "max_alpha_abs": report.max_alpha, "status": STATUS_OK}

    frame = pd.DataFrame(_run_pool(evaluate, grid, threads),
                         columns=["t0_s", "delta_F", "Theta_rad", "max_alpha_abs", "status"])
    valid = frame.loc[frame["status"] == STATUS_OK, "delta_F"]
    if len(valid):
        logger.info(f"t0 扫描: δF 平均 {valid.mean():.4e}, 最小 {valid.min():.4e}, 最大 {valid.max():.4e}")
    return frame


def rf_period_offsets(context: GateContext, points: int) -> np.ndarray:
    """一个 RF 周期内等间距的 t0 (s)，不含终点"""
    if points < 1:
        raise ConfigError(f"t0 点数必须为正: {points}")
    return context.units.rf_period * np.arange(points) / points


def scan_segments(context: GateContext, segment_counts: Iterable[int], threads: int = 1) -> pd.DataFrame:
    """
    分段数研究：固定 μ、τ 的最优 δF

    Returns:
        DataFrame: n_seg, delta_F, Theta_rad, max_alpha_abs, peak_Omega_rad_s, status
    """
    counts = [int(n) for n in segment_counts]
    if any(n < 1 for n in counts):
        raise ConfigError(f"分段数必须为正整数: {counts}")

    def evaluate(segments: int) -> dict:
        try:
            pulse, report = optimize_pulse(context.with_segments(segments))
        except TrapToolkitError as error:
            row = _failure_row("n_seg", segments, error)
            row["peak_Omega_rad_s"] = np.nan
            return row
        return {"n_seg": segments, "delta_F": report.delta_f, "Theta_rad": report.theta,
                "max_alpha_abs": report.max_alpha, "peak_Omega_rad_s": pulse.peak, "status": STATUS_OK}

    return pd.DataFrame(_run_pool(evaluate, counts, threads),
                        columns=["n_seg", "delta_F", "Theta_rad", "max_alpha_abs", "peak_Omega_rad_s", "status"])
