#!/usr/bin/env python3
"""
性能监控模块
记录流水线各阶段的耗时、CPU 时间与内存占用，并导出 performance.json
"""

import json
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import psutil


@dataclass
class StageMetrics:
    """阶段性能指标"""
    stage: str
    wall_time: float
    cpu_time: float
    rss_before: int
    rss_after: int
    success: bool
    error_message: Optional[str] = None
    additional_data: Dict[str, Any] = field(default_factory=dict)

    @property
    def memory_delta(self) -> int:
        return self.rss_after - self.rss_before


class PerformanceMonitor:
    """阶段性能监控器"""

    def __init__(self, slow_stage_threshold: float = 600.0):
        """
        初始化性能监控器

        Args:
            slow_stage_threshold: 单阶段耗时超过该值（秒）时记录警告
        """
        self.logger = logging.getLogger(self.__class__.__name__)
        self.process = psutil.Process()
        self.stages: List[StageMetrics] = []
        self.thresholds = {"stage_time": slow_stage_threshold}

    @contextmanager
    def stage(self, name: str, **additional_data):
        """
        阶段计时上下文

        使用示例：
            with monitor.stage("equilibrium", n_ions=4):
                ...
        """
        rss_before = self.process.memory_info().rss
        cpu_before = self.process.cpu_times()
        start = time.perf_counter()
        error_message = None
        try:
            yield
        except Exception as e:
            error_message = str(e)
            raise
        finally:
            wall_time = time.perf_counter() - start
            cpu_after = self.process.cpu_times()
            metric = StageMetrics(
                stage=name,
                wall_time=wall_time,
                cpu_time=(cpu_after.user - cpu_before.user) + (cpu_after.system - cpu_before.system),
                rss_before=rss_before,
                rss_after=self.process.memory_info().rss,
                success=error_message is None,
                error_message=error_message,
                additional_data=dict(additional_data),
            )
            self.stages.append(metric)
            self._check_thresholds(metric)
            self.logger.debug(f"阶段 {name}: {wall_time:.3f}s, 内存变化 {metric.memory_delta / 1024 / 1024:+.1f} MB")

    def _check_thresholds(self, metric: StageMetrics):
        if metric.wall_time > self.thresholds["stage_time"]:
            self.logger.warning(f"阶段 {metric.stage} 耗时过长: {metric.wall_time:.1f}s")

    def get_performance_summary(self) -> Dict[str, Any]:
        """性能汇总"""
        memory = psutil.virtual_memory()
        return {
            "total_wall_time": sum(m.wall_time for m in self.stages),
            "total_cpu_time": sum(m.cpu_time for m in self.stages),
            "peak_rss": max((m.rss_after for m in self.stages), default=self.process.memory_info().rss),
            "system_memory_percent": memory.percent,
            "cpu_count": psutil.cpu_count(),
            "stages": [dict(asdict(m), memory_delta=m.memory_delta) for m in self.stages],
        }

    def export_metrics(self, file_path: Path) -> bool:
        """导出 performance.json"""
        try:
            path = Path(file_path)
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8") as f:
                json.dump(self.get_performance_summary(), f, indent=2, ensure_ascii=False)
            self.logger.info(f"性能指标已导出到: {path}")
            return True
        except OSError as e:
            self.logger.error(f"导出性能指标失败: {e}")
            return False

    def clear_metrics(self):
        self.stages.clear()
