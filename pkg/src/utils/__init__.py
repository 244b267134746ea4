"""工具函数模块

提供工具包所需的各种工具函数：
- 配置加载、环境变量覆盖与配置哈希
- 配置结构与约束校验
- 带单位物理量的解析
- 流水线阶段的性能监控

主要组件：
- ConfigLoader: 配置加载器，构造物理模型与求解设置
- ConfigValidator: 配置校验器（JSON Schema + 物理约束）
- parse_quantity: 把 "50 MHz"、"369.5 nm" 等字符串换算成 SI 值
- PerformanceMonitor: 阶段耗时、CPU 与内存统计

使用示例:
    from src.utils import ConfigLoader, parse_quantity

    # 加载配置
    config = ConfigLoader('config/desk.yaml')
    drive = config.trap_drive()

    # 解析物理量
    omega = parse_quantity('50 MHz', 'frequency')
"""

from .config_loader import ConfigLoader
from .performance_monitor import PerformanceMonitor, StageMetrics
from .quantities import is_quantity, parse_quantity
from .validator import CONFIG_SCHEMA, ConfigValidator

__all__ = ["ConfigLoader", "ConfigValidator", "CONFIG_SCHEMA", "parse_quantity", "is_quantity",
           "PerformanceMonitor", "StageMetrics"]
