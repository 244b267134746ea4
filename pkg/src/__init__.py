"""
Paul 阱门设计工具包

射频 Paul 阱中离子晶体的微运动感知双比特门设计，支持：
- 周期平衡轨道（傅里叶级数）与 Floquet 简正模求解
- 分子动力学校验模式展开
- 相位调制振荡积分的级数展开与误差上界
- 分段脉冲优化、失谐扫描与抗漂移鲁棒设计
- 带配置哈希的确定性结果文件与晶体快照

主要模块：
- cli: 命令行接口
- core: 异常、单位与物理模型
- crystal: 平衡轨道与简正模
- dynamics: 辛积分器与模式校验
- integrals: 振荡积分引擎
- gate: 门设计、扫描与鲁棒优化
- exporters: 快照与结果文件
- runners: 流水线运行器与报告
- utils: 配置加载、校验与性能监控

版本: 1.0.0
作者: Paul 阱门设计工具包团队
"""

__version__ = "1.0.0"
__author__ = "Paul 阱门设计工具包团队"

# 导入主要组件
from .core.exceptions import TrapToolkitError
from .utils.config_loader import ConfigLoader

__all__ = [
    'ConfigLoader',
    'TrapToolkitError',
]
