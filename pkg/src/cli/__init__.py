"""
命令行接口模块

提供 paultrap 命令行界面，覆盖流水线的所有阶段：
- equilibrium / modes / verify-md: 晶体阶段
- design / scan / robust: 门设计
- t0-scan / drift / segments: 附加分析

核心特性：
- 基于Click框架的CLI设计
- 全局 --config、--out、--seed、--threads 与截断覆盖选项
- 按异常类型返回退出码（0 成功、2 配置、3 不稳定、4 不收敛、1 内部错误）
- 调试模式支持

使用示例:
    # 求解平衡轨道与简正模
    paultrap --config config/desk.yaml --out results equilibrium
    paultrap --config config/desk.yaml --out results modes

    # 设计门并扫描失谐
    paultrap --config config/desk.yaml --out results design
    paultrap --config config/desk.yaml --out results --threads 4 scan --grid 6.0:6.8:0.01
"""

from .main import cli

__all__ = ['cli']
