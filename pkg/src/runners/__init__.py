"""流水线运行器模块

提供作业执行与报告生成功能：
- 按子命令编排晶体、模式、校验与门设计各阶段
- 晶体快照复用（晶体哈希匹配时跳过求解）
- 失败时清理本阶段产物并返回对应退出码
- 纯文本门报告与模式表

主要组件：
- PipelineRunner: 流水线运行器
- JobSpec / RunResult: 作业描述与运行结果
- ReportGenerator: 报告生成器

使用示例:
    from src.runners import JobSpec, PipelineRunner

    job = JobSpec(subcommand='design', config_path='config/desk.yaml', output_dir='results')
    result = PipelineRunner(job).run()
    print(result.exit_code, result.artifacts)
"""

from .pipeline_runner import SUBCOMMANDS, JobSpec, PipelineRunner, RunResult
from .report_generator import ReportGenerator

__all__ = ["PipelineRunner", "JobSpec", "RunResult", "SUBCOMMANDS", "ReportGenerator"]
