"""
=============================================================================
Paul 阱门设计工具包 - 主命令行入口
=============================================================================

统一的命令行界面，按阶段编排整个流水线：

1. 晶体阶段：
   - equilibrium: 求解周期平衡轨道，写出晶体快照
   - modes: 求解 Floquet 简正模，追加到快照
   - verify-md: 分子动力学校验模式展开

2. 门设计阶段：
   - design: 广义本征问题优化分段脉冲
   - scan: 失谐扫描（--grid MIN:MAX:STEP，单位 MHz）
   - robust: 抗失谐漂移的对称鲁棒脉冲
   - t0-scan: 固定脉冲下 δF 随起点偏移的变化
   - drift: 失谐、门时间与幅度噪声的漂移分析
   - segments: 最优 δF 随分段数的变化

后续阶段总是读取输出目录中的晶体快照；配置哈希不匹配时重新计算。

使用示例：
  paultrap --config config/desk.yaml --out results/ equilibrium
  paultrap --config config/desk.yaml --out results/ --threads 4 scan --grid 6.0:6.8:0.01
  paultrap --config config/desk.yaml --out results/ --phase-order 0 --ncut 0 design
  paultrap --config config/desk.yaml --out results/ drift --pulse robust

退出码：0 成功；2 配置错误；3 不稳定；4 不收敛；1 内部错误

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Optional, Tuple

import click

# 添加项目根目录到Python路径
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.core.exceptions import ConfigError, TrapToolkitError
from src.runners.pipeline_runner import JobSpec, PipelineRunner


def _parse_grid(value: Optional[str]) -> Optional[Tuple[float, float, float]]:
    """
    解析 --grid MIN:MAX:STEP

    Raises:
        click.BadParameter: 格式错误
    """
    if value is None:
        return None
    parts = value.split(":")
    if len(parts) != 3:
        raise click.BadParameter(f"格式应为 MIN:MAX:STEP，实际 {value!r}", param_hint="--grid")
    try:
        minimum, maximum, step = (float(part) for part in parts)
    except ValueError:
        raise click.BadParameter(f"无法解析数值: {value!r}", param_hint="--grid") from None
    return minimum, maximum, step


def _run_job(ctx: click.Context, subcommand: str, grid: Optional[Tuple[float, float, float]] = None,
             pulse: str = "standard", compare_truncated: bool = False) -> None:
    """构造作业并执行，打印结果并以作业退出码退出"""
    options = ctx.obj
    if not options.get("config"):
        click.echo("❌ 请通过 --config 指定配置文件", err=True)
        sys.exit(ConfigError.exit_code)

    try:
        job = JobSpec(
            subcommand=subcommand,
            config_path=Path(options["config"]),
            output_dir=Path(options["out"]),
            seed=options["seed"],
            threads=options["threads"],
            overrides={
                "truncation.precision": options["precision"],
                "truncation.fourier_order": options["fourier_order"],
                "truncation.phase_order": options["phase_order"],
                "truncation.sideband_order": options["ncut"],
                "gate.compare_truncated": True if compare_truncated else None,
            },
            grid=grid,
            pulse=pulse,
        )
        runner = PipelineRunner(job)
        if not options["debug"]:
            logging.getLogger().setLevel(getattr(logging, runner.config.log_level))
        result = runner.run()
    except TrapToolkitError as e:
        click.echo(f"❌ {type(e).__name__}: {e.message}", err=True)
        sys.exit(e.exit_code)

    if not result.success:
        error = result.error
        click.echo(f"❌ {subcommand} 失败 ({type(error).__name__}): {error.message}", err=True)
        if error.details:
            click.echo(f"   详情: {error.details}", err=True)
        sys.exit(result.exit_code)

    for message in result.messages:
        click.echo(f"✅ {message}")
    for path in result.artifacts:
        click.echo(f"📄 {path}")


@click.group()
@click.option('--config', '-c', type=click.Path(), help='配置文件路径 (YAML/JSON)')
@click.option('--out', '-o', type=click.Path(), default='results', show_default=True, help='输出目录')
@click.option('--seed', type=int, help='随机种子（覆盖 run.seed）')
@click.option('--threads', type=int, help='线程数（覆盖 run.threads）')
@click.option('--precision', type=float, help='级数精度 ε（覆盖 truncation.precision）')
@click.option('--fourier-order', type=int, help='平衡轨道傅里叶阶数 M')
@click.option('--phase-order', type=int, help='运动相位谐波阶数 L')
@click.option('--ncut', type=int, help='模式边带阶数 n_cut')
@click.option('--debug', is_flag=True, help='启用调试模式（输出级数项数统计）')
@click.pass_context
def cli(ctx: click.Context, config: Optional[str], out: str, seed: Optional[int], threads: Optional[int],
        precision: Optional[float], fourier_order: Optional[int], phase_order: Optional[int],
        ncut: Optional[int], debug: bool) -> None:
    """
    Paul 阱门设计工具包命令行工具 - 主入口

    为所有子命令提供统一的配置、输出目录与截断覆盖。
    """
    # 设置日志级别 - 根据调试模式自动调整
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    ctx.ensure_object(dict)
    ctx.obj.update({
        "config": config,
        "out": out,
        "seed": seed,
        "threads": threads,
        "precision": precision,
        "fourier_order": fourier_order,
        "phase_order": phase_order,
        "ncut": ncut,
        "debug": debug,
    })


@cli.command()
@click.pass_context
def equilibrium(ctx):
    """求解周期平衡轨道并写出晶体快照"""
    _run_job(ctx, "equilibrium")


@cli.command()
@click.pass_context
def modes(ctx):
    """求解 Floquet 简正模并追加到快照"""
    _run_job(ctx, "modes")


@cli.command(name="verify-md")
@click.pass_context
def verify_md(ctx):
    """分子动力学校验模式展开（写出位移对比 CSV）"""
    _run_job(ctx, "verify-md")


@cli.command()
@click.option('--compare-truncated', is_flag=True,
              help='附带忽略微运动模型（L = 0、n_cut = 0）的交叉评估，写出 truncation_comparison.csv')
@click.pass_context
def design(ctx, compare_truncated):
    """优化分段脉冲，写出脉冲与门报告"""
    _run_job(ctx, "design", compare_truncated=compare_truncated)


@cli.command()
@click.option('--grid', help='失谐网格 MIN:MAX:STEP（MHz，循环频率）；缺省读取 scan.grid')
@click.pass_context
def scan(ctx, grid):
    """失谐扫描"""
    _run_job(ctx, "scan", grid=_parse_grid(grid))


@cli.command()
@click.pass_context
def robust(ctx):
    """抗失谐漂移的对称鲁棒脉冲设计"""
    _run_job(ctx, "robust")


@cli.command(name="t0-scan")
@click.pass_context
def t0_scan(ctx):
    """一个 RF 周期内的起点偏移扫描"""
    _run_job(ctx, "t0-scan")


@cli.command()
@click.option('--pulse', type=click.Choice(['standard', 'robust']), default='standard', show_default=True,
              help='分析的脉冲类型')
@click.pass_context
def drift(ctx, pulse):
    """固定脉冲的漂移与噪声分析"""
    _run_job(ctx, "drift", pulse=pulse)


@cli.command()
@click.pass_context
def segments(ctx):
    """最优 δF 随分段数的变化"""
    _run_job(ctx, "segments")


if __name__ == '__main__':
    cli()
