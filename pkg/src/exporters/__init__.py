"""导出器模块

提供结果持久化功能，所有文件都带格式版本与配置哈希：
- 晶体快照 (.yaml): 平衡轨道系数与简正模边带，读回逐位一致
- 结果表 (.csv): "# key: value" 注释头 + 17 位有效数字数据
- 报告 (.txt/.json): 门报告与鲁棒设计报告

使用示例:
    from src.exporters import ResultExporter, read_result

    exporter = ResultExporter('results', config_hash, truncation)
    exporter.export_frame(frame, 'scan.csv', kind='detuning-scan')
    table = read_result('results/scan.csv')
"""

from .result_exporter import ResultExporter, read_header, read_result
from .snapshot import FORMAT_VERSION, SNAPSHOT_KIND, CrystalSnapshot, SnapshotWriter

__all__ = ['ResultExporter', 'read_result', 'read_header', 'SnapshotWriter', 'CrystalSnapshot',
           'FORMAT_VERSION', 'SNAPSHOT_KIND']
