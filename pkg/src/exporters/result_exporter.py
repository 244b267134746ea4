"""
结果导出器

把 pandas 表格写成 CSV，文件开头是 "# key: value" 注释行，记录格式版本、配置哈希与截断设置。
读取时用 pandas.read_csv(comment='#') 即可跳过头部。
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import pandas as pd

from .snapshot import FORMAT_VERSION


class ResultExporter:
    """
    CSV 结果导出器

    功能：
    1. 统一的注释头（格式版本、配置哈希、截断设置）
    2. 17 位有效数字的浮点输出
    3. 已写文件登记，失败时由运行器统一清理
    """

    def __init__(self, output_dir: Union[str, Path], config_hash: str, truncation: Dict[str, Any]):
        """
        初始化导出器

        Args:
            output_dir: 输出目录
            config_hash: 配置哈希
            truncation: 截断设置字典
        """
        self.logger = logging.getLogger(self.__class__.__name__)
        self.output_dir = Path(output_dir)
        self.config_hash = config_hash
        self.truncation = dict(truncation)
        self.written = []

    def header_lines(self, kind: str, extra: Optional[Dict[str, Any]] = None) -> str:
        entries = {"format_version": FORMAT_VERSION, "kind": kind, "config_hash": self.config_hash,
                   "truncation": json.dumps(self.truncation, sort_keys=True)}
        entries.update(extra or {})
        return "".join(f"# {key}: {value}\n" for key, value in entries.items())

    def export_frame(self, frame: pd.DataFrame, filename: str, kind: str,
                     extra: Optional[Dict[str, Any]] = None) -> Path:
        """
        导出 DataFrame

        Args:
            frame: 数据表
            filename: 输出文件名（相对输出目录）
            kind: 表格类型（写入头部）
            extra: 额外头部字段

        Returns:
            Path: 文件路径
        """
        path = self.output_dir / filename
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.header_lines(kind, extra))
            frame.to_csv(f, index=False, float_format="%.17g", lineterminator="\n")
        self.written.append(path)
        self.logger.info(f"已导出 {kind}: {path}（{len(frame)} 行）")
        return path

    def export_text(self, text: str, filename: str) -> Path:
        path = self.output_dir / filename
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        self.written.append(path)
        return path

    def export_json(self, payload: Dict[str, Any], filename: str, kind: str) -> Path:
        document = {"format_version": FORMAT_VERSION, "kind": kind, "config_hash": self.config_hash,
                    "truncation": self.truncation}
        document.update(payload)
        return self.export_text(json.dumps(document, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
                                filename)


def read_result(path: Union[str, Path]) -> pd.DataFrame:
    """读取带注释头的 CSV"""
    return pd.read_csv(path, comment="#")


def read_header(path: Union[str, Path]) -> Dict[str, str]:
    header = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(": ")
            header[key] = value
    return header
