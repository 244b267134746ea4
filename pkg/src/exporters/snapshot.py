"""
晶体快照

平衡轨道与模式集的持久化格式：YAML 头部（格式版本、配置哈希、种子、驱动、单位、截断设置、
收敛证书）加上文本块形式的系数行，每行 "n ion axis value"，数值以 17 位有效数字写出，
读回后与内存中的数组逐位相同。文件中不写时间戳，相同输入产生逐字节相同的文件。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import yaml

from ..core.exceptions import ConfigError
from ..crystal.equilibrium import EquilibriumTrajectory
from ..crystal.modes import ModeSet, NormalMode

FORMAT_VERSION = "1.0"
SNAPSHOT_KIND = "paul-trap-crystal-snapshot"
AXES = ("x", "y", "z")


class LiteralBlock(str):
    """以 YAML 块标量 | 写出的多行文本"""


class _SnapshotDumper(yaml.SafeDumper):
    pass


def _literal_representer(dumper: yaml.SafeDumper, data: LiteralBlock):
    return dumper.represent_scalar("tag:yaml.org,2002:str", str(data), style="|")


_SnapshotDumper.add_representer(LiteralBlock, _literal_representer)


def _format_value(value: float) -> str:
    return f"{value:.16e}"


def coefficient_block(coefficients: np.ndarray) -> LiteralBlock:
    """(M+1, N, 3) → "n ion axis value" 行"""
    lines = []
    for n in range(coefficients.shape[0]):
        for ion in range(coefficients.shape[1]):
            for axis in range(3):
                lines.append(f"{n} {ion} {AXES[axis]} {_format_value(coefficients[n, ion, axis])}")
    return LiteralBlock("\n".join(lines) + "\n")


def sideband_block(mode: NormalMode) -> LiteralBlock:
    """(2n+1, 3N) → "n ion axis value" 行，n 从 −n_cut 到 n_cut"""
    lines = []
    order = mode.order
    for row, n in enumerate(range(-order, order + 1)):
        for ion in range(mode.n_ions):
            for axis in range(3):
                lines.append(f"{n} {ion} {AXES[axis]} {_format_value(mode.sidebands[row, 3 * ion + axis])}")
    return LiteralBlock("\n".join(lines) + "\n")


def _parse_block(text: str, first_offset: int, shape: tuple) -> np.ndarray:
    array = np.zeros(shape)
    for line_number, line in enumerate(text.strip().splitlines(), 1):
        parts = line.split()
        if len(parts) != 4 or parts[2] not in AXES:
            raise ConfigError(f"快照系数行格式错误（第 {line_number} 行）: {line!r}")
        n, ion, axis, value = int(parts[0]), int(parts[1]), AXES.index(parts[2]), float(parts[3])
        array[n + first_offset, ion, axis] = value
    return array


@dataclass(frozen=True, eq=False)
class CrystalSnapshot:
    """快照内容"""
    trajectory: EquilibriumTrajectory
    modes: Optional[ModeSet]
    header: Dict[str, Any]

    @property
    def config_hash(self) -> str:
        return self.header.get("config_hash", "")

    @property
    def crystal_hash(self) -> str:
        return self.header.get("crystal_hash", "")


class SnapshotWriter:
    """快照读写"""

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    def build_document(self, trajectory: EquilibriumTrajectory, header: Dict[str, Any],
                       modes: Optional[ModeSet] = None) -> Dict[str, Any]:
        document = {
            "format_version": FORMAT_VERSION,
            "kind": SNAPSHOT_KIND,
        }
        document.update(header)
        document.update({
            "n_ions": trajectory.n_ions,
            "fourier_order": trajectory.order,
            "seed": trajectory.seed,
            "residual": float(trajectory.residual),
            "converged": bool(trajectory.converged),
            "iterations": int(trajectory.iterations),
            "coefficients": coefficient_block(trajectory.coefficients),
        })
        if modes is not None:
            document["modes"] = {
                "count": len(modes),
                "stable": modes.stable,
                "normalized": modes.normalized,
                "source_hash": modes.source_hash,
                "entries": [
                    {
                        "index": index,
                        "beta": float(mode.beta),
                        "stable": bool(mode.stable),
                        "normalized": bool(mode.normalized),
                        "residual": float(mode.residual),
                        "iterations": int(mode.iterations),
                        "sideband_order": mode.order,
                        "sidebands": sideband_block(mode),
                    }
                    for index, mode in enumerate(modes)
                ],
            }
        return document

    def dumps(self, trajectory: EquilibriumTrajectory, header: Dict[str, Any],
              modes: Optional[ModeSet] = None) -> str:
        return yaml.dump(self.build_document(trajectory, header, modes), Dumper=_SnapshotDumper,
                         sort_keys=False, allow_unicode=True, default_flow_style=None, width=120)

    def write(self, path: Union[str, Path], trajectory: EquilibriumTrajectory, header: Dict[str, Any],
              modes: Optional[ModeSet] = None) -> Path:
        """写出快照（先写临时文件再改名）"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        temporary = path.with_suffix(path.suffix + ".tmp")
        with open(temporary, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.dumps(trajectory, header, modes))
        temporary.replace(path)
        self.logger.info(f"快照已写出: {path}（{'含' if modes is not None else '不含'}模式集）")
        return path

    def read(self, path: Union[str, Path]) -> CrystalSnapshot:
        """
        读取快照

        Raises:
            ConfigError: 文件不存在、格式版本不符或系数块损坏
        """
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"快照文件不存在: {path}")
        with open(path, "r", encoding="utf-8") as f:
            document = yaml.safe_load(f)
        if not isinstance(document, dict) or document.get("kind") != SNAPSHOT_KIND:
            raise ConfigError(f"不是晶体快照文件: {path}")
        if document.get("format_version") != FORMAT_VERSION:
            raise ConfigError(f"快照格式版本不符: {document.get('format_version')} ≠ {FORMAT_VERSION}")

        n_ions, order = int(document["n_ions"]), int(document["fourier_order"])
        coefficients = _parse_block(document["coefficients"], 0, (order + 1, n_ions, 3))
        trajectory = EquilibriumTrajectory(coefficients, residual=float(document["residual"]),
                                           converged=bool(document["converged"]),
                                           iterations=int(document["iterations"]), seed=document.get("seed"))
        modes = None
        if document.get("modes"):
            entries = []
            for entry in document["modes"]["entries"]:
                n_cut = int(entry["sideband_order"])
                sidebands = _parse_block(entry["sidebands"], n_cut, (2 * n_cut + 1, n_ions, 3))
                entries.append(NormalMode(beta=float(entry["beta"]),
                                          sidebands=sidebands.reshape(2 * n_cut + 1, 3 * n_ions),
                                          residual=float(entry["residual"]), normalized=bool(entry["normalized"]),
                                          stable=bool(entry["stable"]), iterations=int(entry["iterations"])))
            modes = ModeSet(tuple(entries), source_hash=document["modes"].get("source_hash", ""))
        header = {key: value for key, value in document.items() if key not in ("coefficients", "modes")}
        return CrystalSnapshot(trajectory=trajectory, modes=modes, header=header)
