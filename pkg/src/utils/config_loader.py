"""
=============================================================================
Paul 阱门设计工具包 - 配置加载器模块
=============================================================================

本模块负责读取仿真配置文件，应用环境变量与命令行覆盖，完成验证，
并把各配置段转换成求解器使用的不可变设置对象。

配置层次结构（优先级从高到低）：
1. 命令行覆盖（--precision、--fourier-order 等，经 set() 写入）
2. 环境变量 (PAULTRAP_*)
3. 配置文件 (YAML 或 JSON)
4. 各设置类的默认值

配置段：
- ion / trap / laser / thermal / truncation: 物理模型
- equilibrium / modes / dynamics / robust / gate / scan: 求解器设置
- run / logging: 运行设置

使用示例：
    config = ConfigLoader('config/desk.yaml')
    drive = config.trap_drive()
    precision = config.get('truncation.precision')
    config.set('truncation.phase_order', 0)
    config.validate_or_raise()

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import yaml

from ..core.exceptions import ConfigError
from ..core.models import IonSpecies, LaserConfig, ThermalSpectrum, TrapDrive, TruncationSettings
from ..core.units import UnitSystem, build_units, delta_k_counterprop
from ..crystal.equilibrium import IterationSettings
from ..crystal.modes import ModeSettings
from ..dynamics.integrator import IntegratorSettings
from ..dynamics.verification import ExcitationSpec
from ..gate.robust import RobustSettings
from ..gate.scan import parse_grid
from .quantities import parse_quantity
from .validator import ConfigValidator

ENV_PREFIX = "PAULTRAP_"

# 环境变量 → 点号路径
ENV_OVERRIDES = {
    "PAULTRAP_LOG_LEVEL": "logging.level",
    "PAULTRAP_THREADS": "run.threads",
    "PAULTRAP_SEED": "run.seed",
    "PAULTRAP_PRECISION": "truncation.precision",
}

# 不参与配置哈希的运行时键
_HASH_EXCLUDED = ("logging", "run.threads", "run.output")

# 晶体快照依赖的配置：截断段里只有平衡与模式用到的三个阶数
CRYSTAL_SECTIONS = ("ion", "trap", "truncation.fourier_order", "truncation.mode_order", "truncation.hessian_order",
                    "equilibrium", "modes", "run.seed")


def _canonical(value: Any) -> str:
    return json.dumps(value, sort_keys=True, ensure_ascii=False, separators=(",", ":"), default=str)


def _drop_path(data: Dict[str, Any], path: str):
    keys = path.split(".")
    current = data
    for key in keys[:-1]:
        if not isinstance(current, dict) or key not in current:
            return
        current = current[key]
    if isinstance(current, dict):
        current.pop(keys[-1], None)


class ConfigLoader:
    """
    配置加载器

    加载过程：
    1. 按扩展名解析 YAML/JSON
    2. 应用 PAULTRAP_* 环境变量覆盖（值按 YAML 标量解析）
    3. 验证结构、物理量单位与跨字段约束
    """

    def __init__(self, config_path: Optional[Union[str, Path]] = None, data: Optional[Dict[str, Any]] = None,
                 apply_env: bool = True):
        """
        初始化配置加载器

        Args:
            config_path: 配置文件路径（YAML 或 JSON）
            data: 直接给出的配置字典（与 config_path 二选一）
            apply_env: 是否应用环境变量覆盖

        Raises:
            ConfigError: 文件不存在、格式错误或验证失败
        """
        self.logger = logging.getLogger(self.__class__.__name__)
        self.validator = ConfigValidator()
        self.config_path = Path(config_path) if config_path else None
        if data is not None:
            self.config_data: Dict[str, Any] = copy.deepcopy(data)
        elif self.config_path is not None:
            self.config_data = self.load_config(self.config_path)
        else:
            raise ConfigError("必须给出配置文件路径或配置字典")
        if apply_env:
            self._apply_env_overrides()
        self.validate_or_raise()

    def load_config(self, path: Path) -> Dict[str, Any]:
        """
        加载配置文件

        Raises:
            ConfigError: 文件不存在、扩展名不支持或解析失败
        """
        if not path.exists():
            raise ConfigError(f"配置文件不存在: {path}")
        suffix = path.suffix.lower()
        try:
            with open(path, "r", encoding="utf-8") as f:
                if suffix in (".yaml", ".yml"):
                    data = yaml.safe_load(f) or {}
                elif suffix == ".json":
                    data = json.load(f) or {}
                else:
                    raise ConfigError(f"不支持的配置文件格式: {path.suffix}")
        except (yaml.YAMLError, json.JSONDecodeError) as e:
            raise ConfigError(f"配置文件解析失败: {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"配置文件顶层必须是映射: {path}")
        self.logger.info(f"配置文件加载成功: {path}")
        return data

    def _apply_env_overrides(self):
        """应用 PAULTRAP_* 环境变量覆盖"""
        for env_var, config_path in ENV_OVERRIDES.items():
            env_value = os.getenv(env_var)
            if env_value is None:
                continue
            try:
                value = yaml.safe_load(env_value)
            except yaml.YAMLError:
                value = env_value
            if config_path == "logging.level" and isinstance(value, str):
                value = value.upper()
            self.set(config_path, value)
            self.logger.info(f"环境变量覆盖: {env_var} → {config_path} = {value!r}")

    def get(self, key: str, default: Any = None) -> Any:
        """
        获取配置值

        Args:
            key: 配置键，支持点号分隔的嵌套键
            default: 默认值
        """
        value = self.config_data
        for k in key.split("."):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any):
        """设置配置值（不自动验证，调用方随后调用 validate_or_raise）"""
        keys = key.split(".")
        config = self.config_data
        for k in keys[:-1]:
            if not isinstance(config.get(k), dict):
                config[k] = {}
            config = config[k]
        config[keys[-1]] = value

    def apply_overrides(self, overrides: Dict[str, Any]):
        """批量覆盖（忽略 None 值）并重新验证"""
        changed = {key: value for key, value in overrides.items() if value is not None}
        for key, value in changed.items():
            self.set(key, value)
        if changed:
            self.logger.debug(f"命令行覆盖: {changed}")
            self.validate_or_raise()

    def validate_config(self) -> Dict[str, List[str]]:
        """
        验证配置

        Returns:
            Dict[str, List[str]]: 验证结果（错误和警告）
        """
        return self.validator.validate(self.config_data)

    def validate_or_raise(self):
        result = self.validate_config()
        for warning in result["warnings"]:
            self.logger.warning(warning)
        if result["errors"]:
            raise ConfigError(f"配置验证失败: {'; '.join(result['errors'])}", {"errors": result["errors"]})

    def config_hash(self, sections: Optional[Iterable[str]] = None) -> str:
        """
        有效配置的 SHA-256 前 16 位

        Args:
            sections: 只对这些点号路径求哈希；缺省为除运行时键外的全部配置
        """
        if sections is None:
            payload = copy.deepcopy(self.config_data)
            for path in _HASH_EXCLUDED:
                _drop_path(payload, path)
        else:
            payload = {path: self.get(path) for path in sections}
        return hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()[:16]

    def crystal_hash(self) -> str:
        """晶体快照复用判据：只依赖离子、阱、平衡与模式的截断阶数以及求解器设置"""
        return self.config_hash(CRYSTAL_SECTIONS)

    def save_config(self, output_path: Union[str, Path]):
        """保存有效配置"""
        save_path = Path(output_path)
        save_path.parent.mkdir(parents=True, exist_ok=True)
        with open(save_path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.config_data, f, default_flow_style=False, allow_unicode=True, sort_keys=True)
        self.logger.info(f"有效配置已保存: {save_path}")

    # ------------------------------------------------------------------
    # 物理模型
    # ------------------------------------------------------------------

    def _quantity(self, key: str, kind: str, default: Any = None) -> Optional[float]:
        value = self.get(key, default)
        return None if value is None else parse_quantity(value, kind)

    @property
    def n_ions(self) -> int:
        return int(self.get("ion.count"))

    @property
    def seed(self) -> int:
        return int(self.get("run.seed", 0))

    @property
    def threads(self) -> int:
        return int(self.get("run.threads", 1))

    @property
    def log_level(self) -> str:
        return self.get("logging.level", "INFO")

    def ion_species(self) -> IonSpecies:
        species = self.get("ion.species")
        charge = int(self.get("ion.charge", 1))
        if species == "Yb171" and self.get("ion.mass") is None:
            base = IonSpecies.ytterbium_171()
            return IonSpecies(mass=base.mass, charge=charge, label=self.get("ion.label", base.label))
        return IonSpecies(mass=self._quantity("ion.mass", "mass"), charge=charge,
                          label=self.get("ion.label", species or "ion"))

    def trap_drive(self) -> TrapDrive:
        rf = self._quantity("trap.rf_frequency", "frequency")
        dc_force = self.get("trap.dc_force")
        if self.get("trap.a") is not None:
            return TrapDrive.from_diagonal(rf, self.get("trap.a"), self.get("trap.q"), dc_force)
        return TrapDrive(rf_frequency=rf, A=np.array(self.get("trap.A"), dtype=float),
                         Q=np.array(self.get("trap.Q"), dtype=float),
                         dc_force=np.zeros(3) if dc_force is None else dc_force)

    def units(self) -> UnitSystem:
        return build_units(self.ion_species(), self.trap_drive())

    def laser_config(self) -> LaserConfig:
        if self.get("laser.wavelength") is not None:
            delta_k = delta_k_counterprop(self._quantity("laser.wavelength", "length"))
        else:
            delta_k = self._quantity("laser.delta_k", "wavenumber")
        return LaserConfig(
            delta_k=delta_k,
            direction=np.array(self.get("laser.direction"), dtype=float),
            detuning=self._quantity("laser.detuning", "frequency"),
            gate_time=self._quantity("laser.gate_time", "time"),
            segments=int(self.get("laser.segments")),
            ions=tuple(self.get("laser.ions")),
            static_phase=float(self.get("laser.static_phase", 0.0)),
            start_offset=self._quantity("laser.start_offset", "time", 0.0),
            rabi_bound=self._quantity("laser.rabi_bound", "frequency"),
            include_equilibrium_phase=bool(self.get("laser.include_equilibrium_phase", False)),
            rabi_check=bool(self.get("laser.rabi_check", True)),
        )

    def thermal_spectrum(self) -> ThermalSpectrum:
        return ThermalSpectrum(temperature=self._quantity("thermal.temperature", "temperature"),
                               doppler_linewidth=self._quantity("thermal.doppler_linewidth", "frequency"))

    def truncation(self) -> TruncationSettings:
        return TruncationSettings(**self.get("truncation", {}))

    # ------------------------------------------------------------------
    # 求解器设置
    # ------------------------------------------------------------------

    def iteration_settings(self) -> IterationSettings:
        return IterationSettings(**self.get("equilibrium", {}))

    def mode_settings(self) -> ModeSettings:
        return ModeSettings(**self.get("modes", {}))

    def integrator_settings(self) -> IntegratorSettings:
        section = {k: v for k, v in self.get("dynamics", {}).items() if k != "excitations"}
        return IntegratorSettings(**section)

    def excitations(self) -> List[ExcitationSpec]:
        """缺省激发最低与最高模式，振幅 0.01"""
        entries = self.get("dynamics.excitations")
        if not entries:
            return [ExcitationSpec(mode_index=0), ExcitationSpec(mode_index=3 * self.n_ions - 1)]
        return [ExcitationSpec(mode_index=e["mode"], amplitude=e.get("amplitude", 0.01), ion=e.get("ion", 0),
                               axis=e.get("axis", "x")) for e in entries]

    def robust_settings(self) -> RobustSettings:
        section = dict(self.get("robust", {}))
        if "sensitivity_step" in section:
            section["sensitivity_step"] = parse_quantity(section["sensitivity_step"], "frequency")
        return RobustSettings(**section)

    def t0_points(self) -> int:
        return int(self.get("gate.t0_points", 32))

    def compare_truncated(self) -> bool:
        """design 是否附带 L = 0、n_cut = 0 模型的交叉评估"""
        return bool(self.get("gate.compare_truncated", False))

    def detuning_grid(self) -> Optional[np.ndarray]:
        """scan.grid 的 μ 网格 (rad/s)，未配置时返回 None"""
        if self.get("scan.grid") is None:
            return None
        return parse_grid(self._quantity("scan.grid.min", "frequency"), self._quantity("scan.grid.max", "frequency"),
                          self._quantity("scan.grid.step", "frequency"))

    def segment_counts(self) -> Sequence[int]:
        return list(self.get("scan.segments", [1, 2, 4, 8, 16]))

    def drift_settings(self) -> Dict[str, Any]:
        """漂移分析网格（物理单位）"""
        drift = self.get("scan.drift", {})
        khz = parse_quantity("1 kHz", "frequency")
        return {
            "detuning": [parse_quantity(v, "frequency") for v in drift.get("detuning", [])]
                        or list(khz * np.linspace(-2.0, 2.0, 9)),
            "gate_time": [parse_quantity(v, "time") for v in drift.get("gate_time", [])]
                         or list(parse_quantity("1 ns", "time") * np.linspace(-4.0, 4.0, 9)),
            "amplitude_sigma": list(drift.get("amplitude_sigma", [0.0, 0.005, 0.01, 0.02])),
            "samples": int(drift.get("samples", 200)),
            "seed": int(drift.get("seed", self.seed)),
        }

    def truncation_header(self) -> Dict[str, Any]:
        return self.truncation().to_dict()
