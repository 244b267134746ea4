"""
配置验证器模块
负责用 JSON Schema 校验仿真配置的结构，并检查物理量单位与跨字段约束
"""

import logging
from typing import Any, Dict, List

from jsonschema import Draft7Validator

from .quantities import parse_quantity

_NUMBER = {"type": "number"}
_INTEGER = {"type": "integer"}
_NON_NEGATIVE_INT = {"type": "integer", "minimum": 0}
_POSITIVE_INT = {"type": "integer", "minimum": 1}
_QUANTITY = {"type": ["number", "string"]}
_VECTOR3 = {"type": "array", "items": _NUMBER, "minItems": 3, "maxItems": 3}
_MATRIX3 = {"type": "array", "items": _VECTOR3, "minItems": 3, "maxItems": 3}


def _section(properties: Dict[str, Any], required: List[str] = None) -> Dict[str, Any]:
    schema = {"type": "object", "properties": properties, "additionalProperties": False}
    if required:
        schema["required"] = required
    return schema


CONFIG_SCHEMA: Dict[str, Any] = _section({
    "ion": _section({
        "species": {"type": "string", "enum": ["Yb171"]},
        "mass": _QUANTITY,
        "charge": _POSITIVE_INT,
        "count": _POSITIVE_INT,
        "label": {"type": "string"},
    }, required=["count"]),
    "trap": _section({
        "rf_frequency": _QUANTITY,
        "a": _VECTOR3,
        "q": _VECTOR3,
        "A": _MATRIX3,
        "Q": _MATRIX3,
        "dc_force": _VECTOR3,
    }, required=["rf_frequency"]),
    "laser": _section({
        "wavelength": _QUANTITY,
        "delta_k": _QUANTITY,
        "direction": _VECTOR3,
        "detuning": _QUANTITY,
        "gate_time": _QUANTITY,
        "segments": _POSITIVE_INT,
        "ions": {"type": "array", "items": _NON_NEGATIVE_INT, "minItems": 2, "maxItems": 2},
        "static_phase": _NUMBER,
        "start_offset": _QUANTITY,
        "rabi_bound": {"type": ["number", "string", "null"]},
        "include_equilibrium_phase": {"type": "boolean"},
        "rabi_check": {"type": "boolean"},
    }, required=["direction", "detuning", "gate_time", "segments", "ions"]),
    "thermal": _section({
        "temperature": _QUANTITY,
        "doppler_linewidth": _QUANTITY,
    }),
    "truncation": _section({
        "fourier_order": _NON_NEGATIVE_INT,
        "phase_order": _NON_NEGATIVE_INT,
        "sideband_order": _NON_NEGATIVE_INT,
        "mode_order": _NON_NEGATIVE_INT,
        "hessian_order": _NON_NEGATIVE_INT,
        "precision": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "bessel_cutoff": _NON_NEGATIVE_INT,
        "max_terms": _POSITIVE_INT,
    }),
    "equilibrium": _section({
        "mixing": _NUMBER,
        "initial_damping": _NUMBER,
        "damping_reduction": _NUMBER,
        "damping_floor": _NUMBER,
        "relax_periods": _POSITIVE_INT,
        "check_periods": _POSITIVE_INT,
        "position_tolerance": _NUMBER,
        "max_relax_rounds": _POSITIVE_INT,
        "tolerance": _NUMBER,
        "residual_tolerance": _NUMBER,
        "max_iterations": _POSITIVE_INT,
        "newton_iterations": _NON_NEGATIVE_INT,
        "escape_radius": _NUMBER,
        "md_rtol": _NUMBER,
        "md_atol": _NUMBER,
    }),
    "modes": _section({
        "tolerance": _NUMBER,
        "max_iterations": _POSITIVE_INT,
        "cluster_threshold": _NUMBER,
        "degeneracy_tolerance": _NUMBER,
        "overlap_threshold": _NUMBER,
        "orthogonality_tolerance": _NUMBER,
        "dense_limit": _POSITIVE_INT,
    }),
    "dynamics": _section({
        "steps_per_period": _POSITIVE_INT,
        "periods": _NON_NEGATIVE_INT,
        "record_stride": _POSITIVE_INT,
        "min_distance": _NUMBER,
        "excitations": {"type": "array", "items": _section({
            "mode": _NON_NEGATIVE_INT,
            "amplitude": _NUMBER,
            "ion": _NON_NEGATIVE_INT,
            "axis": {"type": "string", "enum": ["x", "y", "z"]},
        }, required=["mode"])},
    }),
    "gate": _section({
        "t0_points": _POSITIVE_INT,
        "compare_truncated": {"type": "boolean"},
    }),
    "robust": _section({
        "starts": _NON_NEGATIVE_INT,
        "seed": _NON_NEGATIVE_INT,
        "fidelity_weight": {"type": "number", "minimum": 0},
        "max_iterations": _POSITIVE_INT,
        "constraint_tolerance": _NUMBER,
        "sensitivity_step": _QUANTITY,
    }),
    "scan": _section({
        "grid": _section({"min": _QUANTITY, "max": _QUANTITY, "step": _QUANTITY},
                         required=["min", "max", "step"]),
        "segments": {"type": "array", "items": _POSITIVE_INT, "minItems": 1},
        "drift": _section({
            "detuning": {"type": "array", "items": _QUANTITY},
            "gate_time": {"type": "array", "items": _QUANTITY},
            "amplitude_sigma": {"type": "array", "items": {"type": "number", "minimum": 0}},
            "samples": _POSITIVE_INT,
            "seed": _NON_NEGATIVE_INT,
        }),
    }),
    "run": _section({
        "seed": _NON_NEGATIVE_INT,
        "threads": _POSITIVE_INT,
        "output": {"type": "string"},
    }),
    "logging": _section({
        "level": {"type": "string", "enum": ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]},
    }),
}, required=["ion", "trap", "laser", "thermal"])

# 点号路径 → 物理量类型
QUANTITY_FIELDS: Dict[str, str] = {
    "ion.mass": "mass",
    "trap.rf_frequency": "frequency",
    "laser.wavelength": "length",
    "laser.delta_k": "wavenumber",
    "laser.detuning": "frequency",
    "laser.gate_time": "time",
    "laser.start_offset": "time",
    "laser.rabi_bound": "frequency",
    "thermal.temperature": "temperature",
    "thermal.doppler_linewidth": "frequency",
    "robust.sensitivity_step": "frequency",
    "scan.grid.min": "frequency",
    "scan.grid.max": "frequency",
    "scan.grid.step": "frequency",
}

QUANTITY_LISTS: Dict[str, str] = {
    "scan.drift.detuning": "frequency",
    "scan.drift.gate_time": "time",
}


def _lookup(data: Dict[str, Any], path: str):
    current = data
    for key in path.split("."):
        if not isinstance(current, dict) or key not in current:
            return None
        current = current[key]
    return current


class ConfigValidator:
    """仿真配置验证器"""

    def __init__(self, schema: Dict[str, Any] = None):
        """初始化配置验证器"""
        self.logger = logging.getLogger(self.__class__.__name__)
        self.schema = schema or CONFIG_SCHEMA
        Draft7Validator.check_schema(self.schema)
        self._validator = Draft7Validator(self.schema)

    def validate_schema(self, data: Dict[str, Any]) -> List[str]:
        """
        验证配置结构

        Returns:
            List[str]: 错误信息，形如 "laser.segments: ..."
        """
        errors = []
        for error in sorted(self._validator.iter_errors(data), key=lambda e: list(e.path)):
            location = ".".join(str(part) for part in error.path) or "<root>"
            errors.append(f"{location}: {error.message}")
        return errors

    def validate_quantities(self, data: Dict[str, Any]) -> List[str]:
        """验证带单位物理量是否可解析且量纲正确"""
        errors = []
        for path, kind in QUANTITY_FIELDS.items():
            value = _lookup(data, path)
            if value is None:
                continue
            try:
                parse_quantity(value, kind)
            except Exception as error:
                errors.append(f"{path}: {error}")
        for path, kind in QUANTITY_LISTS.items():
            for index, value in enumerate(_lookup(data, path) or []):
                try:
                    parse_quantity(value, kind)
                except Exception as error:
                    errors.append(f"{path}[{index}]: {error}")
        return errors

    def validate_constraints(self, data: Dict[str, Any]) -> Dict[str, List[str]]:
        """跨字段约束"""
        errors, warnings = [], []
        ion = data.get("ion", {})
        if "species" not in ion and "mass" not in ion:
            errors.append("ion: 必须给出 species 或 mass")
        trap = data.get("trap", {})
        has_diagonal = "a" in trap or "q" in trap
        has_matrix = "A" in trap or "Q" in trap
        if has_diagonal and has_matrix:
            errors.append("trap: 对角简写 (a, q) 与矩阵 (A, Q) 不能同时给出")
        elif has_diagonal and not ("a" in trap and "q" in trap):
            errors.append("trap: 对角简写必须同时给出 a 与 q")
        elif has_matrix and not ("A" in trap and "Q" in trap):
            errors.append("trap: 矩阵形式必须同时给出 A 与 Q")
        elif not has_diagonal and not has_matrix:
            errors.append("trap: 缺少 (a, q) 或 (A, Q)")
        laser = data.get("laser", {})
        if ("wavelength" in laser) == ("delta_k" in laser):
            errors.append("laser: wavelength 与 delta_k 必须且只能给出一个")
        ions = laser.get("ions")
        count = ion.get("count")
        if isinstance(ions, list) and len(ions) == 2:
            if ions[0] == ions[1]:
                errors.append(f"laser.ions: 目标离子必须不同: {ions}")
            if isinstance(count, int) and any(isinstance(i, int) and i >= count for i in ions):
                errors.append(f"laser.ions: 序号越界（共 {count} 个离子，序号从 0 开始）: {ions}")
        thermal = data.get("thermal", {})
        if isinstance(thermal, dict) and ("temperature" in thermal) == ("doppler_linewidth" in thermal):
            errors.append("thermal: temperature 与 doppler_linewidth 必须且只能给出一个")
        if isinstance(count, int) and count > 50:
            warnings.append(f"ion.count = {count}：大晶体的模式求解耗时较长")
        return {"errors": errors, "warnings": warnings}

    def validate(self, data: Dict[str, Any]) -> Dict[str, List[str]]:
        """
        完整验证

        Returns:
            Dict[str, List[str]]: {"errors": [...], "warnings": [...]}
        """
        errors = self.validate_schema(data)
        if errors:
            return {"errors": errors, "warnings": []}
        errors = self.validate_quantities(data)
        constraints = self.validate_constraints(data)
        errors.extend(constraints["errors"])
        for message in errors:
            self.logger.error(f"配置验证失败: {message}")
        return {"errors": errors, "warnings": constraints["warnings"]}
