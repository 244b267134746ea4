"""振荡积分引擎

主要组件：
- bessel: Bessel 函数、Jacobi–Anger 系数与尾项上界
- exponential: 单重/有序二重指数积分闭式
- series: 相位调制级数展开与（调制）单重、二重积分

使用示例:
    from src.integrals import PhaseSpec, SeriesBudget, single_integral

    value = single_integral(0.0, 1.0, 0.3, 0.2, 2.0, PhaseSpec(0.0, (0.5,)), SeriesBudget())
"""

from .bessel import bessel_J, bessel_magnitude_bound, jacobi_anger_coefficients, jacobi_anger_tail_bound
from .exponential import (exp_integral_double_minus, exp_integral_double_plus, exp_integral_single,
                          ordered_exp_integral)
from .series import (JacobiAngerTable, ModulationSpec, PhaseSpec, SeriesBudget, SeriesValue, as_budget,
                     clear_phase_cache, double_integral, phase_cache_info, modulated_double_integral,
                     modulated_single_integral, pair_branch_sums, phase_branch_integral, phase_table,
                     single_integral, single_sum, spectral_weights)

__all__ = [
    "bessel_J", "bessel_magnitude_bound", "jacobi_anger_coefficients", "jacobi_anger_tail_bound",
    "exp_integral_single", "exp_integral_double_plus", "exp_integral_double_minus", "ordered_exp_integral",
    "PhaseSpec", "ModulationSpec", "SeriesBudget", "SeriesValue", "JacobiAngerTable",
    "phase_table", "phase_branch_integral", "single_integral", "modulated_single_integral",
    "double_integral", "modulated_double_integral", "pair_branch_sums", "spectral_weights", "single_sum",
    "as_budget", "clear_phase_cache", "phase_cache_info",
]
