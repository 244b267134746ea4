"""
门设计测试：上下文、耦合矩阵、脉冲优化、鲁棒设计、扫描与漂移
"""

import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from src.core.exceptions import ConfigError, ConvergenceError, InstabilityError, LambDickeError
from src.core.units import lamb_dicke
from src.crystal.equilibrium import solve_equilibrium
from src.crystal.modes import ModeSet, solve_normal_modes
from src.gate import scan as scan_module
from src.gate.context import OMEGA_RF, build_context
from src.gate.coupling import build_coupling, build_gamma
from src.gate.drift import (amplitude_noise_table, detuning_drift_table, detuning_sensitivity,
                            gate_time_drift_table)
from src.gate.optimizer import (TARGET_ANGLE, build_problem, compare_truncated_model, evaluate_sequence, infidelity,
                                optimize_pulse)
from src.gate.robust import (RobustnessProblem, RobustSettings, design_robust, robust_cost, segment_weights,
                             symmetric_map)
from src.gate.scan import parse_grid, rf_period_offsets, scan_detuning, scan_segments, scan_start_offset
from src.utils.config_loader import ConfigLoader

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"


def _ode_oracle(context, amplitudes):
    """
    直接积分 α 与 Θ 的定义

    a_j^k(t) = η_k T0 ∫ Ω sin(μt + φ_j) u_jk dt，
    Θ' = Σ_k Im[F_i(t) a_j*(t) + F_j(t) a_i*(t)]
    """
    mu = context.mu
    betas = context.betas
    scale = context.eta * context.units.time
    phases = [context.carrier_phase(slot) for slot in (0, 1)]
    sidebands = context.sideband_amplitudes
    n_cut = (sidebands.shape[-1] - 1) // 2
    frequencies = betas[:, None] + 2.0 * np.arange(-n_cut, n_cut + 1)[None, :]
    count = context.mode_count

    def drive(t, slot):
        carrier = math.sin(mu * t + float(phases[slot].value(t, OMEGA_RF)))
        return carrier * np.sum(sidebands[slot] * np.exp(1j * frequencies * t), axis=1) * scale

    def rhs(t, y, omega):
        first = omega * drive(t, 0)
        second = omega * drive(t, 1)
        theta = np.sum(np.imag(first * np.conj(y[count:2 * count]) + second * np.conj(y[:count])))
        return np.concatenate([first, second, [theta]])

    state = np.zeros(2 * count + 1, dtype=complex)
    edges = context.segment_edges()
    for omega, t1, t2 in zip(amplitudes, edges[:-1], edges[1:]):
        solution = solve_ivp(rhs, (t1, t2), state, method="DOP853", args=(float(omega),),
                             rtol=1e-11, atol=1e-15)
        state = solution.y[:, -1]
    alpha = -1j * state[:2 * count].reshape(2, count)
    return alpha, float(state[-1].real)


@pytest.fixture(scope="module")
def precise_context(pair_context):
    return pair_context.with_truncation(precision=1e-10)


@pytest.fixture(scope="module")
def standard(pair_context):
    return optimize_pulse(pair_context)


class TestContext:
    """门设计上下文"""

    def test_lamb_dicke_per_mode(self, pair_context, test_config):
        laser = test_config.laser_config()
        expected = lamb_dicke(laser.delta_k, test_config.ion_species().mass,
                              pair_context.modes.frequencies(test_config.units()))
        np.testing.assert_allclose(pair_context.eta, expected, rtol=1e-14)
        assert np.all(pair_context.eta < 0.3)

    def test_thermal_occupations(self, pair_context):
        assert pair_context.occupations.shape == (6,)
        assert np.all(pair_context.occupations > 0.0)
        # 频率越低占据越高
        order = np.argsort(pair_context.betas)
        assert np.all(np.diff(pair_context.occupations[order]) <= 0)

    def test_motional_phase_harmonics(self, pair_context, pair_crystal, test_config):
        laser = test_config.laser_config()
        scale = laser.delta_k * test_config.units().length
        for slot, ion in enumerate(laser.ions):
            phase = pair_context.phases[slot]
            assert phase.order == test_config.truncation().phase_order
            expected = 2.0 * scale * (pair_crystal.coefficients[1, ion] @ laser.direction)
            assert phase.harmonics[0] == pytest.approx(expected, rel=1e-12)
            assert phase.static == 0.0
        # 两离子关于原点对称，微运动相位反号
        assert pair_context.phases[0].harmonics[0] == pytest.approx(-pair_context.phases[1].harmonics[0], rel=1e-6)
        assert abs(pair_context.phases[0].harmonics[0]) > 1.0

    def test_sideband_projection(self, pair_context, pair_modes, test_config):
        laser = test_config.laser_config()
        n_cut = test_config.truncation().sideband_order
        assert pair_context.sideband_amplitudes.shape == (2, 6, 2 * n_cut + 1)
        mode = pair_modes[2]
        for slot, ion in enumerate(laser.ions):
            expected = mode.truncated(n_cut).sidebands.reshape(-1, 2, 3)[:, ion] @ laser.direction
            np.testing.assert_allclose(pair_context.sideband_amplitudes[slot, 2], expected, atol=1e-15)

    def test_dimensionless_times(self, pair_context, test_config):
        units = test_config.units()
        assert pair_context.mu == pytest.approx(2.0 * math.pi * 6.5e6 * units.time)
        assert pair_context.gate_time == pytest.approx(2.55e-6 / units.time)
        edges = pair_context.segment_edges_physical()
        assert len(edges) == 5
        np.testing.assert_allclose(edges[[0, -1]], [0.0, 2.55e-6], atol=1e-18)

    def test_equilibrium_phase_is_optional(self, pair_context, pair_crystal, test_config):
        laser = test_config.laser_config()
        context = pair_context.with_laser(include_equilibrium_phase=True)
        scale = laser.delta_k * test_config.units().length
        expected = scale * float(pair_crystal.coefficients[0, laser.ions[0]] @ laser.direction)
        assert context.phases[0].static == pytest.approx(expected)

    def test_lamb_dicke_limit(self, pair_context):
        with pytest.raises(LambDickeError) as excinfo:
            pair_context.with_laser(delta_k=1e9)
        assert excinfo.value.exit_code == 2

    def test_ion_index_out_of_range(self, pair_context):
        with pytest.raises(ConfigError):
            pair_context.with_laser(ions=(0, 2))

    def test_unstable_modes_rejected(self, pair_crystal, pair_modes, test_config):
        unstable = ModeSet(tuple(replace(mode, stable=False) if index == 0 else mode
                                 for index, mode in enumerate(pair_modes)))
        with pytest.raises(InstabilityError):
            build_context(pair_crystal, unstable, test_config.ion_species(), test_config.units(),
                          test_config.laser_config(), test_config.thermal_spectrum(), test_config.truncation())


class TestCouplingAssembly:
    """耦合行向量与 γ 矩阵"""

    def test_shapes(self, pair_context):
        coupling = build_coupling(pair_context)
        assert coupling.rows.shape == (2, 6, 4)
        gammas = build_gamma(pair_context, coupling)
        assert gammas.pre_imaginary.shape == (4, 4)
        np.testing.assert_array_equal(np.triu(gammas.pre_imaginary, k=1), 0.0)
        np.testing.assert_allclose(gammas.symmetric, gammas.symmetric.T)

    def test_problem_matrices(self, pair_context):
        problem = build_problem(pair_context)
        np.testing.assert_allclose(problem.M, problem.M.T)
        assert np.all(np.linalg.eigvalsh(problem.M) > 0)
        assert problem.segments == 4

    def test_matches_ode_integration(self, precise_context):
        """解析组装与直接积分定义一致"""
        pulse, report = optimize_pulse(precise_context)
        alpha, theta = _ode_oracle(precise_context, pulse.amplitudes)
        scale = float(np.max(np.abs(alpha)))
        np.testing.assert_allclose(report.alpha, alpha, atol=1e-6 * scale)
        assert report.theta == pytest.approx(theta, rel=1e-6)

    def test_arbitrary_pulse_matches_ode(self, precise_context):
        amplitudes = np.array([1.0, -0.5, 0.25, 2.0]) * 1e6
        problem = build_problem(precise_context)
        alpha, theta = _ode_oracle(precise_context, amplitudes)
        np.testing.assert_allclose(problem.coupling.alpha(amplitudes), alpha,
                                   atol=1e-6 * float(np.max(np.abs(alpha))))
        assert problem.gammas.theta(amplitudes) == pytest.approx(theta, rel=1e-6)

    def test_dropped_bound_is_reported(self, pair_context):
        coupling = build_coupling(pair_context)
        assert coupling.dropped_bound >= 0.0
        assert coupling.terms > 0


class TestOptimizer:
    """广义本征问题优化"""

    def test_rotation_angle_hits_target(self, standard):
        pulse, report = standard
        assert abs(report.theta) == pytest.approx(TARGET_ANGLE, rel=1e-10)
        assert report.theta == pytest.approx(pulse.target, rel=1e-10)

    def test_infidelity_is_self_consistent(self, standard, pair_context):
        pulse, report = standard
        assert report.recompute_infidelity() == pytest.approx(report.delta_f, rel=1e-12)
        problem = build_problem(pair_context)
        quadratic = float(pulse.amplitudes @ problem.M @ pulse.amplitudes)
        assert report.delta_f == pytest.approx(0.8 * quadratic, rel=1e-9)
        assert report.delta_f == pytest.approx(0.8 * abs(pulse.multiplier) * TARGET_ANGLE, rel=1e-8)

    def test_pulse_is_optimal(self, standard, pair_context):
        """随机脉冲缩放到约束面后的代价不低于最优解"""
        pulse, _ = standard
        problem = build_problem(pair_context)
        optimum = float(pulse.amplitudes @ problem.M @ pulse.amplitudes)
        rng = np.random.default_rng(7)
        for _ in range(50):
            vector = rng.standard_normal(problem.segments)
            form = float(vector @ problem.gamma @ vector)
            scaled = vector * math.sqrt(TARGET_ANGLE / abs(form))
            assert float(scaled @ problem.M @ scaled) >= optimum * (1.0 - 1e-9)

    def test_deterministic_sign(self, standard):
        pulse, _ = standard
        assert pulse.amplitudes[int(np.argmax(np.abs(pulse.amplitudes)))] > 0

    def test_pulse_frame(self, standard):
        pulse, _ = standard
        frame = pulse.to_frame()
        assert list(frame.columns) == ["segment_index", "t_start_s", "t_end_s", "Omega_rad_s"]
        assert frame["segment_index"].tolist() == [1, 2, 3, 4]
        assert frame["t_end_s"].iloc[-1] == pytest.approx(2.55e-6)

    def test_report_fields(self, standard):
        _, report = standard
        assert report.alpha.shape == (2, 6)
        assert report.fidelity == pytest.approx(1.0 - report.delta_f)
        assert report.contributions.shape == (6,)
        assert float(np.sum(report.contributions)) <= report.delta_f * (1.0 + 1e-12)
        frame = report.alpha_frame()
        assert len(frame) == 12
        assert set(frame["ion"]) == {0, 1}
        assert report.to_dict()["ions"] == [0, 1]

    def test_rabi_bound_is_flagged_not_clipped(self, pair_context, standard):
        pulse, _ = standard
        bounded = pair_context.with_laser(rabi_bound=0.5 * pulse.peak)
        flagged_pulse, report = optimize_pulse(bounded)
        assert report.rabi_violation
        assert report.notes
        assert flagged_pulse.peak == pytest.approx(pulse.peak, rel=1e-10)

    def test_rabi_bound_defaults_to_detuning(self, pair_context, standard):
        """未配置上限时按 |Ω| < μ 检查"""
        pulse, report = standard
        mu = pair_context.laser.detuning
        assert pair_context.laser.rabi_bound is None
        assert report.rabi_bound == pytest.approx(mu)
        assert report.rabi_violation == (pulse.peak >= mu)
        slow = pair_context.with_laser(rabi_bound=None, detuning=0.5 * pulse.peak)
        assert slow.laser.effective_rabi_bound == pytest.approx(0.5 * pulse.peak)
        _, flagged = optimize_pulse(pair_context.with_laser(rabi_bound=0.5 * pulse.peak))
        assert flagged.rabi_bound == pytest.approx(0.5 * pulse.peak)

    def test_rabi_check_can_be_disabled(self, pair_context, standard):
        pulse, _ = standard
        unchecked = pair_context.with_laser(rabi_check=False, rabi_bound=0.5 * pulse.peak)
        assert unchecked.laser.effective_rabi_bound is None
        _, report = optimize_pulse(unchecked)
        assert report.rabi_bound is None
        assert not report.rabi_violation
        assert report.notes == ()

    def test_conventional_truncation(self, pair_context):
        """L = 0、n_cut = 0 退化为无微运动的常规设计"""
        context = pair_context.with_truncation(phase_order=0, sideband_order=0)
        assert context.phases[0].harmonics == ()
        assert context.sideband_amplitudes.shape == (2, 6, 1)
        _, report = optimize_pulse(context)
        assert abs(report.theta) == pytest.approx(TARGET_ANGLE, rel=1e-10)

    def test_truncated_model_cross_evaluation(self, pair_context, standard):
        """两个模型各自设计，每个脉冲在两个模型上各评估一次"""
        pulse, report = standard
        frame = compare_truncated_model(pair_context, pulse, report)
        assert list(frame.columns) == ["design_model", "evaluation_model", "theta_rad", "delta_F", "max_alpha_abs"]
        cross = frame.set_index(["design_model", "evaluation_model"])["delta_F"]
        assert len(cross) == 4
        assert cross["full", "full"] == report.delta_f
        truncated = pair_context.with_truncation(phase_order=0, sideband_order=0)
        truncated_pulse, truncated_report = optimize_pulse(truncated)
        assert cross["truncated", "truncated"] == pytest.approx(truncated_report.delta_f, rel=1e-12)
        assert cross["full", "truncated"] == pytest.approx(evaluate_sequence(truncated, pulse).delta_f, rel=1e-12)
        assert cross["truncated", "full"] == pytest.approx(
            evaluate_sequence(pair_context, truncated_pulse).delta_f, rel=1e-12)
        own = frame[frame["design_model"] == frame["evaluation_model"]]
        np.testing.assert_allclose(np.abs(own["theta_rad"]), TARGET_ANGLE, rtol=1e-10)

    def test_infidelity_formula(self):
        alpha = np.array([[0.1, 0.0], [0.0, 0.2j]])
        occupations = np.array([1.0, 0.0])
        value = infidelity(TARGET_ANGLE + 0.1, TARGET_ANGLE, alpha, occupations)
        assert value == pytest.approx(0.8 * (0.01 + 0.01 * 3.0 + 0.04))

    def test_segment_mismatch(self, pair_context, standard):
        pulse, _ = standard
        with pytest.raises(ValueError):
            evaluate_sequence(pair_context.with_segments(2), pulse)


class TestStartOffset:
    """起点偏移 t0"""

    def test_rf_periodicity(self, pair_context, standard, test_config):
        pulse, report = standard
        shifted = evaluate_sequence(pair_context, pulse, test_config.units().rf_period)
        assert shifted.delta_f == pytest.approx(report.delta_f, rel=1e-7)
        assert shifted.theta == pytest.approx(report.theta, rel=1e-7)
        np.testing.assert_allclose(np.abs(shifted.alpha), np.abs(report.alpha), rtol=1e-6,
                                   atol=1e-8 * report.max_alpha)

    def test_offsets_grid(self, pair_context, test_config):
        offsets = rf_period_offsets(pair_context, 4)
        np.testing.assert_allclose(offsets, test_config.units().rf_period * np.array([0, 0.25, 0.5, 0.75]))
        with pytest.raises(ConfigError):
            rf_period_offsets(pair_context, 0)

    def test_scan_start_offset(self, pair_context, standard):
        pulse, report = standard
        offsets = rf_period_offsets(pair_context, 4)
        frame = scan_start_offset(pair_context, pulse, offsets)
        assert list(frame.columns) == ["t0_s", "delta_F", "Theta_rad", "max_alpha_abs", "status"]
        assert (frame["status"] == "ok").all()
        assert frame["delta_F"].iloc[0] == pytest.approx(report.delta_f, rel=1e-10)


class TestScans:
    """失谐与分段数扫描"""

    def test_parse_grid(self):
        np.testing.assert_allclose(parse_grid(1.0, 2.0, 0.25), [1.0, 1.25, 1.5, 1.75, 2.0])
        with pytest.raises(ConfigError):
            parse_grid(2.0, 1.0, 0.1)
        with pytest.raises(ConfigError):
            parse_grid(1.0, 2.0, 0.0)

    def test_detuning_scan(self, pair_context, test_config):
        grid = test_config.detuning_grid()
        frame = scan_detuning(pair_context, grid)
        assert list(frame.columns) == ["mu_rad_s", "delta_F", "Theta_rad", "max_alpha_abs", "status"]
        assert len(frame) == 3
        np.testing.assert_allclose(frame["mu_rad_s"], grid)
        np.testing.assert_allclose(np.abs(frame["Theta_rad"]), TARGET_ANGLE, rtol=1e-10)

    def test_threads_preserve_order(self, pair_context, test_config):
        grid = test_config.detuning_grid()
        serial = scan_detuning(pair_context, grid)
        parallel = scan_detuning(pair_context, grid, threads=3)
        np.testing.assert_allclose(parallel["delta_F"], serial["delta_F"], rtol=1e-12)

    def test_failed_point_is_recorded(self, pair_context, test_config, monkeypatch):
        grid = test_config.detuning_grid()
        original = scan_module.optimize_pulse
        failing = float(grid[1])

        def flaky(context):
            if context.laser.detuning == failing:
                raise ConvergenceError("广义本征值全部为无穷")
            return original(context)

        monkeypatch.setattr(scan_module, "optimize_pulse", flaky)
        frame = scan_detuning(pair_context, grid)
        assert frame["status"].iloc[1].startswith("ConvergenceError")
        assert math.isnan(frame["delta_F"].iloc[1])
        assert (frame["status"].iloc[[0, 2]] == "ok").all()

    def test_more_segments_never_hurt(self, pair_context):
        """2 段脉冲是 4 段脉冲的特例"""
        frame = scan_segments(pair_context, [2, 4])
        assert list(frame["n_seg"]) == [2, 4]
        assert frame["delta_F"].iloc[1] <= frame["delta_F"].iloc[0] * (1.0 + 1e-9)
        assert (frame["peak_Omega_rad_s"] > 0).all()

    def test_invalid_segment_counts(self, pair_context):
        with pytest.raises(ConfigError):
            scan_segments(pair_context, [0, 2])


class TestRobust:
    """对称鲁棒脉冲"""

    def test_weights_and_symmetry_map(self):
        np.testing.assert_array_equal(segment_weights(4), [4, 3, 2, 1])
        P = symmetric_map(5)
        assert P.shape == (5, 3)
        np.testing.assert_array_equal(P @ np.array([1.0, 2.0, 3.0]), [1, 2, 3, 2, 1])

    def test_analytic_derivatives(self, pair_context):
        reduced = RobustnessProblem.from_problem(build_problem(pair_context), fidelity_weight=0.5)
        scale = math.sqrt(TARGET_ANGLE / float(np.linalg.norm(reduced.gamma, 2)))
        problem = reduced.rescaled(scale)
        x = np.array([0.3, -0.7])
        step = 1e-6
        numeric = np.array([(problem.cost(x + step * e) - problem.cost(x - step * e)) / (2 * step)
                            for e in np.eye(2)])
        np.testing.assert_allclose(problem.gradient(x), numeric, rtol=1e-6, atol=1e-10)
        hessian = np.array([(problem.gradient(x + step * e) - problem.gradient(x - step * e)) / (2 * step)
                            for e in np.eye(2)])
        np.testing.assert_allclose(problem.hessian(x), hessian, rtol=1e-5, atol=1e-8)

    def test_reduced_cost_matches_full_cost(self, pair_context):
        problem = build_problem(pair_context)
        reduced = RobustnessProblem.from_problem(problem, fidelity_weight=0.5)
        scale = math.sqrt(TARGET_ANGLE / float(np.linalg.norm(reduced.gamma, 2)))
        x = scale * np.linspace(0.4, 1.0, reduced.free_variables)
        full = robust_cost(problem, reduced.projection @ x, fidelity_weight=0.5)
        assert full == pytest.approx(reduced.cost(x), rel=1e-9)

    def test_design(self, pair_context, test_config):
        design = design_robust(pair_context, test_config.robust_settings())
        amplitudes = design.pulse.amplitudes
        np.testing.assert_allclose(amplitudes, amplitudes[::-1], rtol=1e-12)
        assert design.pulse.symmetric
        assert abs(design.report.theta) == pytest.approx(TARGET_ANGLE, rel=1e-6)
        assert design.feasible_starts >= 1
        assert 2 <= design.total_starts <= 3
        assert design.report.recompute_infidelity() == pytest.approx(design.report.delta_f, rel=1e-12)
        assert design.sensitivity >= 0.0
        assert set(design.to_dict()) >= {"cost", "standard_cost", "sensitivity_per_rad_s"}

    def test_single_segment_rejected(self, pair_context):
        with pytest.raises(ConfigError):
            design_robust(pair_context.with_segments(1))

    def test_invalid_settings(self):
        with pytest.raises(ConfigError):
            RobustSettings(starts=-1)
        with pytest.raises(ConfigError):
            RobustSettings(fidelity_weight=-0.1)


class TestDrift:
    """固定脉冲的漂移分析"""

    def test_zero_drift_reproduces_design(self, pair_context, standard, test_config):
        pulse, report = standard
        drift = test_config.drift_settings()
        detuning = detuning_drift_table(pair_context, pulse, drift["detuning"])
        assert list(detuning.columns) == ["delta_mu_rad_s", "delta_F"]
        assert detuning["delta_F"].iloc[1] == pytest.approx(report.delta_f, rel=1e-10)
        gate_time = gate_time_drift_table(pair_context, pulse, drift["gate_time"])
        assert list(gate_time.columns) == ["delta_tau_s", "delta_F"]
        assert gate_time["delta_F"].iloc[1] == pytest.approx(report.delta_f, rel=1e-10)

    def test_amplitude_noise(self, pair_context, standard):
        pulse, report = standard
        table = amplitude_noise_table(pair_context, pulse, [0.0, 0.05], samples=5, seed=0)
        assert list(table.columns) == ["sigma", "delta_F_mean", "delta_F_std", "samples"]
        assert table["delta_F_mean"].iloc[0] == pytest.approx(report.delta_f, rel=1e-12)
        assert table["delta_F_std"].iloc[0] == pytest.approx(0.0, abs=1e-15)
        repeated = amplitude_noise_table(pair_context, pulse, [0.05], samples=5, seed=0)
        assert repeated["delta_F_mean"].iloc[0] == table["delta_F_mean"].iloc[1]

    def test_invalid_noise_arguments(self, pair_context, standard):
        pulse, _ = standard
        with pytest.raises(ConfigError):
            amplitude_noise_table(pair_context, pulse, [-0.1])
        with pytest.raises(ConfigError):
            amplitude_noise_table(pair_context, pulse, [0.1], samples=0)
        with pytest.raises(ConfigError):
            detuning_sensitivity(pair_context, pulse, 0.0)

    def test_gate_time_cannot_vanish(self, pair_context, standard):
        pulse, _ = standard
        with pytest.raises(ConfigError):
            gate_time_drift_table(pair_context, pulse, [-3e-6])


@pytest.mark.slow
class TestDeskAcceptance:
    """桌面规模（4 离子、8 段）的验收实验"""

    @pytest.fixture(scope="class")
    def desk(self):
        config = ConfigLoader(CONFIG_DIR / "desk.yaml", apply_env=False)
        drive = config.trap_drive()
        truncation = config.truncation()
        crystal = solve_equilibrium(drive, config.n_ions, config.iteration_settings(), seed=config.seed,
                                    order=truncation.fourier_order)
        modes = solve_normal_modes(crystal, drive, truncation, config.mode_settings())
        context = build_context(crystal, modes, config.ion_species(), config.units(), config.laser_config(),
                                config.thermal_spectrum(), truncation)
        return config, context

    def test_assembly_matches_ode(self, desk):
        _, context = desk
        pulse, report = optimize_pulse(context)
        alpha, theta = _ode_oracle(context, pulse.amplitudes)
        np.testing.assert_allclose(report.alpha, alpha, atol=1e-6 * float(np.max(np.abs(alpha))))
        assert report.theta == pytest.approx(theta, rel=1e-6)
        assert report.theta == pytest.approx(pulse.target, rel=1e-12)
        assert report.recompute_infidelity() == pytest.approx(report.delta_f, rel=1e-12)

    def test_micromotion_is_necessary(self, desk):
        """忽略微运动设计的脉冲在完整模型下 δF 至少恶化 10 倍"""
        _, context = desk
        _, full_report = optimize_pulse(context)
        naive_pulse, _ = optimize_pulse(context.with_truncation(phase_order=0, sideband_order=0))
        naive_report = evaluate_sequence(context, naive_pulse)
        assert naive_report.delta_f >= 10.0 * full_report.delta_f

    def test_robust_design_flattens_detuning_response(self, desk):
        config, context = desk
        design = design_robust(context, config.robust_settings())
        assert design.sensitivity * 5.0 <= design.standard_sensitivity
        assert design.report.delta_f <= 3.0 * design.standard_report.delta_f
