"""
测试共享夹具

晶体、模式集与门上下文的求解代价较高，按会话缓存，所有测试模块共用。
"""

import math
import sys
from pathlib import Path

import pytest

# 添加项目根目录到Python路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core.models import IonSpecies, TrapDrive, TruncationSettings
from src.crystal.equilibrium import IterationSettings, solve_equilibrium
from src.crystal.modes import solve_normal_modes
from src.gate.context import build_context
from src.utils.config_loader import ConfigLoader

CONFIG_DIR = project_root / "config"
TEST_CONFIG = CONFIG_DIR / "test.yaml"
RF_FREQUENCY = 2.0 * math.pi * 50e6


@pytest.fixture(scope="session")
def test_config():
    """测试配置（2 离子桌面阱，低截断阶数）"""
    return ConfigLoader(TEST_CONFIG, apply_env=False)


@pytest.fixture(scope="session")
def desk_drive():
    return TrapDrive.from_diagonal(RF_FREQUENCY, (-0.04, 0.0, 0.04), (0.3, -0.3, 0.0))


@pytest.fixture(scope="session")
def ytterbium():
    return IonSpecies.ytterbium_171()


@pytest.fixture(scope="session")
def pair_crystal(test_config):
    """沿 x 轴带微运动的 2 离子平衡轨道"""
    truncation = test_config.truncation()
    return solve_equilibrium(test_config.trap_drive(), test_config.n_ions, test_config.iteration_settings(),
                             seed=test_config.seed, order=truncation.fourier_order)


@pytest.fixture(scope="session")
def pair_modes(test_config, pair_crystal):
    return solve_normal_modes(pair_crystal, test_config.trap_drive(), test_config.truncation(),
                              test_config.mode_settings())


@pytest.fixture(scope="session")
def pair_context(test_config, pair_crystal, pair_modes):
    return build_context(pair_crystal, pair_modes, test_config.ion_species(), test_config.units(),
                         test_config.laser_config(), test_config.thermal_spectrum(), test_config.truncation())


@pytest.fixture(scope="session")
def low_truncation():
    return TruncationSettings(fourier_order=4, phase_order=3, sideband_order=3, mode_order=3, hessian_order=3)


@pytest.fixture(scope="session")
def iteration_settings():
    return IterationSettings()
