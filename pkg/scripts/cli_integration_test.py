#!/usr/bin/env python3
"""
=============================================================================
CLI命令完整流程集成测试脚本
=============================================================================

本脚本以子进程方式在测试配置上依次运行全部子命令：
- equilibrium → modes → verify-md（晶体阶段，快照复用）
- design / scan / robust / t0-scan / drift / segments（门设计阶段）
- 错误路径：缺失配置、错误网格、不稳定阱参数的退出码

使用方法：
    python3 scripts/cli_integration_test.py [--verbose] [--config config/test.yaml]

作者: Paul 阱门设计工具包团队
版本: 1.0.0
=============================================================================
"""

import logging
import shutil
import subprocess
import sys
import tempfile
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

# 添加项目根目录到Python路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.exporters.result_exporter import read_header, read_result

# 子命令 → 预期产物
PIPELINE = [
    ("equilibrium", [], ["crystal.yaml", "equilibrium_positions.csv"]),
    ("modes", [], ["modes.csv", "modes.txt"]),
    ("verify-md", [], ["verify_mode0.csv"]),
    ("design", [], ["pulse.csv", "alpha.csv", "gate_report.txt", "gate_report.json"]),
    ("scan", [], ["scan.csv"]),
    ("robust", [], ["robust_pulse.csv", "robust_sensitivity.csv", "robust_report.json"]),
    ("t0-scan", [], ["t0_scan.csv"]),
    ("drift", ["--pulse", "standard"], ["drift_detuning.csv", "drift_gate_time.csv", "drift_amplitude.csv"]),
    ("segments", [], ["segments.csv"]),
]


class CLIIntegrationTester:
    """CLI集成测试器"""

    def __init__(self, config_path: Path, verbose: bool = False):
        """
        初始化测试器

        Args:
            config_path: 运行全部子命令所用的配置文件
            verbose: 是否详细输出
        """
        self.config_path = config_path
        self.verbose = verbose
        self.logger = logging.getLogger(self.__class__.__name__)
        self.test_results = {
            'total_tests': 0,
            'passed_tests': 0,
            'failed_tests': 0,
            'test_details': []
        }
        self.work_dir: Optional[Path] = None

    def log_test_result(self, test_name: str, success: bool, message: str = "", execution_time: float = 0):
        """记录测试结果"""
        self.test_results['total_tests'] += 1
        if success:
            self.test_results['passed_tests'] += 1
            status = "✅"
        else:
            self.test_results['failed_tests'] += 1
            status = "❌"

        self.logger.info(f"{status} {test_name}: {'通过' if success else '失败'} ({execution_time:.3f}s)")
        if message and not success:
            self.logger.error(f"   错误: {message}")

        self.test_results['test_details'].append({
            'name': test_name,
            'success': success,
            'message': message,
            'execution_time': execution_time
        })

    def run_cli_command(self, command: List[str], timeout: int = 1800) -> Dict[str, Any]:
        """
        运行CLI命令

        Args:
            command: 命令列表
            timeout: 超时时间（秒）

        Returns:
            Dict[str, Any]: 命令执行结果
        """
        full_command = [sys.executable, "-m", "src.cli.main"] + command
        try:
            result = subprocess.run(full_command, capture_output=True, text=True, timeout=timeout, cwd=project_root)
        except subprocess.TimeoutExpired:
            return {'success': False, 'returncode': -1, 'stdout': '',
                    'stderr': f'Command timed out after {timeout} seconds', 'command': ' '.join(command)}
        if self.verbose:
            self.logger.debug(result.stdout)
        return {
            'success': result.returncode == 0,
            'returncode': result.returncode,
            'stdout': result.stdout,
            'stderr': result.stderr,
            'command': ' '.join(full_command)
        }

    def test_help_commands(self) -> bool:
        """测试帮助命令"""
        start_time = time.time()
        for command in [["--help"]] + [[name, "--help"] for name, _, _ in PIPELINE]:
            result = self.run_cli_command(command, timeout=60)
            if not result['success']:
                self.log_test_result("帮助命令测试", False, f"{' '.join(command)} 失败: {result['stderr']}",
                                     time.time() - start_time)
                return False
        self.log_test_result("帮助命令测试", True, f"{len(PIPELINE) + 1} 条帮助命令", time.time() - start_time)
        return True

    def test_pipeline(self) -> bool:
        """按顺序运行全部子命令并检查产物"""
        all_passed = True
        out = self.work_dir / "results"
        for name, options, artifacts in PIPELINE:
            start_time = time.time()
            result = self.run_cli_command(["--config", str(self.config_path), "--out", str(out), name] + options)
            if not result['success']:
                self.log_test_result(f"{name} 子命令", False, f"退出码 {result['returncode']}: {result['stderr']}",
                                     time.time() - start_time)
                all_passed = False
                continue
            missing = [artifact for artifact in artifacts if not (out / artifact).exists()]
            if missing:
                self.log_test_result(f"{name} 子命令", False, f"缺少产物: {missing}", time.time() - start_time)
                all_passed = False
                continue
            self.log_test_result(f"{name} 子命令", True, result['stdout'].strip().splitlines()[0]
                                 if result['stdout'].strip() else "", time.time() - start_time)
        return all_passed

    def test_result_headers(self) -> bool:
        """所有 CSV 的注释头共享同一配置哈希"""
        start_time = time.time()
        out = self.work_dir / "results"
        hashes = set()
        for path in sorted(out.glob("*.csv")):
            header = read_header(path)
            hashes.add(header.get("config_hash"))
            read_result(path)
        success = len(hashes) == 1 and None not in hashes
        self.log_test_result("结果头部一致性", success, f"配置哈希: {sorted(map(str, hashes))}",
                             time.time() - start_time)
        return success

    def test_error_exit_codes(self) -> bool:
        """错误路径的退出码"""
        start_time = time.time()
        out = str(self.work_dir / "errors")
        with open(self.config_path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
        data["trap"]["q"] = [0.95, -0.95, 0.0]
        unstable = self.work_dir / "unstable.yaml"
        unstable.write_text(yaml.safe_dump(data, allow_unicode=True), encoding="utf-8")

        cases = [
            (["--out", out, "design"], 2),
            (["--config", str(self.config_path), "--out", out, "scan", "--grid", "6.6:6.4:0.1"], 2),
            (["--config", str(unstable), "--out", out, "equilibrium"], 3),
        ]
        for command, expected in cases:
            result = self.run_cli_command(command, timeout=300)
            if result['returncode'] != expected:
                self.log_test_result("错误退出码", False,
                                     f"{' '.join(command)}: 期望 {expected}, 实际 {result['returncode']}",
                                     time.time() - start_time)
                return False
        self.log_test_result("错误退出码", True, f"{len(cases)} 个错误场景", time.time() - start_time)
        return True

    def run_all_tests(self) -> Dict[str, Any]:
        """运行所有测试"""
        self.work_dir = Path(tempfile.mkdtemp(prefix="paultrap_cli_"))
        try:
            for test in (self.test_help_commands, self.test_pipeline, self.test_result_headers,
                         self.test_error_exit_codes):
                try:
                    test()
                except Exception as e:
                    self.log_test_result(test.__name__, False, str(e))
        finally:
            shutil.rmtree(self.work_dir, ignore_errors=True)

        total = self.test_results['total_tests']
        self.test_results['success_rate'] = self.test_results['passed_tests'] / total * 100 if total else 0
        return self.test_results

    def print_summary(self):
        """打印测试总结"""
        print("\n" + "=" * 70)
        print("CLI命令完整流程测试总结")
        print("=" * 70)
        print(f"总测试数: {self.test_results['total_tests']}")
        print(f"通过测试: {self.test_results['passed_tests']}")
        print(f"失败测试: {self.test_results['failed_tests']}")
        print(f"成功率: {self.test_results['success_rate']:.1f}%")

        if self.test_results['failed_tests'] > 0:
            print("\n失败的测试:")
            for test in self.test_results['test_details']:
                if not test['success']:
                    print(f"  - {test['name']}: {test['message']}")

        print("\n通过的测试:")
        for test in self.test_results['test_details']:
            if test['success']:
                print(f"  ✅ {test['name']}: {test['message']}")
        print("=" * 70)


def main():
    """主函数"""
    import argparse

    parser = argparse.ArgumentParser(description='CLI命令完整流程集成测试脚本')
    parser.add_argument('--verbose', '-v', action='store_true', help='详细输出')
    parser.add_argument('--config', default=str(project_root / "config" / "test.yaml"), help='配置文件')
    args = parser.parse_args()

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    tester = CLIIntegrationTester(Path(args.config).resolve(), verbose=args.verbose)
    results = tester.run_all_tests()
    tester.print_summary()
    sys.exit(0 if results['failed_tests'] == 0 else 1)


if __name__ == "__main__":
    main()
