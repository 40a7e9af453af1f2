#!/usr/bin/env python3
"""fastweb test runner.

Usage:
    python run_tests.py --unit          # unit tests, slow ones excluded
    python run_tests.py --integration   # command-line runs into temporary directories
    python run_tests.py --performance   # timing tests on larger grids
    python run_tests.py --property      # Hypothesis tests only
    python run_tests.py --all           # everything
    python run_tests.py --verify        # run every verification suite through the CLI
"""

import argparse
import subprocess
import sys
import time
from pathlib import Path


class TestRunner:
    """Builds and runs pytest command lines for the test categories."""

    def __init__(self, project_root: Path):
        self.project_root = project_root

    def _pytest(self, *args: str, verbose: bool = True) -> list[str]:
        return [sys.executable, "-m", "pytest", *args, "--tb=short", "-v" if verbose else "-q"]

    def run_unit_tests(self, coverage: bool = True, verbose: bool = True) -> int:
        cmd = self._pytest("tests/unit/", "-m", "not slow", "--durations=5", verbose=verbose)
        if coverage:
            cmd.extend(["--cov=fastweb", "--cov-report=html:htmlcov/unit", "--cov-branch"])
        print("Running unit tests...")
        return self._execute_command(cmd)

    def run_integration_tests(self, verbose: bool = True) -> int:
        print("Running integration tests...")
        return self._execute_command(self._pytest("tests/integration/", "--durations=10", verbose=verbose))

    def run_performance_tests(self, verbose: bool = True) -> int:
        print("Running performance tests...")
        return self._execute_command(
            self._pytest("tests/performance/", "-m", "performance", "--durations=0", verbose=verbose)
        )

    def run_property_tests(self, verbose: bool = True) -> int:
        print("Running property-based tests...")
        return self._execute_command(
            self._pytest(
                "tests/",
                "-m",
                "property",
                "--hypothesis-show-statistics",
                "--hypothesis-seed=42",
                verbose=verbose,
            )
        )

    def run_all_tests(self, coverage: bool = True) -> int:
        cmd = self._pytest("tests/", "--durations=10")
        if coverage:
            cmd.extend(["--cov=fastweb", "--cov-report=xml:coverage.xml", "--cov-branch"])
        print("Running the full test suite...")
        return self._execute_command(cmd)

    def run_verification(self, out: str) -> int:
        """Every verification suite with the default configuration; exit 1 on a failed check."""
        cmd = [sys.executable, "-m", "fastweb", "verify", "--out", out]
        print("Running verification suites...")
        return self._execute_command(cmd)

    def _execute_command(self, cmd: list[str]) -> int:
        print(f"Executing: {' '.join(cmd)}")
        start_time = time.time()
        try:
            result = subprocess.run(cmd, check=False, cwd=self.project_root)
        except OSError as e:
            print(f"Error executing command: {e}")
            return 1
        duration = time.time() - start_time
        if result.returncode == 0:
            print(f"Completed in {duration:.1f}s")
        else:
            print(f"Failed with exit code {result.returncode} after {duration:.1f}s")
        return result.returncode


def main():
    parser = argparse.ArgumentParser(
        description="fastweb test runner",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python run_tests.py --unit --coverage
  python run_tests.py --all
  python run_tests.py --verify --verify-out out/verify
        """,
    )
    parser.add_argument("--unit", action="store_true", help="Run unit tests")
    parser.add_argument("--integration", action="store_true", help="Run integration tests")
    parser.add_argument("--performance", action="store_true", help="Run performance tests")
    parser.add_argument("--property", action="store_true", help="Run property-based tests")
    parser.add_argument("--all", action="store_true", help="Run all tests")
    parser.add_argument("--verify", action="store_true", help="Run the verification suites")
    parser.add_argument("--verify-out", default="out/verify", help="Output directory for --verify")
    parser.add_argument("--coverage", action="store_true", help="Include coverage reporting")
    parser.add_argument("--quiet", "-q", action="store_true", help="Quiet output")

    args = parser.parse_args()
    runner = TestRunner(Path(__file__).parent)

    if not any([args.unit, args.integration, args.performance, args.property, args.all, args.verify]):
        args.unit = True

    exit_code = 0
    verbose = not args.quiet
    try:
        if args.unit:
            exit_code = max(exit_code, runner.run_unit_tests(coverage=args.coverage, verbose=verbose))
        if args.integration:
            exit_code = max(exit_code, runner.run_integration_tests(verbose=verbose))
        if args.performance:
            exit_code = max(exit_code, runner.run_performance_tests(verbose=verbose))
        if args.property:
            exit_code = max(exit_code, runner.run_property_tests(verbose=verbose))
        if args.all:
            exit_code = max(exit_code, runner.run_all_tests(coverage=args.coverage))
        if args.verify:
            exit_code = max(exit_code, runner.run_verification(args.verify_out))
        print("\nAll runs passed." if exit_code == 0 else f"\nSome runs failed (exit code: {exit_code})")
    except KeyboardInterrupt:
        print("\nTest run interrupted by user")
        exit_code = 130

    sys.exit(exit_code)


if __name__ == "__main__":
    main()
