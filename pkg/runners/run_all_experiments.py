#!/usr/bin/env python3
"""
Run all configured experiments sequentially through the CLI and report results.

Each config is passed to its gmq-quasi subcommand; the exit code decides pass/fail.
"""

import logging
import subprocess
import sys
import time

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)
logger = logging.getLogger(__name__)

EXIT_MEANINGS = {1: "invalid input", 2: "numerical failure", 3: "check failed"}


def run_experiment(subcommand: str, config_path: str, name: str) -> bool:
    """
    Run a single experiment and report results.

    Args:
        subcommand: gmq-quasi subcommand
        config_path: Relative path to config file
        name: Human-readable experiment name

    Returns:
        True if the experiment exited 0, False otherwise
    """
    logger.info("=" * 60)
    logger.info(f"Running: {name}")
    logger.info(f"Config: {config_path}")
    logger.info("=" * 60)

    start_time = time.time()

    try:
        result = subprocess.run(
            ["gmq-quasi", subcommand, "--config", config_path],
            capture_output=True,
            text=True,
            timeout=1800,
        )
        elapsed = time.time() - start_time

        if result.stdout:
            print(result.stdout)

        if result.returncode == 0:
            logger.info(f"{name} completed successfully in {elapsed:.1f}s")
            return True
        meaning = EXIT_MEANINGS.get(result.returncode, "usage error")
        logger.error(f"{name} failed with exit code {result.returncode} ({meaning})")
        if result.stderr:
            logger.error(f"Error output:\n{result.stderr}")
        return False

    except subprocess.TimeoutExpired:
        logger.error(f"{name} timed out after 30 minutes")
        return False
    except FileNotFoundError:
        logger.error("'gmq-quasi' command not found. Make sure the package is installed:")
        logger.error("  poetry install")
        return False


def main():
    """Run all experiments and report summary."""

    experiments = [
        ("converge", "configs/converge_1d_d1.yaml", "Convergence 1D, d = 1"),
        ("converge", "configs/converge_1d_d3.yaml", "Convergence 1D, d = 3"),
        ("reproduce", "configs/reproduce_1d_d3.yaml", "Reproduction 1D, d = 3"),
        ("flatness", "configs/flatness_3d_d1.yaml", "Flatness 3D, d = 1"),
    ]

    results = {}

    logger.info("")
    logger.info("=" * 60)
    logger.info("QUASI-INTERPOLATION - EXPERIMENT VALIDATION")
    logger.info("=" * 60)
    logger.info(f"Running {len(experiments)} experiments...")
    logger.info("")

    for subcommand, config_path, name in experiments:
        results[name] = run_experiment(subcommand, config_path, name)

    logger.info("")
    logger.info("=" * 60)
    logger.info("SUMMARY")
    logger.info("=" * 60)

    for name, success in results.items():
        status = "PASS" if success else "FAIL"
        logger.info(f"{status:4s} - {name}")

    total = len(results)
    passed = sum(results.values())

    logger.info(f"\nTotal: {passed}/{total} experiments passed")

    if passed == total:
        logger.info("All experiments completed successfully!")
        return 0
    logger.warning(f"{total - passed} experiment(s) failed")
    return 1


if __name__ == "__main__":
    sys.exit(main())
