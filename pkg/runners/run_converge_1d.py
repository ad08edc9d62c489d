#!/usr/bin/env python3
"""
Run the 1D convergence study for d = 1 and d = 3.

Quasi-interpolates a Gaussian on h*Z for the halving step sizes of each config
and reports the fitted order of the maximum error.
"""

import logging
import sys
from pathlib import Path

from quasi_interp_pkg.runner import execute_experiment, resolve_config

# Configure logging for the experiment runner
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)
logger = logging.getLogger(__name__)

CONFIGS = ["converge_1d_d1.yaml", "converge_1d_d3.yaml"]

if __name__ == "__main__":
    logger.info("=" * 70)
    logger.info("CONVERGENCE IN ONE DIMENSION")
    logger.info("=" * 70)
    logger.info("")
    logger.info("Expected observations:")
    logger.info("  • d = 1: log-corrected order close to 2 (errors follow h^2 log(1/h))")
    logger.info("  • d = 3: fitted order at least the guaranteed degree + 1")
    logger.info("=" * 70)

    config_dir = Path(__file__).resolve().parent.parent / "configs"

    try:
        for name in CONFIGS:
            cfg = resolve_config(config_dir / name)
            report, paths, summary = execute_experiment("converge", cfg)
            logger.info(summary)
            for key, path in paths.items():
                logger.info(f"  • {key}: {path}")

        logger.info("")
        logger.info("=" * 70)
        logger.info("CONVERGENCE STUDY COMPLETE")
        logger.info("=" * 70)

    except Exception as e:
        logger.error("")
        logger.error("EXPERIMENT FAILED")
        logger.error(f"Error: {e}")
        logger.exception("Full traceback:")
        sys.exit(1)
