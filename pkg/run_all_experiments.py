#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Noncritical Squeezing Toolkit - Experiment Sweep
Run every experiment at quick desk-scale settings into one timestamped directory
"""

import logging
import os
import sys
from datetime import datetime

from errors import SqueezingError
from experiments import ExperimentRunner
from models.experiment_model import ExperimentConfig

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(sys.stderr)
    ]
)
logger = logging.getLogger(__name__)

QUICK_OVERRIDES = {
    "modes-check": {},
    "jcm-variance": {"N": "0..10", "n_times": "16"},
    "fwm-region": {},
    "dopo-fixed-lo": {},
    "dopo-seeded": {},
    "dopo-spectrum": {"n_traj": "256", "t_end": "60"},
    "dopo-orientation": {"n_traj": "256", "t_end": "50"},
    "spatial-diffusion": {"n_traj": "100", "t_end": "22"},
}


def run_experiment(name: str, output_dir: str, seed: int = 0) -> str:
    """Run one experiment with its quick overrides"""
    config = ExperimentConfig(
        name,
        overrides=QUICK_OVERRIDES[name],
        seed=seed,
        output=os.path.join(output_dir, f"{name}.csv"),
    )
    return ExperimentRunner().run(config)


def main() -> int:
    """Run all experiments, continuing past individual failures"""
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    output_dir = os.environ.get("NCSQ_OUTPUT_DIR", f"results_{timestamp}")
    os.makedirs(output_dir, exist_ok=True)

    written, failed = [], []
    for name in QUICK_OVERRIDES:
        logger.info(f"Running {name}")
        try:
            written.append((name, run_experiment(name, output_dir)))
        except SqueezingError as e:
            logger.error(f"{name} failed: {e}")
            failed.append(name)

    print("\n=== Results ===")
    for name, path in written:
        print(f"{name}: {path}")
    if failed:
        print(f"Failed: {', '.join(failed)}")
    print(f"\nAll results saved to directory: {output_dir}")
    return 3 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
