"""Sweep the Euler step size across the analytic threshold and report fate.

For a given problem/graph config, computes the exact threshold from the
system spectrum, then runs the discrete iteration at a grid of step sizes
bracketing it and prints converged/diverged for each. Demonstrates the
sharpness of the threshold empirically.
"""

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from lsqflow import (
    DiscreteConfig,
    DivergedError,
    assemble,
    epsilon_star,
    parse_config,
    simulate_dt,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", required=True, help="a simulate-dt fixture")
    parser.add_argument("--factors", default="0.5,0.9,0.99,1.01,1.1,2.0",
                        help="multiples of the threshold to test")
    parser.add_argument("--max-steps", type=int, default=200000)
    args = parser.parse_args()

    with open(args.config) as fh:
        config = parse_config(fh.read(), base_dir=os.path.dirname(args.config))
    flow = assemble(config.problem, config.graph)
    threshold = epsilon_star(flow)
    print(f"threshold = {threshold:.6g}")

    x0 = config.x0
    v0 = config.v0 if config.v0 is not None else np.zeros_like(x0)
    for factor in [float(f) for f in args.factors.split(",")]:
        eps = factor * threshold
        try:
            traj = simulate_dt(flow, x0, v0, DiscreteConfig(
                epsilon=eps, max_steps=args.max_steps, record_every=1000))
            fate = f"converged, final error {traj.error[-1]:.3e}"
        except DivergedError as exc:
            fate = f"diverged at k = {exc.t_or_k}"
        print(f"eps = {eps:.6g} ({factor:g} x threshold): {fate}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
