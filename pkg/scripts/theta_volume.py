"""Monte Carlo volume of the one-punctured torus cell under each proposal.

    python3 scripts/theta_volume.py [--samples 200000] [--seed 0]

The 1/|Aut| weighted value is compared to pi^2/12 for reference only.
"""
import argparse
import math

from wpbound.mc_engine import SamplerConfig, estimate_cell_volume_n1
from wpbound.ribbon_graph import aut_order, theta


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    G = theta()
    aut = aut_order(G)
    print(f"|Aut| = {aut}; reference pi^2/12 = {math.pi**2 / 12:.5f}")
    for proposal in ("simplex", "cube", "log-uniform"):
        est = estimate_cell_volume_n1(G, SamplerConfig(seed=args.seed, samples=args.samples, proposal=proposal))
        print(f"{proposal:12s} cell {est.mean:.5f} +- {est.std_error:.5f}  "
              f"weighted {est.mean / aut:.5f} +- {est.std_error / aut:.5f}  accept {est.accept_rate:.3f}")


if __name__ == "__main__":
    main()
