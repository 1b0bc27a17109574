"""What a real deployment would pay in rounds and traffic.

Round count is fixed by the schedule -- 18 per search step plus 6 to finish
-- so latency dominates and is feature-count independent (features ride the
same rounds in parallel).  Traffic grows linearly in features.
"""
import argparse

from fedgauss import NetworkModel, cost_estimate, run_secure_fed_yj, partition, Feature
from fedgauss.smc import MODE_DEBUG, FieldConfig

import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--latency", type=float, default=0.020,
                    help="one-way round latency in seconds (default 20 ms)")
    ap.add_argument("--bandwidth", type=float, default=1e9,
                    help="link bandwidth in bits/s (default 1 Gb/s)")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    feat = Feature(rng.lognormal(0.0, 0.5, 300), name="demo")
    cfg = FieldConfig.create(l=100, f=50, K=3)
    _, _, ledger = run_secure_fed_yj(
        partition(feat, 3, "uniform", seed=0), 40, cfg,
        mode=MODE_DEBUG, seed=0,
    )

    print("per-operation ledger for one 40-step fit:")
    for op, (calls, rounds, elements) in sorted(ledger.breakdown.items()):
        print(f"  {op:<12} {calls:>4} calls  {rounds:>4} rounds  "
              f"{elements:>8} elements")
    print(f"  {'total':<12} {'':>4}        {ledger.rounds:>4} rounds  "
          f"{ledger.elements:>8} elements")
    print(f"bits per ordered client pair: {ledger.bits_per_pair:.4e} "
          f"({cfg.element_bits} bits/element)")

    net = NetworkModel(latency=args.latency, bandwidth=args.bandwidth)
    print()
    print(f"network: {net.latency * 1e3:.0f} ms latency, "
          f"{net.bandwidth / 1e9:g} Gb/s")
    print(f"{'features':>9}{'wall (s)':>10}{'latency share':>15}")
    for features in (1, 10, 100, 1000):
        wall, _ = cost_estimate(ledger, net, features=features)
        lat = ledger.rounds * net.latency
        print(f"{features:>9}{wall:>10.3f}{lat / wall:>14.1%}")
    print()
    print("latency buys the rounds once; only the byte term scales with"
          " feature count.")


if __name__ == "__main__":
    main()
