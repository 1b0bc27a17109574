"""Where likelihood minimization falls over and the sign search does not.

Heavy-tailed positive samples can drive the transformed variance to zero as
lambda walks negative: the likelihood rewards crushing the sample into a
point.  A numeric minimizer happily follows that slope into a degenerate
corner.  The sign search never evaluates the likelihood -- it only compares
-- so it cannot be lured.
"""
import math

import numpy as np

from fedgauss import (
    DegenerateVariance,
    fit_brent,
    fit_expyj,
    neg_log_likelihood,
)
from fedgauss.datasets import load_collapse


def nll_or_inf(lam, feat):
    try:
        return neg_log_likelihood(lam, feat)
    except DegenerateVariance:
        return math.inf


def main():
    feat = load_collapse()
    v = feat.values
    print(f"feature: n={v.size}, min={v.min():.3g}, median="
          f"{np.median(v):.3g}, max={v.max():.3g}  (heavy right tail)")

    print()
    print("objective along lambda (inf marks a collapsed variance):")
    for lam in (-6.0, -4.0, -3.665, -2.0, -1.0, 0.0, 1.0):
        print(f"  lambda={lam:+7.3f}   nll={nll_or_inf(lam, feat):12.4f}")

    print()
    brent = fit_brent(feat)
    print(f"brent:  lambda={brent.params.lmbda:.4f}  degenerate="
          f"{brent.degenerate}  sigma2={brent.params.sigma2}")

    exp = fit_expyj(feat, t_max=40)
    print(f"search: lambda={exp.params.lmbda:.6f}  degenerate="
          f"{exp.degenerate}  sigma2={exp.params.sigma2:.6f}")

    print()
    print(f"objective at the search optimum: "
          f"{nll_or_inf(exp.params.lmbda, feat):.4f} "
          f"(brent's endpoint scores {nll_or_inf(brent.params.lmbda, feat)})")


if __name__ == "__main__":
    main()
