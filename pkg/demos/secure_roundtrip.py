"""Desk-sized walkthrough of the secret-sharing arithmetic.

Everything the protocol does reduces to four operations on Shamir shares:
deal, add (free), multiply (one round), and compare-to-zero.  This script
runs each on a small field so the numbers are readable, then prints what
the communication ledger recorded.
"""
from fedgauss.smc import (
    MODE_FAITHFUL,
    FieldConfig,
    SmcEngine,
    reconstruct,
)
from fedgauss.smc.fixedpoint import centered, fxp_decode, fxp_encode
from fedgauss.smc.shamir import add


def main():
    cfg = FieldConfig.create(l=16, f=6, K=3, kappa=20)
    print(f"field: p = {cfg.p} ({cfg.p.bit_length()} bits), "
          f"K = {cfg.K} parties, threshold t = {cfg.t}")
    print(f"fixed point: {cfg.l}-bit window, {cfg.f} fractional bits "
          f"(one ulp = {2.0 ** -cfg.f})")

    eng = SmcEngine(cfg, mode=MODE_FAITHFUL, seed=11)

    print()
    print("deal 12.5 and -3.25:")
    a, b = 12.5, -3.25
    xs = eng.share_batch([fxp_encode(a, cfg), fxp_encode(b, cfg)])
    for name, vec in zip("ab", xs):
        print(f"  shares of {name}: {vec.values}")

    s = add(xs[0], xs[1])
    print(f"local addition, then reconstruct: "
          f"{fxp_decode(reconstruct(s), cfg)}  (expected {a + b})")

    prod = eng.fxp_mul_batch([(xs[0], xs[1])])[0]
    got = fxp_decode(reconstruct(prod), cfg)
    print(f"fixed-point multiply:             {got}  (expected {a * b}, "
          f"truncation may add one ulp)")

    sgn = eng.secure_sign(prod)
    print(f"secure sign of the product:       "
          f"{centered(reconstruct(sgn), cfg):+d}")

    print()
    print("ledger (rounds / field elements per ordered pair):")
    for op, (calls, rounds, elements) in sorted(eng.ledger.breakdown.items()):
        print(f"  {op:<12} {calls} call(s)  {rounds:>3} rounds   "
              f"{elements:>6} elements")
    print(f"  {'total':<12} {eng.ledger.rounds:>3} rounds   "
          f"{eng.ledger.elements:>6} elements "
          f"({eng.ledger.bits_per_pair} bits at the declared width)")
    print(f"mask openings consumed (uniform, information-free): "
          f"{eng.mask_openings}")


if __name__ == "__main__":
    main()
