"""Power to flag full confounding, swept over the covariate correlation.

    python3 scripts/power_sweep.py --rho 0,0.1,0.2,0.3,0.4,0.5
"""

import argparse

from ucheck.power import PowerSpec, power_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rho", default="0.2,0.3,0.4,0.5")
    ap.add_argument("--iters", type=int, default=20_000)
    ap.add_argument("--gamma1", type=float, default=0.15)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    base = PowerSpec(gamma1=args.gamma1, n_iter=args.iters, seed=args.seed)
    print("rho_a\tprob_both\tprob_at_least_one\treject_a1\treject_a2")
    for res in power_sweep(base, [float(r) for r in args.rho.split(",")], workers=args.workers):
        a1, a2 = res.reject_rates
        print(f"{res.spec.rho_a:g}\t{res.prob_both:.4f}\t{res.prob_at_least_one:.4f}\t{a1:.4f}\t{a2:.4f}", flush=True)


if __name__ == "__main__":
    main()
