"""Print every k row of both bias strata for the simulation scenarios.

    python3 scripts/reproduce_table1.py --iters 10000 --workers 4
"""

import argparse

from ucheck.simulation import ScenarioSpec, run_scenarios

DESIGNS = [(1, 500), (1, 1000), (1, 5000), (2, 500), (2, 1000), (2, 5000)]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--iters", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--design", action="append", help="scenario:n, repeatable (default: all six)")
    args = ap.parse_args()
    designs = [tuple(map(int, d.split(":"))) for d in args.design] if args.design else DESIGNS

    print("scenario\tn\tstratum\tk\tstratum_size\tpct_0\tpct_1\tpct_2\tpct_3")
    for scenario, n in designs:
        summ = run_scenarios(ScenarioSpec(scenario=scenario, n=n, n_iter=args.iters, seed=args.seed),
                             workers=args.workers)
        for table in summ.tables():
            for row in table["rows"]:
                cells = [f"{p:.1f}" if p is not None else "NA" for p in row["pct"]]
                cells += [""] * (4 - len(cells))
                print("\t".join(map(str, [scenario, n, table["stratum"], row["k"], table["stratum_size"], *cells])))
        print(f"# scenario {scenario} n={n}: |bias|>{summ.bias_cutoff:g} in {100 * summ.fraction('gt'):.1f}% "
              f"of {summ.total} accepted ({summ.attempts} attempts)", flush=True)


if __name__ == "__main__":
    main()
