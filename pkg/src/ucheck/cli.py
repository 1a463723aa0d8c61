"""Command-line front end.

Verdicts always exit 0. Nonzero codes are reserved for operational failures:
1 usage, 2 bad data / graph / parameters, 3 degenerate regression.
"""

from __future__ import annotations

import argparse
import enum
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .comparators import entner_rules, exogenous_falsification, pearl_stability_test
from .engine import TestConfig, faithfulness_probe, negative_control_check, run_test
from .errors import DataError, DegenerateModelError, UsageError
from .graph import NOT_CHECKABLE, check_assumptions, is_valid_backdoor_set, read_graph, theorem1_oracle
from .paths import classify_biasing_paths
from .power import PowerSpec, power_sweep
from .simulation import ScenarioSpec, run_scenarios
from .stats import read_csv

SUBCOMMANDS = ("test", "probe", "oracle", "paths", "simulate", "power", "compare")
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE = 0, 1, 2, 3
SEED_ENV = "UCHECK_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class Invocation:
    subcommand: str
    format: str = "tsv"
    seed: int = 0
    data: str | None = None
    graph: str | None = None
    exposure: str | None = None
    outcome: str | None = None
    covariates: tuple = ()
    drop: tuple = ()
    negative_control: str | None = None
    exogenous: str | None = None
    z: str | None = None
    adjust: tuple = ()
    m: str | None = None
    not_barren_proxy: bool = False
    method: str | None = None
    subset_cap: int = 12
    workers: int = 1
    rhos: tuple = ()
    config: TestConfig = field(default_factory=TestConfig)
    scenario: ScenarioSpec | None = None
    power: PowerSpec | None = None


def _names(text: str) -> tuple:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _floats(text: str) -> tuple:
    try:
        return tuple(float(s) for s in _names(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _add_alphas(p):
    p.add_argument("--alpha-dep", type=float, default=0.05)
    p.add_argument("--alpha-indep", type=float, default=0.05)
    p.add_argument("--ci-level", type=float, default=0.95)


def _add_roles(p, covariates=True):
    p.add_argument("--data", required=True)
    p.add_argument("--exposure", required=True)
    p.add_argument("--outcome", required=True)
    if covariates:
        p.add_argument("--covariates", required=True, type=_names)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ucheck", description="Check whether a covariate set is a valid adjustment set.")
    parser.add_argument("--version", action="version", version=f"ucheck {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("tsv", "json"), default="tsv")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("test", parents=[common], help="run the data-level test")
    _add_roles(p)
    _add_alphas(p)

    p = sub.add_parser("probe", parents=[common], help="faithfulness and negative-control probes")
    _add_roles(p)
    p.add_argument("--drop", required=True, type=_names)
    p.add_argument("--negative-control")
    p.add_argument("--exogenous")
    _add_alphas(p)

    for name, extra in (("oracle", None), ("paths", "--z")):
        p = sub.add_parser(name, parents=[common], help=f"structural {name} on a graph file")
        p.add_argument("--graph", required=True)
        p.add_argument("--exposure", required=True)
        p.add_argument("--outcome", required=True)
        p.add_argument("--adjust", required=True, type=_names)
        if extra:
            p.add_argument(extra, required=True)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo scenarios")
    p.add_argument("--scenario", type=int, choices=(1, 2), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--bias-cutoff", type=float, default=0.2)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--corr-cap", type=float, default=0.05)
    p.add_argument("--max-attempts", type=int, default=10**6)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("power", parents=[common], help="power under full confounding")
    p.add_argument("--rho", type=_floats, default=(0.0,))
    p.add_argument("--n", type=int, default=2562)
    p.add_argument("--beta1", type=float, default=0.22)
    p.add_argument("--beta2", type=float, default=0.17)
    p.add_argument("--gamma1", type=float, default=0.15)
    p.add_argument("--iters", type=int, default=20_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--ci-level", type=float, default=0.95)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("compare", parents=[common], help="Pearl's or Entner's test")
    p.add_argument("--method", choices=("pearl", "entner"), required=True)
    p.add_argument("--data")
    p.add_argument("--graph")
    p.add_argument("--exposure", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--m")
    p.add_argument("--assert-not-barren-proxy", action="store_true")
    p.add_argument("--candidates", type=_names, default=())
    p.add_argument("--subset-cap", type=int, default=12)
    _add_alphas(p)
    return parser


def parse_invocation(argv) -> Invocation:
    args = build_parser().parse_args(list(argv))
    cmd = args.subcommand
    kw = {"subcommand": cmd, "format": args.format}
    for name in ("data", "graph", "exposure", "outcome", "negative_control", "exogenous", "z", "m"):
        if getattr(args, name, None) is not None:
            kw[name] = getattr(args, name)
    for name in ("covariates", "drop", "adjust"):
        if getattr(args, name, None) is not None:
            kw[name] = tuple(getattr(args, name))

    try:
        if hasattr(args, "alpha_dep"):
            kw["config"] = TestConfig(args.alpha_dep, args.alpha_indep, args.ci_level)
        if cmd in ("simulate", "power"):
            kw["seed"] = args.seed if args.seed is not None else _default_seed()
            kw["workers"] = args.workers
            if args.workers < 1:
                raise UsageError("--workers must be at least 1")
        if cmd == "simulate":
            kw["scenario"] = ScenarioSpec(
                scenario=args.scenario, n=args.n, n_iter=args.iters, seed=kw["seed"],
                bias_cutoff=args.bias_cutoff, alpha=args.alpha, corr_cap=args.corr_cap,
                max_attempts_per_accept=args.max_attempts,
            )
        elif cmd == "power":
            if not args.rho:
                raise UsageError("--rho needs at least one value")
            kw["rhos"] = tuple(args.rho)
            base = PowerSpec(n=args.n, beta1=args.beta1, beta2=args.beta2, gamma1=args.gamma1,
                             n_iter=args.iters, seed=kw["seed"], ci_level=args.ci_level)
            for r in args.rho:  # validate every sweep point up front
                PowerSpec(**{**base.__dict__, "rho_a": r})
            kw["power"] = base
    except DataError as exc:
        # parameter problems on the command line are usage errors
        raise UsageError(str(exc)) from None

    if cmd == "compare":
        kw.update(method=args.method, subset_cap=args.subset_cap, not_barren_proxy=args.assert_not_barren_proxy)
        kw["covariates"] = tuple(args.candidates)
        if args.method == "pearl":
            if args.data is None:
                raise UsageError("compare --method pearl requires --data")
            if args.m is None:
                raise UsageError("compare --method pearl requires --m")
        elif (args.data is None) == (args.graph is None):
            raise UsageError("compare --method entner requires exactly one of --data, --graph")
        elif not args.candidates:
            raise UsageError("compare --method entner requires --candidates")
    return Invocation(**kw)


# ---------------------------------------------------------------------------
# rendering


def plain(obj):
    """Convert a report into JSON-native values (NaN becomes null)."""
    if isinstance(obj, enum.Enum):
        return plain(obj.value)
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [plain(v) for v in items]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if math.isnan(v) or math.isinf(v) else v
    return obj


def render_json(report) -> str:
    return json.dumps(plain(report), sort_keys=True, indent=2) + "\n"


def _cell(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return ",".join(_cell(x) for x in v)
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    return str(v)


def render_tsv(report) -> str:
    """Scalars as ``key<TAB>value``; lists of records as headed tables."""
    scalars, tables = [], []

    def walk(prefix, value):
        if isinstance(value, dict):
            for k in sorted(value):
                walk(f"{prefix}.{k}" if prefix else k, value[k])
        elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            tables.append((prefix, value))
        else:
            scalars.append(f"{prefix}\t{_cell(value)}")

    walk("", plain(report))
    lines = scalars
    for name, rows in tables:
        cols = sorted({k for r in rows for k in r})
        lines += ["", f"# {name}", "\t".join(cols)]
        lines += ["\t".join(_cell(r.get(c)) for c in cols) for r in rows]
    return "\n".join(lines) + "\n"


def _simulate_tsv(report) -> str:
    lines = [f"# config\t{_cell(plain(report['config']))}"]
    lines.append("\t".join(["scenario", "n", "stratum", "stratum_size", "k", "counts", "pct"]))
    for t in report["tables"]:
        for row in t["rows"]:
            lines.append("\t".join(_cell(v) for v in (
                t["scenario"], t["n"], t["stratum"], t["stratum_size"], row["k"], row["counts"], row["pct"])))
    lines.append(f"fraction_gt\t{_cell(report['fraction_gt'])}")
    lines.append(f"attempts\t{report['attempts']}")
    return "\n".join(lines) + "\n"


def _power_tsv(report) -> str:
    cfg = dict(report["config"])
    cfg.pop("rho_a", None)
    lines = [f"# config\t{_cell(plain(cfg))}"]
    lines.append("rho_a\tprob_both\tprob_at_least_one\treject_rate_a1\treject_rate_a2")
    for r in report["results"]:
        lines.append("\t".join(_cell(v) for v in (
            r["config"]["rho_a"], r["prob_both"], r["prob_at_least_one"], r["reject_rate_a1"], r["reject_rate_a2"])))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# dispatch


def _do_test(inv):
    data = read_csv(inv.data)
    return run_test(data, inv.exposure, inv.outcome, inv.covariates, inv.config).to_dict()


def _do_probe(inv):
    data = read_csv(inv.data)
    report = run_test(data, inv.exposure, inv.outcome, inv.covariates, inv.config)
    probe = faithfulness_probe(data, inv.exposure, inv.outcome, inv.covariates, inv.drop, inv.config, report)
    out = {"test": report.to_dict(), "probe": probe.to_dict(), "config": inv.config.to_dict()}
    if inv.negative_control:
        out["negative_control"] = negative_control_check(
            data, inv.exposure, inv.negative_control, inv.covariates, inv.config)
    if inv.exogenous:
        # the exogenous covariate may be listed among --covariates; test the rest
        rest = [c for c in inv.covariates if c != inv.exogenous]
        out["exogenous"] = exogenous_falsification(
            data, inv.exposure, inv.outcome, inv.exogenous, rest, inv.config)
    return out


def _do_oracle(inv):
    dag = read_graph(inv.graph)
    violations = check_assumptions(dag, inv.exposure, inv.outcome, inv.adjust)
    report = theorem1_oracle(dag, inv.exposure, inv.outcome, inv.adjust)
    return {
        "config": {"graph": inv.graph, "exposure": inv.exposure, "outcome": inv.outcome, "adjust": list(inv.adjust)},
        **report.to_dict(),
        "backdoor_valid": is_valid_backdoor_set(dag, inv.exposure, inv.outcome, inv.adjust),
        "assumptions": {"violations": [v.to_dict() for v in violations], "not_checkable": list(NOT_CHECKABLE)},
    }


def _do_paths(inv):
    dag = read_graph(inv.graph)
    rest = [a for a in inv.adjust if a != inv.z]
    records = classify_biasing_paths(dag, inv.exposure, inv.outcome, inv.z, rest)
    return {
        "config": {"graph": inv.graph, "exposure": inv.exposure, "outcome": inv.outcome,
                   "z": inv.z, "adjust_without_z": rest},
        "paths": [r.to_dict(dag) for r in records],
        "n_unclassified": sum(not r.classified for r in records),
    }


def _do_simulate(inv):
    summary = run_scenarios(inv.scenario, workers=inv.workers)
    return {
        "config": inv.scenario.to_dict(),
        "tables": summary.tables(),
        "fraction_gt": summary.fraction("gt"),
        "attempts": summary.attempts,
    }


def _do_power(inv):
    results = power_sweep(inv.power, inv.rhos, inv.workers)
    cfg = inv.power.to_dict()
    cfg["rho_a"] = list(inv.rhos)
    return {"config": cfg, "results": [r.to_dict() for r in results]}


def _do_compare(inv):
    if inv.method == "pearl":
        data = read_csv(inv.data)
        return pearl_stability_test(data, inv.exposure, inv.outcome, inv.m, inv.config,
                                    m_not_barren_proxy=inv.not_barren_proxy)
    source = read_graph(inv.graph) if inv.graph else read_csv(inv.data)
    result = entner_rules(source, inv.exposure, inv.outcome, inv.covariates, inv.config, inv.subset_cap)
    out = result.to_dict()
    out["config"] = {**inv.config.to_dict(), "candidates": list(inv.covariates), "subset_cap": inv.subset_cap}
    return out


_HANDLERS = {
    "test": _do_test,
    "probe": _do_probe,
    "oracle": _do_oracle,
    "paths": _do_paths,
    "simulate": _do_simulate,
    "power": _do_power,
    "compare": _do_compare,
}


def render(inv: Invocation, report) -> str:
    if inv.format == "json":
        return render_json(report)
    if inv.subcommand == "simulate":
        return _simulate_tsv(plain(report))
    if inv.subcommand == "power":
        return _power_tsv(plain(report))
    return render_tsv(report)


def execute(inv: Invocation) -> tuple[int, str]:
    """Run an invocation; returns ``(exit_code, text)``.

    On failure the text is the error message, meant for stderr.
    """
    try:
        report = _HANDLERS[inv.subcommand](inv)
    except DegenerateModelError as exc:
        return EXIT_DEGENERATE, f"error: {type(exc).__name__}: {exc}\n"
    except DataError as exc:
        return EXIT_DATA, f"error: {type(exc).__name__}: {exc}\n"
    except OSError as exc:
        return EXIT_DATA, f"error: {exc}\n"
    return EXIT_OK, render(inv, report)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        inv = parse_invocation(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    code, text = execute(inv)
    (sys.stdout if code == EXIT_OK else sys.stderr).write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
