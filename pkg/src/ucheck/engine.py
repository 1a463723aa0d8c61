"""Data-level adjustment-set test built on OLS t-tests."""

from __future__ import annotations

import enum
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter, DropNotSubset, EmptyCandidateSet, KeyMismatch, TooFewRows
from .stats import Dataset, OlsFit, complete_cases, fit_ols, standardize


@dataclass(frozen=True)
class TestConfig:
    """Thresholds for reading p-values.

    ``alpha_dep``: p below it signals dependence (eligibility).
    ``alpha_indep``: p at or above it signals independence (witness).
    """

    __test__ = False  # keep pytest from collecting this class

    alpha_dep: float = 0.05
    alpha_indep: float = 0.05
    ci_level: float = 0.95

    def __post_init__(self):
        for name in ("alpha_dep", "alpha_indep", "ci_level"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise BadParameter(f"{name} must lie in (0, 1), got {value}")

    def to_dict(self):
        return {"alpha_dep": self.alpha_dep, "alpha_indep": self.alpha_indep, "ci_level": self.ci_level}


class Verdict(str, enum.Enum):
    VALID_ADJUSTMENT_SET = "ValidAdjustmentSet"
    INVALID_OR_MINIMAL = "InvalidOrMinimal"
    NO_ELIGIBLE_COVARIATE = "NoEligibleCovariate"


@dataclass(frozen=True)
class ConditionRecord:
    covariate: str
    p_x: float
    eligible: bool
    p_y: float
    passes_ii: bool

    def to_dict(self):
        return {
            "covariate": self.covariate,
            "p_x": self.p_x,
            "eligible": self.eligible,
            "p_y": self.p_y,
            "passes_ii": self.passes_ii,
        }


@dataclass(frozen=True)
class TestReport:
    __test__ = False

    exposure: str
    outcome: str
    covariates: tuple
    records: tuple
    verdict: Verdict
    witnesses: tuple
    model1: OlsFit = field(repr=False)
    model2: OlsFit = field(repr=False)
    exposure_effect: dict
    config: TestConfig
    n: int

    @property
    def reduced_sets(self) -> dict:
        return {w: tuple(c for c in self.covariates if c != w) for w in self.witnesses}

    def record(self, covariate: str) -> ConditionRecord:
        for r in self.records:
            if r.covariate == covariate:
                return r
        raise KeyError(covariate)

    def to_dict(self):
        return {
            "exposure": self.exposure,
            "outcome": self.outcome,
            "covariates": list(self.covariates),
            "n": self.n,
            "records": [r.to_dict() for r in self.records],
            "verdict": self.verdict.value,
            "witnesses": list(self.witnesses),
            "reduced_sets": {w: list(s) for w, s in self.reduced_sets.items()},
            "exposure_effect": self.exposure_effect,
            "config": self.config.to_dict(),
        }


def build_records(p_x: Mapping, p_y: Mapping, config: TestConfig) -> list[ConditionRecord]:
    if set(p_x) != set(p_y):
        raise KeyMismatch(
            f"p-value maps differ: only in p_x {sorted(set(p_x) - set(p_y))}, "
            f"only in p_y {sorted(set(p_y) - set(p_x))}"
        )
    records = []
    for name in p_x:
        eligible = p_x[name] < config.alpha_dep
        records.append(
            ConditionRecord(
                covariate=name,
                p_x=float(p_x[name]),
                eligible=eligible,
                p_y=float(p_y[name]),
                passes_ii=eligible and p_y[name] >= config.alpha_indep,
            )
        )
    return records


def _verdict(records) -> tuple[Verdict, tuple]:
    witnesses = tuple(r.covariate for r in records if r.passes_ii)
    if not any(r.eligible for r in records):
        return Verdict.NO_ELIGIBLE_COVARIATE, ()
    if witnesses:
        return Verdict.VALID_ADJUSTMENT_SET, witnesses
    return Verdict.INVALID_OR_MINIMAL, ()


def evaluate_conditions(p_x: Mapping, p_y: Mapping, config: TestConfig | None = None):
    """Decision logic over per-covariate p-values; returns ``(verdict, witnesses)``.

    ``p_x``: each covariate's p-value in the exposure model.
    ``p_y``: its p-value in the outcome model that also contains the exposure.
    """
    config = config or TestConfig()
    return _verdict(build_records(p_x, p_y, config))


def prepare(data: Dataset, variables: Sequence[str], min_rows: int) -> Dataset:
    """Complete cases over ``variables``, each standardized."""
    variables = list(dict.fromkeys(variables))
    cc = complete_cases(data, variables)
    if cc.n_rows < min_rows:
        raise TooFewRows(f"{cc.n_rows} complete rows; at least {min_rows} needed")
    return Dataset({v: standardize(cc[v]) for v in variables})


def _fit(data: Dataset, response: str, predictors: Sequence[str]) -> OlsFit:
    return fit_ols({p: data[p] for p in predictors}, data[response])


def run_test(data: Dataset, x: str, y: str, covariates: Sequence[str], config: TestConfig | None = None) -> TestReport:
    config = config or TestConfig()
    covariates = list(dict.fromkeys(covariates))
    if not covariates:
        raise EmptyCandidateSet("the candidate adjustment set is empty")
    if x in covariates or y in covariates or x == y:
        raise BadParameter("exposure, outcome and covariates must be distinct")
    std = prepare(data, [x, y, *covariates], len(covariates) + 3)
    model1 = _fit(std, x, covariates)
    model2 = _fit(std, y, [x, *covariates])
    p_x = {c: model1.p(c) for c in covariates}
    p_y = {c: model2.p(c) for c in covariates}
    records = build_records(p_x, p_y, config)
    verdict, witnesses = _verdict(records)
    return TestReport(
        exposure=x,
        outcome=y,
        covariates=tuple(covariates),
        records=tuple(records),
        verdict=verdict,
        witnesses=witnesses,
        model1=model1,
        model2=model2,
        exposure_effect=model2.summary(x, config.ci_level),
        config=config,
        n=std.n_rows,
    )


# ---------------------------------------------------------------------------
# Faithfulness probes


@dataclass(frozen=True)
class ProbeRecord:
    covariate: str
    p_restricted: float | None  # None when the witness itself was dropped
    p_pairwise: float | None
    suspect: bool

    def to_dict(self):
        return {
            "covariate": self.covariate,
            "p_restricted": self.p_restricted,
            "p_pairwise": self.p_pairwise,
            "faithfulness_suspect": self.suspect,
        }


@dataclass(frozen=True)
class ProbeReport:
    dropped: tuple
    records: tuple
    restricted_fit: OlsFit | None = field(default=None, repr=False)
    pairwise_fits: dict = field(default_factory=dict, repr=False)
    exposure_effect_restricted: dict | None = None
    config: TestConfig = field(default_factory=TestConfig)

    @property
    def suspects(self) -> tuple:
        return tuple(r.covariate for r in self.records if r.suspect)

    def to_dict(self):
        return {
            "dropped": list(self.dropped),
            "records": [r.to_dict() for r in self.records],
            "faithfulness_suspects": list(self.suspects),
            "exposure_effect_restricted": self.exposure_effect_restricted,
            "config": self.config.to_dict(),
        }


def classify_faithfulness(witnesses, p_restricted: Mapping, p_pairwise: Mapping,
                          config: TestConfig | None = None) -> list[ProbeRecord]:
    """Flag witnesses that stay unassociated with the outcome after known
    confounders are removed (restricted fit) or when fitted alone with the
    exposure (pairwise fit). Such a witness may owe its status to a
    cancellation rather than to a valid adjustment set."""
    config = config or TestConfig()
    out = []
    for w in witnesses:
        p3 = p_restricted.get(w)
        p4 = p_pairwise.get(w)
        flags = [p >= config.alpha_indep for p in (p3, p4) if p is not None]
        out.append(ProbeRecord(w, p3, p4, any(flags)))
    return out


def faithfulness_probe(data: Dataset, x: str, y: str, covariates: Sequence[str], drop: Sequence[str],
                       config: TestConfig | None = None, report: TestReport | None = None) -> ProbeReport:
    config = config or TestConfig()
    covariates = list(dict.fromkeys(covariates))
    drop = list(dict.fromkeys(drop))
    extra = set(drop) - set(covariates)
    if extra:
        raise DropNotSubset(f"drop set contains non-covariates: {sorted(extra)}")
    if report is None:
        report = run_test(data, x, y, covariates, config)
    std = prepare(data, [x, y, *covariates], len(covariates) + 3)
    kept = [c for c in covariates if c not in drop]
    restricted = _fit(std, y, [x, *kept])
    p_restricted = {w: restricted.p(w) for w in report.witnesses if w in kept}
    pairwise = {w: _fit(std, y, [x, w]) for w in report.witnesses}
    p_pairwise = {w: f.p(w) for w, f in pairwise.items()}
    records = classify_faithfulness(report.witnesses, p_restricted, p_pairwise, config)
    return ProbeReport(
        dropped=tuple(drop),
        records=tuple(records),
        restricted_fit=restricted,
        pairwise_fits=pairwise,
        exposure_effect_restricted=restricted.summary(x, config.ci_level),
        config=config,
    )


# ---------------------------------------------------------------------------
# Negative control outcome


def _is_binary(values: np.ndarray) -> bool:
    return np.unique(values).shape[0] == 2


def negative_control_check(data: Dataset, x: str, nco: str, covariates: Sequence[str],
                           config: TestConfig | None = None) -> dict:
    """Association between the exposure and a negative-control outcome,
    without and with adjustment for ``covariates``.

    The exposure is regressed on the control, so a binary control yields the
    standardized exposure-mean difference between its groups (a continuous one
    is standardized and yields a slope). Residual association after adjustment
    points to confounding the covariates do not remove.
    """
    config = config or TestConfig()
    covariates = list(dict.fromkeys(covariates))
    variables = [x, nco, *covariates]
    cc = complete_cases(data, variables)
    if cc.n_rows < len(covariates) + 3:
        raise TooFewRows(f"{cc.n_rows} complete rows")
    cols = {v: standardize(cc[v]) for v in [x, *covariates]}
    binary = _is_binary(cc[nco])
    if binary:
        lo, hi = np.unique(cc[nco])
        cols[nco] = (cc[nco] == hi).astype(float)
    else:
        cols[nco] = standardize(cc[nco])
    unadjusted = fit_ols({nco: cols[nco]}, cols[x])
    adjusted = fit_ols({nco: cols[nco], **{c: cols[c] for c in covariates}}, cols[x])
    return {
        "exposure": x,
        "negative_control": nco,
        "covariates": covariates,
        "binary_control": binary,
        "n": cc.n_rows,
        "unadjusted": unadjusted.summary(nco, config.ci_level),
        "adjusted": adjusted.summary(nco, config.ci_level),
        "config": config.to_dict(),
    }
