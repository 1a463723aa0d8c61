"""Monte Carlo reproduction of the two simulation scenarios.

Scenario 1: three instruments and one unmeasured confounder (the covariate set
is invalid). Scenario 2: three confounders and no unmeasured confounding (the
full set is valid but minimal). The true exposure effect is zero in both, so
the unadjusted slope of y on x is the bias.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter, MaxAttemptsExceeded
from .stats import Dataset, RngStream, fit_ols, pearson_corr_matrix

N_COVARIATES = 3
STRATA = ("gt", "le")


@dataclass(frozen=True)
class ScenarioSpec:
    scenario: int
    n: int
    n_iter: int
    seed: int = 0
    bias_cutoff: float = 0.2
    alpha: float = 0.05
    corr_cap: float = 0.05
    max_attempts_per_accept: int = 10**6

    def __post_init__(self):
        if self.scenario not in (1, 2):
            raise BadParameter("scenario must be 1 or 2")
        if self.n < 50:
            raise BadParameter("n must be at least 50")
        if self.n_iter < 1:
            raise BadParameter("n_iter must be at least 1")
        if self.bias_cutoff < 0:
            raise BadParameter("bias_cutoff must be non-negative")
        if not 0 < self.alpha < 1:
            raise BadParameter("alpha must lie in (0, 1)")
        if self.corr_cap < 0:
            raise BadParameter("corr_cap must be non-negative")
        if self.max_attempts_per_accept < 1:
            raise BadParameter("max_attempts_per_accept must be positive")
        if self.seed < 0:
            raise BadParameter("seed must be non-negative")

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "n": self.n,
            "n_iter": self.n_iter,
            "seed": self.seed,
            "bias_cutoff": self.bias_cutoff,
            "alpha": self.alpha,
            "corr_cap": self.corr_cap,
            "max_attempts_per_accept": self.max_attempts_per_accept,
        }


@dataclass(frozen=True)
class ReplicateOutcome:
    p_x: tuple  # per model with k = 1, 2, 3 covariates: exposure-model p-values
    p_y: tuple  # per model: covariate p-values in the outcome model
    bias: float
    attempts: int = 1

    def n_unassociated(self, k: int, alpha: float) -> int:
        return int(np.sum(self.p_y[k - 1] >= alpha))


def _covariate_pvalues(z, response, extra=None):
    """p-values of the covariate columns of z, after an optional leading predictor."""
    out = []
    for k in range(1, N_COVARIATES + 1):
        design = z[:, :k] if extra is None else np.column_stack([extra, z[:, :k]])
        fit = fit_ols(design, response)
        skip = 1 if extra is None else 2
        out.append(fit.p_values[skip:].copy())
    return tuple(out)


def generate_replicate(spec: ScenarioSpec, rng: RngStream):
    """Draw one accepted dataset; returns ``(Dataset, ReplicateOutcome)``.

    Attempts are rejected when any pairwise covariate correlation (including
    the confounder in scenario 1) exceeds ``corr_cap`` in absolute value, or
    when any covariate misses ``p < alpha`` in any of the three nested
    exposure models.
    """
    n = spec.n
    s1 = spec.scenario == 1
    for attempt in range(1, spec.max_attempts_per_accept + 1):
        z = np.column_stack([rng.standard_normal(n) for _ in range(N_COVARIATES)])
        u = rng.standard_normal(n)
        corr = pearson_corr_matrix(np.column_stack([z, u]) if s1 else z)
        np.fill_diagonal(corr, 0.0)
        if np.max(np.abs(corr)) > spec.corr_cap:
            continue

        beta_z = rng.uniform(-1, 1, N_COVARIATES)
        beta_u = rng.uniform(0, 1) * s1
        x = z @ beta_z + u * beta_u
        r2_x = rng.uniform(0.05, 0.95)
        x = x / x.std(ddof=1) * math.sqrt(r2_x) + rng.normal(0, math.sqrt(1 - r2_x), n)

        p_x = _covariate_pvalues(z, x)
        if any(np.any(p >= spec.alpha) for p in p_x):
            continue

        gamma_z = rng.uniform(-1, 1, N_COVARIATES) * (not s1)
        gamma_u = rng.uniform(0, 1) * s1
        y = z @ gamma_z + u * gamma_u
        r2_y = rng.uniform(0.05, 0.95)
        y = y / y.std(ddof=1) * math.sqrt(r2_y) + rng.normal(0, math.sqrt(1 - r2_y), n)

        p_y = _covariate_pvalues(z, y, extra=x)
        bias = float(fit_ols(x[:, None], y).coefficients[1])
        data = Dataset({"z1": z[:, 0], "z2": z[:, 1], "z3": z[:, 2], "u": u, "x": x, "y": y})
        return data, ReplicateOutcome(p_x, p_y, bias, attempt)
    raise MaxAttemptsExceeded(
        f"no accepted dataset after {spec.max_attempts_per_accept} attempts (stream {rng.stream_id})"
    )


@dataclass
class Table1Summary:
    """Counts of covariates unassociated with the outcome, by model size and
    bias stratum (``gt``: |bias| > cutoff, ``le``: |bias| <= cutoff).

    Summaries over disjoint replicate ranges combine with ``+``.
    """

    scenario: int
    n: int
    bias_cutoff: float
    alpha: float
    counts: dict = field(default_factory=lambda: {
        s: {k: [0] * (k + 1) for k in range(1, N_COVARIATES + 1)} for s in STRATA
    })
    stratum_size: dict = field(default_factory=lambda: {s: 0 for s in STRATA})
    attempts: int = 0

    @classmethod
    def from_outcomes(cls, spec: ScenarioSpec, outcomes) -> Table1Summary:
        out = cls(spec.scenario, spec.n, spec.bias_cutoff, spec.alpha)
        for o in outcomes:
            out.add(o)
        return out

    def add(self, outcome: ReplicateOutcome):
        stratum = "gt" if abs(outcome.bias) > self.bias_cutoff else "le"
        self.stratum_size[stratum] += 1
        self.attempts += outcome.attempts
        for k in range(1, N_COVARIATES + 1):
            self.counts[stratum][k][outcome.n_unassociated(k, self.alpha)] += 1

    def __add__(self, other: Table1Summary) -> Table1Summary:
        if (self.scenario, self.n, self.bias_cutoff, self.alpha) != (
            other.scenario, other.n, other.bias_cutoff, other.alpha
        ):
            raise ValueError("cannot combine summaries of different designs")
        out = Table1Summary(self.scenario, self.n, self.bias_cutoff, self.alpha)
        for s in STRATA:
            out.stratum_size[s] = self.stratum_size[s] + other.stratum_size[s]
            for k in out.counts[s]:
                out.counts[s][k] = [a + b for a, b in zip(self.counts[s][k], other.counts[s][k])]
        out.attempts = self.attempts + other.attempts
        return out

    @property
    def total(self) -> int:
        return sum(self.stratum_size.values())

    def fraction(self, stratum: str = "gt") -> float:
        return self.stratum_size[stratum] / self.total if self.total else math.nan

    def pct(self, stratum: str, k: int) -> list[float]:
        size = self.stratum_size[stratum]
        if size == 0:
            return [math.nan] * (k + 1)
        return [100.0 * c / size for c in self.counts[stratum][k]]

    def tables(self) -> list[dict]:
        out = []
        for s in STRATA:
            rows = []
            for k in range(1, N_COVARIATES + 1):
                pct = [round(p, 1) if self.stratum_size[s] else None for p in self.pct(s, k)]
                rows.append({"k": k, "counts": list(self.counts[s][k]), "pct": pct})
            out.append({
                "scenario": self.scenario,
                "n": self.n,
                "stratum": f"|bias|>{self.bias_cutoff:g}" if s == "gt" else f"|bias|<={self.bias_cutoff:g}",
                "rows": rows,
                "stratum_size": self.stratum_size[s],
            })
        return out


def simulate_outcomes(spec: ScenarioSpec, start: int = 0, stop: int | None = None) -> list[ReplicateOutcome]:
    """Outcomes for replicate indices ``start..stop-1``; replicate ``i`` draws
    only from stream ``(spec.seed, i)``."""
    stop = spec.n_iter if stop is None else stop
    return [generate_replicate(spec, RngStream(spec.seed, i))[1] for i in range(start, stop)]


def _summarize_range(args):
    spec, start, stop = args
    return Table1Summary.from_outcomes(spec, simulate_outcomes(spec, start, stop))


def chunk_ranges(total: int, start: int, chunks: int):
    chunks = max(1, min(chunks, total - start)) if total > start else 1
    bounds = np.linspace(start, total, chunks + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def run_scenarios(spec: ScenarioSpec, start: int = 0, stop: int | None = None, workers: int = 1) -> Table1Summary:
    """Aggregate replicates ``start..stop-1`` into a :class:`Table1Summary`.

    The result depends only on ``spec`` and the range, never on ``workers``.
    """
    stop = spec.n_iter if stop is None else stop
    if workers <= 1:
        return _summarize_range((spec, start, stop))
    ranges = chunk_ranges(stop, start, workers * 4)
    empty = Table1Summary(spec.scenario, spec.n, spec.bias_cutoff, spec.alpha)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_summarize_range, [(spec, a, b) for a, b in ranges]))
    total = empty
    for part in parts:
        total = total + part
    return total
