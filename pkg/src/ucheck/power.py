"""Power of the test to detect confounding that fully explains an observed
exposure-outcome association.

Two covariates ``A1``, ``A2`` load on the exposure; an unmeasured ``U`` drives
both exposure and outcome with loading ``sqrt(gamma1)`` so that the whole
standardized association ``gamma1`` is confounding. Each replicate fits the
outcome on exposure, A1 and A2 and asks whether each covariate's confidence
interval excludes zero.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import BadParameter, NegativeResidualVariance
from .stats import RngStream, fit_ols, t_quantile


@dataclass(frozen=True)
class PowerSpec:
    n: int = 2562
    beta1: float = 0.22
    beta2: float = 0.17
    gamma1: float = 0.15
    rho_a: float = 0.0
    n_iter: int = 20_000
    seed: int = 0
    ci_level: float = 0.95

    def __post_init__(self):
        if self.n < 5:
            raise BadParameter("n must be at least 5")
        if self.n_iter < 1:
            raise BadParameter("n_iter must be positive")
        if not -1 < self.rho_a < 1:
            raise BadParameter("rho_a must lie in (-1, 1)")
        if not 0 < self.ci_level < 1:
            raise BadParameter("ci_level must lie in (0, 1)")
        if not 0 <= self.gamma1 < 1:
            raise BadParameter("gamma1 must lie in [0, 1)")
        if self.seed < 0:
            raise BadParameter("seed must be non-negative")
        if self.exposure_residual_variance < 0:
            raise NegativeResidualVariance(
                f"1 - Var[b1*A1 + b2*A2] - gamma1 = {self.exposure_residual_variance:.4g} < 0"
            )

    @property
    def systematic_variance(self) -> float:
        b1, b2 = self.beta1, self.beta2
        return b1 * b1 + b2 * b2 + 2 * self.rho_a * b1 * b2

    @property
    def exposure_residual_variance(self) -> float:
        return 1.0 - self.systematic_variance - self.gamma1

    def to_dict(self):
        return {
            "n": self.n,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "gamma1": self.gamma1,
            "rho_a": self.rho_a,
            "n_iter": self.n_iter,
            "seed": self.seed,
            "ci_level": self.ci_level,
            "critical_value": "student-t",
        }


@dataclass(frozen=True)
class PowerResult:
    spec: PowerSpec
    n_both: int
    n_at_least_one: int
    n_reject: tuple  # per covariate

    @property
    def prob_both(self) -> float:
        return self.n_both / self.spec.n_iter

    @property
    def prob_at_least_one(self) -> float:
        return self.n_at_least_one / self.spec.n_iter

    @property
    def reject_rates(self) -> tuple:
        return tuple(c / self.spec.n_iter for c in self.n_reject)

    def to_dict(self):
        return {
            "config": self.spec.to_dict(),
            "prob_both": self.prob_both,
            "prob_at_least_one": self.prob_at_least_one,
            "reject_rate_a1": self.reject_rates[0],
            "reject_rate_a2": self.reject_rates[1],
        }


def power_replicate(spec: PowerSpec, rng: RngStream) -> tuple[bool, bool]:
    """One simulated dataset; returns whether each covariate's CI excludes 0."""
    n = spec.n
    e1 = rng.standard_normal(n)
    e2 = rng.standard_normal(n)
    a1 = e1
    a2 = spec.rho_a * e1 + math.sqrt(1 - spec.rho_a**2) * e2
    u = rng.standard_normal(n)
    g = math.sqrt(spec.gamma1)
    exposure = spec.beta1 * a1 + spec.beta2 * a2 + g * u + rng.normal(0, math.sqrt(spec.exposure_residual_variance), n)
    outcome = g * u + rng.normal(0, math.sqrt(1 - spec.gamma1), n)
    fit = fit_ols(np.column_stack([exposure, a1, a2]), outcome, names=["exposure", "a1", "a2"])
    crit = t_quantile(spec.ci_level, fit.df)
    excl = np.abs(fit.coefficients[2:]) > crit * fit.standard_errors[2:]
    return bool(excl[0]), bool(excl[1])


def _count_range(args):
    spec, start, stop = args
    both = any_ = 0
    rej = [0, 0]
    for i in range(start, stop):
        d1, d2 = power_replicate(spec, RngStream(spec.seed, i))
        both += d1 and d2
        any_ += d1 or d2
        rej[0] += d1
        rej[1] += d2
    return both, any_, rej


def run_power(spec: PowerSpec, workers: int = 1) -> PowerResult:
    if workers <= 1:
        both, any_, rej = _count_range((spec, 0, spec.n_iter))
    else:
        bounds = np.linspace(0, spec.n_iter, workers * 4 + 1).astype(int)
        jobs = [(spec, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_count_range, jobs))
        both = sum(p[0] for p in parts)
        any_ = sum(p[1] for p in parts)
        rej = [sum(p[2][0] for p in parts), sum(p[2][1] for p in parts)]
    return PowerResult(spec, both, any_, tuple(rej))


def power_sweep(base: PowerSpec, rhos, workers: int = 1) -> list[PowerResult]:
    return [run_power(replace(base, rho_a=r), workers) for r in rhos]
