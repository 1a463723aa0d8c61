"""Related tests: exogenous-covariate falsification, Pearl's operational test
for stable no-confounding, and Entner et al.'s covariate-selection rules."""

from __future__ import annotations

import enum
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from itertools import combinations

from .engine import TestConfig, _fit, prepare
from .errors import BadParameter, TooLarge
from .graph import Dag, d_separated, descendants
from .stats import Dataset


class FalsificationVerdict(str, enum.Enum):
    ADJUSTMENT_SET_INVALID = "AdjustmentSetInvalid"
    NOT_FALSIFIED = "NotFalsified"
    INELIGIBLE = "Ineligible"


def exogenous_falsification(data: Dataset, x: str, y: str, z_exog: str, covariates: Sequence[str],
                            config: TestConfig | None = None) -> dict:
    """Use a covariate known to be exogenous to falsify ``covariates``.

    An exogenous ``z`` cannot be a collider on a backdoor path, so its
    association with ``y`` given ``x`` and ``covariates`` can only come from an
    open backdoor path that ``covariates`` leave unblocked. The verdict is
    about ``covariates`` alone, not ``covariates`` plus ``z``.
    """
    config = config or TestConfig()
    covariates = list(dict.fromkeys(covariates))
    if z_exog in covariates:
        raise BadParameter("the exogenous covariate must not be in the adjustment set")
    std = prepare(data, [x, y, z_exog, *covariates], len(covariates) + 4)
    p_zx = _fit(std, x, [z_exog, *covariates]).p(z_exog)
    p_zy = _fit(std, y, [x, z_exog, *covariates]).p(z_exog)
    if p_zx >= config.alpha_dep:
        verdict = FalsificationVerdict.INELIGIBLE
    elif p_zy < config.alpha_indep:
        verdict = FalsificationVerdict.ADJUSTMENT_SET_INVALID
    else:
        verdict = FalsificationVerdict.NOT_FALSIFIED
    return {
        "exogenous": z_exog,
        "covariates": covariates,
        "p_zx": p_zx,
        "p_zy": p_zy,
        "verdict": verdict,
        "config": config.to_dict(),
    }


class PearlVerdict(str, enum.Enum):
    # deliberately no member asserting unconfoundedness
    NOT_STABLY_UNCONFOUNDED = "NotStablyUnconfounded"
    INCONCLUSIVE = "Inconclusive"


def pearl_stability_test(data: Dataset, x: str, y: str, m: str, config: TestConfig | None = None,
                         m_not_barren_proxy: bool = False) -> dict:
    """Marginal check that ``m`` violates both "m independent of x" and
    "m independent of y given x".

    Valid only if ``m`` is not a barren proxy; the caller must assert this.
    A pass never certifies unconfoundedness.
    """
    config = config or TestConfig()
    if not m_not_barren_proxy:
        raise BadParameter("the test requires asserting that m is not a barren proxy")
    if m in (x, y):
        raise BadParameter("m must differ from exposure and outcome")
    std = prepare(data, [x, y, m], 4)
    p_mx = _fit(std, x, [m]).p(m)
    p_my_x = _fit(std, y, [x, m]).p(m)
    if p_mx < config.alpha_dep and p_my_x < config.alpha_dep:
        verdict = PearlVerdict.NOT_STABLY_UNCONFOUNDED
    else:
        verdict = PearlVerdict.INCONCLUSIVE
    return {
        "m": m,
        "p_mx": p_mx,
        "p_my_given_x": p_my_x,
        "verdict": verdict,
        "assumptions": ["m is not a barren proxy (asserted by caller)"],
        "config": config.to_dict(),
    }


# ---------------------------------------------------------------------------
# Entner et al.

X_CAUSES_Y = "X causes Y"
X_NOT_CAUSES_Y = "X does not cause Y"


@dataclass(frozen=True)
class EntnerFiring:
    rule: str  # "1", "2i" or "2ii"
    w: str | None
    conditioning: tuple  # D for rules 1 and 2ii, K for 2i
    conclusion: str

    def to_dict(self):
        return {"rule": self.rule, "w": self.w, "set": list(self.conditioning), "conclusion": self.conclusion}


@dataclass(frozen=True)
class EntnerResult:
    firings: tuple
    mode: str

    @property
    def conclusions(self) -> set:
        return {f.conclusion for f in self.firings}

    @property
    def contradictory(self) -> bool:
        return len(self.conclusions) > 1

    def valid_sets(self) -> list:
        return [f.conditioning for f in self.firings if f.rule == "1"]

    def to_dict(self):
        return {
            "mode": self.mode,
            "firings": [f.to_dict() for f in self.firings],
            "conclusions": sorted(self.conclusions),
            "contradictory": self.contradictory,
        }


class _OracleCI:
    def __init__(self, dag: Dag):
        self.dag = dag

    def independent(self, a, b, cond):
        return d_separated(self.dag, {a}, {b}, cond)

    def dependent(self, a, b, cond):
        return not d_separated(self.dag, {a}, {b}, cond)


class _RegressionCI:
    """Regression t-test for ``a`` in ``b ~ a + cond``."""

    def __init__(self, data: Dataset, variables, config: TestConfig):
        self.data = prepare(data, variables, len(variables) + 2)
        self.config = config
        self._cache = {}

    def p(self, a, b, cond):
        key = (a, b, frozenset(cond))
        if key not in self._cache:
            self._cache[key] = _fit(self.data, b, [a, *sorted(cond)]).p(a)
        return self._cache[key]

    def independent(self, a, b, cond):
        return self.p(a, b, cond) >= self.config.alpha_indep

    def dependent(self, a, b, cond):
        return self.p(a, b, cond) < self.config.alpha_dep


def _subsets(items):
    for r in range(len(items) + 1):
        yield from combinations(items, r)


def entner_rules(source, x: str, y: str, candidates: Sequence[str], config: TestConfig | None = None,
                 subset_cap: int = 12) -> EntnerResult:
    """Enumerate every firing of Entner et al.'s two rules.

    ``source`` is a :class:`Dag` (d-separation answers independence queries) or
    a :class:`Dataset` (regression t-tests with the configured thresholds).
    Rule 1: ``w`` depends on ``y`` given ``D`` but not given ``D`` plus ``x``
    means ``x`` causes ``y`` and ``D`` is a valid adjustment set. Rule 2:
    ``x`` independent of ``y`` given some ``K``, or ``w`` dependent on ``x`` but
    independent of ``y`` given ``D``, means ``x`` does not cause ``y``.
    Contradictory firings are reported with a warning, never suppressed.
    """
    config = config or TestConfig()
    candidates = list(dict.fromkeys(candidates))
    if len(candidates) > subset_cap:
        raise TooLarge(f"{len(candidates)} candidates exceeds subset_cap={subset_cap}")
    if x in candidates or y in candidates:
        raise BadParameter("exposure and outcome cannot be candidates")
    if isinstance(source, Dag):
        source.check(x, y, *candidates)
        ci, mode = _OracleCI(source), "oracle"
    elif isinstance(source, Dataset):
        ci, mode = _RegressionCI(source, [x, y, *candidates], config), "data"
    else:
        raise TypeError("source must be a Dag or a Dataset")

    firings = []
    for w in candidates:
        others = [c for c in candidates if c != w]
        for d in _subsets(others):
            if ci.dependent(w, y, d) and ci.independent(w, y, (*d, x)):
                firings.append(EntnerFiring("1", w, d, X_CAUSES_Y))
    for k in _subsets(candidates):
        if ci.independent(x, y, k):
            firings.append(EntnerFiring("2i", None, k, X_NOT_CAUSES_Y))
    for w in candidates:
        others = [c for c in candidates if c != w]
        for d in _subsets(others):
            if ci.dependent(w, x, d) and ci.independent(w, y, d):
                firings.append(EntnerFiring("2ii", w, d, X_NOT_CAUSES_Y))
    result = EntnerResult(tuple(firings), mode)
    if result.contradictory:
        warnings.warn("Entner rules fired with contradictory conclusions", RuntimeWarning, stacklevel=2)
    return result


def causes(dag: Dag, x, y) -> bool:
    return y in descendants(dag, x)
