import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_coefficients, scenario_data, simulate_linear_gaussian
from ucheck import fixtures as F
from ucheck.engine import (
    TestConfig,
    Verdict,
    build_records,
    classify_faithfulness,
    evaluate_conditions,
    faithfulness_probe,
    negative_control_check,
    run_test,
)
from ucheck.errors import BadParameter, DropNotSubset, EmptyCandidateSet, KeyMismatch, TooFewRows, UnknownVariable
from ucheck.graph import OracleVerdict, random_assumption_dag, theorem1_oracle
from ucheck.stats import Dataset, RngStream

TO_DATA = {
    OracleVerdict.VALID_CONFIRMED: Verdict.VALID_ADJUSTMENT_SET,
    OracleVerdict.INVALID_OR_MINIMAL: Verdict.INVALID_OR_MINIMAL,
    OracleVerdict.NO_ELIGIBLE_COVARIATE: Verdict.NO_ELIGIBLE_COVARIATE,
}


# --- decision logic ----------------------------------------------------------


def test_cohort_models_1_and_2():
    verdict, witnesses = evaluate_conditions(F.TABLE2_MODEL1, F.TABLE2_MODEL2)
    assert verdict is Verdict.VALID_ADJUSTMENT_SET
    assert set(witnesses) == {"maternal height", "genetic score", "birthweight"}
    rec = {r.covariate: r for r in build_records(F.TABLE2_MODEL1, F.TABLE2_MODEL2, TestConfig())}
    assert not rec["maternal age"].eligible and not rec["maternal age"].passes_ii


def test_cohort_probes():
    witnesses = ["maternal height", "genetic score", "birthweight"]
    both = classify_faithfulness(witnesses, F.TABLE2_MODEL3, F.TABLE2_MODEL4)
    assert {r.covariate for r in both if r.suspect} == {"birthweight"}
    # each model alone gives the same classification
    assert {r.covariate for r in classify_faithfulness(witnesses, F.TABLE2_MODEL3, {}) if r.suspect} == {"birthweight"}
    assert {r.covariate for r in classify_faithfulness(witnesses, {}, F.TABLE2_MODEL4) if r.suspect} == {"birthweight"}


def test_trivial_verdicts():
    assert evaluate_conditions({"a": 0.3, "b": 0.9}, {"a": 0.0, "b": 0.0})[0] is Verdict.NO_ELIGIBLE_COVARIATE
    assert evaluate_conditions({"a": 0.01, "b": 0.02}, {"a": 0.01, "b": 0.001})[0] is Verdict.INVALID_OR_MINIMAL
    with pytest.raises(KeyMismatch):
        evaluate_conditions({"a": 0.01}, {"b": 0.5})


def test_ineligible_p_y_ignored():
    verdict, witnesses = evaluate_conditions({"a": 0.5, "b": 0.01}, {"a": 0.9, "b": 0.001})
    assert verdict is Verdict.INVALID_OR_MINIMAL and witnesses == ()


def test_config_validation():
    with pytest.raises(BadParameter):
        TestConfig(alpha_dep=0)
    with pytest.raises(BadParameter):
        TestConfig(alpha_indep=1)
    # asymmetric thresholds are allowed either way
    TestConfig(alpha_dep=0.1, alpha_indep=0.01)


pvals = st.floats(0, 1, allow_nan=False)


@settings(max_examples=300)
@given(st.lists(st.tuples(pvals, pvals), min_size=1, max_size=6), st.floats(0.001, 0.5), st.floats(0.001, 0.5),
       st.floats(0.0, 0.4))
def test_threshold_monotonicity(pairs, a_dep, a_ind, bump):
    p_x = {f"c{i}": p for i, (p, _) in enumerate(pairs)}
    p_y = {f"c{i}": q for i, (_, q) in enumerate(pairs)}
    base, _ = evaluate_conditions(p_x, p_y, TestConfig(a_dep, a_ind))
    # raising alpha_indep can only move Valid -> InvalidOrMinimal
    higher_ind, _ = evaluate_conditions(p_x, p_y, TestConfig(a_dep, min(a_ind + bump, 0.99)))
    if higher_ind is not base:
        assert (base, higher_ind) == (Verdict.VALID_ADJUSTMENT_SET, Verdict.INVALID_OR_MINIMAL)
    # raising alpha_dep can only grow the eligible set
    lo = {r.covariate for r in build_records(p_x, p_y, TestConfig(a_dep, a_ind)) if r.eligible}
    hi = {r.covariate for r in build_records(p_x, p_y, TestConfig(min(a_dep + bump, 0.99), a_ind)) if r.eligible}
    assert lo <= hi


@settings(max_examples=100)
@given(st.lists(st.tuples(pvals, pvals), min_size=1, max_size=6))
def test_record_invariants(pairs):
    p_x = {f"c{i}": p for i, (p, _) in enumerate(pairs)}
    p_y = {f"c{i}": q for i, (_, q) in enumerate(pairs)}
    cfg = TestConfig()
    recs = build_records(p_x, p_y, cfg)
    for r in recs:
        assert r.eligible == (r.p_x < cfg.alpha_dep)
        assert not r.passes_ii or r.eligible
    verdict, witnesses = evaluate_conditions(p_x, p_y, cfg)
    assert (verdict is Verdict.VALID_ADJUSTMENT_SET) == bool(witnesses)
    assert (verdict is Verdict.NO_ELIGIBLE_COVARIATE) == (not any(r.eligible for r in recs))


# --- data-level test ---------------------------------------------------------


def test_run_test_report_and_equivalence():
    data = scenario_data(RngStream(1), 2000, with_u=True, confounders=False)
    rep = run_test(data, "x", "y", ["z1", "z2", "z3"])
    p_x = {c: rep.model1.p(c) for c in rep.covariates}
    p_y = {c: rep.model2.p(c) for c in rep.covariates}
    assert evaluate_conditions(p_x, p_y) == (rep.verdict, rep.witnesses)
    assert rep.n == 2000
    assert set(rep.exposure_effect) == {"term", "estimate", "se", "ci", "p"}
    d = rep.to_dict()
    assert d["verdict"] == rep.verdict.value and len(d["records"]) == 3


def test_scenario2_dgp_invalid_or_minimal():
    hits = 0
    for i in range(200):
        data = scenario_data(RngStream(21, i), 20_000, with_u=False, confounders=True)
        hits += run_test(data, "x", "y", ["z1", "z2", "z3"]).verdict is Verdict.INVALID_OR_MINIMAL
    assert hits >= 180


def test_instrument_graph_without_confounder_finds_witness():
    dag = F.supp_figure1("a_no_u")
    coef = {e: 0.5 for e in dag.edges}
    coef[("X", "Y")] = 0.3
    hits = 0
    for i in range(200):
        data = simulate_linear_gaussian(dag, coef, 20_000, RngStream(22, i))
        rep = run_test(data, "X", "Y", ["Z", "C"])
        hits += rep.verdict is Verdict.VALID_ADJUSTMENT_SET and "Z" in rep.witnesses
    assert hits >= 180


def test_null_covariates_no_eligible_rate():
    # P(no eligible) = 0.95^3 when covariates ignore x
    hits = 0
    reps = 1000
    for i in range(reps):
        rng = RngStream(23, i)
        n = 200
        z = rng.standard_normal((n, 3))
        x = rng.standard_normal(n)
        y = x + rng.standard_normal(n)
        data = Dataset({"x": x, "y": y, "a": z[:, 0], "b": z[:, 1], "c": z[:, 2]})
        hits += run_test(data, "x", "y", ["a", "b", "c"]).verdict is Verdict.NO_ELIGIBLE_COVARIATE
    expected = 0.95**3
    se = np.sqrt(expected * (1 - expected) / reps)
    assert abs(hits / reps - expected) < 4 * se


def test_redundant_covariate_calibration():
    # C confounds; Z only causes X, so {Z, C} is valid and Z is redundant.
    # Z's outcome-model p-value should reject at the nominal rate.
    rejects = 0
    reps = 2000
    for i in range(reps):
        rng = RngStream(24, i)
        n = 5000
        c = rng.standard_normal(n)
        z = rng.standard_normal(n)
        x = 0.5 * z + 0.5 * c + rng.standard_normal(n)
        y = 0.3 * x + 0.5 * c + rng.standard_normal(n)
        rep = run_test(Dataset({"x": x, "y": y, "z": z, "c": c}), "x", "y", ["z", "c"])
        rejects += rep.record("z").p_y < 0.05
    assert 0.03 <= rejects / reps <= 0.07


def test_run_test_errors():
    data = scenario_data(RngStream(2), 50, with_u=False, confounders=True)
    with pytest.raises(EmptyCandidateSet):
        run_test(data, "x", "y", [])
    with pytest.raises(UnknownVariable):
        run_test(data, "x", "y", ["nope"])
    with pytest.raises(BadParameter):
        run_test(data, "x", "y", ["x"])
    small = Dataset({k: v[:5] for k, v in data.columns.items()})
    with pytest.raises(TooFewRows):
        run_test(small, "x", "y", ["z1", "z2", "z3"])


def test_missing_rows_dropped():
    data = scenario_data(RngStream(3), 300, with_u=False, confounders=True)
    cols = dict(data.columns)
    cols["z1"] = cols["z1"].copy()
    cols["z1"][:10] = np.nan
    rep = run_test(Dataset(cols), "x", "y", ["z1", "z2"])
    assert rep.n == 290


def test_standardization_leaves_verdict_unchanged():
    data = scenario_data(RngStream(4), 3000, with_u=True, confounders=False)
    scaled = Dataset({k: 7.0 * v - 3.0 for k, v in data.columns.items()})
    a = run_test(data, "x", "y", ["z1", "z2", "z3"])
    b = run_test(scaled, "x", "y", ["z1", "z2", "z3"])
    assert a.verdict is b.verdict
    assert np.allclose([r.p_y for r in a.records], [r.p_y for r in b.records], atol=1e-10)


# --- oracle / data agreement -------------------------------------------------


def _agreement(seed, config):
    agree = 0
    for i in range(500):
        rng = RngStream(seed, i)
        n_cov = 1 + int(rng.random() * 4)
        n_lat = int(rng.random() * 3)
        dag, x, y, covs = random_assumption_dag(rng, n_cov, n_lat, 0.3)
        oracle = theorem1_oracle(dag, x, y, covs)
        data = simulate_linear_gaussian(dag, random_coefficients(dag, rng), 50_000, rng)
        agree += run_test(data, x, y, covs, config).verdict is TO_DATA[oracle.verdict]
    return agree / 500


def test_oracle_data_agreement():
    # 0.01 thresholds: at 0.05 the per-covariate type-I rate alone costs
    # several percent on instances with many null covariates
    assert _agreement(4242, TestConfig(0.01, 0.01)) >= 0.95


def test_oracle_data_agreement_default_thresholds():
    assert _agreement(4243, TestConfig()) >= 0.90


# --- probes ------------------------------------------------------------------


def test_probe_drop_empty_equals_model2():
    data = scenario_data(RngStream(5), 1000, with_u=False, confounders=True)
    covs = ["z1", "z2", "z3"]
    rep = run_test(data, "x", "y", covs)
    probe = faithfulness_probe(data, "x", "y", covs, [], report=rep)
    assert np.array_equal(probe.restricted_fit.coefficients, rep.model2.coefficients)
    assert np.array_equal(probe.restricted_fit.p_values, rep.model2.p_values)


def test_probe_clears_witness_when_confounder_dropped():
    # W only causes X and C confounds. Dropping C opens W -> X <- C -> Y
    # given X, so W becomes associated with Y and is not suspect.
    rng = RngStream(6)
    n = 20_000
    c = rng.standard_normal(n)
    w = rng.standard_normal(n)
    x = 0.5 * w + 0.5 * c + rng.standard_normal(n)
    y = 0.5 * c + rng.standard_normal(n)
    data = Dataset({"x": x, "y": y, "w": w, "c": c})
    rep = run_test(data, "x", "y", ["w", "c"])
    assert "w" in rep.witnesses
    probe = faithfulness_probe(data, "x", "y", ["w", "c"], ["c"], report=rep)
    assert probe.suspects == ()
    with pytest.raises(DropNotSubset):
        faithfulness_probe(data, "x", "y", ["w", "c"], ["q"])


def test_probe_flags_cancelling_paths():
    # W -> Y directly and W -> U -> Y with opposite signs: W looks
    # independent of Y given X, so it passes as a witness although
    # dropping it leaves W-driven confounding. The pairwise fit cannot
    # undo the cancellation, so W is flagged.
    rng = RngStream(16)
    n = 20_000
    w = rng.standard_normal(n)
    u = w + rng.standard_normal(n)
    x = 0.5 * w + rng.standard_normal(n)
    y = 0.3 * x + 0.4 * w - 0.4 * u + 0.4 * rng.standard_normal(n)
    data = Dataset({"x": x, "y": y, "w": w})
    rep = run_test(data, "x", "y", ["w"])
    assert rep.witnesses == ("w",)
    probe = faithfulness_probe(data, "x", "y", ["w"], [], report=rep)
    assert probe.suspects == ("w",)


def test_probe_report_shape():
    data = scenario_data(RngStream(7), 500, with_u=False, confounders=True)
    probe = faithfulness_probe(data, "x", "y", ["z1", "z2", "z3"], ["z1"])
    d = probe.to_dict()
    assert set(d) == {"dropped", "records", "faithfulness_suspects", "exposure_effect_restricted", "config"}


# --- negative control --------------------------------------------------------


def test_negative_control_shape_binary():
    rng = RngStream(8)
    n = 3000
    a = rng.standard_normal(n)
    x = a + rng.standard_normal(n)
    nco = (a + rng.standard_normal(n) > 0).astype(float)
    res = negative_control_check(Dataset({"x": x, "nco": nco, "a": a}), "x", "nco", ["a"])
    assert res["binary_control"] is True
    for key in ("unadjusted", "adjusted"):
        lo, hi = res[key]["ci"]
        assert lo < res[key]["estimate"] < hi
    assert abs(res["adjusted"]["estimate"]) < abs(res["unadjusted"]["estimate"])


def test_negative_control_null_coverage():
    covered = 0
    reps = 400
    for i in range(reps):
        rng = RngStream(9, i)
        n = 300
        a = rng.standard_normal(n)
        x = a + rng.standard_normal(n)
        nco = rng.standard_normal(n)
        res = negative_control_check(Dataset({"x": x, "nco": nco, "a": a}), "x", "nco", ["a"])
        lo, hi = res["unadjusted"]["ci"]
        covered += lo <= 0 <= hi
    assert abs(covered / reps - 0.95) < 0.035


def test_negative_control_adjustment_removes_confounding():
    shrunk = 0
    for i in range(200):
        rng = RngStream(10, i)
        n = 2000
        a = rng.standard_normal(n)
        x = 0.6 * a + rng.standard_normal(n)
        nco = 0.6 * a + rng.standard_normal(n)
        res = negative_control_check(Dataset({"x": x, "nco": nco, "a": a}), "x", "nco", ["a"])
        shrunk += abs(res["adjusted"]["estimate"]) < abs(res["unadjusted"]["estimate"])
    assert shrunk >= 180
