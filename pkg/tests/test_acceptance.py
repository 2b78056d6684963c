"""Acceptance suite: one test per release criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. The property suites pin >= 1000 derandomized cases each and their
cumulative runtime is asserted at the end of the module.
"""

from __future__ import annotations

import dataclasses
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from quantrisk import datasets
from quantrisk.assessment import (
    ImpactOverride,
    StepOverride,
    WhatIfOverride,
    assess_portfolio,
    what_if,
)
from quantrisk.chain import (
    ChainStep,
    ContextProfile,
    Impact,
    KillChainPhase,
    build_chain,
    build_portfolio,
    load_portfolio,
    portfolio_to_doc,
)
from quantrisk.scoring import (
    AggregationMethod,
    AssessmentConfig,
    LikelihoodBounds,
    adjust,
    aggregate,
    default_risk_matrix,
    discretize,
    global_bounds,
    risk_lookup,
    step_likelihood,
)

GOLDEN_DIR = Path(__file__).parent / "golden"
CATALOG_PATH = str(datasets.pns_catalog_path())
PORTFOLIO_PATH = str(datasets.pns_portfolio_path())

MAX_CONFIG = AssessmentConfig(method=AggregationMethod.MAXIMUM, global_multiplier=1.0,
                              acceptance_threshold=8)

# Table of the nine fixture steps: (threat, exposure, multiplier)
PNS_STEPS = [(1, 2, 1.0), (2, 2, 1.0), (3, 2, 1.5), (2, 2, 1.0), (2, 3, 1.2),
             (2, 4, 0.8), (4, 4, 1.5), (3, 2, 1.0), (3, 2, 1.0)]

_PROPERTY_SECONDS: dict[str, float] = {}
PROPERTY_SETTINGS = settings(max_examples=1000, derandomize=True, deadline=None,
                             suppress_health_check=[HealthCheck.filter_too_much,
                                                    HealthCheck.too_slow])


def _ok(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


def _timed_property(name: str, runner) -> None:
    start = time.perf_counter()
    runner()
    _PROPERTY_SECONDS[name] = time.perf_counter() - start
    _ok(f"property: {name} (>= 1000 cases)")


# ---------------------------------------------------------------------------
# criterion 1: worked-example reproduction

def test_pns_worked_example_reproduction(pns_portfolio, pns_catalog):
    start = time.perf_counter()

    results = {
        method: assess_portfolio(pns_portfolio, pns_catalog,
                                 dataclasses.replace(MAX_CONFIG, method=method))
        for method in AggregationMethod
    }
    scenarios = {m: r.scenario("pns-qkd-link") for m, r in results.items()}

    expected_exact = [(t * e) * m for t, e, m in PNS_STEPS]
    expected_decimals = [2.0, 4.0, 9.0, 4.0, 7.2, 6.4, 24.0, 6.0, 6.0]
    got = list(scenarios[AggregationMethod.MAXIMUM].step_likelihoods)
    assert got == expected_exact
    assert got == pytest.approx(expected_decimals, abs=1e-9)

    assert scenarios[AggregationMethod.MAXIMUM].raw_likelihood == 24.0
    assert scenarios[AggregationMethod.AVERAGE].raw_likelihood \
        == pytest.approx(7.6222, abs=1e-3)
    assert scenarios[AggregationMethod.GEOMETRIC_MEAN].raw_likelihood \
        == pytest.approx(1.217, abs=5e-3)

    p_succ = scenarios[AggregationMethod.GEOMETRIC_MEAN].success_probability
    assert p_succ == pytest.approx(3.006e-6, rel=1e-3)
    assert p_succ == pytest.approx(3.0e-6, rel=0.05)

    assert [scenarios[m].discrete_likelihood for m in (
        AggregationMethod.MAXIMUM, AggregationMethod.AVERAGE,
        AggregationMethod.GEOMETRIC_MEAN)] == [4, 1, 1]
    assert (scenarios[AggregationMethod.MAXIMUM].risk_value,
            scenarios[AggregationMethod.MAXIMUM].risk_band.value) == (20, "High")
    for method in (AggregationMethod.AVERAGE, AggregationMethod.GEOMETRIC_MEAN):
        assert (scenarios[method].risk_value, scenarios[method].risk_band.value) \
            == (5, "Medium")

    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _ok(f"PNS worked-example reproduction ({elapsed:.3f}s)")


# ---------------------------------------------------------------------------
# criterion 2: bounds reproduction and load-bearing

def test_global_bounds_reproduction_and_load_bearing(pns_portfolio, pns_catalog):
    start = time.perf_counter()

    bounds = global_bounds(pns_portfolio, MAX_CONFIG)
    assert bounds.lower == pytest.approx(0.8, abs=1e-12)
    assert bounds.upper == 37.5

    adjusted = {
        method: assess_portfolio(pns_portfolio, pns_catalog,
                                 dataclasses.replace(MAX_CONFIG, method=method))
        .scenario("pns-qkd-link").adjusted_likelihood
        for method in AggregationMethod
    }
    baseline = {m: discretize(v, bounds) for m, v in adjusted.items()}
    assert baseline == {AggregationMethod.MAXIMUM: 4, AggregationMethod.AVERAGE: 1,
                        AggregationMethod.GEOMETRIC_MEAN: 1}

    for factor in (1.1, 0.9):
        perturbed = LikelihoodBounds(bounds.lower * factor, bounds.upper * factor)
        relabeled = {m: discretize(v, perturbed) for m, v in adjusted.items()}
        assert relabeled != baseline, f"bounds x{factor} left every discretized L unchanged"

    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _ok(f"global bounds (0.8, 37.5) reproduced and load-bearing ({elapsed:.3f}s)")


# ---------------------------------------------------------------------------
# criterion 3: Monte-Carlo oracle for the success probability

def test_monte_carlo_success_probability_oracle():
    start = time.perf_counter()
    trials = 10_000_000

    probabilities = np.array([min(1.0, (t * e) * m / 25.0) for t, e, m in PNS_STEPS])
    analytic = aggregate([step_likelihood(t, e, m) for t, e, m in PNS_STEPS],
                         AggregationMethod.GEOMETRIC_MEAN).success_probability

    rng = np.random.default_rng(20250811)
    successes = 0
    chunk = 1_000_000
    for _ in range(trials // chunk):
        draws = rng.random((chunk, len(probabilities)))
        successes += int(np.all(draws < probabilities, axis=1).sum())
    observed = successes / trials

    standard_error = np.sqrt(analytic * (1 - analytic) / trials)
    assert abs(observed - analytic) <= 3 * standard_error, (
        f"simulated {observed:.3e} vs analytic {analytic:.3e} "
        f"(3 SE = {3 * standard_error:.3e})")

    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    _ok(f"Monte-Carlo oracle: {successes} successes / 1e7 trials, "
        f"{observed:.3e} vs {analytic:.3e} within 3 SE ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# criterion 4: property suites (>= 1000 random cases each, < 60 s total)

multipliers = st.integers(min_value=1, max_value=40).map(lambda k: k / 20)
ordinals = st.integers(min_value=1, max_value=5)
step_tuples = st.tuples(ordinals, ordinals, multipliers)
step_lists = st.lists(step_tuples, min_size=1, max_size=10)


def _values(tuples):
    return [step_likelihood(t, e, m) for t, e, m in tuples]


def test_property_domain_closure():
    @PROPERTY_SETTINGS
    @given(step_lists)
    def run(tuples):
        values = _values(tuples)
        for v in values:
            assert 0 < v <= 50
        for method in AggregationMethod:
            outcome = aggregate(values, method)
            assert outcome.raw > 0
            if method is AggregationMethod.GEOMETRIC_MEAN:
                assert outcome.raw <= 5
                assert 0 <= outcome.success_probability <= 1
        bounds = LikelihoodBounds(min(m for _, _, m in tuples),
                                  25 * max(m for _, _, m in tuples))
        for method in AggregationMethod:
            assert 1 <= discretize(aggregate(values, method).raw, bounds) <= 5

    _timed_property("domain closure", run)


def test_property_max_at_least_avg():
    @PROPERTY_SETTINGS
    @given(step_lists)
    def run(tuples):
        values = _values(tuples)
        assert aggregate(values, AggregationMethod.MAXIMUM).raw \
            >= aggregate(values, AggregationMethod.AVERAGE).raw

    _timed_property("max >= avg", run)


@pytest.mark.parametrize("method", list(AggregationMethod))
def test_property_monotonicity(method):
    fixed_bounds = LikelihoodBounds(0.05, 50.0)
    config = AssessmentConfig(method=method, global_multiplier=1.0)

    @PROPERTY_SETTINGS
    @given(step_lists, st.data())
    def run(tuples, data):
        index = data.draw(st.integers(0, len(tuples) - 1))
        threat, exposure, multiplier = tuples[index]
        field = data.draw(st.sampled_from(["threat", "exposure", "multiplier"]))
        if field == "threat":
            assume(threat < 5)
            bumped = (data.draw(st.integers(threat + 1, 5)), exposure, multiplier)
        elif field == "exposure":
            assume(exposure < 5)
            bumped = (threat, data.draw(st.integers(exposure + 1, 5)), multiplier)
        else:
            assume(multiplier < 2.0)
            bumped = (threat, exposure,
                      data.draw(st.integers(int(multiplier * 20) + 1, 40)) / 20)

        before = _values(tuples)
        after = _values(tuples[:index] + [bumped] + tuples[index + 1:])

        raw_before = aggregate(before, method).raw
        raw_after = aggregate(after, method).raw
        assert raw_after >= raw_before
        adj_before, adj_after = adjust(raw_before, config), adjust(raw_after, config)
        assert adj_after >= adj_before
        assert discretize(adj_after, fixed_bounds) >= discretize(adj_before, fixed_bounds)

    _timed_property(f"monotonicity in T/E/m ({method.value})", run)


def test_property_permutation_invariance():
    @PROPERTY_SETTINGS
    @given(step_lists, st.sampled_from(list(AggregationMethod)), st.data())
    def run(tuples, method, data):
        values = _values(tuples)
        shuffled = data.draw(st.permutations(values))
        assert aggregate(values, method) == aggregate(shuffled, method)

    _timed_property("permutation invariance", run)


@st.composite
def _scale_invariance_inputs(draw, clamp_free: bool):
    if clamp_free:
        # keep every step likelihood below 25 before and after scaling
        tuples = draw(st.lists(st.tuples(ordinals, ordinals,
                                         st.integers(1, 16).map(lambda k: k / 20)),
                               min_size=1, max_size=8))
        max_value = max(_values(tuples))
        global_multiplier = draw(st.integers(2, 24).map(lambda k: k / 16))  # <= 1.5
    else:
        tuples = draw(step_lists)
        max_value = None
        global_multiplier = draw(st.integers(1, 32).map(lambda k: k / 16))  # <= 2.0
    max_m = max(m for _, _, m in tuples)
    lo = global_multiplier / 2
    hi = 2.0 / max_m
    if clamp_free:
        hi = min(hi, 24.5 / max_value)
    assume(lo < hi)
    c = draw(st.floats(min_value=lo, max_value=hi, exclude_min=True,
                       allow_nan=False, allow_infinity=False))
    return tuples, global_multiplier, c


def _discrete_for(tuples, global_multiplier, method):
    chain = build_chain("c", "c",
                        [ChainStep("t", KillChainPhase.FINDING, t, e, m) for t, e, m in tuples],
                        Impact(level=1))
    portfolio = build_portfolio(ContextProfile(), "v", [chain])
    config = AssessmentConfig(method=method, global_multiplier=global_multiplier)
    bounds = global_bounds(portfolio, config)
    adjusted = adjust(aggregate(_values(tuples), method).raw, config)
    return discretize(adjusted, bounds, epsilon=config.boundary_epsilon)


def _scaled(tuples, c):
    return [(t, e, m * c) for t, e, m in tuples]


def test_property_scale_invariance_max_avg():
    @PROPERTY_SETTINGS
    @given(_scale_invariance_inputs(clamp_free=False),
           st.sampled_from([AggregationMethod.MAXIMUM, AggregationMethod.AVERAGE]))
    def run(inputs, method):
        tuples, global_multiplier, c = inputs
        scaled = _scaled(tuples, c)
        assume(all(0 < m <= 2.0 for _, _, m in scaled))
        assume(0 < global_multiplier / c <= 2.0)
        assert _discrete_for(tuples, global_multiplier, method) \
            == _discrete_for(scaled, global_multiplier / c, method)

    _timed_property("scale invariance (max/avg)", run)


def test_property_scale_invariance_geom_unclamped():
    @PROPERTY_SETTINGS
    @given(_scale_invariance_inputs(clamp_free=True))
    def run(inputs):
        tuples, global_multiplier, c = inputs
        scaled = _scaled(tuples, c)
        assume(all(0 < m <= 2.0 for _, _, m in scaled))
        assume(0 < global_multiplier / c <= 2.0)
        assume(all(v < 25 for v in _values(tuples)))
        assume(all(v < 25 for v in _values(scaled)))
        method = AggregationMethod.GEOMETRIC_MEAN
        assert _discrete_for(tuples, global_multiplier, method) \
            == _discrete_for(scaled, global_multiplier / c, method)

    _timed_property("scale invariance (geom, no clamping)", run)


def test_matrix_value_is_product_on_all_cells():
    matrix = default_risk_matrix()
    for likelihood in range(1, 6):
        for impact in range(1, 6):
            assert risk_lookup(likelihood, impact, matrix).value == likelihood * impact
    _ok("matrix value = L x I on all 25 cells")


_technique_ids = st.sampled_from([
    "collect-module-info", "collect-channel-info", "develop-pns-apparatus",
    "develop-cyber-tools", "eavesdrop-classical-channel", "tap-fibre-optic-cable",
    "photon-number-splitting", "post-process-quantum-data", "abuse-acquired-key",
])


@st.composite
def _portfolio_and_overrides(draw):
    chain_count = draw(st.integers(1, 3))
    chains = []
    for i in range(chain_count):
        phases = sorted(draw(st.lists(st.sampled_from(list(KillChainPhase)),
                                      min_size=1, max_size=5)),
                        key=lambda p: p.rank)
        steps = [ChainStep(draw(_technique_ids), phase, draw(ordinals), draw(ordinals),
                           draw(multipliers))
                 for phase in phases]
        chains.append(build_chain(f"chain-{i}", f"chain {i}", steps,
                                  Impact(level=draw(ordinals))))
    portfolio = build_portfolio(ContextProfile(), "1.0.0", chains)

    overrides = []
    for _ in range(draw(st.integers(0, 4))):
        chain = draw(st.sampled_from(chains))
        overrides.append(StepOverride(
            chain_id=chain.id,
            step_index=draw(st.integers(0, len(chain.steps) - 1)),
            threat=draw(st.one_of(st.none(), ordinals)),
            exposure=draw(st.one_of(st.none(), ordinals)),
            multiplier=draw(st.one_of(st.none(), multipliers)),
        ))
    impacts = []
    if draw(st.booleans()):
        impacts.append(ImpactOverride(chain_id=draw(st.sampled_from(chains)).id,
                                      impact=draw(ordinals)))
    method = draw(st.one_of(st.none(), st.sampled_from(list(AggregationMethod))))
    global_multiplier = draw(st.one_of(st.none(), st.integers(1, 32).map(lambda k: k / 16)))
    return portfolio, WhatIfOverride(method=method, global_multiplier=global_multiplier,
                                     steps=tuple(overrides), impacts=tuple(impacts))


def test_property_whatif_equals_assessment_of_edited_portfolio(pns_catalog):
    base_config = AssessmentConfig(method=AggregationMethod.MAXIMUM,
                                   global_multiplier=1.0, acceptance_threshold=8)

    @PROPERTY_SETTINGS
    @given(_portfolio_and_overrides())
    def run(case):
        portfolio, overrides = case
        diff = what_if(portfolio, pns_catalog, base_config, overrides)

        # independent edit route: mutate the serialized document, reload, assess
        doc = portfolio_to_doc(portfolio)
        for override in overrides.steps:
            step_doc = next(c for c in doc["chains"]
                            if c["id"] == override.chain_id)["steps"][override.step_index]
            if override.threat is not None:
                step_doc["threat"] = override.threat
            if override.exposure is not None:
                step_doc["exposure"] = override.exposure
            if override.multiplier is not None:
                step_doc["multiplier"] = override.multiplier
        for override in overrides.impacts:
            chain_doc = next(c for c in doc["chains"] if c["id"] == override.chain_id)
            chain_doc["impact"]["level"] = override.impact
        edited_config = base_config
        if overrides.method is not None:
            edited_config = dataclasses.replace(edited_config, method=overrides.method)
        if overrides.global_multiplier is not None:
            edited_config = dataclasses.replace(
                edited_config, global_multiplier=overrides.global_multiplier)
        expected = assess_portfolio(load_portfolio(doc), pns_catalog, edited_config)
        assert diff.modified.to_doc() == expected.to_doc()

    _timed_property("what_if equals assess on edited portfolio", run)


def test_property_suites_total_runtime():
    total = sum(_PROPERTY_SECONDS.values())
    assert len(_PROPERTY_SECONDS) >= 7
    assert total < 60.0, f"property suites took {total:.1f}s"
    _ok(f"property suites total runtime {total:.1f}s < 60s")


# ---------------------------------------------------------------------------
# criterion 5: cross-chain coupling through shared bounds

def test_cross_chain_coupling(pns_catalog):
    chain_a = build_chain("alpha", "exposed chain", [
        ChainStep("photon-number-splitting", KillChainPhase.FINDING, 4, 4, 2.0)],
        Impact(level=3))
    chain_b = build_chain("beta", "bystander chain", [
        ChainStep("develop-pns-apparatus", KillChainPhase.KNOWING, 3, 3, 1.0)],
        Impact(level=3))
    portfolio = build_portfolio(ContextProfile(), "1.0.0", [chain_a, chain_b])

    diff = what_if(portfolio, pns_catalog, MAX_CONFIG,
                   WhatIfOverride(steps=(StepOverride("alpha", 0, multiplier=0.5),)))

    assert diff.baseline.bounds == LikelihoodBounds(1.0, 50.0)
    assert diff.modified.bounds == LikelihoodBounds(0.5, 25.0)
    assert diff.bounds_changed

    deltas = {d.chain_id: d for d in diff.deltas}
    assert deltas["alpha"].changed and deltas["beta"].changed
    # beta's own steps were untouched; only the shared grid moved it from L=1 to L=2
    assert (deltas["beta"].baseline_likelihood, deltas["beta"].modified_likelihood) == (1, 2)
    assert (deltas["alpha"].baseline_likelihood, deltas["alpha"].modified_likelihood) == (4, 2)
    _ok("cross-chain coupling: overriding alpha re-rates beta via shared bounds")


# ---------------------------------------------------------------------------
# criterion 6: CLI golden outputs and exit codes

def _run_cli(*args: str) -> subprocess.CompletedProcess:
    return subprocess.run([sys.executable, "-m", "quantrisk.cli", *args],
                          capture_output=True, text=True)


GOLDEN_CASES = [
    ("assess_max.json", 3, ["assess", CATALOG_PATH, PORTFOLIO_PATH,
                            "--method", "max", "--global-multiplier", "1.0",
                            "--threshold", "8", "--format", "json"]),
    ("assess_max.csv", 3, ["assess", CATALOG_PATH, PORTFOLIO_PATH,
                           "--method", "max", "--global-multiplier", "1.0",
                           "--threshold", "8", "--format", "csv"]),
    ("compare.json", 0, ["compare", CATALOG_PATH, PORTFOLIO_PATH, "--format", "json"]),
    ("compare.csv", 0, ["compare", CATALOG_PATH, PORTFOLIO_PATH, "--format", "csv"]),
    ("whatif.json", 0, ["whatif", CATALOG_PATH, PORTFOLIO_PATH,
                        str(GOLDEN_DIR / "whatif_overrides.json"),
                        "--method", "max", "--format", "json"]),
    ("whatif.csv", 0, ["whatif", CATALOG_PATH, PORTFOLIO_PATH,
                       str(GOLDEN_DIR / "whatif_overrides.json"),
                       "--method", "max", "--format", "csv"]),
]


@pytest.mark.parametrize("golden_name,expected_exit,args",
                         GOLDEN_CASES, ids=[c[0] for c in GOLDEN_CASES])
def test_cli_golden(golden_name, expected_exit, args):
    result = _run_cli(*args)
    expected = (GOLDEN_DIR / golden_name).read_text(encoding="utf-8")
    assert result.stdout == expected, f"{golden_name} drifted from golden output"
    assert result.returncode == expected_exit
    _ok(f"CLI golden {golden_name} byte-identical, exit {expected_exit}")


def test_cli_golden_semantic_anchors():
    """The stored goldens themselves carry the published numbers."""
    assess = json.loads((GOLDEN_DIR / "assess_max.json").read_text())
    (scenario,) = assess["scenarios"]
    assert (scenario["discrete_likelihood"], scenario["risk_value"],
            scenario["risk_band"]) == (4, 20, "High")
    assert assess["bounds"] == {"lower": 0.8, "upper": 37.5}

    comparison = json.loads((GOLDEN_DIR / "compare.json").read_text())
    methods = comparison["rows"][0]["methods"]
    assert methods["max"]["raw_likelihood"] == 24.0
    assert methods["avg"]["raw_likelihood"] == 7.622
    assert methods["geom"]["raw_likelihood"] == 1.217
    assert methods["geom"]["risk_band"] == "Medium"

    whatif_doc = json.loads((GOLDEN_DIR / "whatif.json").read_text())
    (delta,) = whatif_doc["deltas"]
    assert (delta["baseline_risk"], delta["modified_risk"]) == (20, 10)
    assert whatif_doc["bounds_changed"] is True
    _ok("CLI goldens carry the reference numbers (20/High, 7.622, 1.217, 20->10)")


def test_cli_exit_code_contract(tmp_path):
    ok = _run_cli("assess", CATALOG_PATH, PORTFOLIO_PATH, "--method", "geom",
                  "--threshold", "8")
    assert ok.returncode == 0

    bad_doc = json.loads(datasets.pns_portfolio_text())
    bad_doc["chains"][0]["steps"][0]["technique_id"] = "ghost"
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(json.dumps(bad_doc), encoding="utf-8")
    invalid = _run_cli("assess", CATALOG_PATH, str(bad_path))
    assert invalid.returncode == 1

    missing = _run_cli("assess", CATALOG_PATH, str(tmp_path / "nope.json"))
    assert missing.returncode == 2

    flagged = _run_cli("assess", CATALOG_PATH, PORTFOLIO_PATH, "--method", "max",
                       "--threshold", "8")
    assert flagged.returncode == 3
    _ok("CLI exit codes follow the 0/1/2/3 contract")
