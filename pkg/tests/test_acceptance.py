"""Acceptance gate: the ten primary criteria, one pass/fail line each.

Every criterion runs at its stated tolerance and sample size and asserts its
runtime budget.  Each test prints a single ``CRITERION k ...: PASS`` line
(visible with ``pytest -s``); a failed assertion marks the criterion FAIL.
"""

import time

import numpy as np
import pytest

from regentree.csbp import BranchingMechanism, dsbp_extinction_ode, u_solve, v_levy
from regentree.harness import REGISTRY, calibrate, default_spec, run_check, run_suite
from regentree.samplers import critical_binary

from test_trees import (
    all_canonical_trees,
    mean_over_orderings,
    product_of_means,
    symmetrized_table,
)


def _report(k: int, label: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"CRITERION {k} {label}: {status} {detail}".rstrip(), flush=True)
    assert ok, f"criterion {k} ({label}) failed: {detail}"


def test_criterion_1_laplace_ode_closed_form():
    t0 = time.perf_counter()
    m = BranchingMechanism(beta=1.0)
    worst = 0.0
    for t in np.linspace(0.2, 3.0, 5):
        for lam in np.linspace(0.25, 4.0, 5):
            err = abs(u_solve(m, float(t), float(lam)) - lam / (1.0 + lam * t))
            worst = max(worst, err)
        worst = max(worst, abs(v_levy(m, float(t)) - 1.0 / float(t)))
    elapsed = time.perf_counter() - t0
    _report(1, "closed-form Laplace ODE", worst <= 1e-8 and elapsed < 1.0,
            f"(max err {worst:.2e}, {elapsed:.2f}s)")


def test_criterion_2_generating_function_scaling_limit():
    t0 = time.perf_counter()
    r = run_check(default_spec("csbp_limit_laplace", 7))
    elapsed = time.perf_counter() - t0
    _report(2, "iterate scaling limit", r.passed and r.statistic <= 0.01 and elapsed < 10.0,
            f"(err {r.statistic:.2e}, {elapsed:.2f}s)")


def test_criterion_3_discretisation_bound():
    t0 = time.perf_counter()
    r = run_check(default_spec("discretisation_4eps", 7))
    elapsed = time.perf_counter() - t0
    _report(3, "4-eps discretization bound", r.passed and elapsed < 60.0,
            f"(worst bound/eps {r.statistic:.3f}, {elapsed:.1f}s)")


def test_criterion_4_binomial_slicing():
    # closed-form cross-check of the success probability v(b)/v(a) = 0.9
    p = critical_binary()
    q = dsbp_extinction_ode(p, 0.5) / dsbp_extinction_ode(p, 0.25)
    assert q == pytest.approx((2.0 / 2.5) / (2.0 / 2.25), abs=1e-9)
    t0 = time.perf_counter()
    r = run_check(default_spec("binomial_slicing", 7))
    elapsed = time.perf_counter() - t0
    _report(4, "binomial slicing", r.passed and r.p_value >= 1e-3 and elapsed < 60.0,
            f"(p {r.p_value:.3f}, {elapsed:.1f}s)")


def test_criterion_5_first_branch_structure():
    t0 = time.perf_counter()
    reports = [run_check(default_spec(n, 7))
               for n in ("exp_first_branch", "offspring_at_J", "subtrees_iid_at_J")]
    elapsed = time.perf_counter() - t0
    ok = all(r.passed and r.p_value >= 1e-3 for r in reports) and elapsed < 120.0
    _report(5, "first-branch decomposition",
            ok, f"(min p {min(r.p_value for r in reports):.3f}, {elapsed:.1f}s)")


def test_criterion_6_poisson_forest():
    t0 = time.perf_counter()
    r = run_check(default_spec("poisson_forest_gw", 7))
    elapsed = time.perf_counter() - t0
    _report(6, "Poisson forest with embedded chain", r.passed and elapsed < 60.0,
            f"(p {r.p_value:.3f}, {elapsed:.1f}s)")


def test_criterion_7_level_counts_exact():
    t0 = time.perf_counter()
    r = run_check(default_spec("N_equals_L", 7))
    elapsed = time.perf_counter() - t0
    _report(7, "level counts equal stabilized Z", r.passed and r.statistic == 0.0 and elapsed < 30.0,
            f"({int(r.statistic)} failures, {elapsed:.1f}s)")


def test_criterion_8_levy_height_tail():
    t0 = time.perf_counter()
    r = run_check(default_spec("levy_height_tail", 7))
    elapsed = time.perf_counter() - t0
    _report(8, "conditioned height tail a/t", r.passed and r.p_value >= 1e-3 and elapsed < 300.0,
            f"(p {r.p_value:.3f}, {elapsed:.1f}s)")


def test_criterion_9_ordering_average_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(90)
    failures = 0
    trees = [xi for xi in all_canonical_trees(7) if xi.k > 0]
    for xi in trees:
        for _ in range(20):
            F = symmetrized_table(rng, xi.k)
            if mean_over_orderings(xi, F) != product_of_means(xi, F):
                failures += 1
    elapsed = time.perf_counter() - t0
    _report(9, "exact ordering-average identity", failures == 0 and elapsed < 10.0,
            f"({len(trees)} trees x 20 functions, {failures} failures, {elapsed:.1f}s)")


def test_criterion_10_calibration():
    t0 = time.perf_counter()
    worst = {}
    for name in REGISTRY:
        n_pass, total = calibrate(name, list(range(100)), scale=0.05)
        worst[name] = n_pass
    pinned = run_suite(7)  # full-size pinned seed set must be all green
    elapsed = time.perf_counter() - t0
    ok = all(v >= 97 for v in worst.values()) and all(r.passed for r in pinned)
    lowest = min(worst, key=worst.get)
    _report(10, "statistical calibration", ok,
            f"(lowest {lowest} {worst[lowest]}/100, pinned "
            f"{sum(r.passed for r in pinned)}/{len(pinned)}, {elapsed:.0f}s)")
