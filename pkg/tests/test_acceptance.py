"""Acceptance gate: twelve end-to-end criteria, one test (and one verdict line) each.

Every criterion states a measurable promise about the library — closed forms
matching enumeration, structure recovery being exact or within a pinned
constant, and wall-clock budgets.  Tolerances and budgets are module constants
so a change to any of them is visible in review.  Tests print a single
``criterion NN PASS/FAIL`` line; under ``pytest -v`` each criterion also
appears as its own PASSED/FAILED entry.
"""
from __future__ import annotations

import dataclasses
import time
from math import factorial

import numpy as np

from snfkn import (
    DEFAULTS,
    LinearFunction,
    ValueTable,
    analyze_l0,
    analyze_l2,
    dictator_decision_linf,
    gen_dictator,
    select_anchor,
    value_table,
)
from snfkn.linear import degree_le1_projection, evaluate_many
from snfkn.perms import all_permutations, derived_rng
from snfkn.reports import CosetFamily, dictator_sum_function, family_sum_function
from snfkn.verify import run_suite

COVARIANCE_TOL = 1e-12
PROJECTION_TOL = 1e-10
RATIO_BOUND = 25.0
UNION_BOUND_SLACK = 1e-12
MC_SIGMAS = 4.0
BRACKET_FACTOR = 4.0

COVARIANCE_BUDGET_S = 10.0
EXACT_RECOVERY_BUDGET_S = 60.0
AVOIDANCE_BUDGET_S = 10.0
EXACT_ANALYSIS_BUDGET_S = 5.0
ANCHOR_SCAN_BUDGET_S = 10.0
MC_ANALYSIS_BUDGET_S = 30.0


def _verdict(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:02d} {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num:02d}: {detail}"


def _report_function(report) -> LinearFunction:
    """The approximation a structure report describes, as a LinearFunction."""
    h = family_sum_function(CosetFamily.of(report.n, report.cells))
    return (1.0 - h) if report.flipped else h


# ---------------------------------------------------------------------------
# 1. covariance closed forms


def test_criterion_01_covariance_closed_forms_match_enumeration():
    t0 = time.perf_counter()
    res = run_suite("covariance")
    elapsed = time.perf_counter() - t0
    all_pairs = all(r[1] == r[0] ** 4 for r in res.rows)
    ok = (
        res.passed
        and all_pairs
        and [r[0] for r in res.rows] == [2, 3, 4, 5, 6]
        and res.summary["max_abs_error"] <= COVARIANCE_TOL
        and elapsed < COVARIANCE_BUDGET_S
    )
    _verdict(
        1,
        ok,
        f"covariance vs enumeration n=2..6, all pairs: max_err="
        f"{res.summary['max_abs_error']:.2e} (tol {COVARIANCE_TOL:.0e}), {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# 2. pair-overlap identity and sandwich


def test_criterion_02_pair_overlap_identity_exact_with_sandwich():
    res = run_suite("pair-overlap", trials=50)
    identity = all(r[6] for r in res.rows)
    sandwich = all(r[7] for r in res.rows)
    ok = res.passed and identity and sandwich and len(res.rows) == 50 * 6
    _verdict(
        2,
        ok,
        f"E[h(h-1)] = 2P/(n(n-1)) exactly and dist^2 sandwich held in "
        f"{len(res.rows)} random families over n=3..8",
    )


# ---------------------------------------------------------------------------
# 3. projection residual orthogonality and idempotence


def test_criterion_03_projection_orthogonality_and_idempotence():
    worst_orth = 0.0
    worst_idem = 0.0
    tables = 0
    for n in (3, 4, 5):
        perms = all_permutations(n)
        nfact = perms.shape[0]
        indicators = np.stack(
            [(perms[:, i] == j).astype(np.float64) for i in range(n) for j in range(n)]
        )
        for t in range(100):
            rng = derived_rng(3, 0x03, n, t)
            table = ValueTable(n, rng.uniform(-1.0, 1.0, nfact))
            proj = degree_le1_projection(table)
            resid = table.values - evaluate_many(proj, perms)
            worst_orth = max(worst_orth, float(np.abs(indicators @ resid).max()) / nfact)
            again = degree_le1_projection(value_table(proj))
            diff = evaluate_many(again, perms) - evaluate_many(proj, perms)
            worst_idem = max(worst_idem, float(np.abs(diff).max()))
            tables += 1
    ok = worst_orth <= PROJECTION_TOL and worst_idem <= PROJECTION_TOL and tables == 300
    _verdict(
        3,
        ok,
        f"{tables} random tables: residual orthogonality {worst_orth:.2e}, "
        f"re-projection drift {worst_idem:.2e} (tol {PROJECTION_TOL:.0e})",
    )


# ---------------------------------------------------------------------------
# 4. exact dictator recovery by all three pipelines


def _dictator_cases() -> list:
    """Dictators over n=3..8: up to row/column relabeling, (index, T) is
    determined by |T| alone, so prefix targets at one index are already
    exhaustive; we still vary the index and the target shape to catch any
    implementation asymmetry."""
    cases = []
    for n in range(3, 9):
        half = n // 2
        for orientation in ("row", "col"):
            for index in sorted({0, half, n - 1}):
                for size in range(1, half + 1):
                    rng = derived_rng(4, 0x04, n, index, size)
                    shapes = [
                        tuple(range(size)),
                        tuple(range(n - size, n)),
                        tuple(sorted(int(v) for v in rng.choice(n, size=size, replace=False))),
                    ]
                    seen = []
                    for targets in shapes:
                        if targets not in seen:
                            seen.append(targets)
                            cases.append((n, orientation, index, targets))
    return cases


def test_criterion_04_exact_dictators_recovered_by_all_three_pipelines():
    t0 = time.perf_counter()
    cases = _dictator_cases()
    perms_by_n = {n: all_permutations(n) for n in range(3, 9)}
    checked = 0
    for n, orientation, index, targets in cases:
        f = gen_dictator(n, orientation, index, targets)
        perms = perms_by_n[n]
        f_vals = evaluate_many(f, perms)

        rep2 = analyze_l2(f)
        rep0 = analyze_l0(f)
        decision, diag = dictator_decision_linf(f, 0.0)
        assert diag["verification"] == "exact" and diag["mismatches"] == 0
        assert rep2.metrics["closeness"] == 0.0
        assert rep0.metrics["epsilon"] == 0.0

        for g in (
            _report_function(rep2),
            _report_function(rep0),
            dictator_sum_function(decision, n),
        ):
            g_vals = evaluate_many(g, perms)
            pr_neq = float((f_vals != g_vals).mean())
            mse = float(((f_vals - g_vals) ** 2).mean())
            assert pr_neq == 0.0 and mse == 0.0, (n, orientation, index, targets)
            checked += 1
    elapsed = time.perf_counter() - t0
    ok = len(cases) >= 200 and checked == 3 * len(cases) and elapsed < EXACT_RECOVERY_BUDGET_S
    _verdict(
        4,
        ok,
        f"{len(cases)} dictators (n=3..8, |T|<=n/2), all three pipelines: "
        f"Pr[f!=g]=0 and E[(f-g)^2]=0 by enumeration, {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# 5. noisy L2 recovery with bounded closeness ratio


def test_criterion_05_noisy_l2_recovery_ratio_bounded():
    res = run_suite("dictator-recovery-l2", trials=200)
    per_amp = {0.1: 0, 0.3: 0}
    for r in res.rows:
        per_amp[r[2]] += 1
    ok = (
        res.passed
        and per_amp[0.1] == 100
        and per_amp[0.3] == 100
        and res.summary["max_ratio"] <= RATIO_BOUND
    )
    _verdict(
        5,
        ok,
        f"n=8, |T|=n/4, amplitudes 0.1/n and 0.3/n, 100 seeds each: verdict "
        f"Family, closeness/eps max ratio {res.summary['max_ratio']:.3f} <= {RATIO_BOUND}",
    )


# ---------------------------------------------------------------------------
# 6. Boolean-side recovery from flipped tables


def test_criterion_06_flipped_tables_disagreement_within_25x():
    n = 7
    nfact = factorial(n)
    worst_ratio = 0.0
    seeds = 0
    for rho in (0.01, 0.05):
        for s in range(100):
            rng = derived_rng(6, 0x06, int(rho * 100), s)
            orientation = ("row", "col")[s % 2]
            index = int(rng.integers(0, n))
            size = int(rng.integers(1, n // 2 + 1))
            targets = tuple(sorted(int(v) for v in rng.choice(n, size=size, replace=False)))
            table = value_table(gen_dictator(n, orientation, index, targets))
            flips = rng.random(nfact) < rho
            noisy = ValueTable(n, np.where(flips, 1.0 - table.values, table.values))

            rep = analyze_l2(noisy)
            eps = rep.metrics["epsilon"]
            pr = rep.metrics["pr_neq_max"]
            assert rep.metrics["regime"] == "exact"
            assert pr <= RATIO_BOUND * eps, (rho, s, pr, eps)
            if eps > 0:
                worst_ratio = max(worst_ratio, pr / eps)
            seeds += 1
    ok = seeds == 200 and worst_ratio <= RATIO_BOUND
    _verdict(
        6,
        ok,
        f"n=7 dictator tables, flip rates 0.01/0.05, 100 seeds each: "
        f"Pr[f!=g_max]/closeness_to_linear worst ratio {worst_ratio:.3f} <= {RATIO_BOUND}, "
        "both sides enumerated",
    )


# ---------------------------------------------------------------------------
# 7. L0 recovery under corrupted coefficients


def test_criterion_07_l0_recovery_union_bound():
    res = run_suite("dictator-recovery-l0", trials=200)
    per_k = {1: 0, 2: 0}
    for r in res.rows:
        per_k[r[2]] += 1
        assert r[5], f"trial {r[0]}: family differs from planted"
        assert r[3] <= r[4] + UNION_BOUND_SLACK
        assert r[6] == "exact"
    ok = res.passed and per_k[1] == 100 and per_k[2] == 100
    _verdict(
        7,
        ok,
        f"n=8, k in {{1,2}} corrupted coefficients, 100 seeds each: family == planted, "
        f"exact Pr[f!=g] <= k/n (max {res.summary['max_pr_neq']:.4f})",
    )


# ---------------------------------------------------------------------------
# 8. sup-norm dictator decision


def test_criterion_08_linf_decision_returns_planted_dictator():
    res = run_suite("dictator-recovery-linf", trials=60)
    sizes = sorted({r[1] for r in res.rows})
    n8_exact = all(r[6] == "exact" and r[7] == 0 for r in res.rows if r[1] == 8)
    matches = all(r[4] for r in res.rows)
    ok = res.passed and sizes == [8, 12] and n8_exact and matches
    _verdict(
        8,
        ok,
        f"{len(res.rows)} planted (possibly complemented) dictators with eps/n noise, "
        "n in {8,12}: decision == planted; n=8 verified on all 40320 permutations",
    )


# ---------------------------------------------------------------------------
# 9. converse bound for random families


def test_criterion_09_converse_random_families_within_formula_bound():
    res = run_suite("converse-family", trials=50, samples=10**5)
    per_n = {16: 0, 32: 0, 64: 0}
    for r in res.rows:
        per_n[r[1]] += 1
        assert r[8], f"trial {r[0]} exceeded 2*formula + half-width"
    ok = res.passed and all(v == 50 for v in per_n.values())
    _verdict(
        9,
        ok,
        "uniform families m=n, 50 seeds per n in {16,32,64}, 1e5 samples: measured "
        "E[dist^2] and Pr[h not in {0,1}] within 2*(2P/(n(n-1))) + MC half-width",
    )


# ---------------------------------------------------------------------------
# 10. avoidance probabilities


def test_criterion_10_avoidance_exact_and_wide_board_mc():
    t0 = time.perf_counter()
    res = run_suite("avoidance", samples=10**5)
    elapsed = time.perf_counter() - t0
    small = [r for r in res.rows if r[0] < len(res.rows) - 1]
    ok = (
        res.passed
        and all(r[5] for r in small)
        and res.summary["wide_board_sigmas"] <= MC_SIGMAS
        and elapsed < AVOIDANCE_BUDGET_S
    )
    _verdict(
        10,
        ok,
        f"{len(small)} exact-vs-enumeration boards (n<=8) all equal; n=30 |S|=60 MC "
        f"within {res.summary['wide_board_sigmas']:.2f} sigma (<= {MC_SIGMAS}), {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# 11. tightness of the delta + eps/delta tradeoff


def test_criterion_11_tightness_tradeoff_bracketed_and_monotone():
    res = run_suite("tightness-tradeoff")
    deltas = [r[1] for r in res.rows]
    brackets = all(r[6] and r[9] for r in res.rows)
    ok = (
        res.passed
        and deltas == [0.1, 0.2, 0.3, 0.4, 0.5]
        and brackets
        and res.summary["monotone"]
    )
    _verdict(
        11,
        ok,
        f"n=40, eps=0.02, delta in {deltas}: dictator distance within {BRACKET_FACTOR}x of "
        f"min(delta, eps/delta), constant distance within {BRACKET_FACTOR}x of "
        "delta + eps/delta, monotone crossover",
    )


# ---------------------------------------------------------------------------
# 12. performance budgets


def test_criterion_12_performance_budgets():
    t0 = time.perf_counter()
    rep = analyze_l2(gen_dictator(8, "row", 2, (0, 1)))
    t_exact = time.perf_counter() - t0
    assert rep.metrics["regime"] == "exact"

    rng = derived_rng(12, 0x0C)
    f100 = LinearFunction(0.0, rng.uniform(-1.0, 1.0, (100, 100)))
    t0 = time.perf_counter()
    choice = select_anchor(f100, exact_limit=10**6)
    t_anchor = time.perf_counter() - t0
    assert choice.scanned == 100**2

    opts = dataclasses.replace(DEFAULTS, samples=10**5, seed=12)
    f1000 = gen_dictator(1000, "row", 5, tuple(range(250)))
    t0 = time.perf_counter()
    rep_mc = analyze_l2(f1000, opts)
    t_mc = time.perf_counter() - t0
    assert rep_mc.metrics["regime"] == "mc"

    ok = (
        t_exact < EXACT_ANALYSIS_BUDGET_S
        and t_anchor < ANCHOR_SCAN_BUDGET_S
        and t_mc < MC_ANALYSIS_BUDGET_S
    )
    _verdict(
        12,
        ok,
        f"exact analysis n=8 {t_exact:.2f}s (<{EXACT_ANALYSIS_BUDGET_S:.0f}s), full anchor "
        f"scan n=100 {t_anchor:.2f}s (<{ANCHOR_SCAN_BUDGET_S:.0f}s), MC analysis n=1000 "
        f"with 1e5 samples {t_mc:.2f}s (<{MC_ANALYSIS_BUDGET_S:.0f}s)",
    )
