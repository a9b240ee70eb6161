"""Verification suites: the theorem-shaped experiments behind `snfkn verify`.

Each suite runs a batch of trials, returns one row per trial plus a summary
with fitted constants, and declares pass/fail.  Trials are pure functions of
(seed, trial index), so results are identical regardless of worker count;
SNFKN_THREADS only changes wall-clock time.  The acceptance tests call these
same runners with the pinned parameters.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .config import Z99, worker_count
from .cube import evaluate_cube, fkn_round_cube, restrict_to_square_system
from .extract_l0 import analyze_l0
from .extract_l2 import analyze_l2
from .extract_linf import dictator_decision_linf
from .generators import NoiseModel, apply_noise, gen_dictator, gen_disjoint_family, gen_tightness
from .linear import (
    LinearFunction,
    dist01,
    distance_l2_between,
    evaluate_many,
    pair_covariance,
)
from .perms import (
    all_permutations,
    avoid_probability,
    derived_rng,
    sample_permutations,
    sample_square_system,
)
from .reports import Dictator, family_sum_function

__all__ = ["SuiteResult", "SUITES", "run_suite"]


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    columns: tuple
    rows: tuple  # of tuples, sorted by first column
    summary: dict
    passed: bool

    def csv_lines(self) -> list:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_csv_cell(v) for v in row))
        pairs = " ".join(f"{k}={_csv_cell(v)}" for k, v in sorted(self.summary.items()))
        lines.append(f"# summary: {pairs} passed={self.passed}")
        return lines


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return str(v).lower()
    return str(v)


def _map_trials(fn, args):
    """Order-preserving map honoring SNFKN_THREADS; results identical either way."""
    workers = worker_count()
    if workers <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args, chunksize=max(1, len(args) // (4 * workers))))


# ---------------------------------------------------------------------------
# covariance


def _covariance_row(n: int):
    perms = all_permutations(n)
    nfact = perms.shape[0]
    worst = 0.0
    pairs = 0
    cells = [(i, j) for i in range(n) for j in range(n)]
    indicators = {c: (perms[:, c[0]] == c[1]).astype(np.float64) for c in cells}
    for a in cells:
        xa = indicators[a]
        for b in cells:
            xb = indicators[b]
            brute = float((xa * xb).mean() - xa.mean() * xb.mean())
            worst = max(worst, abs(brute - pair_covariance(n, a, b)))
            pairs += 1
    return (n, pairs, worst)


def run_covariance(trials: int = 0, n: int = 0, seed: int = 0, samples: int = 0) -> SuiteResult:
    """Closed-form indicator covariances vs enumeration, n = 2..6."""
    sizes = [n] if n else [2, 3, 4, 5, 6]
    rows = [_covariance_row(m) for m in sizes]
    worst = max(r[2] for r in rows)
    return SuiteResult(
        "covariance",
        ("n", "pairs", "max_abs_error"),
        tuple(rows),
        {"max_abs_error": worst, "tolerance": 1e-12},
        worst <= 1e-12,
    )


# ---------------------------------------------------------------------------
# pair-overlap


def _pair_overlap_trial(args):
    seed, trial, n = args
    rng = derived_rng(seed, 0x20, trial)
    m = int(rng.integers(1, min(2 * n, n * n) + 1))
    family = gen_disjoint_family(n, m, "uniform", seed=seed * 100003 + trial)
    h = family_sum_function(family)
    hv = evaluate_many(h, all_permutations(n))
    hv_int = np.rint(hv).astype(np.int64)
    s_excess = int((hv_int * (hv_int - 1)).sum())
    d = np.where(hv_int >= 2, hv_int - 1, 0)
    s_dist = int((d * d).sum())
    nfact = factorial(n)
    formula_exact = Fraction(2 * family.nondisjoint_pairs, n * (n - 1))
    identity = s_excess * n * (n - 1) == 2 * family.nondisjoint_pairs * nfact
    sandwich = s_dist <= s_excess <= 2 * s_dist
    return (
        trial,
        n,
        m,
        family.nondisjoint_pairs,
        float(formula_exact),
        s_excess / nfact,
        identity,
        sandwich,
    )


def run_pair_overlap(trials: int = 50, n: int = 0, seed: int = 0, samples: int = 0) -> SuiteResult:
    """E[h(h-1)] = 2P/(n(n-1)) exactly, plus the dist^2 sandwich, random families."""
    sizes = [n] if n else [3, 4, 5, 6, 7, 8]
    args = []
    t = 0
    for m in sizes:
        for _ in range(trials):
            args.append((seed, t, m))
            t += 1
    rows = _map_trials(_pair_overlap_trial, args)
    ok = all(r[6] and r[7] for r in rows)
    return SuiteResult(
        "pair-overlap",
        ("trial", "n", "m", "P", "formula", "brute", "identity", "sandwich"),
        tuple(rows),
        {"trials": len(rows)},
        ok,
    )


# ---------------------------------------------------------------------------
# cube-fkn


def _cube_points(m: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=m)), dtype=np.int64)


def _cube_fkn_trial(args):
    seed, trial, n = args
    rng = derived_rng(seed, 0x30, trial)
    system = sample_square_system(n, rng)
    kind = ("zero", "one", "var", "negvar")[trial % 4]
    (a1, a2), (b1, b2) = system.square(0)
    if kind == "zero":
        f = LinearFunction(0.0, np.zeros((n, n)))
    elif kind == "one":
        f = LinearFunction(1.0, np.zeros((n, n)))
    elif kind == "var":
        f = LinearFunction.from_cells(n, {(a1, b1): 1.0})
    else:
        f = LinearFunction.from_cells(n, {(a1, b2): 1.0, (a2, b1): 1.0})
    m = system.m
    noisy = LinearFunction(
        f.constant, f.coeff + rng.uniform(-0.02 / m, 0.02 / m, size=(n, n))
    )
    u = restrict_to_square_system(noisy, system)
    form, dist = fkn_round_cube(u)
    planted_index = 0
    recovered = (
        form.kind == kind
        and (form.index == planted_index if kind in ("var", "negvar") else True)
    )
    points = _cube_points(m)
    target = form.as_cube_linear(m)
    errs = [
        (evaluate_cube(u, x) - evaluate_cube(target, x)) ** 2 for x in points
    ]
    brute = float(np.mean(errs))
    return (trial, n, m, kind, form.kind, recovered, dist, brute, abs(dist - brute))


def run_cube_fkn(trials: int = 40, n: int = 9, seed: int = 0, samples: int = 0) -> SuiteResult:
    """Square-system restriction + nearest-junta rounding, checked on 2^m points."""
    args = [(seed, t, n) for t in range(trials)]
    rows = _map_trials(_cube_fkn_trial, args)
    worst = max(r[8] for r in rows)
    ok = all(r[5] for r in rows) and worst <= 1e-12
    return SuiteResult(
        "cube-fkn",
        ("trial", "n", "m", "planted", "recovered", "match", "distance", "brute", "abs_error"),
        tuple(rows),
        {"max_abs_error": worst, "trials": len(rows)},
        ok,
    )


# ---------------------------------------------------------------------------
# dictator recovery, L2


def _recovery_l2_trial(args):
    seed, trial, n, amplitude = args
    rng = derived_rng(seed, 0x40, trial)
    tsize = max(1, n // 4)
    index = int(rng.integers(0, n))
    targets = tuple(int(v) for v in rng.choice(n, size=tsize, replace=False))
    f0 = gen_dictator(n, "row", index, targets)
    noisy = apply_noise(
        f0, NoiseModel("uniform", amplitude=amplitude / n, seed=seed * 7919 + trial)
    )
    report = analyze_l2(noisy)
    eps = report.metrics["epsilon"]
    closeness = report.metrics["closeness"]
    ratio = closeness / eps if eps > 0 else 0.0
    return (
        trial,
        n,
        amplitude,
        eps,
        closeness,
        ratio,
        report.verdict,
        set(report.cells) == {(index, t) for t in targets} and not report.flipped,
    )


def run_recovery_l2(trials: int = 100, n: int = 8, seed: int = 0, samples: int = 0) -> SuiteResult:
    """Noisy dictators, amplitudes 0.1/n and 0.3/n; closeness = O(eps) with ratio <= 25."""
    args = [
        (seed, t, n, (0.1, 0.3)[t % 2]) for t in range(trials)
    ]
    rows = _map_trials(_recovery_l2_trial, args)
    max_ratio = max(r[5] for r in rows)
    ok = all(r[6] == "Family" and r[7] for r in rows) and max_ratio <= 25.0
    return SuiteResult(
        "dictator-recovery-l2",
        ("trial", "n", "amplitude", "epsilon", "closeness", "ratio", "verdict", "exact_family"),
        tuple(rows),
        {"max_ratio": max_ratio, "bound": 25.0, "trials": len(rows)},
        ok,
    )


# ---------------------------------------------------------------------------
# dictator recovery, L0


def _recovery_l0_trial(args):
    seed, trial, n, k = args
    rng = derived_rng(seed, 0x50, trial)
    tsize = 2
    index = int(rng.integers(0, n))
    targets = tuple(int(v) for v in rng.choice(n, size=tsize, replace=False))
    f0 = gen_dictator(n, "row", index, targets)
    grid = f0.coeff.copy()
    off_rows = [i for i in range(n) if i != index]
    picks = set()
    while len(picks) < k:
        picks.add((int(rng.choice(off_rows)), int(rng.integers(0, n))))
    for i, j in picks:
        value = float(rng.uniform(0.05, 0.95)) * (1 if rng.random() < 0.5 else -1)
        grid[i, j] = value
    noisy = LinearFunction(f0.constant, grid)
    report = analyze_l0(noisy)
    pr = report.metrics["closeness"]
    planted = {(index, t) for t in targets}
    return (
        trial,
        n,
        k,
        pr,
        k / n,
        set(report.cells) == planted and not report.flipped,
        report.metrics["regime"],
    )


def run_recovery_l0(trials: int = 100, n: int = 8, seed: int = 0, samples: int = 0) -> SuiteResult:
    """Dictators with k in {1,2} off-line coefficients corrupted to non-integers."""
    args = [(seed, t, n, (1, 2)[t % 2]) for t in range(trials)]
    rows = _map_trials(_recovery_l0_trial, args)
    ok = all(r[5] and r[3] <= r[4] + 1e-12 and r[6] == "exact" for r in rows)
    max_pr = max(r[3] for r in rows)
    return SuiteResult(
        "dictator-recovery-l0",
        ("trial", "n", "k", "pr_neq", "union_bound", "exact_family", "regime"),
        tuple(rows),
        {"max_pr_neq": max_pr, "trials": len(rows)},
        ok,
    )


# ---------------------------------------------------------------------------
# dictator recovery, L-infinity


def _recovery_linf_trial(args):
    seed, trial, n, eps = args
    rng = derived_rng(seed, 0x60, trial)
    tsize = max(2, n // 4)
    index = int(rng.integers(0, n))
    targets = tuple(int(v) for v in rng.choice(n, size=tsize, replace=False))
    flipped = trial % 3 == 2
    f0 = gen_dictator(n, "row", index, targets)
    if flipped:
        f0 = 1.0 - f0
    noisy = LinearFunction(
        f0.constant, f0.coeff + rng.uniform(-eps / n, eps / n, size=(n, n))
    )
    planted = Dictator("row", index, targets, flipped)
    decision, diag = dictator_decision_linf(noisy, eps)
    return (
        trial,
        n,
        eps,
        flipped,
        decision == planted,
        diag["path"],
        diag["verification"],
        diag["mismatches"],
    )


def run_recovery_linf(trials: int = 60, n: int = 0, seed: int = 0, samples: int = 0) -> SuiteResult:
    """Planted (possibly complemented) dictators + eps/n noise; decision must match."""
    sizes = [n] if n else [8, 12]
    args = []
    t = 0
    for m in sizes:
        for _ in range(trials // len(sizes)):
            args.append((seed, t, m, 0.02))
            t += 1
    rows = _map_trials(_recovery_linf_trial, args)
    ok = all(r[4] and r[7] == 0 for r in rows)
    return SuiteResult(
        "dictator-recovery-linf",
        ("trial", "n", "eps", "flipped", "match", "path", "verification", "mismatches"),
        tuple(rows),
        {"trials": len(rows)},
        ok,
    )


# ---------------------------------------------------------------------------
# converse-family


def _converse_trial(args):
    seed, trial, n, samples = args
    family = gen_disjoint_family(n, n, "uniform", seed=seed * 31337 + trial)
    h = family_sum_function(family)
    formula = 2.0 * family.nondisjoint_pairs / (n * (n - 1))
    rng = derived_rng(seed, 0x70, trial)
    sq_total = 0.0
    sq_total2 = 0.0
    neq_total = 0
    done = 0
    while done < samples:
        m = min(10**4, samples - done)
        vals = evaluate_many(h, sample_permutations(n, m, rng))
        d = dist01(vals)
        d2 = d * d
        sq_total += float(d2.sum())
        sq_total2 += float((d2 * d2).sum())
        neq_total += int((d > 1e-9).sum())
        done += m
    l2 = sq_total / samples
    var_l2 = max(0.0, sq_total2 / samples - l2 * l2)
    l0 = neq_total / samples
    hw_l2 = Z99 * np.sqrt(var_l2 / samples)
    hw_l0 = Z99 * np.sqrt(max(l0 * (1 - l0), 0.0) / samples)
    ok = l2 <= 2 * formula + hw_l2 and l0 <= 2 * formula + hw_l0
    return (trial, n, family.nondisjoint_pairs, formula, l2, l0, hw_l2, hw_l0, ok)


def run_converse_family(trials: int = 50, n: int = 0, seed: int = 0, samples: int = 10**5) -> SuiteResult:
    """Random families: measured L2/L0 badness is controlled by 2P/(n(n-1))."""
    sizes = [n] if n else [16, 32, 64]
    args = []
    t = 0
    for m in sizes:
        for _ in range(max(1, trials)):  # ``trials`` families per board size
            args.append((seed, t, m, samples))
            t += 1
    rows = _map_trials(_converse_trial, args)
    ok = all(r[8] for r in rows)
    return SuiteResult(
        "converse-family",
        ("trial", "n", "P", "formula", "l2sq_est", "l0_est", "l2_half_width", "l0_half_width", "within_bound"),
        tuple(rows),
        {"trials": len(rows)},
        ok,
    )


# ---------------------------------------------------------------------------
# tightness-tradeoff


def _best_dictator_distance(f: LinearFunction) -> float:
    """min E[(f - H)^2] over the 2n dictators whose targets are f's support on a line."""
    n = f.n
    best = None
    for orientation in ("row", "col"):
        for line in range(n):
            coeffs = f.coeff[line, :] if orientation == "row" else f.coeff[:, line]
            targets = [int(t) for t in np.nonzero(coeffs >= 0.5)[0]]
            cells = (
                {(line, t): 1.0 for t in targets}
                if orientation == "row"
                else {(t, line): 1.0 for t in targets}
            )
            h = LinearFunction.from_cells(n, cells)
            d = distance_l2_between(f, h)
            if best is None or d < best:
                best = d
    return best


def run_tightness(trials: int = 0, n: int = 40, seed: int = 0, samples: int = 0) -> SuiteResult:
    """The (delta + eps/delta) tradeoff: distances bracketed within factor 4."""
    eps = 0.02
    deltas = [0.1, 0.2, 0.3, 0.4, 0.5]
    rows = []
    dict_dists = []
    const_dists = []
    for trial, delta in enumerate(deltas):
        f = gen_tightness(n, delta, eps)
        k1 = int(np.floor(delta * n))
        k2 = int(np.floor(eps / delta * n))
        d_dict = _best_dictator_distance(f)
        zero = LinearFunction(0.0, np.zeros((n, n)))
        one = LinearFunction(1.0, np.zeros((n, n)))
        d_const = min(distance_l2_between(f, zero), distance_l2_between(f, one))
        bracket_dict = min(delta, eps / delta)
        bracket_const = delta + eps / delta
        ok_dict = bracket_dict / 4 <= d_dict <= 4 * bracket_dict
        ok_const = bracket_const / 4 <= d_const <= 4 * bracket_const
        dict_dists.append(d_dict)
        const_dists.append(d_const)
        rows.append(
            (trial, delta, k1, k2, d_dict, bracket_dict, ok_dict, d_const, bracket_const, ok_const)
        )
    monotone = all(
        dict_dists[i + 1] <= dict_dists[i] + 1e-12 for i in range(len(deltas) - 1)
    ) and all(
        const_dists[i + 1] >= const_dists[i] - 1e-12 for i in range(len(deltas) - 1)
    )
    ok = monotone and all(r[6] and r[9] for r in rows)
    return SuiteResult(
        "tightness-tradeoff",
        ("trial", "delta", "k1", "k2", "dict_distance", "dict_bracket", "dict_ok", "const_distance", "const_bracket", "const_ok"),
        tuple(rows),
        {"n": n, "eps": eps, "monotone": monotone},
        ok,
    )


# ---------------------------------------------------------------------------
# avoidance


def _avoidance_small_trial(args):
    seed, trial = args
    rng = derived_rng(seed, 0x80, trial)
    n = int(rng.integers(3, 9))
    k = int(rng.integers(0, 2 * n + 1))
    flat = rng.choice(n * n, size=k, replace=False)
    cells = [(int(v) // n, int(v) % n) for v in flat]
    est = avoid_probability(n, cells, mode="exact")
    perms = all_permutations(n)
    ok_mask = np.ones(perms.shape[0], dtype=bool)
    for i, j in cells:
        ok_mask &= perms[:, i] != j
    brute = Fraction(int(ok_mask.sum()), factorial(n))
    return (trial, n, k, float(est.p), float(brute), est.exact == brute)


def run_avoidance(trials: int = 40, n: int = 0, seed: int = 0, samples: int = 10**5) -> SuiteResult:
    """Inclusion-exclusion avoidance counts vs enumeration; wide-board MC agreement."""
    args = [(seed, t) for t in range(trials)]
    rows = _map_trials(_avoidance_small_trial, args)
    exact_ok = all(r[5] for r in rows)
    # Wide board: n = 30, 60 cells confined to 15 rows so the DP is exact.
    rng = derived_rng(seed, 0x81)
    n_big = 30
    cells = set()
    while len(cells) < 60:
        cells.add((int(rng.integers(0, 15)), int(rng.integers(0, n_big))))
    cells = sorted(cells)
    exact = avoid_probability(n_big, cells, mode="exact")
    mc = avoid_probability(n_big, cells, mode="mc", samples=samples, seed=seed)
    sigma = max(np.sqrt(exact.p * (1 - exact.p) / samples), 1e-12)
    dev = abs(mc.p - exact.p) / sigma
    mc_ok = dev <= 4.0
    rows = rows + [(len(rows), n_big, len(cells), mc.p, exact.p, mc_ok)]
    return SuiteResult(
        "avoidance",
        ("trial", "n", "cells", "estimate", "exact", "match"),
        tuple(rows),
        {"wide_board_sigmas": float(dev), "trials": len(rows)},
        exact_ok and mc_ok,
    )


SUITES = {
    "covariance": run_covariance,
    "pair-overlap": run_pair_overlap,
    "cube-fkn": run_cube_fkn,
    "dictator-recovery-l2": run_recovery_l2,
    "dictator-recovery-l0": run_recovery_l0,
    "dictator-recovery-linf": run_recovery_linf,
    "converse-family": run_converse_family,
    "tightness-tradeoff": run_tightness,
    "avoidance": run_avoidance,
}


def run_suite(name: str, trials: int = 0, n: int = 0, seed: int = 0, samples: int = 0) -> SuiteResult:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    fn = SUITES[name]
    kwargs = {}
    if trials:
        kwargs["trials"] = trials
    if n:
        kwargs["n"] = n
    if seed:
        kwargs["seed"] = seed
    if samples:
        kwargs["samples"] = samples
    return fn(**kwargs)
