"""The L0 pipeline: square defects, the census, and exact-match recovery.

The L0 metric asks for Pr[f != g].  Its workhorse is the square defect

    d(i1, i2, j1, j2) = c[i1, j1] + c[i2, j2] - c[i1, j2] - c[i2, j1],

the amount f changes along swapping the images of i1, i2 between j1, j2.
It is representation-invariant.  For f close to Boolean in L0, almost every
square has defect exactly in {0, +1, -1}; the census counts the exceptions
(R0: nonzero defect, R1: non-integer defect).  The sparse representation
keeps the defect coefficients that are honestly near {0, +1, -1} and zeroes
the rest, which changes f only on permutations through a zeroed cell — at
most (#zeroed)/n of them by a union bound.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import (
    CENSUS_EXACT_LIMIT,
    CENSUS_SAMPLES,
    CONST_WINDOW,
    DEFAULTS,
    Options,
    NotNearBoolean,
    Z99,
)
from .extract_l2 import (
    SparseRep,
    constant_or_dictator,
    extract_coset_family,
    sporadic_representation,
)
from .linear import (
    LinearFunction,
    ValueTable,
    dist_to_boolean,
    distance_l2_between,
    evaluate_many,
    recenter,
    round_int,
    round_pm1,
    value_table,
)
from .perms import all_permutations, derived_rng, sample_permutations, square_count
from .reports import (
    Dictator,
    StructureReport,
    dictator_sum_function,
    family_sum_function,
)

__all__ = [
    "square_defect",
    "SquareCensus",
    "square_census",
    "compatible_pair_lower_bound",
    "select_anchor_l0",
    "sparse_representation_l0",
    "analyze_l0",
]


def square_defect(f: LinearFunction, rows, cols) -> float:
    """Defect of the square {i1, i2} x {j1, j2}, canonically oriented.

    Swapping the two rows (or the two columns, but not both) negates the
    defect, so the value is reported for i1 < i2, j1 < j2.

    >>> square_defect(LinearFunction.from_cells(3, {(0, 0): 1.0}), (0, 1), (0, 1))
    1.0
    """
    i1, i2 = (int(rows[0]), int(rows[1]))
    j1, j2 = (int(cols[0]), int(cols[1]))
    if i1 == i2 or j1 == j2:
        raise ValueError("degenerate square")
    if i1 > i2:
        i1, i2 = i2, i1
    if j1 > j2:
        j1, j2 = j2, j1
    c = f.coeff
    return float(c[i1, j1] + c[i2, j2] - c[i1, j2] - c[i2, j1])


@dataclass(frozen=True)
class SquareCensus:
    """Counts of defective squares.

    In the exact regime the counts are over all C(n,2)^2 squares and
    rho = count/total.  In the sampled regime counts are over ``samples``
    uniformly drawn squares and rho = count/samples estimates the density.
    """

    n: int
    total: int
    r0_count: int  # |defect| > tau
    r1_count: int  # dist(defect, {0, +1, -1}) > tau
    rho0: float
    rho1: float
    regime: str  # "exact" | "mc"
    samples: int = 0

    def csv_row(self) -> list:
        return [self.n, self.total, self.r0_count, self.r1_count, self.rho0, self.rho1]


def _pair_indices(n: int):
    i1, i2 = np.triu_indices(n, k=1)
    return i1.astype(np.int64), i2.astype(np.int64)


def square_census(
    f: LinearFunction,
    tau: float = DEFAULTS.tau,
    exact_limit: int = CENSUS_EXACT_LIMIT,
    samples: int = CENSUS_SAMPLES,
    seed: int = 0,
) -> SquareCensus:
    """Count squares with nonzero / non-integer defect.

    Exact (all squares, blocked O(n^4)) up to ``exact_limit``; beyond that a
    seeded sample of squares estimates the densities.
    """
    n = f.n
    if n < 2:
        raise ValueError("the census needs n >= 2")
    total = square_count(n)
    c = f.coeff
    if n <= exact_limit:
        p1, p2 = _pair_indices(n)
        r0 = 0
        r1 = 0
        block = max(1, 2 * 10**7 // max(1, len(p1)))
        for lo in range(0, len(p1), block):
            a, b = p1[lo : lo + block], p2[lo : lo + block]
            d = (
                c[a][:, p1]
                + c[b][:, p2]
                - c[a][:, p2]
                - c[b][:, p1]
            )
            r0 += int((np.abs(d) > tau).sum())
            r1 += int((np.minimum(np.abs(d), np.abs(np.abs(d) - 1.0)) > tau).sum())
        return SquareCensus(n, total, r0, r1, r0 / total, r1 / total, "exact")
    rng = derived_rng(seed, 0xCE)
    r0 = 0
    r1 = 0
    done = 0
    while done < samples:
        m = min(10**6, samples - done)
        i1 = rng.integers(0, n, size=m)
        i2 = rng.integers(0, n - 1, size=m)
        i2 += (i2 >= i1).astype(i2.dtype)
        j1 = rng.integers(0, n, size=m)
        j2 = rng.integers(0, n - 1, size=m)
        j2 += (j2 >= j1).astype(j2.dtype)
        d = c[i1, j1] + c[i2, j2] - c[i1, j2] - c[i2, j1]
        r0 += int((np.abs(d) > tau).sum())
        r1 += int((np.minimum(np.abs(d), np.abs(np.abs(d) - 1.0)) > tau).sum())
        done += m
    return SquareCensus(
        n, total, r0, r1, r0 / samples, r1 / samples, "mc", samples=samples
    )


def compatible_pair_lower_bound(r0_count: int, n: int) -> int:
    """Lower bound on ordered pairs of compatible squares both in R0.

    Each square is incompatible with fewer than 4 n^3 others (it shares a
    row or column index with at most that many), so R0 contains at least
    |R0| (|R0| - 4 n^3) ordered compatible pairs.  Diagnostic only.
    """
    return r0_count * (r0_count - 4 * n**3)


def select_anchor_l0(
    f: LinearFunction, opts: Options = DEFAULTS
) -> tuple:
    """Anchor minimizing (count of defects not near {0,+1,-1} within tau,
    count of defects not near 0, i1, j1) lexicographically."""
    n = f.n
    if n < 2:
        raise ValueError("anchors need n >= 2")
    tau = opts.tau
    if n <= opts.anchor_exact_limit:
        candidates = [(i, j) for i in range(n) for j in range(n)]
    else:
        rng = derived_rng(opts.seed, 0xA50)
        flat = rng.choice(n * n, size=min(opts.anchor_sample, n * n), replace=False)
        candidates = sorted((int(v) // n, int(v) % n) for v in flat)
    c = f.coeff
    best = None
    for i1, j1 in candidates:
        d = c + c[i1, j1] - c[i1 : i1 + 1, :] - c[:, j1 : j1 + 1]
        off_int = np.minimum(np.abs(d), np.abs(np.abs(d) - 1.0)) > tau
        nonzero = np.abs(d) > tau
        key = (int(off_int.sum()), int(nonzero.sum()), i1, j1)
        if best is None or key < best:
            best = key
    bad, nonzero, i1, j1 = best
    return (i1, j1), bad, nonzero


def sparse_representation_l0(f: LinearFunction, opts: Options = DEFAULTS) -> SparseRep:
    """Keep defect coefficients exactly near {0,+1,-1}; zero the rest.

    The integer constant comes from the recentered constant, which must lie
    within CONST_WINDOW of an integer — otherwise the input is not close to
    Boolean in L0 and NotNearBoolean is raised.  The result reproduces f
    exactly on every permutation avoiding the zeroed cells, so
    Pr[f != g] <= (#zeroed)/n.
    """
    (i1, j1), bad, _ = select_anchor_l0(f, opts)
    d = recenter(f, (i1, j1))
    tau = opts.tau
    grid = d.coeff
    near = np.minimum(np.abs(grid), np.abs(np.abs(grid) - 1.0)) <= tau
    e_grid = np.where(near, round_pm1(grid), 0)
    zeroed = tuple(
        (int(i), int(j)) for i, j in zip(*np.nonzero(~near))
    )
    e_pre = d.constant
    e = int(round_int(e_pre))
    if abs(e_pre - e) > CONST_WINDOW:
        raise NotNearBoolean(
            f"recentered constant {e_pre} is not within {CONST_WINDOW} of an integer",
            {"constant": e_pre},
        )
    g = LinearFunction(float(e), e_grid.astype(np.float64))
    kept_err = grid[near] - e_grid[near]
    return SparseRep(
        n=f.n,
        e=e,
        e_grid=e_grid.astype(np.int64),
        anchor=(i1, j1),
        residual_l2sq=distance_l2_between(f, g),
        rounding_mse=float((kept_err * kept_err).mean()) if kept_err.size else 0.0,
        support_size=int((e_grid != 0).sum()),
        support_cap=opts.support_cap_factor * f.n,
        zeroed_cells=zeroed,
    )


def _prob_one(f: LinearFunction, opts: Options) -> tuple:
    """(Pr[f = 1], regime, half_width)."""
    if f.n <= opts.exact_threshold:
        vals = value_table(f).values
        return float((np.abs(vals - 1.0) <= opts.tau).mean()), "exact", 0.0
    rng = derived_rng(opts.seed, 0xB1)
    hits = 0
    done = 0
    while done < opts.samples:
        m = min(10**4, opts.samples - done)
        vals = evaluate_many(f, sample_permutations(f.n, m, rng))
        hits += int((np.abs(vals - 1.0) <= opts.tau).sum())
        done += m
    p = hits / opts.samples
    return p, "mc", Z99 * (max(p * (1 - p), 0.0) / opts.samples) ** 0.5


def _prob_neq(f: LinearFunction, g: LinearFunction, opts: Options, key: int) -> tuple:
    """(Pr[f != g], regime, half_width); exact by enumeration when feasible."""
    if f.n <= opts.exact_threshold:
        perms = all_permutations(f.n)
        fv = evaluate_many(f, perms)
        gv = evaluate_many(g, perms)
        return float((np.abs(fv - gv) > opts.tau).mean()), "exact", 0.0
    rng = derived_rng(opts.seed, key)
    hits = 0
    done = 0
    while done < opts.samples:
        m = min(10**4, opts.samples - done)
        batch = sample_permutations(f.n, m, rng)
        hits += int((np.abs(evaluate_many(f, batch) - evaluate_many(g, batch)) > opts.tau).sum())
        done += m
    p = hits / opts.samples
    return p, "mc", Z99 * (max(p * (1 - p), 0.0) / opts.samples) ** 0.5


def analyze_l0(f: LinearFunction, opts: Options = DEFAULTS) -> StructureReport:
    """Recover structure under Pr[f != g].

    Orientation follows Pr[f = 1]: when more than half the values are 1 the
    pipeline runs on 1 - f.  The family's cells come from the L0 sparse
    representation followed by the shared line-correction and extraction.
    """
    if isinstance(f, ValueTable):
        raise ValueError("the L0 analysis takes linear input only")
    n = f.n
    eps_rep = dist_to_boolean(f, "l0", opts.samples, opts.seed, opts.exact_threshold)
    p_one, p_regime, p_half = _prob_one(f, opts)
    flipped_pre = p_one > 0.5
    work = (1.0 - f) if flipped_pre else f
    sparse = sparse_representation_l0(work, opts)
    sporadic = sporadic_representation(sparse)
    family, flip_fam, discarded = extract_coset_family(sporadic)
    flipped = flipped_pre != flip_fam

    h = family_sum_function(family)
    approx = (1.0 - h) if flipped else h
    pr_neq, regime, half = _prob_neq(f, approx, opts, 0xB2)

    # Independent recheck in the exact regime: indicator accumulation
    # instead of coefficient gathers.
    if n <= opts.exact_threshold:
        perms = all_permutations(n)
        acc = np.zeros(perms.shape[0])
        for i, j in family.cells:
            acc += perms[:, i] == j
        gv = (1.0 - acc) if flipped else acc
        fv = evaluate_many(f, perms)
        check = float((np.abs(fv - gv) > opts.tau).mean())
        assert abs(check - pr_neq) <= 1e-12, (check, pr_neq)

    metrics = {
        "epsilon": eps_rep.value,
        "closeness": pr_neq,
        "regime": regime,
        "half_width": max(half, eps_rep.half_width),
    }
    diagnostics = {
        "input": "linear",
        "anchor": [sparse.anchor[0] + 1, sparse.anchor[1] + 1],
        "zeroed_cells": [[i + 1, j + 1] for i, j in sparse.zeroed_cells],
        "pr_neq_union_bound": len(sparse.zeroed_cells) / n,
        "prob_one": p_one,
        "prob_one_regime": p_regime,
        "prob_one_half_width": p_half,
        "discarded_cells": [[i + 1, j + 1] for i, j in discarded],
        "corrected_constant": sporadic.r,
        "support_size": sparse.support_size,
        "support_cap": sparse.support_cap,
        "nondisjoint_pairs": family.nondisjoint_pairs,
    }

    verdict = "Family"
    dictator = None
    if opts.dictator_delta is not None:
        decision = constant_or_dictator(family, opts.dictator_delta, opts.heavy_k)
        if decision is None:
            verdict = "ConstantOne" if flipped else "ConstantZero"
            const = LinearFunction(1.0 if flipped else 0.0, np.zeros((n, n)))
            metrics["dictator_pr_neq"] = _prob_neq(f, const, opts, 0xB3)[0]
        else:
            verdict = "Dictator"
            dictator = Dictator(
                decision.orientation, decision.index, decision.targets, flipped
            )
            metrics["dictator_pr_neq"] = _prob_neq(
                f, dictator_sum_function(dictator, n), opts, 0xB3
            )[0]

    return StructureReport(
        verdict=verdict,
        n=n,
        cells=family.cells,
        flipped=flipped,
        metrics=metrics,
        diagnostics=diagnostics,
        dictator=dictator,
    )
