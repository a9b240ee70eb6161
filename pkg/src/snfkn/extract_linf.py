"""The sup-norm pipeline: 2*eps-close representations and dictator decisions.

When every value of f is within eps < 1/6 of {0, 1}, the anchored defect
coefficients d[i, j] (each a sum of four values of f) are forced to be
2*eps-close to {0, +1, -1} — pointwise, not just on average.  Rounding gives
an integer grid E; above the small-n crossover, line corrections leave every
row and column with at least n/4 zeros, and the surviving nonzero cells of a
genuine near-dictator sit on a single line with a uniform sign.  The final
decision is always verified against round(f, {0,1}) — exhaustively when the
group is enumerable, by a seeded spot check otherwise — so a wrong dictator
can never be emitted silently.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import (
    DEFAULTS,
    VERIFY_SAMPLES,
    Options,
    PremiseViolated,
)
from .linear import (
    LinearFunction,
    dist_to_boolean,
    evaluate_many,
    efp_dictator,
    recenter,
    round01,
    round_int,
    value_range,
    value_table,
)
from .perms import all_permutations, derived_rng, sample_permutations
from .reports import Dictator, StructureReport

__all__ = [
    "LinfRep",
    "sparse_representation_linf",
    "sporadic_representation_linf",
    "dictator_decision_linf",
    "analyze_linf",
]


def _dist_to_0pm1(grid: np.ndarray) -> np.ndarray:
    return np.minimum(np.abs(grid), np.abs(np.abs(grid) - 1.0))


@dataclass(frozen=True)
class LinfRep:
    """Anchored representation with every coefficient 2*eps-close to Z.

    ``grid`` holds the exact recentered coefficients, ``rounded_grid`` their
    nearest values in {0, +1, -1} (corrections may push entries to +-2 or
    +-3).  ``corrected`` marks the line-corrected stage, where every row and
    column of ``rounded_grid`` carries at least n/4 zeros.
    """

    n: int
    constant: float
    grid: np.ndarray
    epsilon: float
    rounded_grid: np.ndarray
    anchor: tuple
    corrected: bool = False
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None

    def __post_init__(self):
        g = np.array(self.grid, dtype=np.float64)
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)
        r = np.array(self.rounded_grid, dtype=np.int64)
        r.setflags(write=False)
        object.__setattr__(self, "rounded_grid", r)

    def line_zero_counts(self) -> dict:
        """Entries 2*eps-close to 0 per row and per column (diagnostic)."""
        near0 = np.abs(self.grid) <= 2 * self.epsilon
        return {
            "rows": [int(v) for v in near0.sum(axis=1)],
            "cols": [int(v) for v in near0.sum(axis=0)],
        }

    def function(self) -> LinearFunction:
        return LinearFunction(self.constant, self.grid)


def sparse_representation_linf(
    f: LinearFunction, eps: float, opts: Options = DEFAULTS
) -> LinfRep:
    """Anchor and certify that every defect is 2*eps-close to {0, +1, -1}.

    The anchor minimizes how many recentered coefficients fail to be
    2*eps-close to 0, ties broken lexicographically.  A cell that is not
    2*eps-close to any of {0, +1, -1} violates the premise and is reported
    with its distance.
    """
    if not 0.0 <= eps < 1.0 / 6.0:
        raise ValueError("the sup-norm representation needs 0 <= eps < 1/6")
    n = f.n
    if n < 2:
        raise ValueError("anchors need n >= 2")
    c = f.coeff
    if n <= opts.anchor_exact_limit:
        candidates = [(i, j) for i in range(n) for j in range(n)]
    else:
        rng = derived_rng(opts.seed, 0xA5F)
        flat = rng.choice(n * n, size=min(opts.anchor_sample, n * n), replace=False)
        candidates = sorted((int(v) // n, int(v) % n) for v in flat)
    best = None
    for i1, j1 in candidates:
        d = c + c[i1, j1] - c[i1 : i1 + 1, :] - c[:, j1 : j1 + 1]
        far0 = int((np.abs(d) > 2 * eps).sum())
        key = (far0, i1, j1)
        if best is None or key < best:
            best = key
    _, i1, j1 = best
    d = recenter(f, (i1, j1))
    dist = _dist_to_0pm1(d.coeff)
    if dist.max() > 2 * eps:
        worst = np.unravel_index(int(np.argmax(dist)), dist.shape)
        raise PremiseViolated(
            "a recentered coefficient is not 2*eps-close to {0, +1, -1}",
            {
                "cell": [int(worst[0]) + 1, int(worst[1]) + 1],
                "distance": float(dist[worst]),
                "allowed": 2 * eps,
            },
        )
    rounded = np.where(np.abs(d.coeff) <= 2 * eps, 0, np.sign(d.coeff)).astype(np.int64)
    return LinfRep(
        n=n,
        constant=d.constant,
        grid=d.coeff,
        epsilon=eps,
        rounded_grid=rounded,
        anchor=(i1, j1),
    )


def sporadic_representation_linf(rep: LinfRep, opts: Options = DEFAULTS) -> LinfRep:
    """Subtract most-common row/column values; certify the n/4 line property.

    The correction keeps the function pointwise (each permutation meets every
    row and column exactly once) and must leave at least n/4 zeros in every
    row and column of the rounded grid; otherwise the near-dictator premise
    fails and PremiseViolated carries the offending lines.
    """
    n = rep.n
    if n < opts.line_threshold:
        raise ValueError(
            f"line corrections need n >= {opts.line_threshold} (got {n})"
        )
    from .extract_l2 import _most_common_pm1

    alpha = np.array([_most_common_pm1(row) for row in rep.rounded_grid], dtype=np.int64)
    beta = np.array([_most_common_pm1(col) for col in rep.rounded_grid.T], dtype=np.int64)
    rounded = rep.rounded_grid - alpha[:, None] - beta[None, :]
    grid = rep.grid - alpha[:, None] - beta[None, :]
    constant = rep.constant + float(alpha.sum() + beta.sum())
    zeros_row = (rounded == 0).sum(axis=1)
    zeros_col = (rounded == 0).sum(axis=0)
    need = n / 4.0
    bad_rows = [int(i) + 1 for i in np.nonzero(zeros_row < need)[0]]
    bad_cols = [int(j) + 1 for j in np.nonzero(zeros_col < need)[0]]
    if bad_rows or bad_cols:
        raise PremiseViolated(
            "line correction cannot reach n/4 zeros on every line",
            {"rows": bad_rows, "cols": bad_cols, "required": need},
        )
    return LinfRep(
        n=n,
        constant=constant,
        grid=grid,
        epsilon=rep.epsilon,
        rounded_grid=rounded,
        anchor=rep.anchor,
        corrected=True,
        alpha=alpha,
        beta=beta,
    )


def _dictator_values(d: Dictator, perms: np.ndarray) -> np.ndarray:
    if d.orientation == "row":
        hit = np.isin(perms[:, d.index], np.asarray(d.targets, dtype=perms.dtype))
    else:
        hit = np.zeros(perms.shape[0], dtype=bool)
        for t in d.targets:
            hit |= perms[:, t] == d.index
    vals = hit.astype(np.float64)
    return 1.0 - vals if d.flipped else vals


def _verify_decision(
    f: LinearFunction, d: Dictator, opts: Options
) -> dict:
    """Check round(f, {0,1}) == the dictator pointwise; raise on mismatch."""
    n = f.n
    if n <= opts.exact_threshold:
        perms = all_permutations(n)
        regime = "exact"
    else:
        perms = sample_permutations(n, VERIFY_SAMPLES, derived_rng(opts.seed, 0xF7))
        regime = "mc"
    want = round01(evaluate_many(f, perms))
    got = _dictator_values(d, perms).astype(np.int64)
    mismatches = int((want != got).sum())
    if mismatches:
        first = int(np.nonzero(want != got)[0][0])
        raise PremiseViolated(
            "emitted dictator disagrees with round(f, {0,1})",
            {
                "mismatches": mismatches,
                "checked": int(perms.shape[0]),
                "first_permutation": [int(v) + 1 for v in perms[first]],
            },
        )
    return {"verification": regime, "checked": int(perms.shape[0]), "mismatches": 0}


def dictator_decision_linf(
    f: LinearFunction, eps: float, opts: Options = DEFAULTS
) -> tuple:
    """Decide which dictator f is eps-close to in sup norm.

    Returns (Dictator, diagnostics).  For n >= the line threshold the
    corrected representation must have all nonzero cells on one line with a
    uniform sign, matching the constant's rounding; below the threshold the
    rounded function is checked to be Boolean outright (two assignment
    solves) and its line structure extracted coset by coset.  Either way the
    decision is verified pointwise against round(f, {0,1}) before returning.
    """
    if eps > opts.eps0:
        raise PremiseViolated(
            "eps exceeds the admissible sup-norm bound",
            {"eps": eps, "eps0": opts.eps0},
        )
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    n = f.n
    diagnostics: dict = {"eps": eps, "n": n}
    if n >= opts.line_threshold:
        rep = sporadic_representation_linf(
            sparse_representation_linf(f, eps, opts), opts
        )
        grid = rep.rounded_grid
        support = list(zip(*np.nonzero(grid)))
        diagnostics["path"] = "line"
        diagnostics["anchor"] = [rep.anchor[0] + 1, rep.anchor[1] + 1]
        const_dist = min(abs(rep.constant), abs(rep.constant - 1.0))
        c0 = 1 if abs(rep.constant - 1.0) < abs(rep.constant) else 0
        diagnostics["constant_distance"] = float(const_dist)
        if not support:
            flipped = c0 == 1
            decision = Dictator("row", 0, (), flipped)
        else:
            values = np.array([grid[i, j] for i, j in support])
            if not (np.all(values == 1) or np.all(values == -1)):
                raise PremiseViolated(
                    "support of the corrected grid has mixed or non-unit signs",
                    {"cells": [[int(i) + 1, int(j) + 1] for i, j in support]},
                )
            sign = int(values[0])
            rows = {i for i, _ in support}
            cols = {j for _, j in support}
            if len(rows) == 1:
                orientation, index = "row", int(next(iter(rows)))
                targets = tuple(sorted(int(j) for _, j in support))
            elif len(cols) == 1:
                orientation, index = "col", int(next(iter(cols)))
                targets = tuple(sorted(int(i) for i, _ in support))
            else:
                raise PremiseViolated(
                    "support of the corrected grid is not confined to one line",
                    {"cells": [[int(i) + 1, int(j) + 1] for i, j in support]},
                )
            flipped = sign == -1
            if (1 if flipped else 0) != c0:
                raise PremiseViolated(
                    "constant and support sign disagree",
                    {"constant": rep.constant, "sign": sign},
                )
            decision = Dictator(orientation, index, targets, flipped)
    else:
        rep = sparse_representation_linf(f, eps, opts)
        diagnostics["path"] = "efp"
        diagnostics["anchor"] = [rep.anchor[0] + 1, rep.anchor[1] + 1]
        h = LinearFunction(
            float(round_int(rep.constant)), rep.rounded_grid.astype(np.float64)
        )
        lo, hi = value_range(h)
        if lo < -opts.tau or hi > 1.0 + opts.tau:
            raise PremiseViolated(
                "rounded function is not Boolean",
                {"min": lo, "max": hi},
            )
        if n <= opts.exact_threshold:
            vals = value_table(h).values
            assert set(np.unique(vals)) <= {0.0, 1.0}
        found = efp_dictator(h, opts.tau)
        if found is None:
            raise PremiseViolated(
                "rounded Boolean function does not depend on a single line",
                {"min": lo, "max": hi},
            )
        orientation, index, targets = found
        if len(targets) > n / 2:
            targets = tuple(sorted(set(range(n)) - set(targets)))
            flipped = True
        else:
            flipped = False
        decision = Dictator(orientation, index, targets, flipped)
    diagnostics.update(_verify_decision(f, decision, opts))
    return decision, diagnostics


def analyze_linf(f: LinearFunction, eps: float, opts: Options = DEFAULTS) -> StructureReport:
    """Dictator decision wrapped as a structure report.

    epsilon in the metrics is the measured sup-norm distance to Boolean
    (a lower bound when sampled); closeness is the observed disagreement
    rate of round(f, {0,1}) with the emitted dictator — zero by construction,
    since verification would have failed otherwise.
    """
    decision, diagnostics = dictator_decision_linf(f, eps, opts)
    rep = dist_to_boolean(f, "linf", opts.samples, opts.seed, opts.exact_threshold)
    diagnostics["epsilon_lower_bound_only"] = rep.lower_bound_only
    if decision.orientation == "row":
        cells = tuple((decision.index, t) for t in decision.targets)
    else:
        cells = tuple((t, decision.index) for t in decision.targets)
    metrics = {
        "epsilon": rep.value,
        "closeness": 0.0,
        "regime": rep.regime,
        "half_width": rep.half_width,
    }
    return StructureReport(
        verdict="Dictator",
        n=f.n,
        cells=cells,
        flipped=decision.flipped,
        metrics=metrics,
        diagnostics=diagnostics,
        dictator=decision,
    )
