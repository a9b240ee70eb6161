"""Degree-at-most-1 functions on S_n and their distance computations.

A linear function is f(pi) = constant + sum_{i,j} coeff[i, j] * x_{i,j}(pi)
where x_{i,j} indicates pi(i) = j.  The representation is never unique: the
indicators satisfy sum_j x_{i,j} = 1 for each row and sum_i x_{i,j} = 1 for
each column, so 2n - 1 independent shifts change the coefficients without
changing the function.  Equality of functions therefore always means equality
of values, and every distance here is a statement about values.

Closed forms used throughout (E over uniform pi):

    E[x_{i,j}]              = 1/n
    Cov(x_{i,j}, x_{k,l})   = (n-1)/n^2          identical cells
                            = -1/n^2             exactly one shared line
                            = 1/(n^2 (n-1))      no shared line

Expanding E[(sum delta_{i,j} x_{i,j} - mean)^2] by bilinearity and grouping
pairs by how many lines they share gives the O(n^2) centered norm in
``centered_sq_norm``; distances between linear functions reduce to it.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import EXACT_THRESHOLD, TAU, Z99, CapacityError
from .perms import all_permutations, derived_rng, sample_permutations

__all__ = [
    "LinearFunction",
    "ValueTable",
    "evaluate",
    "evaluate_many",
    "value_table",
    "pair_covariance",
    "centered_sq_norm",
    "distance_l2_between",
    "recenter",
    "DistanceReport",
    "dist_to_boolean",
    "degree_le1_projection",
    "closeness_to_linear",
    "value_range",
    "is_boolean",
    "efp_dictator",
    "dist01",
    "round01",
    "round_pm1",
    "round_int",
]


@dataclass(frozen=True)
class LinearFunction:
    """Constant plus an n x n coefficient grid.  Immutable.

    >>> f = LinearFunction.from_cells(3, {(0, 0): 1.0})
    >>> evaluate(f, [0, 1, 2]), evaluate(f, [1, 0, 2])
    (1.0, 0.0)
    """

    constant: float
    coeff: np.ndarray

    def __post_init__(self):
        grid = np.array(self.coeff, dtype=np.float64)
        if grid.ndim != 2 or grid.shape[0] != grid.shape[1] or grid.shape[0] < 1:
            raise ValueError("coefficients must form a square grid")
        grid.setflags(write=False)
        object.__setattr__(self, "coeff", grid)
        object.__setattr__(self, "constant", float(self.constant))

    @property
    def n(self) -> int:
        return self.coeff.shape[0]

    @classmethod
    def from_cells(cls, n: int, cells: dict, constant: float = 0.0) -> "LinearFunction":
        grid = np.zeros((n, n))
        for (i, j), c in cells.items():
            grid[i, j] = c
        return cls(constant, grid)

    def mean(self) -> float:
        return self.constant + float(self.coeff.sum()) / self.n

    def __neg__(self) -> "LinearFunction":
        return LinearFunction(-self.constant, -self.coeff)

    def __add__(self, other):
        if isinstance(other, LinearFunction):
            if other.n != self.n:
                raise ValueError("size mismatch")
            return LinearFunction(self.constant + other.constant, self.coeff + other.coeff)
        return LinearFunction(self.constant + float(other), self.coeff)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        if isinstance(other, LinearFunction):
            return self.__add__(-other)
        return LinearFunction(self.constant - float(other), self.coeff)

    def __rsub__(self, other):
        return (-self).__add__(float(other))

    def to_json_dict(self) -> dict:
        cells = [
            {"i": int(i) + 1, "j": int(j) + 1, "c": float(self.coeff[i, j])}
            for i, j in zip(*np.nonzero(self.coeff))
        ]
        return {"n": self.n, "constant": self.constant, "coeffs": cells}

    @classmethod
    def from_json_dict(cls, data: dict) -> "LinearFunction":
        n = int(data["n"])
        if n < 1:
            raise ValueError("n must be positive")
        grid = np.zeros((n, n))
        for k, entry in enumerate(data.get("coeffs", [])):
            i, j = int(entry["i"]) - 1, int(entry["j"]) - 1
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"coeffs[{k}]: cell ({entry['i']}, {entry['j']}) outside 1..{n}")
            grid[i, j] = float(entry["c"])
        return cls(float(data.get("constant", 0.0)), grid)


@dataclass(frozen=True)
class ValueTable:
    """Explicit values over all of S_n, in lexicographic permutation order."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != (factorial(self.n),):
            raise ValueError(f"expected {factorial(self.n)} values for n={self.n}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def mean(self) -> float:
        return float(self.values.mean())

    def to_json_dict(self) -> dict:
        return {"n": self.n, "values": [float(v) for v in self.values]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "ValueTable":
        return cls(int(data["n"]), np.asarray(data["values"], dtype=np.float64))


def evaluate(f: LinearFunction, perm) -> float:
    p = np.asarray(perm, dtype=np.int64)
    return float(f.constant + f.coeff[np.arange(f.n), p].sum())


def evaluate_many(f: LinearFunction, perms: np.ndarray) -> np.ndarray:
    """Values of f on each row of a (m, n) permutation array."""
    vals = np.full(perms.shape[0], f.constant)
    for i in range(f.n):
        vals += f.coeff[i, perms[:, i]]
    return vals


def value_table(f: LinearFunction) -> ValueTable:
    if f.n > EXACT_THRESHOLD:
        raise CapacityError(f"value table for n={f.n} would have {f.n}! entries")
    return ValueTable(f.n, evaluate_many(f, all_permutations(f.n)))


# ---------------------------------------------------------------------------
# moments and distances


def pair_covariance(n: int, cell_a, cell_b) -> float:
    """Cov(x_a, x_b) for indicator pairs, by shared-line count.

    >>> pair_covariance(2, (0, 0), (0, 0))
    0.25
    >>> pair_covariance(2, (0, 0), (0, 1))
    -0.25
    """
    (i, j), (k, l) = cell_a, cell_b
    for u, v in (cell_a, cell_b):
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError("cell outside grid")
    if i == k and j == l:
        return (n - 1) / n**2
    if i == k or j == l:
        return -1.0 / n**2
    return 1.0 / (n**2 * (n - 1))


def centered_sq_norm(delta: np.ndarray) -> float:
    """E[(g - E g)^2] for g = sum delta[i, j] x_{i,j}, in O(n^2).

    Split sum_{ab} delta_a delta_b Cov(x_a, x_b) by shared lines: with
    Q = sum delta^2, row sums R, column sums C, and T = sum delta,

        (n-1)/n^2 Q  -  (sum R^2 - Q)/n^2  -  (sum C^2 - Q)/n^2
        + (T^2 - sum R^2 - sum C^2 + Q) / (n^2 (n-1))
    """
    d = np.asarray(delta, dtype=np.float64)
    n = d.shape[0]
    if n == 1:
        return 0.0
    q = float((d * d).sum())
    rows = d.sum(axis=1)
    cols = d.sum(axis=0)
    t = float(d.sum())
    r2 = float((rows * rows).sum())
    c2 = float((cols * cols).sum())
    return (
        (n - 1) / n**2 * q
        - (r2 - q) / n**2
        - (c2 - q) / n**2
        + (t * t - r2 - c2 + q) / (n**2 * (n - 1))
    )


def distance_l2_between(f: LinearFunction, g: LinearFunction) -> float:
    """E[(f - g)^2], exact for any n via the centered closed form."""
    if f.n != g.n:
        raise ValueError("size mismatch")
    diff = f - g
    return max(0.0, centered_sq_norm(diff.coeff) + diff.mean() ** 2)


def recenter(f: LinearFunction, anchor) -> LinearFunction:
    """An equal function whose anchor row and column coefficients are zero.

    d[i, j] = c[i1, j1] + c[i, j] - c[i1, j] - c[i, j1] zeroes row i1 and
    column j1; the constant absorbs row sum + column sum - n * c[i1, j1].
    Pointwise equality holds because sum_i c[i1, pi(i)] is the full row sum
    for every permutation (and likewise for the column).
    """
    i1, j1 = anchor
    n = f.n
    if not (0 <= i1 < n and 0 <= j1 < n):
        raise ValueError("anchor outside grid")
    c = f.coeff
    d = c + c[i1, j1] - c[i1 : i1 + 1, :] - c[:, j1 : j1 + 1]
    const = f.constant + float(c[i1, :].sum() + c[:, j1].sum()) - n * float(c[i1, j1])
    return LinearFunction(const, d)


def dist01(values: np.ndarray) -> np.ndarray:
    """Pointwise distance to the nearest of {0, 1}."""
    v = np.asarray(values, dtype=np.float64)
    return np.minimum(np.abs(v), np.abs(v - 1.0))


def round01(values):
    """Round to the nearer of {0, 1}; exact halves go up."""
    return (np.asarray(values, dtype=np.float64) >= 0.5).astype(np.int64)


def round_pm1(values):
    """Round to the nearest of {0, +1, -1}; ties at +-1/2 go to 0."""
    v = np.asarray(values, dtype=np.float64)
    return np.where(np.abs(v) <= 0.5, 0, np.sign(v)).astype(np.int64)


def round_int(values):
    """Round to the nearest integer, halves away from zero avoided: half-up."""
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5).astype(np.int64)


@dataclass(frozen=True)
class DistanceReport:
    metric: str  # "l2sq" | "l0" | "linf"
    value: float
    regime: str  # "exact" | "mc"
    half_width: float = 0.0
    lower_bound_only: bool = False  # sampled sup-norms only ever under-shoot


def _metric_values(metric: str, values: np.ndarray) -> np.ndarray:
    d = dist01(values)
    if metric == "l2sq":
        return d * d
    if metric == "l0":
        return (d > TAU).astype(np.float64)
    if metric == "linf":
        return d
    raise ValueError(f"unknown metric {metric!r}")


def dist_to_boolean(
    f,
    metric: str = "l2sq",
    samples: int = 10**5,
    seed: int = 0,
    exact_threshold: int = EXACT_THRESHOLD,
) -> DistanceReport:
    """Distance from f to the set of {0,1}-valued functions.

    l2sq: E[dist(f, {0,1})^2];  l0: Pr[f not in {0,1}];  linf: max dist.
    Tables and small-n linear functions are exact by enumeration; otherwise
    Monte Carlo over ``samples`` permutations (linf becomes a lower bound).

    >>> f = LinearFunction.from_cells(2, {(0, 0): 1.0})  # Boolean already
    >>> dist_to_boolean(f, "l2sq").value
    0.0
    """
    if isinstance(f, ValueTable):
        vals = f.values
        per = _metric_values(metric, vals)
        value = float(per.max()) if metric == "linf" else float(per.mean())
        return DistanceReport(metric, value, "exact")
    if f.n <= exact_threshold:
        vals = value_table(f).values
        per = _metric_values(metric, vals)
        value = float(per.max()) if metric == "linf" else float(per.mean())
        return DistanceReport(metric, value, "exact")
    if samples < 10**3:
        raise ValueError("Monte Carlo needs at least 10^3 samples")
    rng = derived_rng(seed, 0xD1)
    top = 0.0
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(samples - done, 10**4)
        vals = evaluate_many(f, sample_permutations(f.n, m, rng))
        per = _metric_values(metric, vals)
        top = max(top, float(per.max()))
        total += float(per.sum())
        total_sq += float((per * per).sum())
        done += m
    if metric == "linf":
        return DistanceReport(metric, top, "mc", 0.0, lower_bound_only=True)
    mean = total / samples
    var = max(0.0, total_sq / samples - mean * mean) * samples / max(1, samples - 1)
    half = Z99 * (var / samples) ** 0.5
    return DistanceReport(metric, mean, "mc", half)


# ---------------------------------------------------------------------------
# projection onto degree <= 1


def _gram(n: int) -> np.ndarray:
    """Second moments of the spanning set (1, x_{0,0}, ..., x_{n-1,n-1}).

    Singular by design (the row/column relations), handled by least squares.
    """
    if n == 1:
        return np.ones((2, 2))
    size = n * n
    g = np.full((size + 1, size + 1), 1.0 / (n * (n - 1)))
    idx = np.arange(size)
    ri, ci = idx // n, idx % n
    same_row = ri[:, None] == ri[None, :]
    same_col = ci[:, None] == ci[None, :]
    inner = g[1:, 1:]
    inner[same_row ^ same_col] = 0.0
    inner[same_row & same_col] = 1.0 / n
    g[0, :] = 1.0 / n
    g[:, 0] = 1.0 / n
    g[0, 0] = 1.0
    return g


def degree_le1_projection(table: ValueTable) -> LinearFunction:
    """Orthogonal projection of a value table onto degree <= 1.

    Normal equations G w = b on the spanning set; G is singular (rank
    n^2 - 2n + 2 on the indicator block), so least squares picks the
    minimum-norm representative — the function it describes is unique.
    """
    n = table.n
    perms = all_permutations(n)
    b = np.empty(n * n + 1)
    b[0] = table.mean()
    nfact = perms.shape[0]
    for i in range(n):
        b[1 + i * n : 1 + (i + 1) * n] = (
            np.bincount(perms[:, i], weights=table.values, minlength=n) / nfact
        )
    w, *_ = np.linalg.lstsq(_gram(n), b, rcond=None)
    return LinearFunction(float(w[0]), w[1:].reshape(n, n))


def closeness_to_linear(table: ValueTable) -> float:
    """min over degree <= 1 g of E[(f - g)^2], exactly (projection residual)."""
    proj = degree_le1_projection(table)
    resid = table.values - evaluate_many(proj, all_permutations(table.n))
    return float((resid * resid).mean())


# ---------------------------------------------------------------------------
# exact value range, Booleanness, and the dictator shape of Boolean functions


def value_range(f: LinearFunction) -> tuple:
    """(min, max) of f over S_n, via two assignment solves.

    min/max of constant + sum_i coeff[i, pi(i)] over permutations is exactly
    the linear assignment optimum on the coefficient grid.
    """
    rows = np.arange(f.n)
    cols_min = linear_sum_assignment(f.coeff)[1]
    lo = f.constant + float(f.coeff[rows, cols_min].sum())
    cols_max = linear_sum_assignment(-f.coeff)[1]
    hi = f.constant + float(f.coeff[rows, cols_max].sum())
    return lo, hi


def is_boolean(f: LinearFunction, tau: float = TAU) -> bool:
    """Whether f takes only values in {0, 1} (within tau), for any n.

    An integer-valued f is Boolean iff its range lies in [0, 1]; for general
    f we additionally need every attained value to be near an integer, which
    the range check plus a coefficient-integrality test certifies.  Small n
    falls back to full enumeration, so non-integral Boolean representations
    are still recognized there.
    """
    if f.n <= EXACT_THRESHOLD:
        vals = value_table(f).values
        return bool((dist01(vals) <= tau).all())
    lo, hi = value_range(f)
    if lo < -tau or hi > 1.0 + tau:
        return False
    # Range inside [0,1]; certify integrality.  Anchored defects integral
    # means all values share one fractional part, so checking one value
    # (here the minimum) finishes the job.
    d = f.coeff - f.coeff[:, :1] - f.coeff[:1, :] + f.coeff[0, 0]
    if np.abs(d - np.round(d)).max() > tau:
        return False
    return abs(lo - round(lo)) <= max(tau, f.n * tau)


def _coset_range(f: LinearFunction, orientation: str, line: int, target: int) -> tuple:
    """(min, max) of f over the coset pi(line) = target (or pi^{-1}), n >= 2."""
    n = f.n
    if orientation == "row":
        keep_r = [i for i in range(n) if i != line]
        keep_c = [j for j in range(n) if j != target]
        base = f.constant + float(f.coeff[line, target])
    else:
        keep_r = [i for i in range(n) if i != target]
        keep_c = [j for j in range(n) if j != line]
        base = f.constant + float(f.coeff[target, line])
    sub = f.coeff[np.ix_(keep_r, keep_c)]
    r = np.arange(n - 1)
    lo = base + float(sub[r, linear_sum_assignment(sub)[1]].sum())
    hi = base + float(sub[r, linear_sum_assignment(-sub)[1]].sum())
    return lo, hi


def efp_dictator(f: LinearFunction, tau: float = TAU):
    """For Boolean f, the line it depends on: (orientation, index, targets).

    Every Boolean degree <= 1 function equals sum_{j in T} x_{I,j} for some
    row I (or the column transpose): it is constant on each coset of a single
    line.  Returns ("row" | "col", line_index, sorted target tuple), checking
    rows before columns and lower indices first; None if f is not actually a
    one-line function.  Cost: at most 2 n^2 assignment solves.
    """
    n = f.n
    if n == 1:
        v = f.constant + float(f.coeff[0, 0])
        if abs(v - 1.0) <= tau:
            return ("row", 0, (0,))
        if abs(v) <= tau:
            return ("row", 0, ())
        return None
    for orientation in ("row", "col"):
        for line in range(n):
            targets = []
            ok = True
            for target in range(n):
                lo, hi = _coset_range(f, orientation, line, target)
                if hi - lo > tau:
                    ok = False
                    break
                if abs(lo - 1.0) <= tau:
                    targets.append(target)
                elif abs(lo) > tau:
                    ok = False
                    break
            if ok:
                return (orientation, line, tuple(targets))
    return None
