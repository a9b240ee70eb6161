"""Permutation enumeration, sampling, square systems, and avoidance counts.

Permutations of {0, ..., n-1} are stored in image (one-line) form: an integer
array ``p`` of length n with ``p[i]`` the image of i.  All indices are 0-based
internally; the JSON boundary converts to the 1-based convention.

The exact avoidance probability rests on the inclusion-exclusion identity for
forbidden positions: if r_k counts the ways to place k non-attacking rooks on
the forbidden board S, then

    #{pi avoiding S} = sum_k (-1)^k r_k (n-k)!

The rook numbers come from a subset dynamic program over the lines of the
smaller touched side of the board, so boards touching at most
``BOARD_LINE_CAP`` rows or columns are exact regardless of n.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .config import (
    BOARD_EXACT_INT_LINES,
    BOARD_LINE_CAP,
    EXACT_THRESHOLD,
    Z99,
    CapacityError,
)

__all__ = [
    "derived_rng",
    "all_permutations",
    "sample_permutations",
    "is_permutation",
    "CellSet",
    "AvoidanceEstimate",
    "avoid_probability",
    "conditional_avoid_probability",
    "SquareSystem",
    "sample_square_system",
    "permutation_from_cube_point",
]


def derived_rng(seed: int, *key: int) -> np.random.Generator:
    """A generator derived from (seed, key).

    Distinct keys give independent streams, so parallel sweeps can hand each
    task its own reproducible generator regardless of scheduling.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


@lru_cache(maxsize=None)
def all_permutations(n: int) -> np.ndarray:
    """All permutations of {0..n-1} in lexicographic order, one per row.

    Row 0 is the identity.  Read-only (n!, n) int8 array, cached per n.

    >>> all_permutations(2).tolist()
    [[0, 1], [1, 0]]
    """
    if not 1 <= n <= EXACT_THRESHOLD:
        raise CapacityError(f"refusing to enumerate {n}! permutations")
    block = np.zeros((1, 1), dtype=np.int8)
    for k in range(2, n + 1):
        prev = block  # ((k-1)!, k-1) permutations of k-1 symbols
        m = prev.shape[0]
        block = np.empty((k * m, k), dtype=np.int8)
        for v in range(k):
            rest = np.concatenate(
                [np.arange(v, dtype=np.int8), np.arange(v + 1, k, dtype=np.int8)]
            )
            block[v * m : (v + 1) * m, 0] = v
            block[v * m : (v + 1) * m, 1:] = rest[prev]
    block.setflags(write=False)
    return block


def sample_permutations(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """(count, n) array of independent uniform permutations."""
    base = np.tile(np.arange(n, dtype=np.min_scalar_type(n - 1)), (count, 1))
    return rng.permuted(base, axis=1)


def is_permutation(word) -> bool:
    p = np.asarray(word)
    return p.ndim == 1 and np.array_equal(np.sort(p), np.arange(len(p)))


@dataclass(frozen=True)
class CellSet:
    """A set of cells (i, j) in the n x n grid; cell (i, j) means pi(i) = j."""

    n: int
    cells: frozenset

    def __post_init__(self):
        for i, j in self.cells:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"cell {(i, j)} outside {self.n}x{self.n} grid")

    @classmethod
    def of(cls, n: int, cells) -> "CellSet":
        return cls(n, frozenset((int(i), int(j)) for i, j in cells))

    def rows(self) -> set:
        return {i for i, _ in self.cells}

    def cols(self) -> set:
        return {j for _, j in self.cells}


@dataclass(frozen=True)
class AvoidanceEstimate:
    """Pr[pi avoids every cell of S], tagged with how it was computed.

    ``exact`` carries the Fraction when the integer path ran; for Monte Carlo
    and the float path it is None and ``half_width`` bounds the 99% CI.
    """

    p: float
    half_width: float
    regime: str  # "exact" | "exact-float" | "mc"
    exact: Fraction | None = None


def _rook_polynomial(line_of: list, other_of: list, lines: int):
    """Rook numbers r_0..r_lines of a board given per-cell line indices.

    ``line_of[c]`` is the index (< lines) of cell c on the smaller side;
    ``other_of[c]`` the coordinate on the larger side, used only to group
    cells so two rooks never share a large-side line.  Subset DP: f[U] =
    number of placements whose small-side line set is exactly U.
    """
    by_other: dict = {}
    for lo, oo in zip(line_of, other_of):
        by_other.setdefault(oo, []).append(lo)

    size = 1 << lines
    if lines <= BOARD_EXACT_INT_LINES:
        f = [0] * size
        f[0] = 1
        for group in by_other.values():
            prev = f[:]
            for lo in group:
                bit = 1 << lo
                for u in range(size):
                    if u & bit:
                        f[u] += prev[u ^ bit]
        counts = [0] * (lines + 1)
        for u in range(size):
            counts[bin(u).count("1")] += f[u]
        return counts, True
    # Wide boards: same DP in float64.  Terms in the alternating avoidance sum
    # scale like 2^k/k! relative to n!, so double precision is ample here.
    f = np.zeros(size)
    f[0] = 1.0
    u_all = np.arange(size)
    popcount = np.zeros(size, dtype=np.int64)
    for b in range(lines):
        popcount += (u_all >> b) & 1
    for group in by_other.values():
        prev = f.copy()
        for lo in group:
            bit = 1 << lo
            has = (u_all & bit) != 0
            f[has] += prev[u_all[has] ^ bit]
    counts = [float(f[popcount == k].sum()) for k in range(lines + 1)]
    return counts, False


def _count_avoiding(n: int, cells: frozenset):
    """(#avoiding, exact_flag); integer when the exact DP ran, else float."""
    if not cells:
        return factorial(n), True
    rows = sorted({i for i, _ in cells})
    cols = sorted({j for _, j in cells})
    if min(len(rows), len(cols)) > BOARD_LINE_CAP:
        raise CapacityError(
            f"forbidden board touches {len(rows)} rows and {len(cols)} columns; "
            f"exact mode needs one side <= {BOARD_LINE_CAP}"
        )
    if len(rows) <= len(cols):
        small = {i: k for k, i in enumerate(rows)}
        line_of = [small[i] for i, _ in cells]
        other_of = [j for _, j in cells]
        lines = len(rows)
    else:
        small = {j: k for k, j in enumerate(cols)}
        line_of = [small[j] for _, j in cells]
        other_of = [i for i, _ in cells]
        lines = len(cols)
    rook, exact = _rook_polynomial(line_of, other_of, lines)
    total = 0 if exact else 0.0
    for k, rk in enumerate(rook):
        if k > n:
            break
        term = rk * factorial(n - k)
        total = total + term if k % 2 == 0 else total - term
    return total, exact


def _mc_avoid(n: int, cells: frozenset, samples: int, rng: np.random.Generator):
    arr = np.array(sorted(cells), dtype=np.int64)
    hits = 0
    done = 0
    chunk = max(1, min(samples, 10**5 // max(1, n // 50 + 1)))
    while done < samples:
        m = min(chunk, samples - done)
        perms = sample_permutations(n, m, rng)
        hit = np.zeros(m, dtype=bool)
        for i, j in arr:
            hit |= perms[:, i] == j
        hits += int(hit.sum())
        done += m
    p = 1.0 - hits / samples
    half = Z99 * np.sqrt(max(p * (1.0 - p), 0.0) / samples)
    return p, float(half)


def avoid_probability(
    n: int,
    cells,
    mode: str = "exact",
    samples: int = 10**5,
    rng: np.random.Generator | None = None,
    seed: int = 0,
) -> AvoidanceEstimate:
    """Pr[pi(i) != j for every (i, j) in cells] over uniform pi in S_n.

    >>> avoid_probability(3, [(0, 0), (1, 1), (2, 2)]).exact  # derangements
    Fraction(1, 3)
    """
    cs = cells if isinstance(cells, CellSet) else CellSet.of(n, cells)
    if cs.n != n:
        raise ValueError("cell set built for a different n")
    if mode == "exact":
        count, exact = _count_avoiding(n, cs.cells)
        if exact:
            frac = Fraction(count, factorial(n))
            return AvoidanceEstimate(float(frac), 0.0, "exact", frac)
        return AvoidanceEstimate(count / factorial(n), 0.0, "exact-float", None)
    if mode == "mc":
        if samples < 10**3:
            raise ValueError("Monte Carlo needs at least 10^3 samples")
        if rng is None:
            rng = derived_rng(seed, 0xA0)
        p, half = _mc_avoid(n, cs.cells, samples, rng)
        return AvoidanceEstimate(p, half, "mc", None)
    raise ValueError(f"unknown mode {mode!r}")


def conditional_avoid_probability(
    n: int,
    cells,
    pinned,
    mode: str = "exact",
    samples: int = 10**5,
    seed: int = 0,
) -> AvoidanceEstimate:
    """Pr[pi avoids cells | pi(i) = j for each pinned (i, j)].

    Pinning k cells with distinct rows and distinct columns restricts to a
    copy of S_{n-k}; delete the pinned lines, relabel, and recurse.
    """
    cs = cells if isinstance(cells, CellSet) else CellSet.of(n, cells)
    pins = sorted((int(i), int(j)) for i, j in pinned)
    prows = [i for i, _ in pins]
    pcols = [j for _, j in pins]
    if len(set(prows)) != len(pins) or len(set(pcols)) != len(pins):
        raise ValueError("pinned cells must have pairwise distinct rows and columns")
    for i, j in pins:
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"pinned cell {(i, j)} outside grid")
        if (i, j) in cs.cells:
            return AvoidanceEstimate(0.0, 0.0, "exact", Fraction(0))
    row_map = {i: k for k, i in enumerate(sorted(set(range(n)) - set(prows)))}
    col_map = {j: k for k, j in enumerate(sorted(set(range(n)) - set(pcols)))}
    reduced = [
        (row_map[i], col_map[j])
        for i, j in cs.cells
        if i in row_map and j in col_map
    ]
    m = n - len(pins)
    if m == 0:
        return AvoidanceEstimate(1.0, 0.0, "exact", Fraction(1))
    return avoid_probability(m, reduced, mode=mode, samples=samples, seed=seed)


@dataclass(frozen=True)
class SquareSystem:
    """A partition of positions and values into 2x2 squares.

    Rows a_1..a_n and values b_1..b_n (two fresh ones per square, plus one
    leftover singleton when n is odd) define m = floor(n/2) squares; the t-th
    uses rows (a_{2t-1}, a_{2t}) and values (b_{2t-1}, b_{2t}).  Each corner
    of the Boolean m-cube picks one of the two matchings inside every square,
    giving an embedded copy of {0,1}^m inside S_n.
    """

    n: int
    a: tuple  # row order, a permutation of 0..n-1
    b: tuple  # value order, a permutation of 0..n-1

    def __post_init__(self):
        if not (is_permutation(self.a) and is_permutation(self.b)):
            raise ValueError("square system needs two orderings of 0..n-1")
        if len(self.a) != self.n or len(self.b) != self.n:
            raise ValueError("orderings must have length n")

    @property
    def m(self) -> int:
        return self.n // 2

    @property
    def singleton(self):
        if self.n % 2 == 0:
            return None
        return (self.a[-1], self.b[-1])

    def square(self, t: int):
        """((a1, a2), (b1, b2)) for square t (0-based)."""
        return (
            (self.a[2 * t], self.a[2 * t + 1]),
            (self.b[2 * t], self.b[2 * t + 1]),
        )


def sample_square_system(n: int, rng: np.random.Generator) -> SquareSystem:
    if n < 2:
        raise ValueError("square systems need n >= 2")
    return SquareSystem(
        n, tuple(int(v) for v in rng.permutation(n)), tuple(int(v) for v in rng.permutation(n))
    )


def permutation_from_cube_point(system: SquareSystem, x) -> np.ndarray:
    """The permutation at cube corner x; x_t = 1 is the straight matching.

    Straight means a_{2t-1} -> b_{2t-1}, a_{2t} -> b_{2t}; x_t = 0 crosses.
    """
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (system.m,) or not np.all((x == 0) | (x == 1)):
        raise ValueError("cube point must be a 0/1 vector of length m")
    p = np.empty(system.n, dtype=np.int64)
    for t in range(system.m):
        (a1, a2), (b1, b2) = system.square(t)
        if x[t]:
            p[a1], p[a2] = b1, b2
        else:
            p[a1], p[a2] = b2, b1
    if system.singleton is not None:
        i, j = system.singleton
        p[i] = j
    return p


def square_count(n: int) -> int:
    """Number of axis-aligned 2x2 squares (unordered row pair x column pair)."""
    return comb(n, 2) ** 2
