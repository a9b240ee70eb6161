"""Instance generators: dictators, coset families, tightness examples, noise.

Everything is deterministic given a seed; random draws go through
``derived_rng`` so distinct generator calls with the same seed stay
independent of each other and of downstream sampling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linear import LinearFunction, ValueTable, dist01
from .perms import derived_rng
from .reports import CosetFamily, Dictator, dictator_sum_function

__all__ = [
    "gen_dictator",
    "gen_disjoint_family",
    "gen_tightness",
    "NoiseModel",
    "apply_noise",
]


def gen_dictator(n: int, orientation: str, index: int, targets) -> LinearFunction:
    """f = sum_{t in targets} x_{index,t} (row) or x_{t,index} (col).

    targets must be a nonempty proper subset of 0..n-1; E[f] = |T|/n.

    >>> gen_dictator(4, "row", 0, [0]).mean()
    0.25
    """
    t = sorted(int(v) for v in set(targets))
    if not t or len(t) >= n:
        raise ValueError("targets must be a nonempty proper subset")
    if any(not 0 <= v < n for v in t):
        raise ValueError("targets out of range")
    if not 0 <= index < n:
        raise ValueError("index out of range")
    return dictator_sum_function(Dictator(orientation, index, tuple(t)), n)


def gen_disjoint_family(
    n: int,
    m: int,
    mode: str = "uniform",
    k_off: int = 0,
    seed: int = 0,
) -> CosetFamily:
    """A random coset family with m cells.

    uniform: m distinct cells without replacement.  heavy-line: m - k_off
    cells on one random row plus k_off off-line cells chosen with distinct
    columns avoiding the line's occupied columns, so the non-disjoint pair
    count is exactly (m - k_off) * k_off plus the pairs among the off-line
    cells themselves.
    """
    if not 0 <= m <= n * n:
        raise ValueError("family size out of range")
    rng = derived_rng(seed, 0x6E)
    if mode == "uniform":
        flat = rng.choice(n * n, size=m, replace=False)
        cells = [(int(v) // n, int(v) % n) for v in flat]
        return CosetFamily.of(n, cells)
    if mode == "heavy-line":
        on = m - k_off
        if k_off < 0 or on < 0 or on > n or k_off > n:
            raise ValueError("infeasible heavy-line split")
        row = int(rng.integers(0, n))
        line_cols = [int(v) for v in rng.choice(n, size=on, replace=False)]
        cells = [(row, j) for j in line_cols]
        if k_off:
            free_cols = [j for j in range(n) if j not in line_cols]
            if len(free_cols) < k_off or n - 1 < 1:
                raise ValueError("no room for off-line cells")
            off_cols = rng.choice(len(free_cols), size=k_off, replace=False)
            off_rows = rng.choice(
                [i for i in range(n) if i != row], size=k_off, replace=True
            )
            cells += [
                (int(i), free_cols[int(jc)]) for i, jc in zip(off_rows, off_cols)
            ]
        return CosetFamily.of(n, cells)
    raise ValueError(f"unknown mode {mode!r}")


def gen_tightness(n: int, delta: float, eps: float) -> LinearFunction:
    """The two-row tradeoff example: a delta-row plus an (eps/delta)-row.

    f = sum_{j < floor(delta n)} x_{0,j} + sum_{j < floor((eps/delta) n)} x_{1,j}.
    Roughly (delta + eps/delta)-far from constant but only about eps-far
    from Boolean, witnessing that structure recovery cannot beat min(delta,
    eps/delta) in general.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    # Floors of delta*n and (eps/delta)*n as real-number expressions; the
    # 1e-9 nudge keeps binary float dust (0.02/0.2*10 = 0.999...9) from
    # dropping a whole row.
    k1 = int(np.floor(delta * n + 1e-9))
    k2 = int(np.floor(eps / delta * n + 1e-9))
    if k1 < 1:
        raise ValueError("floor(delta n) must be at least 1")
    if k2 > n or k1 > n:
        raise ValueError("row supports exceed n")
    cells = {(0, j): 1.0 for j in range(k1)}
    for j in range(k2):
        cells[(1, j)] = cells.get((1, j), 0.0) + 1.0
    return LinearFunction.from_cells(n, cells)


@dataclass(frozen=True)
class NoiseModel:
    """kind in {"uniform", "gaussian", "corrupt_k", "flip_outputs"}.

    uniform   — add U(-amplitude, +amplitude) to every coefficient
    gaussian  — add N(0, sigma^2) to every coefficient
    corrupt_k — replace k distinct uniformly chosen coefficients with
                U(-magnitude, +magnitude) draws
    flip_outputs — complement each Boolean table entry with prob ``prob``
    """

    kind: str
    amplitude: float = 0.0
    sigma: float = 0.0
    k: int = 0
    magnitude: float = 0.0
    prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("uniform", "gaussian", "corrupt_k", "flip_outputs"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        for name in ("amplitude", "sigma", "magnitude", "prob"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if self.prob > 1.0:
            raise ValueError("prob must be at most 1")


def apply_noise(target, model: NoiseModel):
    """Noisy copy of a LinearFunction or ValueTable, deterministic per seed."""
    rng = derived_rng(model.seed, 0x40)
    if isinstance(target, LinearFunction):
        n = target.n
        if model.kind == "uniform":
            bump = rng.uniform(-model.amplitude, model.amplitude, size=(n, n))
            return LinearFunction(target.constant, target.coeff + bump)
        if model.kind == "gaussian":
            bump = rng.normal(0.0, model.sigma, size=(n, n))
            return LinearFunction(target.constant, target.coeff + bump)
        if model.kind == "corrupt_k":
            if model.k > n * n:
                raise ValueError("cannot corrupt more cells than exist")
            flat = rng.choice(n * n, size=model.k, replace=False)
            grid = target.coeff.copy()
            for v in flat:
                grid[int(v) // n, int(v) % n] = rng.uniform(
                    -model.magnitude, model.magnitude
                )
            return LinearFunction(target.constant, grid)
        raise ValueError("flip_outputs applies to value tables only")
    if isinstance(target, ValueTable):
        if model.kind != "flip_outputs":
            raise ValueError("value tables only take flip_outputs noise")
        if dist01(target.values).max() > 1e-9:
            raise ValueError("flip_outputs needs a Boolean table")
        flips = rng.random(target.values.shape[0]) < model.prob
        return ValueTable(target.n, np.where(flips, 1.0 - target.values, target.values))
    raise ValueError(f"cannot apply noise to {type(target)!r}")
