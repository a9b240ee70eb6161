"""Structured outputs: coset families, dictators, and analysis reports.

A coset (i, j) is the set of permutations with pi(i) = j.  Two cosets are
disjoint exactly when their cells share a row or a column (but are not
identical); sharing neither line leaves (n-2)! common permutations.  For a
family given by a cell set, the number P of non-disjoint unordered pairs has
the closed form

    P = C(m, 2) - sum_i C(r_i, 2) - sum_j C(c_j, 2)

with r_i, c_j the row and column multiplicities, because a pair is disjoint
iff it shares a line and no two distinct cells share both lines.  P controls
how far the indicator-sum h = sum_cells x is from the union's indicator:
E[h (h - 1)] = 2 P / (n (n - 1)) exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .linear import LinearFunction

__all__ = [
    "CosetFamily",
    "disjointness_stats",
    "Dictator",
    "StructureReport",
    "family_sum_function",
    "dictator_sum_function",
]


def disjointness_stats(n: int, cells) -> tuple:
    """(family size m, non-disjoint pair count P) for a cell collection.

    >>> disjointness_stats(4, [(0, 0), (1, 1), (2, 2)])
    (3, 3)
    >>> disjointness_stats(4, [(0, 0), (0, 1), (0, 2)])
    (3, 0)
    """
    cs = sorted({(int(i), int(j)) for i, j in cells})
    m = len(cs)
    rows = {}
    colmult = {}
    for i, j in cs:
        rows[i] = rows.get(i, 0) + 1
        colmult[j] = colmult.get(j, 0) + 1
    p = comb(m, 2)
    p -= sum(comb(r, 2) for r in rows.values())
    p -= sum(comb(c, 2) for c in colmult.values())
    return m, p


@dataclass(frozen=True)
class CosetFamily:
    """A finite family of cosets, stored as sorted cells with its overlap count."""

    n: int
    cells: tuple  # sorted ((i, j), ...)
    size: int
    nondisjoint_pairs: int

    @classmethod
    def of(cls, n: int, cells) -> "CosetFamily":
        cs = tuple(sorted({(int(i), int(j)) for i, j in cells}))
        for i, j in cs:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"cell {(i, j)} outside {n}x{n} grid")
        m, p = disjointness_stats(n, cs)
        return cls(n, cs, m, p)

    def expected_pair_overlap(self) -> float:
        """E[h (h - 1)] for h = sum of the family's indicators, exactly."""
        if self.n < 2:
            return 0.0
        return 2.0 * self.nondisjoint_pairs / (self.n * (self.n - 1))


def family_sum_function(family: CosetFamily) -> LinearFunction:
    """h = sum over family cells of x_{i,j} as a LinearFunction."""
    return LinearFunction.from_cells(family.n, {c: 1.0 for c in family.cells})


@dataclass(frozen=True)
class Dictator:
    """A one-line Boolean function: [pi maps line 'index' into targets].

    orientation "row" reads pi(index) in targets; "col" reads
    pi^{-1}(index) in targets.  flipped negates: 1 - [...].
    """

    orientation: str
    index: int
    targets: tuple
    flipped: bool = False

    def __post_init__(self):
        if self.orientation not in ("row", "col"):
            raise ValueError("orientation must be 'row' or 'col'")
        object.__setattr__(self, "targets", tuple(sorted(int(t) for t in self.targets)))

    def to_json_dict(self) -> dict:
        return {
            "orientation": self.orientation,
            "index": self.index + 1,
            "targets": [t + 1 for t in self.targets],
            "flipped": self.flipped,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Dictator":
        return cls(
            data["orientation"],
            int(data["index"]) - 1,
            tuple(int(t) - 1 for t in data["targets"]),
            bool(data.get("flipped", False)),
        )


def dictator_sum_function(d: Dictator, n: int) -> LinearFunction:
    """The dictator's value as a LinearFunction (exact: targets are disjoint)."""
    if d.orientation == "row":
        cells = {(d.index, t): 1.0 for t in d.targets}
    else:
        cells = {(t, d.index): 1.0 for t in d.targets}
    h = LinearFunction.from_cells(n, cells)
    return (1.0 - h) if d.flipped else h


@dataclass(frozen=True)
class StructureReport:
    """Recovered structure plus the metrics that certify it.

    verdict is one of Family, Dictator, ConstantZero, ConstantOne.  cells are
    the family's cells; flipped says the approximation is 1 - (cell sum).
    metrics carries epsilon (distance of the input to Boolean), closeness
    (squared distance of the input to the emitted approximation), the regime
    those were computed in, and a half_width for any sampled figure.
    """

    verdict: str
    n: int
    cells: tuple
    flipped: bool
    metrics: dict
    diagnostics: dict = field(default_factory=dict)
    dictator: Dictator | None = None

    def to_json_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "n": self.n,
            "cells": [[i + 1, j + 1] for i, j in self.cells],
            "flipped": self.flipped,
            "metrics": self.metrics,
            "diagnostics": self.diagnostics,
        }
        if self.dictator is not None:
            out["dictator"] = self.dictator.to_json_dict()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2, default=_jsonable)


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"cannot serialize {type(value)!r}")
