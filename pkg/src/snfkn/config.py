"""Shared constants, tunables, and error types.

Several constants below stand in for quantities the underlying theory leaves
unspecified (the heavy-line factor K, the support cap, the small-n crossover N,
the admissible sup-norm eps0).  They are engineering defaults, exposed here and
as CLI flags so reports can state exactly which values were used.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace

# Enumeration capacity: exact oracles iterate all n! permutations up to here.
EXACT_THRESHOLD = 10

# Tolerance for "is exactly an integer / Boolean value" judgments on floats.
TAU = 1e-9

# z-score for the 99% normal-approximation confidence intervals used by all
# Monte Carlo estimates.
Z99 = 2.58

# Exact avoidance probabilities use a subset dynamic program over the smaller
# touched side of the forbidden board; refuse beyond this many lines.
BOARD_LINE_CAP = 25
# Below this many touched lines the DP runs in exact integer arithmetic;
# above, in float64 (counts may exceed 2**53 there anyway).
BOARD_EXACT_INT_LINES = 16

# Heavy-line factor: a line is heavy when it holds >= K * delta * n family
# cells.  The theory's K is an unquantified constant; 1 is our default.
K_HEAVY = 1.0

# Sparse representations report (never enforce) support sizes beyond
# SUPPORT_CAP_FACTOR * n.
SUPPORT_CAP_FACTOR = 8

# Small-n crossover for the sup-norm dictator decision, aligned with the
# line-correction threshold (the n/4 zero-count property needs room).
LINE_THRESHOLD = 12

# Largest admissible sup-norm distance for the dictator decision; the one
# concrete constant the theory provides.
EPS0 = 1.0 / 40.0

# Acceptance window for rounding the L0 representation's constant to an
# integer (0.4 instead of 0.5 so near-half-integers fail loudly).
CONST_WINDOW = 0.4

# The full anchor scan is O(n^4); beyond this n, score a deterministic seeded
# subsample of candidates instead (each candidate still scored on all cells).
ANCHOR_EXACT_LIMIT = 150
ANCHOR_SAMPLE = 64

# Square census: exact O(n^4) up to here, seeded sampling beyond.
CENSUS_EXACT_LIMIT = 150
CENSUS_SAMPLES = 10**6

# Bound on corrected-representation entries: |r| <= |e| + |alpha| + |beta|.
B_BOUND = 3

# Sample count for the mandatory spot verification of emitted dictators when
# the group is too large to enumerate.
VERIFY_SAMPLES = 10**4


class SnfknError(Exception):
    """Base class for library errors."""


class CapacityError(SnfknError):
    """An exact computation was requested beyond its feasible size."""


class PremiseViolated(SnfknError):
    """The input does not have the structure the analysis presumes.

    Carries a ``diagnostics`` dict describing what was observed.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NotNearBoolean(PremiseViolated):
    """A representation's constant is incompatible with Boolean values."""


@dataclass(frozen=True)
class Options:
    """Pipeline options; defaults mirror the module constants above."""

    exact_threshold: int = EXACT_THRESHOLD
    samples: int = 10**5
    seed: int = 0
    tau: float = TAU
    dictator_delta: float | None = None  # None = dictator-mode off
    heavy_k: float = K_HEAVY
    eps0: float = EPS0
    line_threshold: int = LINE_THRESHOLD
    support_cap_factor: int = SUPPORT_CAP_FACTOR
    anchor_exact_limit: int = ANCHOR_EXACT_LIMIT
    anchor_sample: int = ANCHOR_SAMPLE
    census_exact_limit: int = CENSUS_EXACT_LIMIT
    census_samples: int = CENSUS_SAMPLES

    def with_(self, **kw) -> "Options":
        return replace(self, **kw)


DEFAULTS = Options()


def worker_count() -> int:
    """Worker cap for parallel sweeps, from the SNFKN_THREADS env var.

    Unset, empty, or unparsable values mean serial execution.  Results are
    schedule-independent either way (per-task seeds are derived, outputs are
    sorted), so this only affects wall-clock time.
    """
    raw = os.environ.get("SNFKN_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
