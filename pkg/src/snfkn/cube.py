"""Restriction to embedded Boolean cubes and rounding on the cube.

A square system partitions rows and values into 2x2 blocks; choosing straight
or crossed matchings inside every block embeds {0,1}^m into S_n.  Restricting
a linear function f on S_n along this embedding yields an affine function on
the cube, computed in closed form by ``restrict_to_square_system``:

  * the coefficient of x_t is c[a1,b1] + c[a2,b2] - c[a1,b2] - c[a2,b1]
    (the defect of square t), and
  * the constant collects the crossed-matching entries c[a1,b2] + c[a2,b1]
    over all squares, the singleton entry when n is odd, and f's constant.

Rounding an affine u(x) = c + sum u_t x_t toward Boolean-valued functions on
the cube only ever needs the candidates 0, 1, x_t, 1 - x_t: the squared
distance to each candidate is (mean difference)^2 + sum (coef difference)^2/4
because the centered characters x_t - 1/2 are orthogonal with variance 1/4.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TAU, PremiseViolated
from .linear import LinearFunction
from .perms import SquareSystem

__all__ = [
    "CubeLinear",
    "CubeForm",
    "restrict_to_square_system",
    "evaluate_cube",
    "cube_l2sq_between",
    "fkn_round_cube",
    "l0_form_check",
    "linf_round_cube",
]


@dataclass(frozen=True)
class CubeLinear:
    """Affine function on {0,1}^m: constant + sum coef[t] * x_t."""

    constant: float
    coef: np.ndarray

    def __post_init__(self):
        c = np.array(self.coef, dtype=np.float64)
        if c.ndim != 1:
            raise ValueError("cube coefficients must be a vector")
        c.setflags(write=False)
        object.__setattr__(self, "coef", c)
        object.__setattr__(self, "constant", float(self.constant))

    @property
    def m(self) -> int:
        return self.coef.shape[0]

    def mean(self) -> float:
        return self.constant + float(self.coef.sum()) / 2.0


@dataclass(frozen=True)
class CubeForm:
    """One of the four Boolean juntas an affine cube function can round to.

    kind is "zero", "one", "var" (x_index), or "negvar" (1 - x_index).
    """

    kind: str
    index: int | None = None

    def as_cube_linear(self, m: int) -> CubeLinear:
        coef = np.zeros(m)
        if self.kind == "zero":
            return CubeLinear(0.0, coef)
        if self.kind == "one":
            return CubeLinear(1.0, coef)
        coef[self.index] = 1.0 if self.kind == "var" else -1.0
        return CubeLinear(0.0 if self.kind == "var" else 1.0, coef)


def restrict_to_square_system(f: LinearFunction, system: SquareSystem) -> CubeLinear:
    """The affine function on {0,1}^m induced by f along the embedding.

    x_t = 1 selects the straight matching of square t.
    """
    if f.n != system.n:
        raise ValueError("size mismatch")
    c = f.coeff
    coef = np.empty(system.m)
    constant = f.constant
    for t in range(system.m):
        (a1, a2), (b1, b2) = system.square(t)
        coef[t] = c[a1, b1] + c[a2, b2] - c[a1, b2] - c[a2, b1]
        constant += c[a1, b2] + c[a2, b1]
    if system.singleton is not None:
        i, j = system.singleton
        constant += c[i, j]
    return CubeLinear(constant, coef)


def evaluate_cube(g: CubeLinear, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(g.constant + (g.coef * x).sum())


def cube_l2sq_between(g: CubeLinear, h: CubeLinear) -> float:
    """E[(g - h)^2] over uniform cube points, exactly."""
    if g.m != h.m:
        raise ValueError("size mismatch")
    dc = g.coef - h.coef
    dm = g.mean() - h.mean()
    return dm * dm + float((dc * dc).sum()) / 4.0


def fkn_round_cube(g: CubeLinear):
    """Nearest Boolean junta to an affine cube function.

    Scans the candidates in the fixed order 0, 1, x_1..x_m, 1-x_1..1-x_m and
    keeps the first minimizer (strict improvement replaces), so ties resolve
    deterministically.  Returns (CubeForm, squared distance).
    """
    m = g.m
    best = CubeForm("zero")
    best_d = cube_l2sq_between(g, best.as_cube_linear(m))
    candidates = [CubeForm("one")]
    candidates += [CubeForm("var", t) for t in range(m)]
    candidates += [CubeForm("negvar", t) for t in range(m)]
    for form in candidates:
        d = cube_l2sq_between(g, form.as_cube_linear(m))
        if d < best_d:
            best, best_d = form, d
    return best, best_d


def l0_form_check(g: CubeLinear, tau: float = TAU):
    """The exact Boolean junta g equals (within tau), or None.

    >>> l0_form_check(CubeLinear(0.0, np.zeros(0))).kind
    'zero'
    """
    m = g.m
    for form in (
        [CubeForm("zero"), CubeForm("one")]
        + [CubeForm("var", t) for t in range(m)]
        + [CubeForm("negvar", t) for t in range(m)]
    ):
        h = form.as_cube_linear(m)
        if abs(g.constant - h.constant) <= tau and np.abs(g.coef - h.coef).max(initial=0.0) <= tau:
            return form
    return None


def linf_round_cube(g: CubeLinear, eps: float) -> CubeForm:
    """Boolean junta within sup-norm reach of g, assuming one exists.

    Requires eps < 1/4 so the rounding targets are unambiguous.  The constant
    must be eps-close to {0, 1}; after orienting (subtracting from 1 when the
    constant rounds to 1), every coefficient must be 2*eps-close to {0, 1}
    and at most one may round to 1.  Violations raise PremiseViolated with
    the offending indices and distances.
    """
    if not 0 <= eps < 0.25:
        raise ValueError("linf rounding needs 0 <= eps < 1/4")
    c = g.constant
    if abs(c) <= eps:
        flip = False
    elif abs(c - 1.0) <= eps:
        flip = True
    else:
        raise PremiseViolated(
            "constant is not eps-close to {0, 1}",
            {"constant": c, "distance": float(min(abs(c), abs(c - 1.0))), "eps": eps},
        )
    w = -g.coef if flip else g.coef
    near0 = np.abs(w) <= 2 * eps
    near1 = np.abs(w - 1.0) <= 2 * eps
    bad = ~(near0 | near1)
    if bad.any():
        idx = int(np.argmax(np.minimum(np.abs(w), np.abs(w - 1.0))))
        raise PremiseViolated(
            "coefficient is not 2*eps-close to {0, 1}",
            {
                "indices": [int(t) for t in np.nonzero(bad)[0]],
                "worst_index": idx,
                "worst_distance": float(min(abs(w[idx]), abs(w[idx] - 1.0))),
                "eps": eps,
            },
        )
    ones = np.nonzero(near1)[0]
    if len(ones) > 1:
        raise PremiseViolated(
            "more than one coefficient rounds to 1",
            {"indices": [int(t) for t in ones], "eps": eps},
        )
    if len(ones) == 0:
        return CubeForm("one" if flip else "zero")
    t = int(ones[0])
    return CubeForm("negvar", t) if flip else CubeForm("var", t)
