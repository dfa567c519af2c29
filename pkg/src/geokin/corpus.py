"""Seeded random polynomials, one-forms and Hamiltonians.

Shared by the identity suite and the test corpus.  All draws flow from
a caller-supplied `random.Random`; nothing here touches global state,
so a fixed seed reproduces a corpus byte for byte.

Coefficients are small rationals (denominators up to 3) to keep nested
exact operations fast while still exercising non-integer arithmetic.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .chart import Chart, OneFormExpr
from .poly import Poly


def random_poly(
    rng: random.Random,
    dim: int,
    degree: int = 3,
    terms: int = 4,
    allow_zero: bool = False,
    frozen_slots: tuple[int, ...] = (),
) -> Poly:
    """A random polynomial of total degree <= `degree` with <= `terms` terms.

    `frozen_slots` lists coordinate indices the result must not depend
    on (used for strict rows and reduction chains).
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    free = [i for i in range(dim) if i not in frozen_slots]
    for _ in range(50):
        out: dict[tuple[int, ...], Fraction] = {}
        for _ in range(rng.randint(1, max(1, terms))):
            exps = [0] * dim
            for _ in range(rng.randint(0, degree)):
                if free:
                    exps[rng.choice(free)] += 1
            num = rng.choice([-4, -3, -2, -1, 1, 2, 3, 4])
            den = rng.randint(1, 3)
            key = tuple(exps)
            out[key] = out.get(key, Fraction(0)) + Fraction(num, den)
        poly = Poly(dim, out)
        if allow_zero or not poly.is_zero():
            return poly
    raise RuntimeError("failed to draw a nonzero polynomial")


def random_hamiltonian(
    rng: random.Random,
    chart: Chart,
    degree: int = 3,
    terms: int = 4,
    z_free: bool = False,
    t_free: bool = False,
) -> Poly:
    frozen: list[int] = []
    if z_free and chart.has_z:
        frozen.append(chart.z_slot)
    if t_free and chart.has_time:
        frozen.append(chart.t_slot)
    return random_poly(rng, chart.dim, degree=degree, terms=terms, frozen_slots=tuple(frozen))


def random_one_form(
    rng: random.Random, chart: Chart, degree: int = 2, terms: int = 3
) -> OneFormExpr:
    comps = tuple(
        random_poly(rng, chart.dim, degree=degree, terms=terms, allow_zero=True)
        for _ in range(chart.dim)
    )
    return OneFormExpr(chart, comps)


def random_point(rng: random.Random, dim: int, scale: float = 1.5) -> list[float]:
    return [rng.uniform(-scale, scale) for _ in range(dim)]
