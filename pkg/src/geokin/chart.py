"""Darboux charts for the four geometries and expressions living on them.

Coordinate layouts are fixed once and for all (n >= 1 pairs):

    symplectic    (q1..qn, p1..pn)          dim 2n
    cosymplectic  (t, q1..qn, p1..pn)       dim 2n+1
    contact       (q1..qn, p1..pn, z)       dim 2n+1
    cocontact     (t, q1..qn, p1..pn, z)    dim 2n+2

Canonical structure in these coordinates: the Liouville form
Theta = p_i dq^i, the clock form tau = dt, the contact form
eta = dz - p_i dq^i, and d(eta) = dq^i wedge dp_i (the same matrix as
the symplectic two-form).  The Reeb fields are d/dt (for tau) and d/dz
(for eta); their defining contractions are asserted in the test suite.

One-forms and vector fields are plain component tuples of exact
polynomials over the chart's coordinates, in chart coordinate order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .poly import Poly, Rational, parse


class ChartKind(str, Enum):
    SYMPLECTIC = "symplectic"
    COSYMPLECTIC = "cosymplectic"
    CONTACT = "contact"
    COCONTACT = "cocontact"

    @property
    def has_time(self) -> bool:
        return self in (ChartKind.COSYMPLECTIC, ChartKind.COCONTACT)

    @property
    def has_z(self) -> bool:
        return self in (ChartKind.CONTACT, ChartKind.COCONTACT)


@dataclass(frozen=True)
class Chart:
    """A Darboux chart: a kind plus the number of (q, p) pairs."""

    kind: ChartKind
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("a chart needs at least one (q, p) pair")

    @property
    def dim(self) -> int:
        base = 2 * self.n
        return base + self.kind.has_time + self.kind.has_z

    @property
    def has_time(self) -> bool:
        return self.kind.has_time

    @property
    def has_z(self) -> bool:
        return self.kind.has_z

    @property
    def coord_names(self) -> tuple[str, ...]:
        names: list[str] = []
        if self.has_time:
            names.append("t")
        names.extend(f"q{i}" for i in range(1, self.n + 1))
        names.extend(f"p{i}" for i in range(1, self.n + 1))
        if self.has_z:
            names.append("z")
        return tuple(names)

    # slot indices; q_slot/p_slot take 1-based i matching the names q1..qn

    @property
    def t_slot(self) -> int:
        if not self.has_time:
            raise ValueError(f"{self.kind.value} chart has no time coordinate")
        return 0

    def q_slot(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise ValueError(f"q index {i} out of range 1..{self.n}")
        return (1 if self.has_time else 0) + (i - 1)

    def p_slot(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise ValueError(f"p index {i} out of range 1..{self.n}")
        return (1 if self.has_time else 0) + self.n + (i - 1)

    @property
    def z_slot(self) -> int:
        if not self.has_z:
            raise ValueError(f"{self.kind.value} chart has no z coordinate")
        return self.dim - 1

    # polynomial helpers on this chart

    def coordinate(self, slot: int) -> Poly:
        return Poly.variable(self.dim, slot)

    def zero(self) -> Poly:
        return Poly.zero(self.dim)

    def const(self, value: Rational) -> Poly:
        return Poly.const(self.dim, value)

    def parse(self, text: str) -> Poly:
        """Parse an expression in this chart's coordinates."""
        return parse(text, self.coord_names)


def _check_components(chart: Chart, components: Sequence[Poly]) -> tuple[Poly, ...]:
    comps = tuple(components)
    if len(comps) != chart.dim:
        raise ValueError(f"expected {chart.dim} components, got {len(comps)}")
    for c in comps:
        if c.dim != chart.dim:
            raise ValueError(f"component dimension {c.dim} does not match chart dim {chart.dim}")
    return comps


@dataclass(frozen=True)
class OneFormExpr:
    """A one-form alpha = alpha_k dx^k with polynomial components."""

    chart: Chart
    components: tuple[Poly, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", _check_components(self.chart, self.components))

    def __add__(self, other: "OneFormExpr") -> "OneFormExpr":
        if other.chart != self.chart:
            raise ValueError("one-forms live on different charts")
        return OneFormExpr(self.chart, tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "OneFormExpr") -> "OneFormExpr":
        return self + (-other)

    def __neg__(self) -> "OneFormExpr":
        return OneFormExpr(self.chart, tuple(-a for a in self.components))

    def scaled(self, factor: Poly | Rational) -> "OneFormExpr":
        return OneFormExpr(self.chart, tuple(a * factor for a in self.components))

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.components)


@dataclass(frozen=True)
class VectorFieldExpr:
    """A vector field X = X^k d/dx^k with polynomial components."""

    chart: Chart
    components: tuple[Poly, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", _check_components(self.chart, self.components))

    def __add__(self, other: "VectorFieldExpr") -> "VectorFieldExpr":
        if other.chart != self.chart:
            raise ValueError("vector fields live on different charts")
        return VectorFieldExpr(self.chart, tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "VectorFieldExpr") -> "VectorFieldExpr":
        return self + (-other)

    def __neg__(self) -> "VectorFieldExpr":
        return VectorFieldExpr(self.chart, tuple(-a for a in self.components))

    def scaled(self, factor: Poly | Rational) -> "VectorFieldExpr":
        return VectorFieldExpr(self.chart, tuple(a * factor for a in self.components))

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.components)

    def apply_to(self, f: Poly) -> Poly:
        """Directional derivative X(f) = X^k df/dx^k."""
        if f.dim != self.chart.dim:
            raise ValueError("function dimension does not match chart")
        out = Poly.zero(f.dim)
        for k, comp in enumerate(self.components):
            if not comp.is_zero():
                out = out + comp * f.partial(k)
        return out


def zero_one_form(chart: Chart) -> OneFormExpr:
    return OneFormExpr(chart, tuple(chart.zero() for _ in range(chart.dim)))


def zero_vector_field(chart: Chart) -> VectorFieldExpr:
    return VectorFieldExpr(chart, tuple(chart.zero() for _ in range(chart.dim)))


def basis_one_form(chart: Chart, slot: int) -> OneFormExpr:
    comps = [chart.zero() for _ in range(chart.dim)]
    comps[slot] = chart.const(1)
    return OneFormExpr(chart, tuple(comps))


def basis_vector_field(chart: Chart, slot: int) -> VectorFieldExpr:
    comps = [chart.zero() for _ in range(chart.dim)]
    comps[slot] = chart.const(1)
    return VectorFieldExpr(chart, tuple(comps))


def pairing(alpha: OneFormExpr, X: VectorFieldExpr) -> Poly:
    """Pointwise pairing <alpha, X> = alpha_k X^k."""
    if alpha.chart != X.chart:
        raise ValueError("pairing requires a common chart")
    out = Poly.zero(alpha.chart.dim)
    for a, v in zip(alpha.components, X.components):
        if not (a.is_zero() or v.is_zero()):
            out = out + a * v
    return out


def differential(H: Poly, chart: Chart) -> OneFormExpr:
    """dH as a one-form on the chart."""
    if H.dim != chart.dim:
        raise ValueError("function dimension does not match chart")
    return OneFormExpr(chart, tuple(H.partial(k) for k in range(chart.dim)))


def canonical_tau(chart: Chart) -> OneFormExpr:
    """The clock form tau = dt (cosymplectic and cocontact charts)."""
    return basis_one_form(chart, chart.t_slot)


def canonical_eta(chart: Chart) -> OneFormExpr:
    """The contact form eta = dz - p_i dq^i (contact and cocontact charts)."""
    comps = [chart.zero() for _ in range(chart.dim)]
    comps[chart.z_slot] = chart.const(1)
    for i in range(1, chart.n + 1):
        comps[chart.q_slot(i)] = -chart.coordinate(chart.p_slot(i))
    return OneFormExpr(chart, tuple(comps))


def canonical_theta(chart: Chart) -> OneFormExpr:
    """The Liouville form Theta = p_i dq^i (every chart kind)."""
    comps = [chart.zero() for _ in range(chart.dim)]
    for i in range(1, chart.n + 1):
        comps[chart.q_slot(i)] = chart.coordinate(chart.p_slot(i))
    return OneFormExpr(chart, tuple(comps))


class CanonicalForms(NamedTuple):
    tau: OneFormExpr | None
    eta: OneFormExpr | None
    theta: OneFormExpr


def canonical_forms(chart: Chart) -> CanonicalForms:
    return CanonicalForms(
        tau=canonical_tau(chart) if chart.has_time else None,
        eta=canonical_eta(chart) if chart.has_z else None,
        theta=canonical_theta(chart),
    )


def reeb_tau(chart: Chart) -> VectorFieldExpr:
    """Reeb field of the clock form: d/dt."""
    return basis_vector_field(chart, chart.t_slot)


def reeb_eta(chart: Chart) -> VectorFieldExpr:
    """Reeb field of the contact form: d/dz."""
    return basis_vector_field(chart, chart.z_slot)
