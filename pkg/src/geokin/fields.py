"""The named Hamiltonian-type vector fields and their exact diagnostics.

Every field in the catalog is built through one musical formula.  Write
g for the gauge value (0, 1, or dH/dt) and e for the eta-value (-H for
the Hamiltonian and strict families, 0 for the energy family).  Then

    X = sharp(dH) + (g - <dH, R_tau>) R_tau + (e - <dH, R_eta>) R_eta

where each Reeb correction applies only on charts carrying that
structure.  Equivalently: <tau, X> = g, <eta, X> = e, and i_X d(eta)
(resp. i_X Omega) is dH minus its Reeb multiples.  On the symplectic
chart this degenerates to sharp(dH).

The catalog sizes per chart kind: symplectic 1, cosymplectic 3 (gauge
only), contact 3 (family only), cocontact 9 (family x gauge).  Strict
rows demand dH/dz == 0, checked symbolically at construction.

`diagnostics` returns the closed-form divergence, energy rate X(H), and
the eta/tau coefficients of L_X eta, all as exact polynomials.  The
module also houses the small Cartan toolbox (exterior derivative, Lie
derivatives, wedge, contractions) used to verify the displayed
Lie-derivative laws symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .chart import (
    Chart,
    ChartKind,
    OneFormExpr,
    VectorFieldExpr,
    differential,
    pairing,
    reeb_eta,
    reeb_tau,
)
from .musical import SharpVariant, sharp
from .poly import Poly


class Family(str, Enum):
    HAMILTONIAN = "hamiltonian"
    ENERGY = "energy"
    STRICT = "strict"


class Gauge(str, Enum):
    ZERO = "zero"
    ONE = "one"
    GRAD_H = "gradH"


class StrictnessError(ValueError):
    """A strict-family field was requested for a z-dependent Hamiltonian."""


@dataclass(frozen=True)
class FieldSpec:
    """Selects one row of the field catalog on a chart.

    gauge must be None exactly on charts without a time coordinate;
    cosymplectic rows are all of the Hamiltonian family.
    """

    chart: Chart
    family: Family = Family.HAMILTONIAN
    gauge: Gauge | None = None

    def __post_init__(self) -> None:
        kind = self.chart.kind
        if kind.has_time:
            if self.gauge is None:
                raise ValueError(f"{kind.value} fields need a gauge (zero, one, gradH)")
        elif self.gauge is not None:
            raise ValueError(f"{kind.value} fields take no gauge")
        if kind in (ChartKind.SYMPLECTIC, ChartKind.COSYMPLECTIC):
            if self.family is not Family.HAMILTONIAN:
                raise ValueError(f"{kind.value} charts only carry the hamiltonian family")

    @property
    def row_name(self) -> str:
        gauge = self.gauge.value if self.gauge is not None else "none"
        return f"{self.family.value}/{gauge}"


def catalog(chart: Chart) -> tuple[FieldSpec, ...]:
    """All field rows on the chart, in a fixed order."""
    if chart.kind is ChartKind.SYMPLECTIC:
        return (FieldSpec(chart),)
    if chart.kind is ChartKind.COSYMPLECTIC:
        return tuple(FieldSpec(chart, Family.HAMILTONIAN, g) for g in Gauge)
    if chart.kind is ChartKind.CONTACT:
        return tuple(FieldSpec(chart, fam, None) for fam in Family)
    return tuple(FieldSpec(chart, fam, g) for fam in Family for g in Gauge)


def _require_strictness(spec: FieldSpec, H: Poly) -> None:
    if spec.family is Family.STRICT and H.depends_on(spec.chart.z_slot):
        raise StrictnessError("strict-family fields require a z-independent Hamiltonian")


def _eta_value(spec: FieldSpec, H: Poly) -> Poly:
    # <eta, X>: -H for hamiltonian and strict rows, 0 for energy rows.
    if spec.family is Family.ENERGY:
        return Poly.zero(H.dim)
    return -H


def _gauge_value(spec: FieldSpec, H: Poly) -> Poly:
    # <tau, X>: the time component produced by the gauge.
    chart = spec.chart
    if spec.gauge is Gauge.ZERO:
        return Poly.zero(H.dim)
    if spec.gauge is Gauge.ONE:
        return Poly.const(H.dim, 1)
    return H.partial(chart.t_slot)


def make_field(spec: FieldSpec, H: Poly) -> VectorFieldExpr:
    """Construct the field via the musical route (exact)."""
    chart = spec.chart
    if H.dim != chart.dim:
        raise ValueError("Hamiltonian dimension does not match chart")
    _require_strictness(spec, H)
    X = sharp(differential(H, chart), SharpVariant.FULL)
    if chart.has_time:
        X = X + reeb_tau(chart).scaled(_gauge_value(spec, H) - H.partial(chart.t_slot))
    if chart.has_z:
        X = X + reeb_eta(chart).scaled(_eta_value(spec, H) - H.partial(chart.z_slot))
    return X


@dataclass(frozen=True)
class FieldDiagnostics:
    """Closed-form diagnostics for one catalog row.

    conformal_eta / conformal_tau are the coefficients of eta and tau in
    the displayed L_X eta law (the decomposition a*dH + b*eta + c*tau
    with a in {0,1}); None on charts lacking the respective form.
    """

    divergence: Poly
    dH_along_flow: Poly
    conformal_eta: Poly | None
    conformal_tau: Poly | None


def diagnostics(spec: FieldSpec, H: Poly) -> FieldDiagnostics:
    chart = spec.chart
    if H.dim != chart.dim:
        raise ValueError("Hamiltonian dimension does not match chart")
    _require_strictness(spec, H)
    zero = Poly.zero(chart.dim)

    div = zero
    rate = zero
    if chart.has_z:
        Hz = H.partial(chart.z_slot)
        if spec.family is Family.HAMILTONIAN:
            div = div - (chart.n + 1) * Hz
            rate = rate - Hz * H
        elif spec.family is Family.ENERGY:
            div = div - chart.n * Hz
        # strict rows contribute nothing: Hz vanishes identically
    if chart.has_time:
        Ht = H.partial(chart.t_slot)
        if spec.gauge is Gauge.ONE:
            rate = rate + Ht
        elif spec.gauge is Gauge.GRAD_H:
            div = div + Ht.partial(chart.t_slot)
            rate = rate + Ht * Ht

    conformal_eta = -H.partial(chart.z_slot) if chart.has_z else None
    conformal_tau = (
        -H.partial(chart.t_slot) if (chart.has_z and chart.has_time) else None
    )
    return FieldDiagnostics(div, rate, conformal_eta, conformal_tau)


# -- Cartan toolbox ----------------------------------------------------


@dataclass(frozen=True)
class TwoFormExpr:
    """An antisymmetric matrix of polynomial components B_{jk}."""

    chart: Chart
    components: tuple[tuple[Poly, ...], ...]

    def __post_init__(self) -> None:
        d = self.chart.dim
        comps = tuple(tuple(row) for row in self.components)
        if len(comps) != d or any(len(row) != d for row in comps):
            raise ValueError(f"two-form needs a {d}x{d} component matrix")
        for j in range(d):
            for k in range(j, d):
                if comps[j][k] != -comps[k][j]:
                    raise ValueError("two-form components must be antisymmetric")
        object.__setattr__(self, "components", comps)

    def __add__(self, other: "TwoFormExpr") -> "TwoFormExpr":
        if other.chart != self.chart:
            raise ValueError("two-forms live on different charts")
        return TwoFormExpr(
            self.chart,
            tuple(
                tuple(a + b for a, b in zip(ra, rb))
                for ra, rb in zip(self.components, other.components)
            ),
        )

    def __sub__(self, other: "TwoFormExpr") -> "TwoFormExpr":
        return self + (-other)

    def __neg__(self) -> "TwoFormExpr":
        return TwoFormExpr(
            self.chart, tuple(tuple(-a for a in row) for row in self.components)
        )

    def scaled(self, factor: Poly) -> "TwoFormExpr":
        return TwoFormExpr(
            self.chart, tuple(tuple(a * factor for a in row) for row in self.components)
        )

    def is_zero(self) -> bool:
        return all(a.is_zero() for row in self.components for a in row)


def zero_two_form(chart: Chart) -> TwoFormExpr:
    z = chart.zero()
    return TwoFormExpr(chart, tuple(tuple(z for _ in range(chart.dim)) for _ in range(chart.dim)))


def two_form_omega(chart: Chart) -> TwoFormExpr:
    """dq^i wedge dp_i; the symplectic two-form, and d(eta) on z-charts."""
    rows = [[chart.zero() for _ in range(chart.dim)] for _ in range(chart.dim)]
    one = chart.const(1)
    for i in range(1, chart.n + 1):
        rows[chart.q_slot(i)][chart.p_slot(i)] = one
        rows[chart.p_slot(i)][chart.q_slot(i)] = -one
    return TwoFormExpr(chart, tuple(tuple(r) for r in rows))


def exterior_derivative_oneform(alpha: OneFormExpr) -> TwoFormExpr:
    """(d alpha)_{jk} = d_j alpha_k - d_k alpha_j."""
    chart = alpha.chart
    d = chart.dim
    rows = [[chart.zero()] * d for _ in range(d)]
    for j in range(d):
        for k in range(j + 1, d):
            entry = alpha.components[k].partial(j) - alpha.components[j].partial(k)
            rows[j][k] = entry
            rows[k][j] = -entry
    return TwoFormExpr(chart, tuple(tuple(r) for r in rows))


def wedge(alpha: OneFormExpr, beta: OneFormExpr) -> TwoFormExpr:
    """(alpha wedge beta)_{jk} = alpha_j beta_k - alpha_k beta_j."""
    if alpha.chart != beta.chart:
        raise ValueError("wedge requires a common chart")
    chart = alpha.chart
    d = chart.dim
    rows = [[chart.zero()] * d for _ in range(d)]
    for j in range(d):
        for k in range(j + 1, d):
            entry = alpha.components[j] * beta.components[k] - alpha.components[k] * beta.components[j]
            rows[j][k] = entry
            rows[k][j] = -entry
    return TwoFormExpr(chart, tuple(tuple(r) for r in rows))


def contract_twoform(X: VectorFieldExpr, B: TwoFormExpr) -> OneFormExpr:
    """(i_X B)_k = X^j B_{jk}."""
    if X.chart != B.chart:
        raise ValueError("contraction requires a common chart")
    chart = X.chart
    comps = []
    for k in range(chart.dim):
        acc = chart.zero()
        for j in range(chart.dim):
            entry = B.components[j][k]
            if not (entry.is_zero() or X.components[j].is_zero()):
                acc = acc + X.components[j] * entry
        comps.append(acc)
    return OneFormExpr(chart, tuple(comps))


def lie_derivative_oneform(X: VectorFieldExpr, alpha: OneFormExpr) -> OneFormExpr:
    """(L_X alpha)_j = X^i d_i alpha_j + alpha_i d_j X^i."""
    if X.chart != alpha.chart:
        raise ValueError("Lie derivative requires a common chart")
    chart = X.chart
    comps = []
    for j in range(chart.dim):
        acc = X.apply_to(alpha.components[j])
        for i in range(chart.dim):
            a_i = alpha.components[i]
            if not a_i.is_zero():
                acc = acc + a_i * X.components[i].partial(j)
        comps.append(acc)
    return OneFormExpr(chart, tuple(comps))


def lie_derivative_twoform(X: VectorFieldExpr, B: TwoFormExpr) -> TwoFormExpr:
    """(L_X B)_{jk} = X^i d_i B_{jk} + B_{ik} d_j X^i + B_{ji} d_k X^i."""
    if X.chart != B.chart:
        raise ValueError("Lie derivative requires a common chart")
    chart = X.chart
    d = chart.dim
    rows = [[chart.zero()] * d for _ in range(d)]
    for j in range(d):
        for k in range(j + 1, d):
            acc = X.apply_to(B.components[j][k])
            for i in range(d):
                Xi = X.components[i]
                if Xi.is_zero():
                    continue
                b_ik = B.components[i][k]
                if not b_ik.is_zero():
                    acc = acc + b_ik * Xi.partial(j)
                b_ji = B.components[j][i]
                if not b_ji.is_zero():
                    acc = acc + b_ji * Xi.partial(k)
            rows[j][k] = acc
            rows[k][j] = -acc
    return TwoFormExpr(chart, tuple(tuple(r) for r in rows))


def divergence(X: VectorFieldExpr) -> Poly:
    """Coordinate divergence sum_i dX^i/dx^i (Darboux volume)."""
    out = Poly.zero(X.chart.dim)
    for i, comp in enumerate(X.components):
        out = out + comp.partial(i)
    return out


def jacobi_lie_bracket(X: VectorFieldExpr, Y: VectorFieldExpr) -> VectorFieldExpr:
    """[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i."""
    if X.chart != Y.chart:
        raise ValueError("bracket requires a common chart")
    chart = X.chart
    comps = tuple(
        X.apply_to(Y.components[i]) - Y.apply_to(X.components[i]) for i in range(chart.dim)
    )
    return VectorFieldExpr(chart, comps)
