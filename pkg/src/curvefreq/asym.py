"""Generating functions of local types and their large-order coefficients.

For a chart with incidence c and intersection vector iota,

    phi_alpha(z) = sum_{eps in {-1,1}^n} prod eps * prod_i 1/(iota_i - <eps, c_i> z)

is rational with poles at +-iota/2 only, and

    B_r varphi_alpha = 2^{-n-2n'} (log 1/(1-4z^2))^{n'} phi_alpha(z)

where varphi_alpha integrates prod sinh(b_j z) * prod sinh(y_k z)^2 / y_k over
{I <= 1}.  Singularity analysis at z = +-iota_0/2 gives the main term of the
coefficients, and from it the large-genus order of the frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

from .arcs import ArcChart, annulus_variables, arc_variables, builtin_catalog, iota0_mu0
from .errors import ValidationError
from .integrate import SimplexDomain, integrate_polynomial
from .polyalg import MultiPoly, PowerSeries, as_rational, binomial, factorial

__all__ = [
    "RationalFunction",
    "PhiSpec",
    "HSplit",
    "SingularityData",
    "MainTerm",
    "OrderResult",
    "phi_alpha",
    "phi_total",
    "h_split",
    "b_transform",
    "breve_varphi_closed",
    "breve_varphi_closed_chart",
    "varphi_series_oracle",
    "laurent_coefficients",
    "laurent_bound_constant",
    "singularity_data",
    "coefficient_asymptotic",
    "freq_asymptotic_order",
    "order_table",
    "sep_vs_ns_order",
    "builtin_phi_spec",
    "BUILTIN_PHI_SPECS",
]

Factor = tuple[int, int]  # (iota, s) stands for (iota - 2 s z), s in {+1, -1}


def _poly_z(coeffs: Sequence[Fraction]) -> list[Fraction]:
    out = [Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return out


def _pmul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _padd(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    n = max(len(a), len(b))
    return _poly_z([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def _factor_poly(f: Factor) -> list[Fraction]:
    iota, s = f
    return [Fraction(iota), Fraction(-2 * s)]


def _divide_exact(p: Sequence[Fraction], f: Factor) -> list[Fraction] | None:
    """p / (iota - 2 s z) if the division is exact, else None."""
    iota, s = f
    root = Fraction(iota, 2 * s)
    # synthetic division by (z - root), then rescale by -1/(2s)
    if not p:
        return []
    q = [Fraction(0)] * (len(p) - 1)
    acc = Fraction(0)
    for k in range(len(p) - 1, 0, -1):
        acc = p[k] + acc * root if k < len(p) - 1 else p[k]
        q[k - 1] = acc
    rem = p[0] + (q[0] * root if q else 0)
    if rem != 0:
        return None
    scale = Fraction(-1, 2 * s)
    return [c * scale for c in q]


@dataclass(frozen=True)
class RationalFunction:
    """numerator(z) / prod (iota - 2 s z)^power, reduced.

    The numerator is a coefficient list in z (lowest degree first).
    """

    numerator: tuple[Fraction, ...]
    denominator: tuple[tuple[Factor, int], ...]

    @classmethod
    def make(cls, numerator: Sequence[Fraction], denominator: Mapping[Factor, int]) -> "RationalFunction":
        num = _poly_z(numerator)
        den = {f: p for f, p in denominator.items() if p > 0}
        if not num:
            return cls((), ())
        changed = True
        while changed:
            changed = False
            for f in sorted(den):
                q = _divide_exact(num, f)
                if q is not None:
                    num = _poly_z(q)
                    den[f] -= 1
                    if den[f] == 0:
                        del den[f]
                    changed = True
                    break
        return cls(tuple(num), tuple(sorted(den.items())))

    @classmethod
    def from_terms(cls, terms: Sequence[tuple[Fraction, Mapping[Factor, int]]]) -> "RationalFunction":
        """Sum of c / prod factors^powers over a common denominator."""
        common: dict[Factor, int] = {}
        for _, den in terms:
            for f, p in den.items():
                common[f] = max(common.get(f, 0), p)
        num: list[Fraction] = []
        for c, den in terms:
            part = [Fraction(c)]
            for f, p in common.items():
                for _ in range(p - den.get(f, 0)):
                    part = _pmul(part, _factor_poly(f))
            num = _padd(num, part)
        return cls.make(num, common)

    @property
    def is_zero(self) -> bool:
        return not self.numerator

    def pole_order(self, iota: int, s: int = 1) -> int:
        return dict(self.denominator).get((iota, s), 0)

    def poles(self) -> tuple[Factor, ...]:
        return tuple(f for f, _ in self.denominator)

    def evaluate(self, z: Fraction | int) -> Fraction:
        z = as_rational(z)
        den = Fraction(1)
        for (iota, s), p in self.denominator:
            v = iota - 2 * s * z
            if v == 0:
                raise ZeroDivisionError(f"pole at z = {z}")
            den *= v ** p
        return sum((c * z ** k for k, c in enumerate(self.numerator)), Fraction(0)) / den

    def series(self, order: int) -> PowerSeries:
        """Taylor expansion at 0 through z^order."""
        s = PowerSeries(list(self.numerator[: order + 1]) or [0], order)
        for (iota, sign), p in self.denominator:
            inv = PowerSeries.geometric(Fraction(2 * sign, iota), order).scale(Fraction(1, iota))
            s = s * inv ** p
        return s

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return _add(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.numerator == other.numerator and self.denominator == other.denominator

    def __hash__(self) -> int:
        return hash((self.numerator, self.denominator))

    def as_polys(self) -> tuple[MultiPoly, MultiPoly]:
        """(numerator, expanded denominator) as polynomials in z."""
        z = MultiPoly.variable("z")
        num = MultiPoly.constant(0, ("z",))
        for k, c in enumerate(self.numerator):
            num = num + (z ** k) * c
        den = MultiPoly.constant(1, ("z",))
        for (iota, s), p in self.denominator:
            den = den * (MultiPoly.constant(iota, ("z",)) - z * (2 * s)) ** p
        return num, den

    def format(self) -> str:
        num = " + ".join(
            f"{c}" + (f"*z^{k}" if k > 1 else "*z" if k == 1 else "")
            for k, c in enumerate(self.numerator) if c
        ) or "0"
        den = "*".join(
            f"({iota}{'-' if s > 0 else '+'}2z)" + (f"^{p}" if p > 1 else "")
            for (iota, s), p in self.denominator
        )
        return f"({num})/({den})" if den else f"({num})"


def _add(a: RationalFunction, b: RationalFunction) -> RationalFunction:
    common: dict[Factor, int] = {}
    for f, p in a.denominator + b.denominator:
        common[f] = max(common.get(f, 0), p)
    num: list[Fraction] = []
    for rf in (a, b):
        part = list(rf.numerator)
        den = dict(rf.denominator)
        for f, p in common.items():
            for _ in range(p - den.get(f, 0)):
                part = _pmul(part, _factor_poly(f))
        num = _padd(num, part)
    return RationalFunction.make(num, common)


@dataclass(frozen=True)
class PhiSpec:
    """A finite set of charts sharing r, n, plus the annulus count n'."""

    name: str
    charts: tuple[ArcChart, ...]
    n_prime: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "charts", tuple(self.charts))
        if not self.charts:
            raise ValidationError("spec has no charts")
        shapes = {(c.r, c.n) for c in self.charts}
        if len(shapes) != 1:
            raise ValidationError(f"charts disagree on (r, n): {sorted(shapes)}")
        if self.n_prime < 0:
            raise ValidationError("n' must be non-negative")

    @property
    def r(self) -> int:
        return self.charts[0].r

    @property
    def n(self) -> int:
        return self.charts[0].n


def _eps_terms(chart: ArcChart) -> list[tuple[Fraction, dict[Factor, int]]]:
    terms = []
    for eps in product((1, -1), repeat=chart.n):
        coeff = Fraction(math.prod(eps))
        den: dict[Factor, int] = {}
        for row, iota in zip(chart.incidence, chart.iota):
            dot = sum(e * c for e, c in zip(eps, row))
            if dot == 0:
                coeff /= iota
            else:
                f = (iota, dot // 2)
                den[f] = den.get(f, 0) + 1
        terms.append((coeff, den))
    return terms


def phi_alpha(chart: ArcChart) -> RationalFunction:
    """The signed epsilon-sum of the chart, fully reduced."""
    return RationalFunction.from_terms(_eps_terms(chart))


def phi_total(spec: PhiSpec) -> RationalFunction:
    total = RationalFunction((), ())
    for c in spec.charts:
        total = total + phi_alpha(c)
    return total


@dataclass(frozen=True)
class HSplit:
    """Partial fractions a/(1 - 2z/iota) + b/(1 + 2z/iota) + c for h00, h01 (= h10), h11."""

    iota: int
    h00: tuple[Fraction, Fraction, Fraction]
    h01: tuple[Fraction, Fraction, Fraction]
    h11: tuple[Fraction, Fraction, Fraction]

    def function(self, which: str) -> RationalFunction:
        a, b, c = {"00": self.h00, "01": self.h01, "10": self.h01, "11": self.h11}[which]
        iota = self.iota
        # a/(1 - 2z/iota) = a iota / (iota - 2z)
        return RationalFunction.from_terms([
            (a * iota, {(iota, 1): 1}),
            (b * iota, {(iota, -1): 1}),
            (c, {}),
        ])

    def evaluate(self, which: str, z: Fraction | int) -> Fraction:
        return self.function(which).evaluate(z)


def h_split(iota: int) -> HSplit:
    if iota < 1:
        raise ValidationError("iota must be >= 1")
    q = Fraction(1, 4 * iota)
    h = Fraction(1, 2 * iota)
    return HSplit(iota, (q, q, h), (q, -q, Fraction(0)), (q, q, -h))


def b_transform(series: PowerSeries, d: int) -> PowerSeries:
    """Coefficientwise multiplication by (i + d)!."""
    out = []
    for i, a in enumerate(series.coeffs):
        if i + d < 0:
            if a:
                raise ValidationError(f"(i + d)! undefined at i = {i}, d = {d}")
            out.append(Fraction(0))
        else:
            out.append(a * factorial(i + d))
    return PowerSeries(out, series.order)


def _log4(n_prime: int, order: int) -> PowerSeries:
    """(log 1/(1-4z^2))^{n'} through z^order."""
    base = [Fraction(0)] * (order + 1)
    for m in range(1, order // 2 + 1):
        base[2 * m] = Fraction(4 ** m, m)
    return PowerSeries(base, order) ** n_prime if n_prime else PowerSeries.one(order)


def breve_varphi_closed_chart(chart: ArcChart, n_prime: int, N: int) -> Fraction:
    """[z^N] 2^{-n-2n'} (log 1/(1-4z^2))^{n'} phi_alpha(z)."""
    s = phi_alpha(chart).series(N) * _log4(n_prime, N)
    return s[N] / 2 ** (chart.n + 2 * n_prime)


def breve_varphi_closed(spec: PhiSpec, N: int) -> Fraction:
    """[z^N] of the closed form summed over the spec's charts."""
    s = phi_total(spec).series(N) * _log4(spec.n_prime, N)
    return s[N] / 2 ** (spec.n + 2 * spec.n_prime)


def _sinh_coeffs(N: int) -> list[Fraction]:
    return [Fraction(1, factorial(k)) if k % 2 else Fraction(0) for k in range(N + 1)]


def varphi_series_oracle(chart: ArcChart, N: int, n_prime: int = 0) -> Fraction:
    """[z^N] of the integral of prod sinh(b_j z) * prod sinh(y z)^2 / y over {I <= 1}.

    Expands every factor to order N and integrates each monomial exactly.
    """
    if N < 0:
        raise ValidationError("N must be non-negative")
    xs = arc_variables(chart.r)
    ys = annulus_variables(n_prime)
    names = xs + ys
    forms = [
        MultiPoly.linear({x: row[j] for x, row in zip(xs, chart.incidence)}).with_variables(names)
        for j in range(chart.n)
    ]
    # per factor: list of (z-degree, polynomial coefficient)
    factors: list[list[tuple[int, MultiPoly]]] = []
    for form in forms:
        powers = [MultiPoly.constant(1, names)]
        for _ in range(N):
            powers.append(powers[-1] * form)
        factors.append([(k, powers[k] / factorial(k)) for k in range(1, N + 1, 2)])
    for y in ys:
        yv = MultiPoly.variable(y).with_variables(names)
        # sinh(yz)^2 / y = sum_{m>=1} 2^{2m-1} y^{2m-1} z^{2m} / (2m)!
        factors.append([
            (2 * m, (yv ** (2 * m - 1)) * Fraction(2 ** (2 * m - 1), factorial(2 * m)))
            for m in range(1, N // 2 + 1)
        ])
    # convolve in the z-degree
    acc: dict[int, MultiPoly] = {0: MultiPoly.constant(1, names)}
    for fac in factors:
        nxt: dict[int, MultiPoly] = {}
        for d0, p0 in acc.items():
            for d1, p1 in fac:
                d = d0 + d1
                if d > N:
                    continue
                nxt[d] = nxt[d] + p0 * p1 if d in nxt else p0 * p1
        acc = nxt
    if N not in acc:
        return Fraction(0)
    domain = SimplexDomain(names, tuple(chart.iota) + (1,) * n_prime)
    return integrate_polynomial(acc[N], domain)


def laurent_coefficients(rf: RationalFunction, iota0: int, sign: int = 1) -> dict[int, Fraction]:
    """Principal part of rf at z = sign*iota0/2 in powers of u = 1 - sign*2z/iota0.

    Returns {m: [u^{-m}] rf} for m >= 1.
    """
    zeta = Fraction(sign * iota0, 2)
    mu = rf.pole_order(iota0, sign)
    if mu == 0:
        return {}
    order = mu  # need terms u^{-mu} .. u^{-1}
    # z = zeta (1 - u); numerator as a series in u
    num = PowerSeries([0], order)
    zpow = PowerSeries([1], order)
    zu = PowerSeries([zeta, -zeta], order)
    for c in rf.numerator:
        num = num + zpow.scale(c)
        zpow = zpow * zu
    series = num
    lead = Fraction(1)
    for (iota, s), p in rf.denominator:
        # iota - 2 s z = (iota - 2 s zeta) + 2 s zeta u
        a, b = iota - 2 * s * zeta, 2 * s * zeta
        if a == 0:
            # singular factor: b u
            lead /= b ** p
            continue
        inv = PowerSeries.geometric(-b / a, order).scale(1 / a)
        series = series * inv ** p
    return {m: lead * series[mu - m] for m in range(1, mu + 1)}


def laurent_bound_constant(chart: ArcChart, iota0: int, mu0: int, variant: str = "statement") -> Fraction:
    """C_1 * prod 1/iota_i for the Laurent bound.

    ``statement``: 2^n binom(r, r-1) (iota0^{mu0} (iota0+1))^r.
    ``proof``: 2^n binom(2r-2, r-1) (iota0 (iota0+1)^2)^{mu0-1}.
    """
    r, n = chart.r, chart.n
    if variant == "statement":
        c1 = Fraction(2 ** n * binomial(r, r - 1) * (iota0 ** mu0 * (iota0 + 1)) ** r)
    elif variant == "proof":
        c1 = Fraction(2 ** n * binomial(2 * r - 2, r - 1) * (iota0 * (iota0 + 1) ** 2) ** (mu0 - 1))
    else:
        raise ValidationError(f"unknown bound variant {variant!r}")
    for v in chart.iota:
        c1 /= v
    return c1


@dataclass(frozen=True)
class SingularityData:
    iota0: int | None
    mu0: int
    leading: Fraction
    parity: str
    structural_mu0: int

    def to_dict(self) -> dict:
        from .polyalg import format_rational

        return {
            "iota0": self.iota0,
            "mu0": self.mu0,
            "leading": format_rational(self.leading),
            "parity": self.parity,
        }


def singularity_data(spec: PhiSpec) -> SingularityData:
    """iota0, mu0 and the leading coefficient [(1 - 2z/iota0)^{-mu0}] phi."""
    iota0, structural = iota0_mu0(spec.charts)
    parity = "even" if spec.n % 2 == 0 else "odd"
    if iota0 is None:
        return SingularityData(None, 0, Fraction(0), parity, 0)
    phis = [phi_alpha(c) for c in spec.charts]
    mu0 = max(p.pole_order(iota0, 1) for p in phis)
    leading = Fraction(0)
    for p in phis:
        if p.pole_order(iota0, 1) == mu0:
            leading += laurent_coefficients(p, iota0, 1)[mu0]
    return SingularityData(iota0, mu0, leading, parity, structural)


@dataclass(frozen=True)
class MainTerm:
    """rational * (log N)^log_power."""

    case: int
    N: int
    rational: Fraction
    log_power: int

    @property
    def value(self) -> float:
        return float(self.rational) * math.log(self.N) ** self.log_power

    def ratio(self, exact: Fraction) -> float:
        """exact / main term as a float."""
        if self.rational == 0:
            return math.nan
        return float(exact / self.rational) / math.log(self.N) ** self.log_power


def coefficient_asymptotic(spec: PhiSpec, N: int) -> MainTerm:
    """Main term of [z^N] breve_varphi in the three singularity cases."""
    if N < 1:
        raise ValidationError("N must be positive")
    n, n_prime = spec.n, spec.n_prime
    sign = 1 + (-1) ** (n + N)
    data = singularity_data(spec)
    if n_prime == 0:
        if data.iota0 is None:
            raise ValidationError("spec without arcs or annuli has no singularity")
        rat = (sign * data.leading / 2 ** n * Fraction(2, data.iota0) ** N
               * Fraction(N) ** (data.mu0 - 1) / factorial(data.mu0 - 1))
        return MainTerm(1, N, rat, 0)
    if data.iota0 is None or data.iota0 > 1:
        try:
            phi_half = phi_total(spec).evaluate(Fraction(1, 2))
        except ZeroDivisionError:
            raise ValidationError("phi has a pole at 1/2 although iota0 > 1") from None
        rat = sign * phi_half * Fraction(2) ** (N - n - 2 * n_prime) * n_prime / N
        return MainTerm(2, N, rat, n_prime - 1)
    rat = (sign * data.leading * Fraction(2) ** (N - n - 2 * n_prime)
           * Fraction(N) ** (data.mu0 - 1) / factorial(data.mu0 - 1))
    return MainTerm(3, N, rat, n_prime)


@dataclass(frozen=True)
class OrderResult:
    """(1/2^{2g}) (e/3g)^{4g} g^{g_exponent} (log g)^{log_power} / iota0^{6g}."""

    case: int
    g_exponent: int
    log_power: int
    iota0_base: int

    def __str__(self) -> str:
        parts = ["2^(-2g) (e/3g)^(4g)", f"g^{self.g_exponent}"]
        if self.log_power:
            parts.append(f"log(g)^{self.log_power}")
        if self.iota0_base > 1:
            parts.append(f"{self.iota0_base}^(-6g)")
        return " ".join(parts)


def freq_asymptotic_order(chi: int, iota0: int | None, mu0: int, n_prime: int) -> OrderResult:
    """Large-genus order of the frequency of an essential local type."""
    base = chi + 2
    if n_prime == 0:
        if iota0 is None:
            raise ValidationError("a local type without annuli needs iota0")
        return OrderResult(1, base + mu0, 0, iota0)
    if iota0 is None or iota0 > 1:
        return OrderResult(2, base, n_prime - 1, 1)
    return OrderResult(3, base + mu0, n_prime, 1)


def order_table(K: int) -> list[tuple[str, OrderResult]]:
    """Orders for the minimal, next-to-maximal and maximal local types with K self-intersections."""
    if K == 0:
        return [("simple (annulus)", freq_asymptotic_order(0, None, 0, 1))]
    if K == 1:
        return [("figure-8 (S_{0,3})", freq_asymptotic_order(-1, 1, 2, 0))]
    if K < 0:
        raise ValidationError("K must be non-negative")
    return [
        ("gamma_min (S_{0,3})", freq_asymptotic_order(-1, 1, 1, 0)),
        (f"gamma_max-1 (S_{{0,{K + 1}}})", freq_asymptotic_order(-K + 1, 1, 2 * K - 3, 0)),
        (f"gamma_max (S_{{0,{K + 2}}})", freq_asymptotic_order(-K, 1, 2 * K, 0)),
    ]


def sep_vs_ns_order(K: int) -> dict:
    """Total order g^{K+2}, separating/non-separating O(1/g), gap between the top two types."""
    if K < 0:
        raise ValidationError("K must be non-negative")
    rows = order_table(K)
    top = max(o.g_exponent for _, o in rows)
    gap = None
    if K >= 2:
        gap = rows[2][1].g_exponent - rows[1][1].g_exponent
    return {
        "K": K,
        "total_exponent": top,
        "total": str(OrderResult(1, top, 0, 1)),
        "sep_over_ns": "O(1/g)" if K >= 1 else "exponentially small",
        "max_minus_one_gap": None if gap is None else f"g^-{gap}",
    }


_PANTS = builtin_catalog("pants_figure8")
_ANNULUS = builtin_catalog("annulus_simple")

BUILTIN_PHI_SPECS = ("pants_figure8", "figure8_alpha1", "annulus_simple", "single_arc")


def builtin_phi_spec(name: str) -> PhiSpec:
    if name == "pants_figure8":
        return PhiSpec(name, _PANTS.charts, 0)
    if name == "figure8_alpha1":
        return PhiSpec(name, _PANTS.charts[:1], 0)
    if name == "annulus_simple":
        return PhiSpec(name, _ANNULUS.charts, 1)
    if name == "single_arc":
        return PhiSpec(name, (ArcChart(((1, 1),), (1,), name="arc"),), 0)
    raise ValidationError(f"unknown spec {name!r}; known: {', '.join(BUILTIN_PHI_SPECS)}")
