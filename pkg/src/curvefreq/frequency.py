"""Exact frequencies of local types from their realization data, the
finite-L counting oracle, and the built-in genus-2 scenarios.

    c = k1 k2 2^{chi(Z)+|pi_0(Z)|} / sym
        * sum_charts 1/|Stab| * int_{I <= 1} V_Z(glued boundary forms) * prod w

Weights: a fixed hyperbolic boundary j contributes b_j, a swapped pair (i, j)
contributes b_i (= b_j on the slice), an annulus contributes its coordinate.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .arcs import (
    ArcChart,
    FlipSpec,
    MeasureZero,
    Scenario,
    annulus_variables,
    arc_variables,
    boundary_form,
    builtin_catalog,
    flip_constrain,
)
from .errors import ValidationError
from .integrate import MAX_POINTS, SimplexDomain, integrate_over_chart, lattice_count_in_dilate
from .lattice import counting_function
from .polyalg import MultiPoly
from .volume import SurfaceType, volume_of

__all__ = [
    "FrequencyResult",
    "FrequencyTotals",
    "chart_integrand",
    "frequency",
    "simple_multicurve_frequency",
    "frequency_totals",
    "frequency_counting_estimate",
    "counting_exponent",
    "BUILTIN_SCENARIOS",
    "builtin_scenario",
    "appendix_checks",
]


@dataclass(frozen=True)
class FrequencyResult:
    scenario: str
    contributions: tuple[tuple[str, Fraction], ...]
    prefactor: Fraction
    total: Fraction

    def to_dict(self) -> dict:
        from .polyalg import format_rational

        return {
            "scenario": self.scenario,
            "prefactor": format_rational(self.prefactor),
            "contributions": [
                {"chart": name, "value": format_rational(v)} for name, v in self.contributions
            ],
            "total": format_rational(self.total),
        }


def _chart_name(chart: ArcChart, index: int) -> str:
    return chart.name or f"chart{index + 1}"


def _gluing_substitution(scenario: Scenario, chart: ArcChart) -> dict[str, MultiPoly]:
    subs: dict[str, MultiPoly] = {}
    for key, targets in scenario.gluing.items():
        if key.startswith("b"):
            form = boundary_form(chart, int(key[1:]))
        else:
            form = MultiPoly.variable(f"y{int(key[1:])}")
        for lab in targets:
            subs[lab] = form
    return subs


def _weight_forms(scenario: Scenario, chart: ArcChart) -> list[MultiPoly]:
    forms = [boundary_form(chart, j) for j in scenario.flip.fixed]
    forms += [boundary_form(chart, a) for a, _ in scenario.flip.swaps]
    forms += [MultiPoly.variable(v) for v in annulus_variables(scenario.n_prime)]
    return forms


def chart_integrand(scenario: Scenario, chart: ArcChart) -> MultiPoly:
    """V_Z(b(x)|dZ) * prod w(x) in the chart coordinates x1..xr, y1..yn'."""
    V = volume_of(scenario.Z).substitute(_gluing_substitution(scenario, chart))
    p = V
    for w in _weight_forms(scenario, chart):
        p = p * w
    return p.with_variables(arc_variables(chart.r) + annulus_variables(scenario.n_prime))


def _chart_contribution(scenario: Scenario, chart: ArcChart) -> Fraction:
    if not chart.is_filling:
        raise ValidationError(f"chart {chart.name or '?'} is non-filling")
    cone = flip_constrain(chart, scenario.flip)
    if isinstance(cone, MeasureZero):
        return Fraction(0)
    value = integrate_over_chart(chart_integrand(scenario, chart), cone, scenario.n_prime)
    return value / chart.stabilizer_order


def frequency(scenario: Scenario, *, jobs: int = 1) -> FrequencyResult:
    """Exact frequency; chart integrals may run in parallel, summed in chart order."""
    charts = list(scenario.charts)
    if jobs > 1 and len(charts) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(lambda c: _chart_contribution(scenario, c), charts))
    else:
        values = [_chart_contribution(scenario, c) for c in charts]
    contributions = tuple((_chart_name(c, i), v) for i, (c, v) in enumerate(zip(charts, values)))
    pref = scenario.prefactor
    return FrequencyResult(scenario.name, contributions, pref, pref * sum(values, Fraction(0)))


_ANNULUS_CHART = builtin_catalog("annulus_simple").charts[0]


def simple_multicurve_scenario(Z: SurfaceType, k: int, *, k1=1, k2=1, sym: int = 1,
                               pairs: Sequence[tuple[str, str]] | None = None,
                               name: str = "simple") -> Scenario:
    """Sigma = k annuli; annulus i glues to the i-th pair of Z boundaries."""
    if pairs is None:
        labels = Z.labels
        if len(labels) != 2 * k:
            raise ValidationError(f"Z has {len(labels)} boundaries, {2 * k} needed for {k} curves")
        pairs = [(labels[2 * i], labels[2 * i + 1]) for i in range(k)]
    if len(pairs) != k:
        raise ValidationError(f"{len(pairs)} boundary pairs given for {k} curves")
    return Scenario(
        name=name,
        charts=(_ANNULUS_CHART,),
        flip=FlipSpec(0, (), n_annuli=k),
        Z=Z,
        gluing={f"a{i + 1}": tuple(p) for i, p in enumerate(pairs)},
        chi_sigma=0,
        sym=sym,
        k1=Fraction(k1),
        k2=Fraction(k2),
    )


def simple_multicurve_frequency(Z: SurfaceType, k: int, *, k1=1, k2=1, sym: int = 1,
                                pairs: Sequence[tuple[str, str]] | None = None) -> Fraction:
    """prefactor * int_{|b| <= 1} V_Z(b, b) prod b_i db."""
    return frequency(simple_multicurve_scenario(Z, k, k1=k1, k2=k2, sym=sym, pairs=pairs)).total


@dataclass(frozen=True)
class FrequencyTotals:
    totals: dict[str, Fraction]
    ratios: dict[tuple[str, str], Fraction]


def frequency_totals(groups: Mapping[str, Sequence[Scenario | FrequencyResult]]) -> FrequencyTotals:
    """Sum each group of scenarios; ratios for every ordered pair of groups."""
    totals: dict[str, Fraction] = {}
    for name, items in groups.items():
        acc = Fraction(0)
        for item in items:
            acc += item.total if isinstance(item, FrequencyResult) else frequency(item).total
        totals[name] = acc
    ratios = {}
    for a, b in combinations(totals, 2):
        if totals[b]:
            ratios[(a, b)] = totals[a] / totals[b]
        if totals[a]:
            ratios[(b, a)] = totals[b] / totals[a]
    return FrequencyTotals(totals, ratios)


def counting_exponent(scenario: Scenario) -> int:
    """dim of the slice + deg V_Z + number of weights (= 6g-6 for a realization in genus g)."""
    dim = scenario.charts[0].r - len(scenario.flip.swaps) + scenario.n_prime
    deg = sum(6 * c.g - 6 + 2 * c.n for c in scenario.Z.components)
    return dim + deg + scenario.flip.num_orbits + scenario.n_prime


def _chart_counter(scenario: Scenario, chart: ArcChart):
    """Per-point weight N_Z(b|dZ) * prod (w + 1) * D for the lattice sum.

    Returns (weight function, denominator D).  Points off the flip slice
    get weight zero.
    """
    r = chart.r
    comps = []
    den = 1
    for comp in scenario.Z.components:
        fn = counting_function(comp.g, comp.n)
        comps.append((fn, comp.labels))
        den *= fn.denominator
    inc = chart.incidence

    def weight(prefix: tuple[int, ...], last: np.ndarray) -> np.ndarray:
        size = len(last)
        coords = [np.full(size, v, dtype=np.int64) for v in prefix] + [last]
        xs, ys = coords[:r], coords[r:]
        bs = [sum((inc[i][j] * xs[i] for i in range(r) if inc[i][j]), np.zeros(size, dtype=np.int64))
              for j in range(chart.n)]
        ok = np.ones(size, dtype=bool)
        for a, b in scenario.flip.swaps:
            ok &= bs[a - 1] == bs[b - 1]
        values: dict[str, np.ndarray] = {}
        for key, targets in scenario.gluing.items():
            col = bs[int(key[1:]) - 1] if key.startswith("b") else ys[int(key[1:]) - 1]
            for lab in targets:
                values[lab] = col
        out = ok.astype(np.int64)
        for fn, labels in comps:
            out = out * fn.numerator(*(values[lab] for lab in labels))
        for j in scenario.flip.fixed:
            out = out * (bs[j - 1] + 1)
        for a, _ in scenario.flip.swaps:
            out = out * (bs[a - 1] + 1)
        for y in ys:
            out = out * (y + 1)
        return out

    return weight, den


def frequency_counting_estimate(scenario: Scenario, L: int, *, jobs: int = 1,
                                max_points: int = MAX_POINTS) -> Fraction:
    """(k1 k2 / sym) L^{-(6g-6)} sum_charts 1/|Stab| sum_{I(x) <= L} N_Z(b(x)) prod (w(x)+1).

    The sum runs over integer points with non-negative coordinates of each
    flip-slice; measure-zero charts are skipped.
    """
    if L < 1:
        raise ValidationError("L must be at least 1")
    total = Fraction(0)
    for chart in scenario.charts:
        if isinstance(flip_constrain(chart, scenario.flip), MeasureZero):
            continue
        weight, den = _chart_counter(scenario, chart)
        domain = SimplexDomain(
            arc_variables(chart.r) + annulus_variables(scenario.n_prime),
            chart.iota + (1,) * scenario.n_prime,
        )
        count = lattice_count_in_dilate(domain, weight, L, jobs=jobs, max_points=max_points)
        total += count / (den * chart.stabilizer_order)
    scale = scenario.k1 * scenario.k2 / scenario.sym
    return scale * total / Fraction(L) ** counting_exponent(scenario)


def _figure8(name: str, swaps, Z_types, gluing, k1, k2, sym) -> Scenario:
    frag = builtin_catalog("pants_figure8")
    return Scenario(
        name=name,
        charts=frag.charts,
        flip=FlipSpec(3, swaps),
        Z=SurfaceType.from_types(Z_types),
        gluing=gluing,
        chi_sigma=-1,
        sym=sym,
        k1=Fraction(k1),
        k2=Fraction(k2),
        genus=2,
        K=1,
        genus_formula="2",
    )


def _builtin(name: str) -> Scenario:
    if name == "genus2-figure8-noflip":
        return _figure8(name, (), [(0, 3)], {"b1": ("z1",), "b2": ("z2",), "b3": ("z3",)}, 2, 2, 2)
    if name == "genus2-figure8-flip13":
        return _figure8(name, ((1, 3),), [(1, 1)], {"b2": ("z1",)}, 1, 2, 2)
    if name == "genus2-figure8-flip12":
        return _figure8(name, ((1, 2),), [(1, 1)], {"b3": ("z1",)}, 2, 2, 1)
    if name == "genus2-simple-nonsep":
        s = simple_multicurve_scenario(SurfaceType.from_types([(1, 2)]), 1, k1=1, k2=2, sym=2, name=name)
    elif name == "genus2-simple-sep":
        s = simple_multicurve_scenario(SurfaceType.from_types([(1, 1), (1, 1)]), 1, k1=1, k2=1, sym=2, name=name)
    else:
        raise ValidationError(f"unknown scenario {name!r}; known: {', '.join(BUILTIN_SCENARIOS)}")
    return replace(s, genus=2, K=0, genus_formula="2")


BUILTIN_SCENARIOS = (
    "genus2-figure8-noflip",
    "genus2-figure8-flip13",
    "genus2-figure8-flip12",
    "genus2-simple-nonsep",
    "genus2-simple-sep",
)


def builtin_scenario(name: str) -> Scenario:
    return _builtin(name)


def _contribution(result: FrequencyResult, chart: str) -> Fraction:
    return dict(result.contributions)[chart]


def appendix_checks() -> list[tuple[str, Fraction, Fraction]]:
    """(name, expected, computed) for the worked genus-2 values."""
    r = {name: frequency(builtin_scenario(name)) for name in BUILTIN_SCENARIOS}
    ns = r["genus2-simple-nonsep"].total
    sep = r["genus2-simple-sep"].total
    f8 = (r["genus2-figure8-noflip"].total + r["genus2-figure8-flip13"].total
          + r["genus2-figure8-flip12"].total)
    noflip, f13, f12 = (r[f"genus2-figure8-{k}"] for k in ("noflip", "flip13", "flip12"))
    rows = [
        ("simple non-separating", Fraction(1, 576), ns),
        ("simple separating", Fraction(1, 27648), sep),
        ("simple sep/non-sep", Fraction(1, 48), sep / ns),
        ("figure-8 no flip", Fraction(1, 48), noflip.total),
        ("figure-8 flip (1,3)", Fraction(1, 3072), f13.total),
        ("figure-8 flip (1,2)", Fraction(1, 2880), f12.total),
        ("simple total", Fraction(49, 27648), ns + sep),
        ("figure-8 total", Fraction(991, 46080), f8),
        ("simple/figure-8", Fraction(245, 2973), (ns + sep) / f8),
        ("no flip, chart alpha1", Fraction(1, 180), _contribution(noflip, "alpha1")),
        ("no flip, chart alpha2", Fraction(1, 1440), _contribution(noflip, "alpha2")),
        ("no flip, chart alpha4", Fraction(1, 288), _contribution(noflip, "alpha4")),
        ("flip (1,3), chart alpha1", Fraction(1, 9216), _contribution(f13, "alpha1")),
        ("flip (1,3), chart alpha4", Fraction(1, 4608), _contribution(f13, "alpha4")),
        ("flip (1,2), chart alpha1", Fraction(7, 174960), _contribution(f12, "alpha1")),
        ("flip (1,2), chart alpha3", Fraction(131, 2799360), _contribution(f12, "alpha3")),
    ]
    return rows
