import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from curvefreq.polyalg import (
    MultiPoly,
    PowerSeries,
    binomial,
    composition_factorial_sum,
    double_factorial,
    factorial,
    format_rational,
    multinomial,
    parse_rational,
    stirling_first_unsigned,
)

VARS = ("x", "y", "z")
small = st.integers(-5, 5)
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def polys(draw):
    terms = draw(st.dictionaries(
        st.tuples(*(st.integers(0, 3) for _ in VARS)), rationals, max_size=5))
    return MultiPoly(VARS, terms)


points = st.fixed_dictionaries({v: rationals for v in VARS})


def test_rational_text_round_trip():
    for q in [Fraction(0), Fraction(3), Fraction(-7, 12), Fraction(1, 27648)]:
        assert parse_rational(format_rational(q)) == q
    assert format_rational(Fraction(4, 2)) == "2"
    assert parse_rational(" -3/9 ") == Fraction(-1, 3)


@given(polys(), polys(), points)
def test_ring_operations_commute_with_evaluation(p, q, pt):
    assert (p + q).evaluate(pt) == p.evaluate(pt) + q.evaluate(pt)
    assert (p * q).evaluate(pt) == p.evaluate(pt) * q.evaluate(pt)
    assert (p - q).evaluate(pt) == p.evaluate(pt) - q.evaluate(pt)


@given(polys(), polys(), polys())
@settings(max_examples=50)
def test_distributive_and_commutative(p, q, r):
    assert p * (q + r) == p * q + p * r
    assert p * q == q * p


@given(polys(), points)
@settings(max_examples=50)
def test_substitution_is_composition(p, pt):
    x, y = MultiPoly.variable("x"), MultiPoly.variable("y")
    sub = {"x": x + y, "y": x * 2, "z": MultiPoly.variable("z")}
    lhs = p.substitute(sub).evaluate(pt)
    moved = dict(pt, x=pt["x"] + pt["y"], y=2 * pt["x"])
    assert lhs == p.evaluate(moved)


def test_polynomial_basics_against_sympy():
    x, y = MultiPoly.variable("x"), MultiPoly.variable("y")
    p = (x + y * 2) ** 3 - x * y / 4
    sx, sy = sympy.symbols("x y")
    ref = sympy.Poly(sympy.expand((sx + 2 * sy) ** 3 - sx * sy / 4), sx, sy)
    for (a, b), c in ref.terms():
        assert p.coefficient({"x": a, "y": b}) == Fraction(str(c))
    assert p.degree() == 3
    assert not p.is_homogeneous()
    assert ((x + y) ** 4).is_homogeneous(4)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        MultiPoly.variable("x") / 0


@given(st.lists(rationals, min_size=1, max_size=8).filter(lambda c: c[0] != 0))
def test_series_inverse(coeffs):
    s = PowerSeries(coeffs, 8)
    assert s * s.inverse() == PowerSeries.one(8)


def test_series_special_functions():
    z = sympy.symbols("z")
    log_sq = PowerSeries.log_one_over_one_minus(2, 10, power=2)
    ref = sympy.series(sympy.log(1 / (1 - 2 * z)) ** 2, z, 0, 11).removeO()
    for k in range(11):
        assert log_sq[k] == Fraction(str(ref.coeff(z, k)))
    geo = PowerSeries.geometric(Fraction(1, 3), 5)
    assert geo * PowerSeries([1, Fraction(-1, 3)], 5) == PowerSeries.one(5)
    assert PowerSeries([1, 2], 4).shift(2)[3] == 2


def test_combinatorics():
    for n in range(12):
        assert factorial(n) == math.factorial(n)
        for k in range(n + 1):
            assert binomial(n, k) == math.comb(n, k)
            assert stirling_first_unsigned(n, k) == abs(sympy.functions.combinatorial.numbers.stirling(n, k, kind=1))
    assert [double_factorial(k) for k in (-1, 0, 1, 3, 5, 6)] == [1, 1, 1, 3, 15, 48]
    assert multinomial([2, 1, 1]) == 12


def test_composition_factorial_sum():
    # sum over compositions of n into k positive parts of prod a_i!, over n!
    def brute(n, k):
        if k == 0:
            return int(n == 0)
        return sum(brute(n - a, k - 1) * math.factorial(a) for a in range(1, n + 1))
    for n in range(1, 8):
        for k in range(1, n + 1):
            assert composition_factorial_sum(n, k) == Fraction(brute(n, k), math.factorial(n))
    with pytest.raises(ValueError):
        composition_factorial_sum(2, 3)
