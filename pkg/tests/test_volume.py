from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvefreq.errors import ValidationError
from curvefreq.polyalg import MultiPoly
from curvefreq.volume import (
    SurfaceType,
    compositions,
    kontsevich_polynomial,
    main_term_polynomial,
    volume_of,
)

b1, b2 = MultiPoly.variable("b1"), MultiPoly.variable("b2")


def test_small_polynomials():
    assert kontsevich_polynomial(0, 3) == MultiPoly.constant(1, ("b1", "b2", "b3"))
    assert kontsevich_polynomial(1, 1) == b1 ** 2 / 48
    assert kontsevich_polynomial(1, 2) == (b1 ** 2 + b2 ** 2) ** 2 / 192


def test_genus_zero_four():
    b = [MultiPoly.variable(f"b{i}") for i in range(1, 5)]
    assert kontsevich_polynomial(0, 4) == sum(x ** 2 for x in b) / 2


@pytest.mark.parametrize("g,n", [(g, n) for g in range(5) for n in range(1, 5) if 2 * g - 2 + n > 0])
def test_structure(g, n):
    V = kontsevich_polynomial(g, n)
    assert V.is_homogeneous(6 * g - 6 + 2 * n)
    for exps, c in V.items():
        assert c > 0
        assert all(e % 2 == 0 for e in exps)
    # symmetric under a transposition of the labels
    if n >= 2:
        assert V.rename({"b1": "b2", "b2": "b1"}).with_variables(V.variables) == V


def test_compositions():
    assert sorted(compositions(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    assert len(list(compositions(5, 3))) == 21


@given(st.integers(1, 5), st.integers(1, 3))
@settings(max_examples=15, deadline=None)
def test_main_term_shape(g, n):
    M = main_term_polynomial(g, n)
    assert M.is_homogeneous(6 * g - 6 + 2 * n)
    assert all(c > 0 for _, c in M.items())


def test_surface_type():
    Z = SurfaceType.from_types([(1, 1), (0, 3)])
    assert Z.labels == ("z1", "z2", "z3", "z4")
    assert Z.euler_characteristic == -2
    assert Z.num_components == 2 and Z.genus == 1 and Z.num_boundaries == 4
    V = volume_of(Z)
    assert V == MultiPoly.variable("z1") ** 2 / 48
    with pytest.raises(ValidationError):
        SurfaceType.from_types([(0, 2)])


def test_custom_labels():
    V = kontsevich_polynomial(1, 1, ["L"])
    assert V.evaluate({"L": 4}) == Fraction(1, 3)
    with pytest.raises(ValidationError):
        kontsevich_polynomial(1, 2, ["a"])
