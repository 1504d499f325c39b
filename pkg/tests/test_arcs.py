from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from curvefreq.arcs import (
    ArcChart,
    FlipSpec,
    MeasureZero,
    admissible,
    boundary_form,
    builtin_catalog,
    flip_constrain,
    intersection_form,
    iota0_mu0,
    is_degenerate,
)
from curvefreq.errors import ValidationError
from curvefreq.frequency import builtin_scenario
from curvefreq.polyalg import MultiPoly
from curvefreq.volume import SurfaceType

FIG8 = builtin_catalog("pants_figure8").charts
x1, x2, x3 = (MultiPoly.variable(f"x{i}") for i in (1, 2, 3))


def test_chart_validation_names_row():
    with pytest.raises(ValidationError, match="row 2 sums to 3"):
        ArcChart(((1, 1, 0), (1, 1, 1)), (1, 1))
    with pytest.raises(ValidationError, match="iota"):
        ArcChart(((1, 1),), (0,))
    with pytest.raises(ValidationError):
        ArcChart(((1, 1),), (1, 2))


def test_filling():
    assert all(c.is_filling for c in FIG8)
    assert not ArcChart(((2, 0),), (1,)).is_filling


def test_boundary_and_intersection_forms():
    a1 = FIG8[0]
    assert boundary_form(a1, 1) == x1 + x3
    assert boundary_form(a1, 2) == x1 + x2
    assert intersection_form(a1) == x1 + x2 + x3 * 2
    assert intersection_form(a1, 1) == x1 + x2 + x3 * 2 + MultiPoly.variable("y1")


def test_flip_spec():
    f = FlipSpec(3, ((3, 1),))
    assert f.swaps == ((1, 3),)
    assert f.fixed == (2,)
    assert f.image(1) == 3 and f.image(2) == 2
    assert f.num_orbits == 2 and not f.is_essential
    with pytest.raises(ValidationError):
        FlipSpec(3, ((1, 2), (2, 3)))
    with pytest.raises(ValidationError):
        FlipSpec(3, ((1, 4),))


def test_no_flip_is_orthant():
    cone = flip_constrain(FIG8[0], FlipSpec(3))
    assert cone.dimension == 3
    assert cone.simplices == (((0, 1, 2), 1),)


@pytest.mark.parametrize("swap,alive", [((1, 3), {0, 3}), ((1, 2), {0, 2})])
def test_flip_measure_zero_pattern(swap, alive):
    flip = FlipSpec(3, (swap,))
    for i, chart in enumerate(FIG8):
        cone = flip_constrain(chart, flip)
        if i in alive:
            assert not isinstance(cone, MeasureZero)
            assert cone.dimension == 2
            for v in cone.basis:
                b = [sum(r[j] * v[k] for k, r in enumerate(chart.incidence)) for j in range(3)]
                assert b[swap[0] - 1] == b[swap[1] - 1]
        else:
            assert cone == MeasureZero(1, 2)
            assert not cone


def test_flip13_slice():
    cone = flip_constrain(FIG8[0], FlipSpec(3, ((1, 3),)))
    assert sorted(cone.basis) == [(0, 0, 1), (1, 1, 0)]
    assert cone.parametrize((2, 5)) in {(2, 2, 5), (5, 5, 2)}
    assert len(cone.free_coordinates()) == 2


def test_iota0_mu0():
    assert iota0_mu0(FIG8) == (1, 2)
    assert iota0_mu0(builtin_catalog("annulus_simple").charts) == (None, 0)


def test_admissible():
    Z = SurfaceType.from_types([(0, 3)])
    assert admissible(Z, [1, 2, 3])
    assert not admissible(Z, [1, 1, 1])
    assert not admissible(Z, [1, Fraction(1, 2), Fraction(1, 2)])
    Z2 = SurfaceType.from_types([(1, 2)])
    assert admissible(Z2, {"z1": 3, "z2": 3, "y1": 4, "y2": 4}, annuli=[("y1", "y2")])
    assert not admissible(Z2, {"z1": 3, "z2": 3, "y1": 4, "y2": 2}, annuli=[("y1", "y2")])
    assert is_degenerate([0, 2, 2]) and not is_degenerate([1, 1, 2])


@given(st.lists(st.integers(0, 12), min_size=3, max_size=3))
def test_admissible_matches_parity(b):
    assert admissible(SurfaceType.from_types([(0, 3)]), b) == (sum(b) % 2 == 0)


def test_scenario_validation():
    s = builtin_scenario("genus2-figure8-noflip")
    assert s.prefactor == 2
    with pytest.raises(ValidationError, match="gluing"):
        replace(s, gluing={"b1": ("z1",), "b2": ("z2",)})
    with pytest.raises(ValidationError, match="sym"):
        replace(s, sym=0)
    with pytest.raises(ValidationError, match="non-filling"):
        replace(s, charts=(ArcChart(((1, 1, 0), (1, 1, 0), (2, 0, 0)), (1, 1, 1)),))


def test_self_intersection_bound_check():
    s = builtin_scenario("genus2-figure8-noflip")
    assert s.chi_sigma + iota0_mu0(s.charts)[1] == s.K
    with pytest.raises(ValidationError, match="exceeds the self-intersection"):
        replace(s, K=0)
