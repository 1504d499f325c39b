import math
from fractions import Fraction
from itertools import combinations_with_replacement

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvefreq import tau as tau_mod
from curvefreq.errors import GuardError, ValidationError
from curvefreq.tau import (
    TauDiskCache,
    cached_values,
    dilaton_equation_holds,
    string_equation_holds,
    tau,
    tau_main_term,
    tau_upper_bound_holds,
)

KNOWN = [
    (0, [0, 0, 0], Fraction(1)),
    (1, [1], Fraction(1, 24)),
    (1, [1, 1], Fraction(1, 24)),
    (2, [4], Fraction(1, 1152)),
    (2, [2, 3], Fraction(29, 5760)),
    (2, [2, 2, 2], Fraction(7, 240)),
    (3, [7], Fraction(1, 82944)),
]


@pytest.mark.parametrize("g,d,value", KNOWN)
def test_known_values(g, d, value):
    assert tau(g, d) == value


@st.composite
def genus0(draw):
    n = draw(st.integers(3, 8))
    parts = draw(st.lists(st.integers(0, n - 3), min_size=n, max_size=n))
    return parts


@given(genus0())
@settings(max_examples=40)
def test_genus_zero_multinomial(d):
    n = len(d)
    expected = Fraction(0)
    if sum(d) == n - 3:
        expected = Fraction(math.factorial(n - 3), math.prod(math.factorial(x) for x in d))
    assert tau(0, d) == expected


@pytest.mark.parametrize("n", range(1, 7))
def test_genus_one_tau1_power(n):
    assert tau(1, [1] * n) == Fraction(math.factorial(n - 1), 24)


def test_one_point_closed_form():
    for g in range(1, 9):
        assert tau(g, [3 * g - 2]) == Fraction(1, 24 ** g * math.factorial(g))


def test_symmetric_and_dimension():
    assert tau(2, [3, 2]) == tau(2, [2, 3])
    assert tau(2, [1, 1]) == 0


@pytest.mark.parametrize("g", range(0, 4))
def test_string_dilaton(g):
    for n in range(1, 4):
        if 2 * g - 2 + n <= 0:
            continue
        for d in combinations_with_replacement(range(3 * g - 1 + n), n):
            if sum(d) == 3 * g - 2 + n:
                assert string_equation_holds(g, list(d))
            if sum(d) == 3 * g - 3 + n:
                assert dilaton_equation_holds(g, list(d))


def test_main_term_bound_small():
    for g in range(1, 4):
        for n in range(1, 4):
            for d in combinations_with_replacement(range(3 * g - 2 + n), n):
                if sum(d) == 3 * g - 3 + n:
                    assert tau_upper_bound_holds(g, list(d))


def test_main_term_validation():
    with pytest.raises(ValidationError):
        tau_main_term(2, [1])


def test_errors():
    with pytest.raises(ValidationError):
        tau(-1, [1])
    with pytest.raises(ValidationError):
        tau(0, [0, 0])
    with pytest.raises(ValidationError):
        tau(1, [-1, 2])
    with pytest.raises(GuardError):
        tau(31, [91])
    with pytest.raises(GuardError):
        tau(0, [0] * 13)


def test_disk_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv(tau_mod.CACHE_ENV_VAR, str(tmp_path))
    tau(3, [2, 3, 4])
    cache = TauDiskCache.from_env()
    saved = cache.save()
    assert saved == len(cached_values())
    before = {(g, d): v for g, d, v in cached_values()}
    tau_mod.clear_cache()
    assert cache.load() == saved
    assert {(g, d): v for g, d, v in cached_values()} == before
    line = TauDiskCache.format_record(2, (2, 3), Fraction(29, 5760))
    assert TauDiskCache.parse_record(line) == (2, (2, 3), Fraction(29, 5760))


def test_disk_cache_conflict(tmp_path):
    path = tmp_path / "tau_cache.txt"
    tau(1, [1])
    path.write_text("1;1;1/25\n")
    with pytest.raises(ValidationError):
        TauDiskCache(path).load()
    path.write_text("garbage\n")
    with pytest.raises(ValidationError):
        TauDiskCache(path).load()


def test_threaded_calls_agree():
    from concurrent.futures import ThreadPoolExecutor

    tau_mod.clear_cache()
    args = [(4, [2, 3, 4, 3]), (5, [14]), (3, [1, 2, 3, 3])] * 4
    with ThreadPoolExecutor(4) as pool:
        got = list(pool.map(lambda a: tau(*a), args))
    tau_mod.clear_cache()
    assert got == [tau(*a) for a in args]
