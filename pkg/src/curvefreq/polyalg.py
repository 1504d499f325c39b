"""Exact arithmetic: rationals, sparse multivariate polynomials, truncated
power series and the combinatorial number functions used by the rest of the
package.

Rationals are :class:`fractions.Fraction`.  Polynomials and series are
immutable; every operation returns a new object.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence, Union

__all__ = [
    "Rational",
    "as_rational",
    "format_rational",
    "parse_rational",
    "MultiPoly",
    "poly_arith",
    "substitute_linear",
    "PowerSeries",
    "factorial",
    "double_factorial",
    "binomial",
    "multinomial",
    "stirling_first_unsigned",
    "composition_factorial_sum",
]

Rational = Fraction
Number = Union[int, Fraction]

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def as_rational(value: Number | str) -> Fraction:
    """Coerce an int, Fraction or "p/q" string to a Fraction (floats refused)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_rational(q: Number) -> str:
    """Serialize as "p/q", or "p" when the denominator is 1."""
    q = as_rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    m = _RATIONAL_RE.match(text)
    if not m:
        raise ValueError(f"not a rational: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(num, den)


def _natural_key(name: str) -> tuple:
    parts = re.split(r"(\d+)", name)
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p != "")


def _canonical_vars(names: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set(names), key=_natural_key))


class MultiPoly:
    """Sparse polynomial with rational coefficients.

    ``terms`` maps exponent tuples (aligned with ``variables``) to non-zero
    Fractions.  Variables are kept in a canonical (natural-sort) order so two
    polynomials over the same names always share a layout.
    """

    __slots__ = ("_vars", "_terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple[int, ...], Number] | None = None):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variable names: {variables}")
        canon = _canonical_vars(variables)
        perm = [variables.index(v) for v in canon]
        clean: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in (terms or {}).items():
            if len(exps) != len(variables):
                raise ValueError(f"exponent {exps} does not match variables {variables}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent {exps}")
            c = as_rational(coeff)
            if c:
                key = tuple(exps[i] for i in perm)
                c = clean.get(key, Fraction(0)) + c
                if c:
                    clean[key] = c
                else:
                    clean.pop(key, None)
        self._vars = canon
        self._terms = clean
        self._hash: int | None = None

    @classmethod
    def _raw(cls, variables: tuple[str, ...], terms: dict[tuple[int, ...], Fraction]) -> "MultiPoly":
        obj = cls.__new__(cls)
        obj._vars = variables
        obj._terms = {k: v for k, v in terms.items() if v}
        obj._hash = None
        return obj

    # constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value: Number, variables: Sequence[str] = ()) -> "MultiPoly":
        variables = _canonical_vars(variables)
        return cls._raw(variables, {(0,) * len(variables): as_rational(value)})

    @classmethod
    def variable(cls, name: str) -> "MultiPoly":
        return cls._raw((name,), {(1,): Fraction(1)})

    @classmethod
    def linear(cls, coeffs: Mapping[str, Number], constant: Number = 0) -> "MultiPoly":
        """Build ``constant + sum coeffs[v] * v``."""
        variables = _canonical_vars(coeffs)
        terms: dict[tuple[int, ...], Fraction] = {}
        if constant:
            terms[(0,) * len(variables)] = as_rational(constant)
        for i, v in enumerate(variables):
            c = as_rational(coeffs[v])
            if c:
                e = [0] * len(variables)
                e[i] = 1
                terms[tuple(e)] = c
        return cls._raw(variables, terms)

    # accessors --------------------------------------------------------
    @property
    def variables(self) -> tuple[str, ...]:
        return self._vars

    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        return iter(sorted(self._terms.items(), reverse=True))

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degs = {sum(e) for e in self._terms}
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return degree is None or degs == {degree}

    def coefficient(self, monomial: Mapping[str, int]) -> Fraction:
        for v in monomial:
            if v not in self._vars and monomial[v]:
                return Fraction(0)
        key = tuple(monomial.get(v, 0) for v in self._vars)
        return self._terms.get(key, Fraction(0))

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * len(self._vars), Fraction(0))

    # layout -----------------------------------------------------------
    def with_variables(self, variables: Iterable[str]) -> "MultiPoly":
        """Re-express over a superset of the current variables."""
        target = _canonical_vars(variables)
        missing = [v for v in self._vars if v not in target]
        if missing:
            for v in missing:
                if any(e[self._vars.index(v)] for e in self._terms):
                    raise ValueError(f"variable {v!r} occurs in the polynomial")
        pos = {v: i for i, v in enumerate(self._vars)}
        terms = {}
        for exps, c in self._terms.items():
            terms[tuple(exps[pos[v]] if v in pos else 0 for v in target)] = c
        return MultiPoly._raw(target, terms)

    def rename(self, mapping: Mapping[str, str]) -> "MultiPoly":
        new_names = [mapping.get(v, v) for v in self._vars]
        return MultiPoly(new_names, self._terms)

    def drop_unused(self) -> "MultiPoly":
        used = [v for i, v in enumerate(self._vars) if any(e[i] for e in self._terms)]
        return self.with_variables(used)

    # arithmetic -------------------------------------------------------
    def _aligned(self, other: "MultiPoly") -> tuple["MultiPoly", "MultiPoly"]:
        if self._vars == other._vars:
            return self, other
        names = set(self._vars) | set(other._vars)
        return self.with_variables(names), other.with_variables(names)

    def __add__(self, other: "MultiPoly | Number") -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(as_rational(other), self._vars)
        a, b = self._aligned(other)
        terms = dict(a._terms)
        for k, v in b._terms.items():
            terms[k] = terms.get(k, Fraction(0)) + v
        return MultiPoly._raw(a._vars, terms)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly._raw(self._vars, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other: "MultiPoly | Number") -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(as_rational(other), self._vars)
        return self + (-other)

    def __rsub__(self, other: Number) -> "MultiPoly":
        return (-self) + other

    def scale(self, c: Number) -> "MultiPoly":
        c = as_rational(c)
        return MultiPoly._raw(self._vars, {k: v * c for k, v in self._terms.items()})

    def __mul__(self, other: "MultiPoly | Number") -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        a, b = self._aligned(other)
        terms: dict[tuple[int, ...], Fraction] = {}
        for ka, va in a._terms.items():
            for kb, vb in b._terms.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                terms[k] = terms.get(k, Fraction(0)) + va * vb
        return MultiPoly._raw(a._vars, terms)

    __rmul__ = __mul__

    def __truediv__(self, c: Number) -> "MultiPoly":
        c = as_rational(c)
        if c == 0:
            raise ZeroDivisionError("polynomial division by zero")
        return self.scale(1 / c)

    def __pow__(self, k: int) -> "MultiPoly":
        if k < 0:
            raise ValueError("negative power")
        result = MultiPoly.constant(1, self._vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.constant(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.drop_unused()._key() == other.drop_unused()._key()

    def _key(self) -> tuple:
        return (self._vars, tuple(sorted(self._terms.items())))

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.drop_unused()._key())
        return self._hash

    # evaluation -------------------------------------------------------
    def evaluate(self, values: Mapping[str, Number]) -> Fraction:
        missing = [v for v in self._vars if v not in values]
        if missing:
            raise KeyError(f"no value for {missing}")
        vals = [as_rational(values[v]) for v in self._vars]
        total = Fraction(0)
        for exps, c in self._terms.items():
            term = c
            for x, e in zip(vals, exps):
                if e:
                    term *= x ** e
            total += term
        return total

    def substitute(self, subs: Mapping[str, "MultiPoly | Number"]) -> "MultiPoly":
        """Compose with arbitrary polynomial substitutions (all variables required)."""
        missing = [v for v in self._vars if v not in subs]
        if missing:
            raise KeyError(f"no substitution for {missing}")
        images = []
        for v in self._vars:
            s = subs[v]
            images.append(s if isinstance(s, MultiPoly) else MultiPoly.constant(as_rational(s)))
        powers: list[dict[int, MultiPoly]] = [{0: MultiPoly.constant(1)} for _ in images]

        def power(i: int, e: int) -> MultiPoly:
            cache = powers[i]
            if e not in cache:
                cache[e] = power(i, e - 1) * images[i]
            return cache[e]

        result = MultiPoly.constant(0)
        for exps, c in self._terms.items():
            term = MultiPoly.constant(c)
            for i, e in enumerate(exps):
                if e:
                    term = term * power(i, e)
            result = result + term
        return result

    # output -----------------------------------------------------------
    def format_terms(self) -> list[str]:
        """One "coeff * v1^a1*..." string per term, canonical (graded lex) order."""
        def order(item):
            exps, _ = item
            return (-sum(exps), tuple(-e for e in exps))

        lines = []
        for exps, c in sorted(self._terms.items(), key=order):
            mono = "*".join(
                f"{v}^{e}" if e > 1 else v for v, e in zip(self._vars, exps) if e
            )
            lines.append(f"{format_rational(c)} * {mono}" if mono else format_rational(c))
        return lines or ["0"]

    def to_json(self) -> dict:
        return {
            "variables": list(self._vars),
            "terms": {
                ",".join(map(str, exps)): format_rational(c)
                for exps, c in sorted(self._terms.items())
            },
        }

    def __repr__(self) -> str:
        return " + ".join(self.format_terms())


def poly_arith(p: MultiPoly, q: MultiPoly, op: str) -> MultiPoly:
    """Add or multiply two polynomials over the union of their variables."""
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown op {op!r}; expected 'add' or 'mul'")


def substitute_linear(p: MultiPoly, subs: Mapping[str, MultiPoly]) -> MultiPoly:
    """Substitute a linear form for every variable of ``p``."""
    for v, form in subs.items():
        if isinstance(form, MultiPoly) and form.degree() > 1:
            raise ValueError(f"substitution for {v!r} is not linear")
    return p.substitute(subs)


class PowerSeries:
    """Power series truncated at an explicit order N (coefficients c_0..c_N)."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Sequence[Number], order: int | None = None):
        cs = [as_rational(c) for c in coeffs]
        if order is None:
            order = len(cs) - 1
        if order < 0:
            raise ValueError("truncation order must be >= 0")
        cs = (cs + [Fraction(0)] * (order + 1))[: order + 1]
        self._coeffs = tuple(cs)

    @property
    def order(self) -> int:
        return len(self._coeffs) - 1

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return self._coeffs

    def __getitem__(self, i: int) -> Fraction:
        if i < 0:
            raise IndexError(i)
        if i > self.order:
            raise IndexError(f"coefficient {i} beyond truncation order {self.order}")
        return self._coeffs[i]

    def __len__(self) -> int:
        return len(self._coeffs)

    @classmethod
    def zero(cls, order: int) -> "PowerSeries":
        return cls([], order)

    @classmethod
    def one(cls, order: int) -> "PowerSeries":
        return cls([1], order)

    @classmethod
    def geometric(cls, ratio: Number, order: int) -> "PowerSeries":
        """1/(1 - ratio*z)."""
        r = as_rational(ratio)
        return cls([r ** k for k in range(order + 1)], order)

    @classmethod
    def log_one_over_one_minus(cls, ratio: Number, order: int, power: int = 1) -> "PowerSeries":
        """log(1/(1 - ratio*z)) raised to ``power``."""
        r = as_rational(ratio)
        base = cls([0] + [r ** k / k for k in range(1, order + 1)], order)
        return base ** power

    def truncate(self, order: int) -> "PowerSeries":
        if order > self.order:
            raise ValueError("cannot raise the truncation order")
        return PowerSeries(self._coeffs[: order + 1], order)

    def _common(self, other: "PowerSeries") -> int:
        return min(self.order, other.order)

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = self._common(other)
        return PowerSeries([self._coeffs[i] + other._coeffs[i] for i in range(n + 1)], n)

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        n = self._common(other)
        return PowerSeries([self._coeffs[i] - other._coeffs[i] for i in range(n + 1)], n)

    def __neg__(self) -> "PowerSeries":
        return PowerSeries([-c for c in self._coeffs], self.order)

    def scale(self, c: Number) -> "PowerSeries":
        c = as_rational(c)
        return PowerSeries([x * c for x in self._coeffs], self.order)

    def __mul__(self, other: "PowerSeries | Number") -> "PowerSeries":
        if not isinstance(other, PowerSeries):
            return self.scale(other)
        n = self._common(other)
        a, b = self._coeffs, other._coeffs
        out = [Fraction(0)] * (n + 1)
        for i in range(n + 1):
            if a[i]:
                ai = a[i]
                for j in range(n + 1 - i):
                    if b[j]:
                        out[i + j] += ai * b[j]
        return PowerSeries(out, n)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "PowerSeries":
        if k < 0:
            return self.inverse() ** (-k)
        result = PowerSeries.one(self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def inverse(self) -> "PowerSeries":
        a = self._coeffs
        if a[0] == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        n = self.order
        b = [Fraction(0)] * (n + 1)
        b[0] = 1 / a[0]
        for m in range(1, n + 1):
            s = sum((a[k] * b[m - k] for k in range(1, m + 1)), Fraction(0))
            b[m] = -s * b[0]
        return PowerSeries(b, n)

    def shift(self, k: int) -> "PowerSeries":
        """Multiply by z^k (k >= 0), keeping the truncation order."""
        if k < 0:
            raise ValueError("negative shift")
        return PowerSeries([0] * k + list(self._coeffs), self.order)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def __repr__(self) -> str:
        return f"PowerSeries({[format_rational(c) for c in self._coeffs]})"


# --------------------------------------------------------------------------
# combinatorial numbers


def factorial(k: int) -> int:
    if k < 0:
        raise ValueError(f"factorial of negative number {k}")
    return math.factorial(k)


@lru_cache(maxsize=None)
def double_factorial(k: int) -> int:
    """k!! with the convention (-1)!! = 0!! = 1."""
    if k < -1:
        raise ValueError(f"double factorial undefined for {k}")
    result = 1
    while k > 1:
        result *= k
        k -= 2
    return result


def binomial(n: int, k: int) -> int:
    if n < 0:
        raise ValueError("binomial with negative n")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def multinomial(parts: Sequence[int]) -> int:
    if any(p < 0 for p in parts):
        raise ValueError("negative multinomial part")
    result, total = 1, 0
    for p in parts:
        total += p
        result *= math.comb(total, p)
    return result


@lru_cache(maxsize=None)
def _stirling_row(n: int) -> tuple[int, ...]:
    if n == 0:
        return (1,)
    prev = _stirling_row(n - 1)
    row = [0] * (n + 1)
    for k in range(1, n + 1):
        row[k] = (n - 1) * (prev[k] if k < len(prev) else 0) + prev[k - 1]
    return tuple(row)


def stirling_first_unsigned(n: int, k: int) -> int:
    """Unsigned Stirling number of the first kind c(n, k)."""
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"stirling_first_unsigned needs 0 <= k <= n, got n={n}, k={k}")
    return _stirling_row(n)[k]


def composition_factorial_sum(n: int, k: int) -> Fraction:
    """Sum over compositions (n_1..n_k) of n into positive parts of prod n_i! / n!."""
    if k < 1 or n < 1:
        raise ValueError("composition_factorial_sum needs n, k >= 1")
    if k > n:
        raise ValueError(f"no composition of {n} into {k} positive parts")
    # dp[m] = sum over compositions of m into j parts of prod n_i!
    dp = [0] * (n + 1)
    dp[0] = 1
    for _ in range(k):
        new = [0] * (n + 1)
        for m in range(n + 1):
            if dp[m]:
                for part in range(1, n - m + 1):
                    new[m + part] += dp[m] * math.factorial(part)
        dp = new
    return Fraction(dp[n], math.factorial(n))
