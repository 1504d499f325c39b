"""Exact integration of polynomials over rational simplices
{x >= 0 : w.x <= t}, flip-constrained cones, and the lattice-point sums that
approximate them.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .arcs import ConstrainedChart, annulus_variables, arc_variables
from .errors import GuardError, ValidationError
from .polyalg import MultiPoly, Number, as_rational, factorial

__all__ = [
    "MAX_POINTS",
    "SimplexDomain",
    "integrate_monomial",
    "integrate_polynomial",
    "integrate_over_chart",
    "point_count_bound",
    "lattice_count_in_dilate",
]

MAX_POINTS = 10 ** 9


@dataclass(frozen=True)
class SimplexDomain:
    """{x >= 0 : sum w_i x_i <= bound} in the named coordinates."""

    variables: tuple[str, ...]
    weights: tuple[Fraction, ...]
    bound: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "weights", tuple(as_rational(w) for w in self.weights))
        object.__setattr__(self, "bound", as_rational(self.bound))
        if len(self.variables) != len(self.weights):
            raise ValidationError("one weight per coordinate is required")
        if len(set(self.variables)) != len(self.variables):
            raise ValidationError(f"repeated coordinate in {self.variables}")
        if any(w <= 0 for w in self.weights):
            raise ValidationError(f"simplex weights must be positive, got {self.weights}")
        if self.bound < 0:
            raise ValidationError("simplex bound must be non-negative")

    @classmethod
    def from_form(cls, form: MultiPoly, bound: Number = 1) -> "SimplexDomain":
        """Domain {form <= bound} for a linear form with positive coefficients."""
        if form.degree() != 1 or form.constant_term():
            raise ValidationError("domain form must be linear and homogeneous")
        names = form.variables
        weights = [form.coefficient({v: 1}) for v in names]
        return cls(names, tuple(weights), as_rational(bound))

    @property
    def dimension(self) -> int:
        return len(self.variables)


def integrate_monomial(exponents: Sequence[int], domain: SimplexDomain) -> Fraction:
    """Dirichlet: prod a_i! / ((sum a + m)! prod w_i^{a_i+1}) * bound^{sum a + m}."""
    if len(exponents) != domain.dimension:
        raise ValidationError(f"expected {domain.dimension} exponents, got {len(exponents)}")
    if any(a < 0 for a in exponents):
        raise ValidationError("exponents must be non-negative")
    m = domain.dimension
    total = sum(exponents)
    num = 1
    den = Fraction(factorial(total + m))
    for a, w in zip(exponents, domain.weights):
        num *= factorial(a)
        den *= w ** (a + 1)
    return Fraction(num) / den * domain.bound ** (total + m)


def integrate_polynomial(p: MultiPoly, domain: SimplexDomain) -> Fraction:
    """Term-by-term exact integral of p over the domain."""
    extra = [v for v in p.drop_unused().variables if v not in domain.variables]
    if extra:
        raise ValidationError(f"polynomial variables {extra} are not domain coordinates")
    q = p.with_variables(domain.variables)
    return sum((c * integrate_monomial(e, domain) for e, c in q.items()), Fraction(0))


def integrate_over_chart(p: MultiPoly, cone: ConstrainedChart, n_prime: int = 0) -> Fraction:
    """Integral of p(x, y) over {x in slice, y >= 0 : I(x, y) <= 1}.

    The slice carries the measure normalized by its integer lattice: each
    simplicial subcone with rays v_k and lattice index D is parametrized as
    x = sum t_k v_k with measure D dt, and I pulls back to sum t_k I(v_k).
    """
    xs = arc_variables(cone.chart.r)
    ys = annulus_variables(n_prime)
    extra = [v for v in p.drop_unused().variables if v not in xs and v not in ys]
    if extra:
        raise ValidationError(f"integrand variables {extra} are not chart coordinates")
    iota = cone.chart.iota
    total = Fraction(0)
    for simplex, index in cone.simplices:
        ts = tuple(f"t{k}" for k in range(1, len(simplex) + 1))
        subs: dict[str, MultiPoly] = {}
        for i, name in enumerate(xs):
            subs[name] = MultiPoly.linear({t: cone.rays[k][i] for t, k in zip(ts, simplex)})
        for name in ys:
            subs[name] = MultiPoly.variable(name)
        weights = [sum(a * b for a, b in zip(iota, cone.rays[k])) for k in simplex]
        domain = SimplexDomain(ts + ys, tuple(weights) + (1,) * len(ys))
        pulled = p.with_variables(xs + ys).substitute(subs)
        total += index * integrate_polynomial(pulled, domain)
    return total


def point_count_bound(weights: Sequence[int], L: int) -> int:
    """Upper bound on #{x in Z^m_{>=0} : w.x <= L}: volume of the enlarged simplex."""
    m = len(weights)
    vol = Fraction((L + sum(weights)) ** m, factorial(m))
    for w in weights:
        vol /= w
    return int(vol) + 1


PointWeight = Callable[[tuple[int, ...], np.ndarray], np.ndarray]


def lattice_count_in_dilate(
    domain: SimplexDomain,
    weight: PointWeight | None,
    L: int,
    *,
    jobs: int = 1,
    max_points: int = MAX_POINTS,
) -> Fraction:
    """Sum of a per-point weight over integer x >= 0 with w.x <= L.

    ``weight(prefix, last)`` receives the first m-1 coordinates as a tuple and
    the admissible values of the last coordinate as an int64 array, and
    returns integer (or object) weights of the same length.  ``None`` counts
    points.  The outer coordinate is split across ``jobs`` threads; partial
    sums are exact integers reduced in a fixed order.
    """
    if L < 0:
        raise ValidationError("L must be non-negative")
    ws = [int(w) for w in domain.weights]
    if [Fraction(w) for w in ws] != list(domain.weights):
        raise ValidationError("lattice counting needs integer weights")
    if not ws:
        raise ValidationError("lattice counting needs at least one coordinate")
    if point_count_bound(ws, L) > max_points:
        raise GuardError(f"more than {max_points} lattice points at L = {L}")

    def row_sum(first: int) -> int:
        acc = 0
        stack = [((first,), L - ws[0] * first)]
        while stack:
            prefix, budget = stack.pop()
            k = len(prefix)
            if k == len(ws) - 1:
                last = np.arange(budget // ws[k] + 1, dtype=np.int64)
                acc += int(np.asarray(weight(prefix, last)).sum()) if weight else len(last)
                continue
            for v in range(budget // ws[k] + 1):
                stack.append((prefix + (v,), budget - ws[k] * v))
        return acc

    firsts = range(L // ws[0] + 1)
    if len(ws) == 1:
        if weight is None:
            return Fraction(L // ws[0] + 1)
        return Fraction(int(np.asarray(weight((), np.arange(L // ws[0] + 1, dtype=np.int64))).sum()))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(row_sum, firsts))
    else:
        parts = [row_sum(f) for f in firsts]
    return Fraction(sum(parts))
