"""Kontsevich volume polynomials V_{g,n} and their products over disconnected
surfaces.

    V_{g,n}(b) = sum_{|d| = 3g-3+n} <tau_d>_g prod_i b_i^{2 d_i} / (2^{d_i} d_i!)

No power of two is folded into V; the 2^{chi(Z)+|pi_0(Z)|} normalization
lives in the frequency prefactor.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import ValidationError
from .polyalg import MultiPoly, double_factorial, factorial
from .tau import tau

__all__ = [
    "SurfaceComponent",
    "SurfaceType",
    "compositions",
    "kontsevich_polynomial",
    "main_term_polynomial",
    "volume_of",
]


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _default_labels(n: int) -> tuple[str, ...]:
    return tuple(f"b{i}" for i in range(1, n + 1))


def _check_stable(g: int, n: int) -> None:
    if g < 0 or n < 1 or 2 * g - 2 + n <= 0:
        raise ValidationError(f"unstable surface type (g, n) = ({g}, {n})")


def kontsevich_polynomial(g: int, n: int, labels: Sequence[str] | None = None) -> MultiPoly:
    """V_{g,n} in the boundary variables ``labels`` (default b1..bn)."""
    _check_stable(g, n)
    labels = tuple(labels) if labels is not None else _default_labels(n)
    if len(labels) != n:
        raise ValidationError(f"expected {n} labels, got {len(labels)}")
    terms: dict[tuple[int, ...], Fraction] = {}
    for d in compositions(3 * g - 3 + n, n):
        value = tau(g, d)
        if not value:
            continue
        den = 1
        for di in d:
            den *= 2 ** di * factorial(di)
        terms[tuple(2 * di for di in d)] = value / den
    return MultiPoly(labels, terms)


def main_term_polynomial(g: int, n: int, labels: Sequence[str] | None = None) -> MultiPoly:
    """Aggarwal approximation ((6g-5+2n)!!/(g! 24^g)) sum prod b_i^{2d_i}/(2d_i+1)!."""
    _check_stable(g, n)
    labels = tuple(labels) if labels is not None else _default_labels(n)
    if len(labels) != n:
        raise ValidationError(f"expected {n} labels, got {len(labels)}")
    pref = Fraction(double_factorial(6 * g - 5 + 2 * n), factorial(g) * 24 ** g)
    terms = {}
    for d in compositions(3 * g - 3 + n, n):
        den = 1
        for di in d:
            den *= factorial(2 * di + 1)
        terms[tuple(2 * di for di in d)] = pref / den
    return MultiPoly(labels, terms)


@dataclass(frozen=True)
class SurfaceComponent:
    g: int
    n: int
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        _check_stable(self.g, self.n)
        if len(self.labels) != self.n:
            raise ValidationError(
                f"component (g={self.g}, n={self.n}) has {len(self.labels)} boundary labels"
            )

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.g - self.n


@dataclass(frozen=True)
class SurfaceType:
    """A possibly disconnected surface with globally distinct boundary labels."""

    components: tuple[SurfaceComponent, ...]

    def __post_init__(self) -> None:
        labels = [lab for c in self.components for lab in c.labels]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"boundary labels are not distinct: {labels}")

    @classmethod
    def from_types(cls, types: Sequence[tuple[int, int]], prefix: str = "z") -> "SurfaceType":
        """Label boundaries ``prefix1, prefix2, ...`` across components in order."""
        comps = []
        k = 1
        for g, n in types:
            comps.append(SurfaceComponent(g, n, tuple(f"{prefix}{k + i}" for i in range(n))))
            k += n
        return cls(tuple(comps))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for c in self.components for lab in c.labels)

    @property
    def euler_characteristic(self) -> int:
        return sum(c.euler_characteristic for c in self.components)

    @property
    def num_components(self) -> int:
        return len(self.components)

    @property
    def genus(self) -> int:
        return sum(c.g for c in self.components)

    @property
    def num_boundaries(self) -> int:
        return sum(c.n for c in self.components)


def volume_of(Z: SurfaceType) -> MultiPoly:
    """V_Z as the product of the component polynomials."""
    result = MultiPoly.constant(1)
    for comp in Z.components:
        result = result * kontsevich_polynomial(comp.g, comp.n, comp.labels)
    return result
