"""Arc-system charts on the hyperbolic part of a local type, flips, and the
Scenario record tying a local type to one of its realizations.

Coordinates: hyperbolic arc weights are ``x1..xr``; the weight of the k-th
annular component is ``y_k`` (intersection coefficient 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from . import _linalg as la
from .errors import ValidationError
from .polyalg import MultiPoly
from .volume import SurfaceType

__all__ = [
    "ArcChart",
    "FlipSpec",
    "ConstrainedChart",
    "MeasureZero",
    "CatalogFragment",
    "Scenario",
    "arc_variables",
    "annulus_variables",
    "boundary_form",
    "intersection_form",
    "flip_constrain",
    "admissible",
    "is_degenerate",
    "builtin_catalog",
    "iota0_mu0",
    "MAX_ARCS",
]

MAX_ARCS = 16


def arc_variables(r: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, r + 1))


def annulus_variables(n_prime: int) -> tuple[str, ...]:
    return tuple(f"y{k}" for k in range(1, n_prime + 1))


@dataclass(frozen=True)
class ArcChart:
    """One maximal arc system: incidence c (r x n), intersection vector iota."""

    incidence: tuple[tuple[int, ...], ...]
    iota: tuple[int, ...]
    stabilizer_order: int = 1
    name: str = ""
    n_boundary: int | None = None

    def __post_init__(self) -> None:
        inc = tuple(tuple(int(x) for x in row) for row in self.incidence)
        object.__setattr__(self, "incidence", inc)
        object.__setattr__(self, "iota", tuple(int(x) for x in self.iota))
        if self.n_boundary is None:
            object.__setattr__(self, "n_boundary", len(inc[0]) if inc else 0)
        errors = self._errors()
        if errors:
            raise ValidationError(errors)

    def _errors(self) -> list[str]:
        errs = []
        label = self.name or "chart"
        if len(self.iota) != len(self.incidence):
            errs.append(f"{label}: iota has {len(self.iota)} entries for {len(self.incidence)} arcs")
        if len(self.incidence) > MAX_ARCS:
            errs.append(f"{label}: {len(self.incidence)} arcs exceeds the limit {MAX_ARCS}")
        for i, row in enumerate(self.incidence, start=1):
            if len(row) != self.n_boundary:
                errs.append(f"{label}: incidence row {i} has {len(row)} entries, expected {self.n_boundary}")
            if any(x not in (0, 1, 2) for x in row):
                errs.append(f"{label}: incidence row {i} has entries outside {{0,1,2}}")
            if sum(row) != 2:
                errs.append(f"{label}: incidence row {i} sums to {sum(row)}, expected 2")
        for i, v in enumerate(self.iota, start=1):
            if v < 1:
                errs.append(f"{label}: iota_{i} = {v} must be >= 1")
        if self.stabilizer_order < 1:
            errs.append(f"{label}: stabilizer order must be positive")
        return errs

    @property
    def r(self) -> int:
        return len(self.incidence)

    @property
    def n(self) -> int:
        return int(self.n_boundary)

    @property
    def is_filling(self) -> bool:
        """Every boundary component meets some arc."""
        return all(any(row[j] for row in self.incidence) for j in range(self.n))

    def boundary_coefficients(self, j: int) -> tuple[int, ...]:
        """Column j (1-based) of the incidence matrix."""
        if not 1 <= j <= self.n:
            raise ValidationError(f"boundary index {j} out of range 1..{self.n}")
        return tuple(row[j - 1] for row in self.incidence)

    def to_dict(self) -> dict:
        out = {
            "iota": list(self.iota),
            "incidence": [list(row) for row in self.incidence],
            "stabilizer": self.stabilizer_order,
        }
        if self.name:
            out["name"] = self.name
        return out


def boundary_form(chart: ArcChart, j: int) -> MultiPoly:
    """b_j(x) = sum_i c_{ij} x_i."""
    coeffs = chart.boundary_coefficients(j)
    return MultiPoly.linear(dict(zip(arc_variables(chart.r), coeffs))).with_variables(
        arc_variables(chart.r)
    )


def intersection_form(chart: ArcChart, n_prime: int = 0) -> MultiPoly:
    """I(x, y) = sum_i iota_i x_i + sum_k y_k."""
    coeffs: dict[str, int] = dict(zip(arc_variables(chart.r), chart.iota))
    coeffs.update({v: 1 for v in annulus_variables(n_prime)})
    return MultiPoly.linear(coeffs)


@dataclass(frozen=True)
class FlipSpec:
    """Involution on the boundary of Sigma.

    ``swaps`` lists the exchanged pairs among the hyperbolic boundaries
    1..n_boundary; every annular component always has its two boundaries
    exchanged, so annuli need no explicit entry.
    """

    n_boundary: int
    swaps: tuple[tuple[int, int], ...] = ()
    n_annuli: int = 0

    def __post_init__(self) -> None:
        swaps = tuple(tuple(sorted((int(a), int(b)))) for a, b in self.swaps)
        object.__setattr__(self, "swaps", tuple(sorted(swaps)))
        seen: set[int] = set()
        for a, b in self.swaps:
            if a == b:
                raise ValidationError(f"flip pair ({a}, {b}) is not a swap")
            for x in (a, b):
                if not 1 <= x <= self.n_boundary:
                    raise ValidationError(f"flip label {x} out of range 1..{self.n_boundary}")
                if x in seen:
                    raise ValidationError(f"boundary {x} appears in two flip pairs")
                seen.add(x)

    @property
    def fixed(self) -> tuple[int, ...]:
        moved = {x for pair in self.swaps for x in pair}
        return tuple(j for j in range(1, self.n_boundary + 1) if j not in moved)

    @property
    def is_essential(self) -> bool:
        """Only annular boundaries are exchanged."""
        return not self.swaps

    def image(self, j: int) -> int:
        for a, b in self.swaps:
            if j == a:
                return b
            if j == b:
                return a
        return j

    @property
    def num_orbits(self) -> int:
        return len(self.fixed) + len(self.swaps)


@dataclass(frozen=True)
class MeasureZero:
    """The flip-invariant slice of a chart has less than full dimension."""

    dimension: int
    expected: int

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class ConstrainedChart:
    """Flip-invariant cone {x >= 0 : b(x) = b(flip x)} of one chart.

    ``basis`` is a Z-basis (columns as vectors of length r) of the integer
    lattice of the constrained subspace; ``rays`` are the primitive extreme
    rays of the cone and ``simplices`` a unimodular-index triangulation: each
    entry is (ray indices, lattice index |det|).
    """

    chart: ArcChart
    flip: FlipSpec
    basis: tuple[tuple[int, ...], ...]
    rays: tuple[tuple[int, ...], ...]
    simplices: tuple[tuple[tuple[int, ...], int], ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def parametrize(self, params: Sequence[int]) -> tuple[int, ...]:
        if len(params) != len(self.basis):
            raise ValidationError("wrong number of lattice parameters")
        r = self.chart.r
        return tuple(sum(p * vec[i] for p, vec in zip(params, self.basis)) for i in range(r))

    def free_coordinates(self) -> tuple[str, ...]:
        """Arc variables that can be used as coordinates on the slice."""
        names = arc_variables(self.chart.r)
        if not self.basis:
            return ()
        rows = list(zip(*self.basis))
        # pick, greedily, coordinates whose rows are independent
        chosen: list[int] = []
        for i, row in enumerate(rows):
            if la.rank([rows[k] for k in chosen] + [row], len(self.basis)) > len(chosen):
                chosen.append(i)
        return tuple(names[i] for i in chosen)


def _flip_matrix(chart: ArcChart, flip: FlipSpec) -> list[list[int]]:
    rows = []
    for a, b in flip.swaps:
        ca, cb = chart.boundary_coefficients(a), chart.boundary_coefficients(b)
        rows.append([x - y for x, y in zip(ca, cb)])
    return rows


def _extreme_rays(A: list[list[int]], r: int) -> list[list[int]]:
    """Primitive extreme rays of {x >= 0 : A x = 0}, found as positive circuits."""
    if not A:
        return [[int(i == j) for j in range(r)] for i in range(r)]
    rays = []
    for size in range(1, r + 1):
        for support in combinations(range(r), size):
            sub = [[row[i] for i in support] for row in A]
            ker = la.nullspace(sub, size)
            if len(ker) != 1:
                continue
            v = ker[0]
            if all(x > 0 for x in v) or all(x < 0 for x in v):
                prim = la.primitive([abs(x) for x in v])
                full = [0] * r
                for i, val in zip(support, prim):
                    full[i] = val
                rays.append(full)
    return rays


def _triangulate(vectors: list[list[Fraction]]) -> list[tuple[int, ...]]:
    """Pulling triangulation of the pointed cone spanned by ``vectors``.

    Vectors may span a proper subspace; the recursion works in coordinates of
    that span.  Returns index tuples of simplicial subcones.
    """
    k = la.rank(vectors)
    if k == 0:
        return []
    if len(vectors) == k:
        return [tuple(range(len(vectors)))]
    red, pivots = la.rref(vectors)
    span = [list(row) for row in red]
    coords = [la.solve_in_basis(span, v) for v in vectors]
    facets: dict[frozenset[int], None] = {}
    for subset in combinations(range(len(coords)), k - 1):
        rows = [coords[i] for i in subset]
        if la.rank(rows, k) != k - 1:
            continue
        normal = la.nullspace(rows, k)[0]
        signs = [sum(a * b for a, b in zip(normal, c)) for c in coords]
        if all(s >= 0 for s in signs) or all(s <= 0 for s in signs):
            facets[frozenset(i for i, s in enumerate(signs) if s == 0)] = None
    apex = 0
    result = []
    for facet in facets:
        if apex in facet:
            continue
        members = sorted(facet)
        for simplex in _triangulate([coords[i] for i in members]):
            result.append(tuple(sorted([members[i] for i in simplex] + [apex])))
    return result


def flip_constrain(chart: ArcChart, flip: FlipSpec) -> ConstrainedChart | MeasureZero:
    """Restrict a chart to the flip-invariant slice, or report it measure-zero.

    The expected dimension is r minus the number of swapped pairs; a slice of
    smaller dimension contributes nothing to the chart measure.
    """
    if flip.n_boundary != chart.n:
        raise ValidationError(f"flip acts on {flip.n_boundary} boundaries, chart has {chart.n}")
    r = chart.r
    A = _flip_matrix(chart, flip)
    expected = r - len(flip.swaps)
    rays = _extreme_rays(A, r)
    dim = la.rank(rays, r) if rays else 0
    if dim < expected:
        return MeasureZero(dimension=dim, expected=expected)
    kernel_dim = r - la.rank(A, r) if A else r
    if dim != expected or kernel_dim != expected:
        raise ValidationError(
            f"flip constraints on {chart.name or 'chart'} are degenerate "
            f"(cone dimension {dim}, kernel dimension {kernel_dim}, expected {expected})"
        )
    basis = la.integer_kernel(A, r) if A else [[int(i == j) for j in range(r)] for i in range(r)]
    coords = [la.solve_in_basis(basis, v) for v in rays]
    # a zero-dimensional slice is the single point 0, with counting measure 1
    simplices = [((), 1)] if expected == 0 else []
    for simplex in _triangulate(coords):
        index = abs(la.det([coords[i] for i in simplex]))
        if index.denominator != 1:
            raise AssertionError("non-integral lattice index")
        simplices.append((simplex, int(index)))
    return ConstrainedChart(
        chart=chart,
        flip=flip,
        basis=tuple(tuple(v) for v in basis),
        rays=tuple(tuple(v) for v in rays),
        simplices=tuple(simplices),
    )


def is_degenerate(b: Sequence[int]) -> bool:
    """A zero boundary length: no positive-length metric realizes it."""
    return any(x == 0 for x in b)


def admissible(Z: SurfaceType, b: Sequence[int] | Mapping[str, int],
               annuli: Sequence[tuple[str, str]] = ()) -> bool:
    """Integrality, even boundary sum per component, equal entries on annuli."""
    labels = Z.labels + tuple(lab for pair in annuli for lab in pair)
    if isinstance(b, Mapping):
        try:
            values = {lab: b[lab] for lab in labels}
        except KeyError as exc:
            raise ValidationError(f"no boundary value for {exc.args[0]!r}") from None
    else:
        if len(b) != len(labels):
            raise ValidationError(f"expected {len(labels)} boundary values, got {len(b)}")
        values = dict(zip(labels, b))
    for v in values.values():
        if isinstance(v, Fraction) and v.denominator != 1:
            return False
        if not float(v).is_integer() or v < 0:
            return False
    for comp in Z.components:
        if sum(int(values[lab]) for lab in comp.labels) % 2:
            return False
    return all(values[a] == values[c] for a, c in annuli)


@dataclass(frozen=True)
class CatalogFragment:
    name: str
    charts: tuple[ArcChart, ...]
    n_boundary: int
    n_prime: int
    chi: int


# Figure-eight on a pair of pants: four maximal arc systems.
# Rows are arcs x1, x2, x3; columns boundaries b1, b2, b3.
_FIGURE8 = (
    ArcChart(((1, 1, 0), (0, 1, 1), (1, 0, 1)), (1, 1, 2), name="alpha1"),
    ArcChart(((1, 1, 0), (2, 0, 0), (1, 0, 1)), (1, 2, 2), name="alpha2"),
    ArcChart(((0, 0, 2), (0, 1, 1), (1, 0, 1)), (2, 1, 2), name="alpha3"),
    ArcChart(((1, 1, 0), (0, 1, 1), (0, 2, 0)), (1, 1, 2), name="alpha4"),
)

_EMPTY_CHART = ArcChart((), (), name="annulus")


def builtin_catalog(name: str) -> CatalogFragment:
    if name == "pants_figure8":
        return CatalogFragment(name, _FIGURE8, n_boundary=3, n_prime=0, chi=-1)
    if name == "annulus_simple":
        return CatalogFragment(name, (_EMPTY_CHART,), n_boundary=0, n_prime=1, chi=0)
    raise ValidationError(f"unknown catalog {name!r}; known: pants_figure8, annulus_simple")


def iota0_mu0(charts: Sequence[ArcChart]) -> tuple[int | None, int]:
    """Minimal arc intersection and the largest count of arcs attaining it in one chart."""
    values = [v for c in charts for v in c.iota]
    if not values:
        return None, 0
    iota0 = min(values)
    return iota0, max(sum(1 for v in c.iota if v == iota0) for c in charts)


@dataclass(frozen=True)
class Scenario:
    """A local type with one realization.

    ``gluing`` maps flip orbits to boundary labels of Z: ``"b<j>"`` for a
    fixed hyperbolic boundary j (one Z label) and ``"a<k>"`` for the k-th
    annulus (two Z labels).  Swapped hyperbolic pairs glue to nothing.
    """

    name: str
    charts: tuple[ArcChart, ...]
    flip: FlipSpec
    Z: SurfaceType
    gluing: Mapping[str, tuple[str, ...]]
    chi_sigma: int
    sym: int = 1
    k1: Fraction = Fraction(1)
    k2: Fraction = Fraction(1)
    genus: int | None = None
    K: int | None = None
    genus_formula: str | None = None
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "charts", tuple(self.charts))
        object.__setattr__(
            self, "gluing", {k: tuple(v) for k, v in sorted(dict(self.gluing).items())}
        )
        object.__setattr__(self, "k1", Fraction(self.k1))
        object.__setattr__(self, "k2", Fraction(self.k2))
        errors = self.validation_errors()
        if errors:
            raise ValidationError(errors)

    @property
    def n_prime(self) -> int:
        return self.flip.n_annuli

    @property
    def n_boundary(self) -> int:
        return self.flip.n_boundary

    def validation_errors(self) -> list[str]:
        errs: list[str] = []
        if not self.charts:
            errs.append("scenario has no charts")
        for c in self.charts:
            if c.n != self.n_boundary:
                errs.append(f"chart {c.name or '?'} has {c.n} boundaries, flip expects {self.n_boundary}")
            if not c.is_filling:
                errs.append(f"chart {c.name or '?'} is non-filling (zero column in incidence)")
        if self.sym < 1:
            errs.append("sym must be a positive integer")
        if self.k1 <= 0 or self.k2 <= 0:
            errs.append("k1 and k2 must be positive")
        expected_keys = {f"b{j}" for j in self.flip.fixed} | {f"a{k}" for k in range(1, self.n_prime + 1)}
        keys = set(self.gluing)
        for key in sorted(expected_keys - keys):
            errs.append(f"gluing has no entry for orbit {key}")
        for key in sorted(keys - expected_keys):
            errs.append(f"gluing entry {key} is not a fixed boundary or annulus orbit")
        used: list[str] = []
        for key, targets in self.gluing.items():
            need = 2 if key.startswith("a") else 1
            if key in expected_keys and len(targets) != need:
                errs.append(f"orbit {key} must glue to {need} boundary of Z, got {len(targets)}")
            used.extend(targets)
        zlabels = list(self.Z.labels)
        if sorted(used) != sorted(zlabels):
            errs.append(
                f"gluing uses Z boundaries {sorted(used)} but Z has {sorted(zlabels)} "
                "(|dZ| must equal |fixed| + 2|annuli|, each used once)"
            )
        if self.K is not None and self.flip.is_essential and not errs:
            iota0, mu0 = iota0_mu0(self.charts)
            if iota0 == 1 and self.n_prime == 0 and self.chi_sigma + mu0 > self.K:
                errs.append(
                    f"chi(Sigma) + mu0 = {self.chi_sigma + mu0} exceeds the self-intersection number K = {self.K}"
                )
        return errs

    @property
    def prefactor(self) -> Fraction:
        """k1 k2 2^{chi(Z)+|pi_0(Z)|} / sym."""
        e = self.Z.euler_characteristic + self.Z.num_components
        return self.k1 * self.k2 * Fraction(2) ** e / self.sym
