"""Ribbon graphs with labeled boundary faces and integral metrics on them.

Darts are 0..2E-1, ``alpha`` pairs the two darts of an edge and ``sigma``
rotates darts around vertices.  Faces are the cycles of sigma o alpha; a
face's length is the sum of the lengths of the edges met along its cycle, so
an edge bordered twice by the same face counts twice.

N_{g,n}(b) sums, over all isomorphism classes of connected ribbon graphs with
every vertex of degree >= 3, the number of positive integer edge lengths with
face lengths b, each weighted by 1/|Aut|.  Trivalent graphs are the top cells;
graphs with higher-degree vertices are the lower cells where edges of a
trivalent graph have collapsed.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import lcm
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import GuardError, ValidationError
from .volume import kontsevich_polynomial

__all__ = [
    "MAX_EDGES",
    "RibbonGraph",
    "enumerate_ribbon_graphs",
    "count_lattice_points",
    "norbury_ratio",
    "CountingFunction",
    "counting_function",
]

MAX_EDGES = 7


@dataclass(frozen=True)
class RibbonGraph:
    """A connected ribbon graph with faces labeled 1..n.

    ``face_of[h]`` is the label of the face containing dart h; ``aut`` is the
    number of label-preserving automorphisms.
    """

    sigma: tuple[int, ...]
    alpha: tuple[int, ...]
    face_of: tuple[int, ...]
    aut: int = 1

    @property
    def num_darts(self) -> int:
        return len(self.sigma)

    @property
    def num_edges(self) -> int:
        return len(self.sigma) // 2

    @property
    def vertex_cycles(self) -> list[tuple[int, ...]]:
        return _cycles(self.sigma)

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_cycles)

    @property
    def vertex_degrees(self) -> tuple[int, ...]:
        return tuple(sorted(len(c) for c in self.vertex_cycles))

    @property
    def face_cycles(self) -> list[tuple[int, ...]]:
        return _cycles(_face_perm(self.sigma, self.alpha))

    @property
    def num_faces(self) -> int:
        return len(self.face_cycles)

    @property
    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_faces

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    @property
    def is_trivalent(self) -> bool:
        return all(d == 3 for d in self.vertex_degrees)

    def edges(self) -> list[tuple[int, int]]:
        return sorted({tuple(sorted((h, self.alpha[h]))) for h in range(self.num_darts)})

    def face_edge_matrix(self) -> tuple[tuple[int, ...], ...]:
        """M[f][e] = number of times face f+1 runs along edge e."""
        index = {}
        for k, (a, b) in enumerate(self.edges()):
            index[a] = index[b] = k
        n = max(self.face_of) if self.face_of else 0
        m = [[0] * self.num_edges for _ in range(n)]
        for h in range(self.num_darts):
            m[self.face_of[h] - 1][index[h]] += 1
        return tuple(tuple(row) for row in m)


def _cycles(perm: Sequence[int]) -> list[tuple[int, ...]]:
    seen = [False] * len(perm)
    out = []
    for s in range(len(perm)):
        if seen[s]:
            continue
        cyc = []
        h = s
        while not seen[h]:
            seen[h] = True
            cyc.append(h)
            h = perm[h]
        out.append(tuple(cyc))
    return out


def _face_perm(sigma: Sequence[int], alpha: Sequence[int]) -> tuple[int, ...]:
    return tuple(sigma[alpha[h]] for h in range(len(sigma)))


def _connected(sigma: Sequence[int], alpha: Sequence[int]) -> bool:
    n = len(sigma)
    seen = {0}
    stack = [0]
    while stack:
        h = stack.pop()
        for k in (sigma[h], alpha[h]):
            if k not in seen:
                seen.add(k)
                stack.append(k)
    return len(seen) == n


def _code_from(start: int, sigma, alpha, labels) -> tuple:
    order = [start]
    new = {start: 0}
    i = 0
    while i < len(order):
        h = order[i]
        for k in (alpha[h], sigma[h]):
            if k not in new:
                new[k] = len(order)
                order.append(k)
        i += 1
    return tuple((new[alpha[h]], new[sigma[h]], labels[h]) for h in order)


def _canonical(sigma, alpha, labels) -> tuple[tuple, int]:
    """Minimal BFS encoding over all starting darts and how many starts reach it."""
    best = None
    count = 0
    for s in range(len(sigma)):
        code = _code_from(s, sigma, alpha, labels)
        if best is None or code < best:
            best, count = code, 1
        elif code == best:
            count += 1
    return best, count


def _matchings(items: list[int]) -> Iterator[list[tuple[int, int]]]:
    if not items:
        yield []
        return
    first = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1:]
        for m in _matchings(rest):
            yield [(first, items[i])] + m


def _degree_partitions(total: int, parts: int, minimum: int) -> Iterator[tuple[int, ...]]:
    """Non-increasing tuples of ``parts`` integers >= minimum summing to total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total - minimum * (parts - 1), minimum - 1, -1):
        for rest in _degree_partitions(total - first, parts - 1, minimum):
            if not rest or rest[0] <= first:
                yield (first,) + rest


def _check_guard(g: int, n: int, max_edges: int) -> None:
    if g < 0 or n < 1 or 2 * g - 2 + n <= 0:
        raise ValidationError(f"unstable type (g, n) = ({g}, {n})")
    top = 6 * g - 6 + 3 * n
    if top > max_edges:
        raise GuardError(f"type ({g}, {n}) needs {top} edges, above the guard of {max_edges}")


_graph_cache: dict[tuple[int, int, bool], tuple[RibbonGraph, ...]] = {}
_graph_lock = threading.Lock()


def enumerate_ribbon_graphs(g: int, n: int, *, trivalent: bool = True,
                            max_edges: int = MAX_EDGES) -> list[RibbonGraph]:
    """Isomorphism classes of connected ribbon graphs of type (g, n).

    Faces carry labels 1..n and isomorphisms must preserve them.  With
    ``trivalent=False`` every graph with all vertex degrees >= 3 is returned.
    """
    _check_guard(g, n, max_edges)
    key = (g, n, trivalent)
    with _graph_lock:
        if key not in _graph_cache:
            _graph_cache[key] = tuple(_enumerate(g, n, trivalent))
        return list(_graph_cache[key])


def _enumerate(g: int, n: int, trivalent: bool) -> list[RibbonGraph]:
    chi = 2 - 2 * g
    top = 6 * g - 6 + 3 * n
    edge_counts = [top] if trivalent else range(2 * g - 1 + n, top + 1)
    found: dict[tuple, RibbonGraph] = {}
    for E in edge_counts:
        V = chi - n + E
        if V < 1:
            continue
        for degrees in _degree_partitions(2 * E, V, 3):
            if trivalent and any(d != 3 for d in degrees):
                continue
            sigma = [0] * (2 * E)
            pos = 0
            for d in degrees:
                for i in range(d):
                    sigma[pos + i] = pos + (i + 1) % d
                pos += d
            sigma_t = tuple(sigma)
            unlabeled: dict[tuple, tuple[int, ...]] = {}
            for matching in _matchings(list(range(2 * E))):
                alpha = [0] * (2 * E)
                for a, b in matching:
                    alpha[a], alpha[b] = b, a
                alpha_t = tuple(alpha)
                if not _connected(sigma_t, alpha_t):
                    continue
                if len(_cycles(_face_perm(sigma_t, alpha_t))) != n:
                    continue
                code, _ = _canonical(sigma_t, alpha_t, (0,) * (2 * E))
                unlabeled.setdefault(code, alpha_t)
            for alpha_t in unlabeled.values():
                faces = _cycles(_face_perm(sigma_t, alpha_t))
                for perm in permutations(range(1, n + 1)):
                    labels = [0] * (2 * E)
                    for face, lab in zip(faces, perm):
                        for h in face:
                            labels[h] = lab
                    code, aut = _canonical(sigma_t, alpha_t, tuple(labels))
                    if code not in found:
                        found[code] = RibbonGraph(sigma_t, alpha_t, tuple(labels), aut)
    return [found[k] for k in sorted(found)]


def _count_solutions(matrix: tuple[tuple[int, ...], ...], b: tuple[int, ...], minimum: int) -> int:
    """#{l in Z^E, l >= minimum : M l = b} by depth-first search with forcing."""
    n = len(matrix)
    E = len(matrix[0]) if matrix else 0
    last = [max((e for e in range(E) if matrix[f][e]), default=-1) for f in range(n)]
    if any(last[f] < 0 and b[f] != 0 for f in range(n)):
        return 0
    remaining = list(b)

    def go(e: int) -> int:
        if e == E:
            return int(all(r == 0 for r in remaining))
        faces = [f for f in range(n) if matrix[f][e]]
        hi = min(remaining[f] // matrix[f][e] for f in faces)
        lo = minimum
        closing = [f for f in faces if last[f] == e]
        if closing:
            f = closing[0]
            if remaining[f] % matrix[f][e]:
                return 0
            forced = remaining[f] // matrix[f][e]
            lo = hi = forced if forced >= minimum and forced <= hi else None
            if lo is None:
                return 0
        total = 0
        for v in range(lo, hi + 1):
            for f in faces:
                remaining[f] -= matrix[f][e] * v
            if all(remaining[f] == 0 for f in closing):
                total += go(e + 1)
            for f in faces:
                remaining[f] += matrix[f][e] * v
        return total

    return go(0)


@lru_cache(maxsize=None)
def _graph_data(g: int, n: int, trivalent: bool) -> tuple[tuple[tuple[tuple[int, ...], ...], int], ...]:
    return tuple((G.face_edge_matrix(), G.aut) for G in enumerate_ribbon_graphs(g, n, trivalent=trivalent))


_count_lock = threading.Lock()


@lru_cache(maxsize=None)
def _count_cached(g: int, n: int, b: tuple[int, ...], trivalent: bool, minimum: int) -> Fraction:
    total = Fraction(0)
    for matrix, aut in _graph_data(g, n, trivalent):
        total += Fraction(_count_solutions(matrix, b, minimum), aut)
    return total


def count_lattice_points(g: int, n: int, b: Sequence[int], *, trivalent_only: bool = False,
                         allow_zero_edges: bool = False) -> Fraction:
    """N_{g,n}(b): integral metrics with face lengths b, weighted by 1/|Aut|.

    Defaults count positive lengths over all cells (vertex degrees >= 3).
    ``trivalent_only`` restricts to top cells; ``allow_zero_edges`` lets edge
    lengths vanish (closed top cells, which overcount shared faces).
    """
    b = tuple(int(x) for x in b)
    if len(b) != n:
        raise ValidationError(f"expected {n} boundary lengths, got {len(b)}")
    if any(x < 0 for x in b):
        raise ValidationError(f"boundary lengths must be non-negative, got {b}")
    _check_guard(g, n, MAX_EDGES)
    if sum(b) % 2:
        return Fraction(0)
    minimum = 0 if allow_zero_edges else 1
    if minimum and any(x == 0 for x in b):
        return Fraction(0)
    with _count_lock:
        return _count_cached(g, n, b, trivalent_only, minimum)


def norbury_ratio(g: int, n: int, b_scale: int, reference: Sequence[int] | None = None
                  ) -> tuple[Fraction, Fraction]:
    """(N_{g,n}(k b0), 2^{chi+1} V_{g,n}(k b0)) for k = b_scale, b0 even (default all 2)."""
    if b_scale <= 0:
        raise ValidationError("scale must be a positive integer (scale 0 is degenerate)")
    ref = tuple(reference) if reference is not None else (2,) * n
    if len(ref) != n or any(x <= 0 or x % 2 for x in ref):
        raise ValidationError(f"reference vector must have {n} positive even entries")
    b = tuple(b_scale * x for x in ref)
    N = count_lattice_points(g, n, b)
    V = kontsevich_polynomial(g, n).evaluate({f"b{i + 1}": x for i, x in enumerate(b)})
    return N, Fraction(2) ** (2 - 2 * g - n + 1) * V


@dataclass(frozen=True)
class CountingFunction:
    """Vectorized N_{g,n}: ``numerator(*columns)`` returns integer arrays of
    N * denominator, one entry per row of the boundary columns."""

    g: int
    n: int
    denominator: int
    numerator: Callable[..., np.ndarray]

    def __call__(self, *b: int) -> Fraction:
        cols = [np.array([x], dtype=np.int64) for x in b]
        return Fraction(int(self.numerator(*cols)[0]), self.denominator)


def _n03(b1, b2, b3):
    ok = (b1 > 0) & (b2 > 0) & (b3 > 0) & ((b1 + b2 + b3) % 2 == 0)
    return ok.astype(np.int64)


def _n11(b):
    # theta graph (|Aut| 6) plus the one-vertex two-loop graph (|Aut| 4)
    ok = (b > 0) & (b % 2 == 0)
    return np.where(ok, b * b - 4, 0).astype(np.int64)


def _n04(b1, b2, b3, b4):
    # (sum b^2 - 4)/4, or (sum b^2 - 2)/4 with exactly two odd entries
    ok = (b1 > 0) & (b2 > 0) & (b3 > 0) & (b4 > 0) & ((b1 + b2 + b3 + b4) % 2 == 0)
    odd = b1 % 2 + b2 % 2 + b3 % 2 + b4 % 2
    s = b1 * b1 + b2 * b2 + b3 * b3 + b4 * b4
    return np.where(ok, np.where(odd == 2, s - 2, s - 4), 0).astype(np.int64)


def _n12(b1, b2):
    # (s-4)(s-8)/384 for even entries, (s-2)(s-10)/384 for odd, s = b1^2 + b2^2
    ok = (b1 > 0) & (b2 > 0) & ((b1 + b2) % 2 == 0)
    s = b1 * b1 + b2 * b2
    return np.where(ok, np.where(b1 % 2 == 0, (s - 4) * (s - 8), (s - 2) * (s - 10)), 0).astype(np.int64)


_CLOSED_FORMS = {(0, 3): (1, _n03), (1, 1): (48, _n11), (0, 4): (4, _n04), (1, 2): (384, _n12)}


def counting_function(g: int, n: int, *, closed_form: bool = True) -> CountingFunction:
    """Closed forms for (0,3), (1,1), (0,4), (1,2); memoized enumeration otherwise
    or when ``closed_form`` is false."""
    if closed_form and (g, n) in _CLOSED_FORMS:
        den, fn = _CLOSED_FORMS[(g, n)]
        return CountingFunction(g, n, den, fn)
    _check_guard(g, n, MAX_EDGES)
    den = 1
    for _, aut in _graph_data(g, n, False):
        den = lcm(den, aut)

    def generic(*cols: np.ndarray) -> np.ndarray:
        out = np.zeros(len(cols[0]), dtype=np.int64)
        for i, row in enumerate(zip(*cols)):
            out[i] = int(count_lattice_points(g, n, [int(x) for x in row]) * den)
        return out

    return CountingFunction(g, n, den, generic)
