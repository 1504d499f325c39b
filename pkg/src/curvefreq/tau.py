"""psi-class intersection numbers <tau_{d_1} ... tau_{d_n}>_g.

Values come from the DVV (Virasoro) recursion

    (2k+3)!! <tau_{k+1} tau_D>_g
        = sum_j (2k+2d_j+1)!!/(2d_j-1)!! <tau_{k+d_j} tau_{D - d_j}>_g
        + 1/2 sum_{a+b=k-1} (2a+1)!!(2b+1)!! <tau_a tau_b tau_D>_{g-1}
        + 1/2 sum_{a+b=k-1} (2a+1)!!(2b+1)!!
              sum_{g1+g2=g, I+J=D} <tau_a tau_I>_{g1} <tau_b tau_J>_{g2}

with base cases <tau_0^3>_0 = 1 and <tau_1>_1 = 1/24 (the only correlator
where every sum on the right is empty).  The string and dilaton equations are only
used as independent checks.
"""

from __future__ import annotations

import os
import threading
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import GuardError, ValidationError
from .polyalg import double_factorial, factorial, format_rational, parse_rational

__all__ = [
    "MAX_GENUS",
    "MAX_POINTS",
    "CACHE_ENV_VAR",
    "tau",
    "tau_main_term",
    "tau_upper_bound_holds",
    "string_equation_holds",
    "dilaton_equation_holds",
    "cached_values",
    "clear_cache",
    "TauDiskCache",
]

MAX_GENUS = 30
MAX_POINTS = 12
CACHE_ENV_VAR = "CURVEFREQ_CACHE_DIR"
CACHE_FILENAME = "tau_cache.txt"

_memo: dict[tuple[int, tuple[int, ...]], Fraction] = {}
_lock = threading.RLock()


def _key(g: int, d: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    return g, tuple(sorted(d))


def _check_args(g: int, d: Sequence[int], allow_large: bool) -> None:
    if g < 0:
        raise ValidationError(f"genus must be non-negative, got {g}")
    if len(d) < 1:
        raise ValidationError("need at least one marked point")
    if any(x < 0 for x in d):
        raise ValidationError(f"negative descendant index in {list(d)}")
    if 2 * g - 2 + len(d) <= 0:
        raise ValidationError(f"unstable type (g, n) = ({g}, {len(d)})")
    if not allow_large and (g > MAX_GENUS or len(d) > MAX_POINTS):
        raise GuardError(
            f"(g, n) = ({g}, {len(d)}) exceeds the guard g <= {MAX_GENUS}, n <= {MAX_POINTS}"
        )


def tau(g: int, d: Sequence[int], *, allow_large: bool = False) -> Fraction:
    """Exact <tau_{d_1} ... tau_{d_n}>_g; zero off the dimension constraint."""
    d = [int(x) for x in d]
    _check_args(g, d, allow_large)
    with _lock:
        return _tau(*_key(g, d))


def _tau(g: int, d: tuple[int, ...]) -> Fraction:
    # d is sorted; unstable or off-dimension correlators vanish
    n = len(d)
    if g < 0 or n == 0 or 2 * g - 2 + n <= 0:
        return Fraction(0)
    if sum(d) != 3 * g - 3 + n:
        return Fraction(0)
    key = (g, d)
    hit = _memo.get(key)
    if hit is not None:
        return hit
    if d[-1] == 0:
        # only <tau_0^3>_0 survives the dimension constraint
        value = Fraction(1)
    elif key == (1, (1,)):
        value = Fraction(1, 24)
    else:
        value = _dvv(g, d)
    _memo[key] = value
    return value


def _dvv(g: int, d: tuple[int, ...]) -> Fraction:
    k = d[-1] - 1
    rest = list(d[:-1])
    total = Fraction(0)
    for j, dj in enumerate(rest):
        others = rest[:j] + rest[j + 1:]
        coeff = Fraction(double_factorial(2 * k + 2 * dj + 1), double_factorial(2 * dj - 1))
        total += coeff * _tau(g, tuple(sorted(others + [k + dj])))
    if k >= 1:
        half = Fraction(1, 2)
        m = len(rest)
        for a in range(k):
            b = k - 1 - a
            coeff = half * double_factorial(2 * a + 1) * double_factorial(2 * b + 1)
            if g >= 1:
                total += coeff * _tau(g - 1, tuple(sorted(rest + [a, b])))
            split = Fraction(0)
            for size in range(m + 1):
                for idx in combinations(range(m), size):
                    left = [rest[i] for i in idx]
                    right = [rest[i] for i in range(m) if i not in idx]
                    dim_left = a + sum(left)
                    for g1 in range(g + 1):
                        # prune on the dimension constraint before recursing
                        if dim_left != 3 * g1 - 2 + len(left):
                            continue
                        lv = _tau(g1, tuple(sorted(left + [a])))
                        if lv:
                            split += lv * _tau(g - g1, tuple(sorted(right + [b])))
            total += coeff * split
    return total / double_factorial(2 * k + 3)


def tau_main_term(g: int, d: Sequence[int]) -> Fraction:
    """Aggarwal's large-genus approximation (6g-5+2n)!! / (prod (2d_i+1)!! g! 24^g)."""
    d = list(d)
    n = len(d)
    if sum(d) != 3 * g - 3 + n:
        raise ValidationError(f"sum(d) = {sum(d)} differs from 3g-3+n = {3 * g - 3 + n}")
    den = factorial(g) * 24 ** g
    for x in d:
        den *= double_factorial(2 * x + 1)
    return Fraction(double_factorial(6 * g - 5 + 2 * n), den)


def tau_upper_bound_holds(g: int, d: Sequence[int]) -> bool:
    """Whether tau <= main_term * (3/2)^(n-1), compared exactly."""
    d = list(d)
    if sum(d) != 3 * g - 3 + len(d):
        return True
    bound = tau_main_term(g, d) * Fraction(3, 2) ** (len(d) - 1)
    return tau(g, d) <= bound


def string_equation_holds(g: int, d: Sequence[int]) -> bool:
    """<tau_0 tau_D>_g = sum_j <tau_D with d_j lowered>_g."""
    d = list(d)
    lhs = tau(g, [0] + d)
    rhs = Fraction(0)
    for j, dj in enumerate(d):
        if dj > 0:
            lowered = d[:j] + [dj - 1] + d[j + 1:]
            if 2 * g - 2 + len(lowered) > 0:
                rhs += tau(g, lowered)
    return lhs == rhs


def dilaton_equation_holds(g: int, d: Sequence[int]) -> bool:
    """<tau_1 tau_D>_g = (2g-2+n) <tau_D>_g."""
    d = list(d)
    lhs = tau(g, [1] + d)
    rhs = (2 * g - 2 + len(d)) * tau(g, d) if 2 * g - 2 + len(d) > 0 else Fraction(0)
    return lhs == rhs


def cached_values() -> list[tuple[int, tuple[int, ...], Fraction]]:
    """Snapshot of the in-memory memo, sorted by key."""
    with _lock:
        return sorted((g, d, v) for (g, d), v in _memo.items())


def clear_cache() -> None:
    with _lock:
        _memo.clear()


class TauDiskCache:
    """Line-oriented persistent cache, one ``g;d1,...,dn;p/q`` record per line.

    ``load`` merges records into the in-memory memo; ``save`` writes the memo
    back atomically.  Records that disagree with an existing value raise.
    """

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)

    @classmethod
    def from_env(cls) -> "TauDiskCache | None":
        root = os.environ.get(CACHE_ENV_VAR)
        if not root:
            return None
        return cls(Path(root) / CACHE_FILENAME)

    @staticmethod
    def format_record(g: int, d: Sequence[int], value: Fraction) -> str:
        return f"{g};{','.join(map(str, d))};{format_rational(value)}"

    @staticmethod
    def parse_record(line: str) -> tuple[int, tuple[int, ...], Fraction]:
        try:
            g_txt, d_txt, v_txt = line.strip().split(";")
            d = tuple(sorted(int(x) for x in d_txt.split(","))) if d_txt else ()
            return int(g_txt), d, parse_rational(v_txt)
        except ValueError as exc:
            raise ValidationError(f"malformed cache record {line.strip()!r}") from exc

    def records(self) -> Iterator[tuple[int, tuple[int, ...], Fraction]]:
        if not self.path.exists():
            return
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield self.parse_record(line)

    def load(self) -> int:
        count = 0
        with _lock:
            for g, d, value in self.records():
                old = _memo.get((g, d))
                if old is not None and old != value:
                    raise ValidationError(f"cache record for g={g}, d={d} conflicts with computed value")
                _memo[(g, d)] = value
                count += 1
        return count

    def save(self) -> int:
        with _lock:
            rows = [self.format_record(g, d, v) for (g, d), v in sorted(_memo.items())]
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text("".join(r + "\n" for r in rows), encoding="utf-8")
        tmp.replace(self.path)
        return len(rows)
