"""Interval exchange maps: combinatorics, evaluation, critical sets, first returns."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .numerics import Ordering, _is_rational, compare, scalar_min


class IemError(ValueError):
    pass


class StepBudgetExceeded(RuntimeError):
    pass


def _split_row(row) -> tuple[str, ...]:
    if isinstance(row, str):
        row = row.split() if " " in row.strip() else list(row.strip())
    return tuple(str(a) for a in row)


@dataclass(frozen=True)
class PermPair:
    """Top and bottom orders of the letters, left to right.

    ``pi_t(a)`` and ``pi_b(a)`` are the 1-based positions of ``a``.
    """

    top: tuple[str, ...]
    bottom: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "top", _split_row(self.top))
        object.__setattr__(self, "bottom", _split_row(self.bottom))
        if len(set(self.top)) != len(self.top):
            raise IemError(f"repeated letter in top row {self.top}")
        if set(self.top) != set(self.bottom) or len(self.bottom) != len(self.top):
            raise IemError("top and bottom rows must use the same letters")
        if len(self.top) < 2:
            raise IemError("need at least two letters")

    @classmethod
    def parse(cls, text: str) -> PermPair:
        """Parse ``"ABC/CBA"`` or ``"a b c / c b a"``."""
        top, bottom = text.split("/")
        return cls(top, bottom)

    @property
    def d(self) -> int:
        return len(self.top)

    @property
    def alphabet(self) -> tuple[str, ...]:
        return tuple(sorted(self.top))

    @property
    def alpha_t(self) -> str:
        return self.top[-1]

    @property
    def alpha_b(self) -> str:
        return self.bottom[-1]

    def pi_t(self, a: str) -> int:
        return self.top.index(a) + 1

    def pi_b(self, a: str) -> int:
        return self.bottom.index(a) + 1

    def is_admissible(self) -> bool:
        return validate_admissible(self)

    def __str__(self):
        sep = " " if any(len(a) > 1 for a in self.top) else ""
        return f"{sep.join(self.top)}/{sep.join(self.bottom)}"


def validate_admissible(perms: PermPair) -> bool:
    """True iff no proper prefix of the top row is a prefix set of the bottom row."""
    top_seen: set[str] = set()
    bottom_seen: set[str] = set()
    for k in range(perms.d - 1):
        top_seen.add(perms.top[k])
        bottom_seen.add(perms.bottom[k])
        if top_seen == bottom_seen:
            return False
    return True


class Iem:
    """An interval exchange map on ``[0, total)``.

    Parameters
    ----------
    perms : PermPair
        Order of the subintervals before (top) and after (bottom) the map.
    lengths : mapping or sequence
        Positive lengths.  A sequence is read in ``alphabet`` order.
    alphabet : sequence of str, optional
        Index order used for vectors and matrices; defaults to sorted letters.
    """

    __slots__ = ("perms", "alphabet", "_lengths", "_cache")

    def __init__(self, perms: PermPair, lengths, alphabet: Sequence[str] | None = None):
        if not isinstance(perms, PermPair):
            perms = PermPair(*perms)
        alphabet = tuple(alphabet) if alphabet is not None else perms.alphabet
        if set(alphabet) != set(perms.top) or len(alphabet) != perms.d:
            raise IemError("alphabet does not match the permutation letters")
        if isinstance(lengths, Mapping):
            lam = {a: lengths[a] for a in alphabet}
        else:
            lengths = list(lengths)
            if len(lengths) != len(alphabet):
                raise IemError("wrong number of lengths")
            lam = dict(zip(alphabet, lengths))
        for a, v in lam.items():
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                if isinstance(v, float):
                    raise IemError("float lengths are not exact; pass Fraction or a string")
            c = compare(v, 0)
            if c is Ordering.UNKNOWN:
                raise IemError(f"cannot certify length of {a} is positive")
            if c is not Ordering.GT:
                raise IemError(f"length of {a} must be positive, got {v}")
        object.__setattr__(self, "perms", perms)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "_lengths", lam)
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("Iem is immutable")

    def __reduce__(self):
        return (Iem, (self.perms, self._lengths, self.alphabet))

    # -- basic data -------------------------------------------------------

    @property
    def d(self) -> int:
        return self.perms.d

    @property
    def top(self) -> tuple[str, ...]:
        return self.perms.top

    @property
    def bottom(self) -> tuple[str, ...]:
        return self.perms.bottom

    @property
    def lengths(self) -> dict:
        return dict(self._lengths)

    def length(self, a: str):
        return self._lengths[a]

    def length_vector(self) -> tuple:
        return tuple(self._lengths[a] for a in self.alphabet)

    @property
    def total(self):
        if "total" not in self._cache:
            self._cache["total"] = sum((self._lengths[a] for a in self.top[1:]), self._lengths[self.top[0]])
        return self._cache["total"]

    def offsets(self) -> tuple[dict, dict]:
        if "offsets" not in self._cache:
            p, q = {}, {}
            acc = 0
            for a in self.top:
                p[a] = acc
                acc = acc + self._lengths[a]
            acc = 0
            for a in self.bottom:
                q[a] = acc
                acc = acc + self._lengths[a]
            self._cache["offsets"] = (p, q)
        return self._cache["offsets"]

    def interval(self, a: str) -> tuple:
        """``(p_a, p_a + lambda_a)``, the top subinterval of ``a``."""
        p, _ = self.offsets()
        return p[a], p[a] + self._lengths[a]

    def singularities(self) -> list:
        """Interior discontinuities ``p_a`` with ``pi_t(a) >= 2``, increasing."""
        p, _ = self.offsets()
        return [p[a] for a in self.top[1:]]

    def inverse_singularities(self) -> list:
        _, q = self.offsets()
        return [q[a] for a in self.bottom[1:]]

    def normalized(self) -> Iem:
        """Same map rescaled to total length 1."""
        tot = self.total
        if compare(tot, 1) is Ordering.EQ:
            return self
        return Iem(self.perms, {a: v / tot for a, v in self._lengths.items()}, self.alphabet)

    def scaled(self, factor) -> Iem:
        return Iem(self.perms, {a: v * factor for a, v in self._lengths.items()}, self.alphabet)

    def is_rational(self) -> bool:
        return all(_is_rational(v) for v in self._lengths.values())

    def inverse_map(self) -> Iem:
        """The inverse exchange (top and bottom swapped)."""
        return Iem(PermPair(self.bottom, self.top), self._lengths, self.alphabet)

    # -- evaluation -------------------------------------------------------

    def _check_domain(self, x):
        if compare(x, 0) is Ordering.LT or compare(x, self.total) is not Ordering.LT:
            raise IemError(f"{x} outside [0, {self.total})")

    def locate(self, x) -> str:
        """Letter ``a`` with ``x`` in ``[p_a, p_a + lambda_a)``."""
        self._check_domain(x)
        p, _ = self.offsets()
        for a in reversed(self.top):
            if x >= p[a]:
                return a
        raise AssertionError("unreachable")

    def locate_bottom(self, y) -> str:
        self._check_domain(y)
        _, q = self.offsets()
        for a in reversed(self.bottom):
            if y >= q[a]:
                return a
        raise AssertionError("unreachable")

    def __call__(self, x):
        return apply(self, x)

    def __eq__(self, other):
        if not isinstance(other, Iem):
            return NotImplemented
        return (
            self.perms == other.perms
            and self.alphabet == other.alphabet
            and all(compare(self._lengths[a], other._lengths[a]) is Ordering.EQ for a in self.alphabet)
        )

    def __hash__(self):
        return hash((self.perms, self.alphabet))

    def __repr__(self):
        lam = ", ".join(f"{a}={self._lengths[a]}" for a in self.alphabet)
        return f"Iem({self.perms}, {lam})"


def offsets(T: Iem) -> tuple[dict, dict]:
    """``(p, q)``: left ends of the top and bottom subintervals."""
    p, q = T.offsets()
    return dict(p), dict(q)


def apply(T: Iem, x):
    a = T.locate(x)
    p, q = T.offsets()
    return x - p[a] + q[a]


def apply_inverse(T: Iem, y):
    a = T.locate_bottom(y)
    p, q = T.offsets()
    return y - q[a] + p[a]


def _integer_copy(T: Iem) -> tuple[Iem, int] | None:
    """Rescale a rational map to integer lengths; ``None`` otherwise."""
    if not T.is_rational():
        return None
    if "int_copy" not in T._cache:
        L = math.lcm(*(Fraction(v).denominator for v in T._lengths.values()))
        lam = {a: int(Fraction(v) * L) for a, v in T._lengths.items()}
        T._cache["int_copy"] = (Iem(T.perms, lam, T.alphabet), L)
    return T._cache["int_copy"]


def _fast_orbit_fn(T: Iem, inverse: bool = False):
    """Closure evaluating T (or its inverse) without domain checks."""
    p, q = T.offsets()
    rows = T.bottom if inverse else T.top
    src, dst = (q, p) if inverse else (p, q)
    starts = [src[a] for a in rows]
    shifts = [dst[a] - src[a] for a in rows]
    right = bisect.bisect_right

    def step(x):
        return x + shifts[right(starts, x) - 1]

    return step


def _integer_orbit(T: Iem, x, inverse: bool = False):
    """``(step, x_scaled, scale)`` with integer arithmetic when ``T`` and ``x`` are rational."""
    if not (_is_rational(x) and T.is_rational()):
        return _fast_orbit_fn(T, inverse=inverse), x, 1
    Ti, L = _integer_copy(T)
    xs = Fraction(x) * L
    extra = xs.denominator
    if extra != 1:
        Ti = Ti.scaled(extra)
        L *= extra
    return _fast_orbit_fn(Ti, inverse=inverse), int(Fraction(x) * L), L


def apply_n(T: Iem, x, n: int):
    """``T^n(x)``; negative ``n`` iterates the inverse."""
    T._check_domain(x)
    if n == 0:
        return x
    step, y, scale = _integer_orbit(T, x, inverse=n < 0)
    for _ in range(abs(n)):
        y = step(y)
    return Fraction(y, scale) if scale != 1 else y


# ---------------------------------------------------------------------------
# Critical sets and the gap function
# ---------------------------------------------------------------------------


class CriticalSet:
    """Sorted critical points of ``T^n``, refined one power at a time.

    After ``advance()`` has been called ``n`` times the points are
    ``{0, total} U  T^{-i}(S)`` for ``0 <= i < n`` where ``S`` are the
    interior discontinuities of ``T`` (with ``inverse=True``: the forward
    images of the discontinuities of ``T^{-1}``).
    """

    def __init__(self, T: Iem, inverse: bool = False, include_endpoints: bool = True):
        ic = _integer_copy(T)
        self._scale = 1
        work = T
        if ic is not None:
            work, self._scale = ic
        self._step = _fast_orbit_fn(work, inverse=not inverse)
        self._frontier = list(work.inverse_singularities() if inverse else work.singularities())
        self.include_endpoints = include_endpoints
        self.total = work.total
        self.points: list = [0, self.total] if include_endpoints else []
        self.n = 0
        self._min_gap = None

    def _insert(self, x) -> None:
        pts = self.points
        i = bisect.bisect_left(pts, x)
        if i < len(pts) and compare(pts[i], x) is Ordering.EQ:
            return
        pts.insert(i, x)
        for j in (i - 1, i):
            if 0 <= j and j + 1 < len(pts):
                g = pts[j + 1] - pts[j]
                self._min_gap = g if self._min_gap is None else scalar_min(self._min_gap, g)

    def advance(self) -> None:
        """Refine from ``T^n`` to ``T^(n+1)``."""
        if self.n > 0:
            self._frontier = [self._step(x) for x in self._frontier]
        for x in self._frontier:
            self._insert(x)
        self.n += 1

    def _unscale(self, v):
        if self._scale == 1:
            return v
        return Fraction(v, self._scale)

    def as_list(self) -> list:
        return [self._unscale(v) for v in self.points]

    def min_gap(self):
        if self._min_gap is None:
            return None
        return self._unscale(self._min_gap)


def discontinuity_set(T: Iem, n: int, include_endpoints: bool = True, inverse: bool = False) -> list:
    """Critical points of ``T^n`` (of ``T^-n`` with ``inverse=True``), sorted."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cs = CriticalSet(T, inverse=inverse, include_endpoints=include_endpoints)
    for _ in range(n):
        cs.advance()
    return cs.as_list()


def delta(T: Iem, n: int, include_endpoints: bool = True, inverse: bool = False):
    """Shortest gap between consecutive critical points of ``T^n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cs = CriticalSet(T, inverse=inverse, include_endpoints=include_endpoints)
    for _ in range(n):
        cs.advance()
    return cs.min_gap()


def iter_delta(T: Iem, N: int, include_endpoints: bool = True) -> Iterator[tuple[int, object]]:
    """Yield ``(n, delta(T, n))`` for ``n = 1..N`` with incremental refinement."""
    cs = CriticalSet(T, include_endpoints=include_endpoints)
    for n in range(1, N + 1):
        cs.advance()
        yield n, cs.min_gap()


# ---------------------------------------------------------------------------
# First-return maps
# ---------------------------------------------------------------------------

DEFAULT_STEP_BUDGET = 10**6


def _first_return(step, x, ell, budget):
    """Return ``(time, image, visited)`` for the first return of ``x`` to ``[0, ell)``."""
    y = x
    for r in range(1, budget + 1):
        prev = y
        y = step(y)
        if y < ell:
            return r, y, prev
    raise StepBudgetExceeded(f"no return to [0, {ell}) within {budget} steps")


def induced_map(T: Iem, ell, budget: int = DEFAULT_STEP_BUDGET) -> tuple[Iem, dict]:
    """First-return map of ``T`` to ``[0, ell)`` and its return times.

    The domain is cut at every point whose orbit meets a discontinuity of
    ``T`` or the point ``ell`` before returning.  Pieces are labelled by the
    letter of ``T`` containing them.  When a letter is split, the extra
    pieces take the label of the last letter their orbit visits before
    returning, if that label is free; otherwise a numbered label.
    """
    if compare(ell, 0) is not Ordering.GT or compare(ell, T.total) is Ordering.GT:
        raise IemError("need 0 < ell <= total")
    fwd = _fast_orbit_fn(T)
    back = _fast_orbit_fn(T, inverse=True)

    cuts = [0]
    seeds = list(T.singularities())
    if compare(ell, T.total) is Ordering.LT:
        seeds.append(ell)
    for s in seeds:
        y = s
        if s == ell:
            y = back(y)
        for _ in range(budget):
            if y < ell:
                break
            y = back(y)
        else:
            raise StepBudgetExceeded(f"backward orbit of {s} never enters [0, {ell})")
        i = bisect.bisect_left(cuts, y)
        if i == len(cuts) or compare(cuts[i], y) is not Ordering.EQ:
            cuts.insert(i, y)
    cuts.append(ell)

    pieces = []  # (left, length, time, shift, first_letter, last_letter)
    for left, right in zip(cuts, cuts[1:]):
        r, img, prev = _first_return(fwd, left, ell, budget)
        pieces.append([left, right - left, r, img - left, T.locate(left), T.locate(prev)])

    # merge neighbours that behave identically
    merged = [pieces[0]]
    for pc in pieces[1:]:
        last = merged[-1]
        if pc[2] == last[2] and compare(pc[3], last[3]) is Ordering.EQ and pc[4] == last[4]:
            last[1] = last[1] + pc[1]
        else:
            merged.append(pc)
    pieces = merged

    names: list[str | None] = [None] * len(pieces)
    used: set[str] = set()
    for i, pc in enumerate(pieces):
        if pc[4] not in used:
            names[i] = pc[4]
            used.add(pc[4])
    for i, pc in enumerate(pieces):
        if names[i] is None and pc[5] not in used and pc[5] not in {p[4] for p in pieces}:
            names[i] = pc[5]
            used.add(pc[5])
    for i, pc in enumerate(pieces):
        if names[i] is None:
            j = 1
            while f"{pc[4]}{j}" in used:
                j += 1
            names[i] = f"{pc[4]}{j}"
            used.add(names[i])

    top = tuple(names)
    order = sorted(range(len(pieces)), key=lambda i: pieces[i][0] + pieces[i][3])
    bottom = tuple(names[i] for i in order)
    lengths = {names[i]: pieces[i][1] for i in range(len(pieces))}
    times = {names[i]: pieces[i][2] for i in range(len(pieces))}
    if len(top) < 2:
        raise IemError("induced map has a single piece")
    alphabet = tuple(a for a in T.alphabet if a in lengths) + tuple(
        a for a in top if a not in T.alphabet
    )
    return Iem(PermPair(top, bottom), lengths, alphabet), times


def same_map(S: Iem, T: Iem) -> bool:
    """True if ``S`` and ``T`` are the same map up to relabelling letters."""
    if S.d != T.d:
        return False
    rename = dict(zip(S.top, T.top))
    if tuple(rename[a] for a in S.bottom) != T.bottom:
        return False
    return all(compare(S.length(a), T.length(rename[a])) is Ordering.EQ for a in S.top)


# ---------------------------------------------------------------------------
# Recurrence
# ---------------------------------------------------------------------------


def recurrence_min(T: Iem, x, N: int, start: int = 1) -> tuple[object, int]:
    """Minimum of ``n |T^n(x) - x|`` over ``start <= n <= N`` and its first argmin."""
    if N < start or start < 1:
        raise ValueError("need 1 <= start <= N")
    T._check_domain(x)
    step, y0, scale = _integer_orbit(T, x)
    y = y0
    best, arg = None, None
    for n in range(1, N + 1):
        y = step(y)
        if n < start:
            continue
        v = n * abs(y - y0)
        if best is None or v < best:
            best, arg = v, n
    if scale != 1:
        best = Fraction(best, scale)
    return best, arg
