"""Exact scalar backends.

Three kinds of numbers drive the induction:

* rationals, backed by :class:`fractions.Fraction` (ints are accepted too);
* :class:`QuadElem`, exact elements ``a + b*sqrt(D)`` of a real quadratic field;
* :class:`Ball`, dyadic midpoint-radius intervals with outward rounding.

All comparisons go through :func:`compare`, which returns an
:class:`Ordering`.  Exact backends never return ``UNKNOWN``.  The rich
comparison operators on :class:`Ball` raise :class:`PrecisionExhausted`
instead of guessing, so generic code (``sorted``, ``min``) fails loudly.
"""

from __future__ import annotations

import enum
import math
import re
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Union


class BackendMismatch(TypeError):
    """Raised when two scalars from incompatible backends meet."""


class PrecisionExhausted(ArithmeticError):
    """Raised when a ball comparison cannot be decided."""


class Ordering(enum.Enum):
    LT = -1
    EQ = 0
    GT = 1
    UNKNOWN = None


def _is_rational(x) -> bool:
    return isinstance(x, (int, Fraction, _RationalABC)) and not isinstance(x, bool)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


# ---------------------------------------------------------------------------
# Quadratic field elements
# ---------------------------------------------------------------------------


def _squarefree(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return True


class QuadElem:
    """The number ``a + b*sqrt(D)`` with rational ``a``, ``b``.

    ``D`` must be a squarefree integer >= 2.  Instances are immutable and
    hashable; equality is exact.
    """

    __slots__ = ("a", "b", "D")

    def __init__(self, a=0, b=0, D: int = 5):
        if not _squarefree(D):
            raise ValueError(f"D={D} must be a squarefree integer >= 2")
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))
        object.__setattr__(self, "D", int(D))

    def __setattr__(self, name, value):
        raise AttributeError("QuadElem is immutable")

    def __reduce__(self):
        return (QuadElem, (self.a, self.b, self.D))

    def _pair(self, other) -> tuple[QuadElem, QuadElem] | None:
        """Both operands in a common field, or None for foreign types."""
        if isinstance(other, QuadElem):
            if other.D == self.D:
                return self, other
            if other.b == 0:
                return self, QuadElem(other.a, 0, self.D)
            if self.b == 0:
                return QuadElem(self.a, 0, other.D), other
            raise BackendMismatch(f"sqrt({self.D}) vs sqrt({other.D})")
        if _is_rational(other):
            return self, QuadElem(other, 0, self.D)
        return None

    def __add__(self, other):
        pr = self._pair(other)
        if pr is None:
            return NotImplemented
        s, o = pr
        return QuadElem(s.a + o.a, s.b + o.b, s.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadElem(-self.a, -self.b, self.D)

    def __pos__(self):
        return self

    def __sub__(self, other):
        pr = self._pair(other)
        if pr is None:
            return NotImplemented
        s, o = pr
        return QuadElem(s.a - o.a, s.b - o.b, s.D)

    def __rsub__(self, other):
        pr = self._pair(other)
        if pr is None:
            return NotImplemented
        s, o = pr
        return o - s

    def __mul__(self, other):
        pr = self._pair(other)
        if pr is None:
            return NotImplemented
        s, o = pr
        D = s.D
        return QuadElem(s.a * o.a + s.b * o.b * D, s.a * o.b + s.b * o.a, D)

    __rmul__ = __mul__

    def conjugate(self) -> QuadElem:
        return QuadElem(self.a, -self.b, self.D)

    def norm(self) -> Fraction:
        """Field norm ``a^2 - D b^2``."""
        return self.a * self.a - self.D * self.b * self.b

    def __truediv__(self, other):
        pr = self._pair(other)
        if pr is None:
            return NotImplemented
        s, o = pr
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(D))")
        num = s * o.conjugate()
        return QuadElem(num.a / n, num.b / n, s.D)

    def __rtruediv__(self, other):
        pr = self._pair(other)
        if pr is None:
            return NotImplemented
        s, o = pr
        return o / s

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return QuadElem(1, 0, self.D) / (self ** (-k))
        result = QuadElem(1, 0, self.D)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def sign(self) -> int:
        """Exact sign, decided by cases on sign(a), sign(b) and a^2 vs b^2 D."""
        sa, sb = _sign(self.a), _sign(self.b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: the larger square wins
        return sa if self.a * self.a > self.b * self.b * self.D else sb

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __eq__(self, other):
        try:
            pr = self._pair(other)
        except BackendMismatch:
            return False
        if pr is None:
            return NotImplemented
        s, o = pr
        return s.a == o.a and s.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.D))

    def _cmp(self, other) -> int:
        pr = self._pair(other)
        if pr is None:
            return NotImplemented
        return (pr[0] - pr[1]).sign()

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.D)

    def __floor__(self):
        # floor(a + b sqrt D) via integer square roots on a common denominator
        den = math.lcm(self.a.denominator, self.b.denominator)
        A = self.a.numerator * (den // self.a.denominator)
        B = self.b.numerator * (den // self.b.denominator)
        # value = (A + B sqrt D)/den; B sqrt D = sign(B) sqrt(B^2 D)
        s = math.isqrt(B * B * self.D)
        exact = s * s == B * B * self.D
        if B >= 0:
            lo = A + s
        else:
            lo = A - s - (0 if exact else 1)
        return lo // den

    def __repr__(self):
        return f"QuadElem({self.a}, {self.b}, D={self.D})"

    def __str__(self):
        return format_scalar(self)


def golden() -> QuadElem:
    """The golden mean ``(1 + sqrt 5)/2``."""
    return QuadElem(Fraction(1, 2), Fraction(1, 2), 5)


# ---------------------------------------------------------------------------
# Dyadic balls
# ---------------------------------------------------------------------------

DEFAULT_PRECISION = 128
_RAD_BITS = 32


def _is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


def _round_dyadic(q: Fraction, exp: int, up: bool | None):
    """Round ``q`` to a multiple of ``2**exp``: nearest if ``up`` is None,
    toward +inf if True, toward -inf if False."""
    scaled = q / Fraction(2) ** exp if exp >= 0 else q * (1 << -exp)
    if up is None:
        n = round(scaled)
    elif up:
        n = math.ceil(scaled)
    else:
        n = math.floor(scaled)
    return Fraction(n) * Fraction(2) ** exp


def _exp_for(q: Fraction, prec: int) -> int:
    """Exponent so that rounding ``q`` at ``2**exp`` keeps ``prec`` bits."""
    if q == 0:
        return 0
    mag = abs(q)
    e = mag.numerator.bit_length() - mag.denominator.bit_length()
    return e - prec - 1


def _round_up_radius(r: Fraction) -> Fraction:
    if r == 0 or _is_dyadic(r) and r.numerator.bit_length() <= _RAD_BITS:
        return r
    return _round_dyadic(r, _exp_for(r, _RAD_BITS), up=True)


class Ball:
    """Closed interval ``[mid - rad, mid + rad]`` with dyadic endpoints.

    ``prec`` is the working precision in bits used to round the midpoint of
    results.  Every operation keeps the exact result inside the returned ball.
    """

    __slots__ = ("mid", "rad", "prec")

    def __init__(self, mid, rad=0, prec: int = DEFAULT_PRECISION):
        mid = Fraction(mid)
        rad = Fraction(rad)
        if rad < 0:
            raise ValueError("negative radius")
        if not _is_dyadic(mid) or not _is_dyadic(rad):
            raise ValueError("ball endpoints must be dyadic; use to_ball")
        object.__setattr__(self, "mid", mid)
        object.__setattr__(self, "rad", rad)
        object.__setattr__(self, "prec", int(prec))

    def __setattr__(self, name, value):
        raise AttributeError("Ball is immutable")

    def __reduce__(self):
        return (Ball, (self.mid, self.rad, self.prec))

    @classmethod
    def _from_exact(cls, value: Fraction, rad: Fraction, prec: int) -> Ball:
        if value == 0 or (_is_dyadic(value) and value.numerator.bit_length() <= prec + 2):
            mid = value
            err = Fraction(0)
        else:
            mid = _round_dyadic(value, _exp_for(value, prec), up=None)
            err = abs(value - mid)
        return cls(mid, _round_up_radius(rad + err), prec)

    @property
    def lower(self) -> Fraction:
        return self.mid - self.rad

    @property
    def upper(self) -> Fraction:
        return self.mid + self.rad

    def contains(self, x) -> bool:
        """True if the exact value ``x`` (rational or QuadElem) lies in the ball."""
        if isinstance(x, Ball):
            return self.lower <= x.lower and x.upper <= self.upper
        return compare(self.lower, x) != Ordering.GT and compare(x, self.upper) != Ordering.GT

    @property
    def width(self) -> Fraction:
        return 2 * self.rad

    def _coerce(self, other) -> Ball | None:
        if isinstance(other, Ball):
            return other
        if _is_rational(other):
            return to_ball(Fraction(other), self.prec)
        if isinstance(other, QuadElem):
            raise BackendMismatch("Ball and QuadElem do not mix; convert with to_ball")
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Ball._from_exact(self.mid + o.mid, self.rad + o.rad, min(self.prec, o.prec))

    __radd__ = __add__

    def __neg__(self):
        return Ball(-self.mid, self.rad, self.prec)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Ball._from_exact(self.mid - o.mid, self.rad + o.rad, min(self.prec, o.prec))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        rad = abs(self.mid) * o.rad + abs(o.mid) * self.rad + self.rad * o.rad
        return Ball._from_exact(self.mid * o.mid, rad, min(self.prec, o.prec))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.lower <= 0 <= o.upper:
            raise PrecisionExhausted("ball divisor contains zero")
        # |x/y - m1/m2| <= (r1 |m2| + r2 |m1|) / (|m2| (|m2| - r2))
        m1, r1, m2, r2 = self.mid, self.rad, o.mid, o.rad
        rad = (r1 * abs(m2) + r2 * abs(m1)) / (abs(m2) * (abs(m2) - r2))
        return Ball._from_exact(m1 / m2, rad, min(self.prec, o.prec))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __abs__(self):
        if self.lower >= 0:
            return self
        if self.upper <= 0:
            return -self
        # straddles zero: enclose [0, max(|lower|, |upper|)]
        hi = max(-self.lower, self.upper)
        half = hi / 2
        return Ball(half, half, self.prec)

    def _decide(self, other) -> int:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        c = compare(self, o)
        if c is Ordering.UNKNOWN:
            raise PrecisionExhausted(f"cannot order {self} and {o}")
        return c.value

    def __lt__(self, other):
        c = self._decide(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._decide(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._decide(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._decide(other)
        return c if c is NotImplemented else c >= 0

    def __eq__(self, other):
        # structural equality; use compare() for numeric comparison
        if isinstance(other, Ball):
            return self.mid == other.mid and self.rad == other.rad
        if _is_rational(other):
            return self.rad == 0 and self.mid == other
        return NotImplemented

    def __hash__(self):
        return hash((self.mid, self.rad))

    def __float__(self):
        return float(self.mid)

    def __repr__(self):
        return f"Ball({self.mid}, {self.rad}, prec={self.prec})"

    def __str__(self):
        return format_scalar(self)


Scalar = Union[int, Fraction, QuadElem, Ball]


# ---------------------------------------------------------------------------
# Comparison and conversion
# ---------------------------------------------------------------------------


def _compare_ball(x: Ball, y: Ball) -> Ordering:
    if x.rad == 0 and y.rad == 0 and x.mid == y.mid:
        return Ordering.EQ
    if x.upper < y.lower:
        return Ordering.LT
    if x.lower > y.upper:
        return Ordering.GT
    return Ordering.UNKNOWN


def compare(x, y) -> Ordering:
    """Three-way comparison returning ``UNKNOWN`` only for overlapping balls."""
    if _is_rational(x) and _is_rational(y):
        return Ordering(_sign(Fraction(x) - Fraction(y)))
    if isinstance(x, Ball) or isinstance(y, Ball):
        if isinstance(x, QuadElem) or isinstance(y, QuadElem):
            raise BackendMismatch("cannot compare Ball with QuadElem")
        if not isinstance(x, Ball):
            if not _is_rational(x):
                raise BackendMismatch(f"unsupported scalar {type(x).__name__}")
            x = to_ball(Fraction(x), y.prec)
        if not isinstance(y, Ball):
            if not _is_rational(y):
                raise BackendMismatch(f"unsupported scalar {type(y).__name__}")
            y = to_ball(Fraction(y), x.prec)
        return _compare_ball(x, y)
    if isinstance(x, QuadElem) or isinstance(y, QuadElem):
        pr = x._pair(y) if isinstance(x, QuadElem) else y._pair(x)
        if pr is None:
            raise BackendMismatch(f"cannot compare {type(x).__name__} with {type(y).__name__}")
        xx, yy = pr if isinstance(x, QuadElem) else pr[::-1]
        return Ordering((xx - yy).sign())
    raise BackendMismatch(f"unsupported scalars {type(x).__name__}, {type(y).__name__}")


def scalar_min(x, y):
    """``min(x, y)``; for overlapping balls an enclosure of the minimum."""
    c = compare(x, y)
    if c is not Ordering.UNKNOWN:
        return y if c is Ordering.GT else x
    prec = max(v.prec for v in (x, y) if isinstance(v, Ball))
    x, y = to_ball(x, prec), to_ball(y, prec)
    lo, hi = min(x.lower, y.lower), min(x.upper, y.upper)
    return Ball((lo + hi) / 2, (hi - lo) / 2, prec)


def is_zero(x) -> bool:
    return compare(x, 0) is Ordering.EQ


def to_ball(x, precision: int = DEFAULT_PRECISION) -> Ball:
    """Enclose ``x`` in a dyadic ball of radius at most ``2**-precision * max(1, |x|)``."""
    if precision < 2:
        raise ValueError("precision must be >= 2")
    if isinstance(x, Ball):
        return Ball._from_exact(x.mid, x.rad, precision)
    if _is_rational(x):
        q = Fraction(x)
        if q == 0:
            return Ball(0, 0, precision)
        exp = min(-precision, _exp_for(q, precision)) - 1
        if _is_dyadic(q) and q.denominator <= 2 ** max(0, -exp):
            return Ball(q, 0, precision)
        mid = _round_dyadic(q, exp, up=None)
        return Ball(mid, _round_up_radius(abs(q - mid)), precision)
    if isinstance(x, QuadElem):
        if x.b == 0:
            return to_ball(x.a, precision)
        # sqrt(D) to k bits by integer square root, error < 2**-k
        mag = abs(float(x)) if x.a.numerator.bit_length() < 1000 else 2.0 ** 1000
        k = precision + abs(x.b.numerator).bit_length() - x.b.denominator.bit_length() + 8
        k += max(0, int(math.log2(max(1.0, mag))))
        k = max(k, precision + 8)
        s = Fraction(math.isqrt(x.D << (2 * k)), 1 << k)
        approx = x.a + x.b * s
        err = abs(x.b) * Fraction(1, 1 << k)
        base = to_ball(approx, precision + 4)
        return Ball._from_exact(base.mid, base.rad + err, precision)
    raise BackendMismatch(f"cannot convert {type(x).__name__} to Ball")


def hull(lo, hi, precision: int = DEFAULT_PRECISION) -> Ball:
    """Smallest convenient ball containing the rational interval ``[lo, hi]``."""
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        raise ValueError("empty interval")
    c = to_ball((lo + hi) / 2, precision)
    rad = (hi - lo) / 2 + c.rad + abs(c.mid - (lo + hi) / 2)
    return Ball(c.mid, to_ball(rad, 40).upper if rad else 0, precision)


def sqrt_ball(x: Ball) -> Ball:
    """Enclosure of ``sqrt(x)`` for a ball with nonnegative lower end."""
    if x.lower < 0:
        raise PrecisionExhausted("sqrt of a ball reaching below zero")
    p = x.prec + 8

    def isqrt_frac(q: Fraction, up: bool) -> Fraction:
        n = math.isqrt((q.numerator << (2 * p)) // q.denominator)
        if up:
            n += 1
        return Fraction(n, 1 << p)

    lo = isqrt_frac(x.lower, up=False)
    hi = isqrt_frac(x.upper, up=True)
    mid = (lo + hi) / 2
    return Ball._from_exact(mid, (hi - lo) / 2, x.prec)


# ---------------------------------------------------------------------------
# Text serialization
# ---------------------------------------------------------------------------


def _fmt_frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _fmt_dyadic(q: Fraction) -> str:
    if q == 0:
        return "0x0p0"
    e = -(q.denominator.bit_length() - 1)
    m = q.numerator
    while m % 2 == 0:
        m //= 2
        e += 1
    sign = "-" if m < 0 else ""
    return f"{sign}{hex(abs(m))}p{e}"


def format_scalar(x) -> str:
    """Text form: ``p/q``, ``a+b*sqrt(D)`` or ``[c±r]`` with hex dyadics."""
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if _is_rational(x):
        return _fmt_frac(Fraction(x))
    if isinstance(x, QuadElem):
        b = _fmt_frac(x.b)
        op = "" if b.startswith("-") else "+"
        return f"{_fmt_frac(x.a)}{op}{b}*sqrt({x.D})"
    if isinstance(x, Ball):
        return f"[{_fmt_dyadic(x.mid)}±{_fmt_dyadic(x.rad)}]"
    raise TypeError(f"not a scalar: {x!r}")


_FRAC = r"-?\d+(?:/\d+)?"
_QUAD_RE = re.compile(rf"^\s*({_FRAC})\s*([+-])\s*(\d+(?:/\d+)?)\*sqrt\((\d+)\)\s*$")
_DYADIC = r"-?0x[0-9a-fA-F]+p-?\d+"
_BALL_RE = re.compile(rf"^\[({_DYADIC})\s*(?:±|\+-)\s*({_DYADIC})\](?:@(\d+))?$")


def _parse_dyadic(s: str) -> Fraction:
    mant, exp = s.split("p")
    neg = mant.startswith("-")
    m = int(mant.lstrip("-"), 16)
    e = int(exp)
    v = Fraction(m) * Fraction(2) ** e
    return -v if neg else v


def parse_scalar(s: str, precision: int = DEFAULT_PRECISION):
    """Inverse of :func:`format_scalar` (plain decimals are read exactly)."""
    s = s.strip()
    m = _BALL_RE.match(s)
    if m:
        return Ball(_parse_dyadic(m.group(1)), _parse_dyadic(m.group(2)), int(m.group(3) or precision))
    m = _QUAD_RE.match(s)
    if m:
        a = Fraction(m.group(1))
        b = Fraction(m.group(3))
        if m.group(2) == "-":
            b = -b
        return QuadElem(a, b, int(m.group(4)))
    try:
        return Fraction(s)
    except ValueError:
        raise ValueError(f"cannot parse scalar {s!r}") from None


def approx(x) -> float:
    """Float rendering for human-readable output only."""
    return float(x)
