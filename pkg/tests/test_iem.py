import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_iem, rational_iems
from ietforge.iem import (
    CriticalSet,
    Iem,
    IemError,
    PermPair,
    apply,
    apply_inverse,
    apply_n,
    delta,
    discontinuity_set,
    induced_map,
    iter_delta,
    recurrence_min,
    same_map,
    validate_admissible,
)
from ietforge.numerics import golden


def _points(T, rng, k=10):
    tot = T.total
    return [tot * Fraction(rng.randint(0, 10**6 - 1), 10**6) for _ in range(k)]


# ---------------------------------------------------------------------------
# combinatorics
# ---------------------------------------------------------------------------


def test_pair_parsing():
    p = PermPair.parse("ABC/CBA")
    assert p.top == ("A", "B", "C") and p.bottom == ("C", "B", "A")
    assert p.alpha_t == "C" and p.alpha_b == "A"
    assert p.pi_t("B") == 2 and p.pi_b("C") == 1
    with pytest.raises(ValueError):
        PermPair("ABC", "ABD")
    with pytest.raises(ValueError):
        PermPair("AAB", "ABA")


@pytest.mark.parametrize(
    "top,bottom,ok",
    [
        ("AB", "BA", True),
        ("AB", "AB", False),
        ("ABC", "ACB", False),
        ("ABC", "CAB", True),
        ("ABC", "BCA", True),
        ("ABCD", "BADC", False),
        ("ABDC", "DACB", True),
    ],
)
def test_admissibility(top, bottom, ok):
    assert validate_admissible(PermPair(top, bottom)) is ok


def test_length_validation():
    p = PermPair("AB", "BA")
    with pytest.raises(IemError):
        Iem(p, [0.5, 0.5])
    with pytest.raises(IemError):
        Iem(p, [Fraction(0), Fraction(1)])
    with pytest.raises(IemError):
        Iem(p, [Fraction(1)])


# ---------------------------------------------------------------------------
# the map
# ---------------------------------------------------------------------------


def test_rotation_formula():
    T = Iem(PermPair("AB", "BA"), [Fraction(1, 3), Fraction(2, 3)])
    assert T(Fraction(0)) == Fraction(2, 3)
    assert T(Fraction(1, 3)) == 0
    assert T(Fraction(1, 6)) == Fraction(5, 6)
    with pytest.raises(IemError):
        T(Fraction(1))


def test_three_letter_formula():
    T = Iem(PermPair("ABC", "CBA"), [Fraction(1), Fraction(2), Fraction(3)])
    p, q = T.offsets()
    assert p == {"A": 0, "B": 1, "C": 3}
    assert q == {"C": 0, "B": 3, "A": 5}
    assert T(Fraction(1, 2)) == Fraction(11, 2)
    assert T.singularities() == [1, 3]


@given(rational_iems(), st.integers(0, 2**32))
def test_inverse_is_inverse(T, seed):
    for x in _points(T, random.Random(seed)):
        assert apply_inverse(T, apply(T, x)) == x
        assert apply(T, apply_inverse(T, x)) == x


@given(rational_iems(), st.integers(0, 2**32), st.integers(-30, 30))
def test_apply_n_composes(T, seed, n):
    for x in _points(T, random.Random(seed), 3):
        y = x
        step = apply if n >= 0 else apply_inverse
        for _ in range(abs(n)):
            y = step(T, y)
        assert apply_n(T, x, n) == y


@given(rational_iems())
def test_image_tiles_interval(T):
    imgs = sorted((T(T.interval(a)[0]), T.length(a)) for a in T.top)
    pos = 0
    for start, length in imgs:
        assert start == pos
        pos += length
    assert pos == T.total


def test_quadratic_lengths():
    g = golden()
    T = Iem(PermPair("AB", "BA"), [2 - g, g - 1])
    assert T(g - 1) == (g - 1) - (2 - g)
    assert apply_n(T, 0, 3) == 3 * (g - 1) - 1


# ---------------------------------------------------------------------------
# critical sets
# ---------------------------------------------------------------------------


def _rotation_gap_oracle(alpha: Fraction, n: int) -> Fraction:
    # points -i*alpha mod 1 for i = 1..n together with 0 and 1
    pts = {Fraction(0), Fraction(1)}
    for i in range(1, n + 1):
        pts.add((-i * alpha) % 1)
    pts = sorted(pts)
    return min(b - a for a, b in zip(pts, pts[1:]))


@given(st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(999, 1000), max_denominator=10**6), st.integers(1, 40))
def test_rotation_gaps_three_distance(alpha, n):
    T = Iem(PermPair("AB", "BA"), [1 - alpha, alpha])
    assert delta(T, n) == _rotation_gap_oracle(alpha, n)


def test_critical_set_first_power():
    T = Iem(PermPair("ABC", "CBA"), [Fraction(1), Fraction(2), Fraction(3)])
    assert discontinuity_set(T, 1) == [0, 1, 3, 6]
    assert discontinuity_set(T, 1, include_endpoints=False) == [1, 3]
    assert delta(T, 1) == 1


@given(rational_iems(), st.integers(1, 25))
def test_critical_set_incremental(T, n):
    cs = CriticalSet(T)
    gaps = []
    for _ in range(n):
        cs.advance()
        gaps.append(cs.min_gap())
    assert cs.as_list() == discontinuity_set(T, n)
    assert [g for _, g in iter_delta(T, n)] == gaps
    assert gaps == sorted(gaps, reverse=True)


@given(rational_iems(dims=(2, 3)), st.integers(1, 12), st.integers(0, 2**32))
def test_power_is_continuous_between_critical_points(T, n, seed):
    pts = discontinuity_set(T, n)
    rng = random.Random(seed)
    for a, b in zip(pts, pts[1:]):
        x, y = sorted(a + (b - a) * Fraction(rng.randint(0, 999), 1000) for _ in range(2))
        assert apply_n(T, y, n) - apply_n(T, x, n) == y - x


# ---------------------------------------------------------------------------
# first return maps
# ---------------------------------------------------------------------------


def _brute_return(T, x, ell):
    y, n = T(x), 1
    while y >= ell:
        y, n = T(y), n + 1
    return y, n


@given(rational_iems(bits=16), st.integers(0, 2**32))
def test_induced_map_matches_brute_force(T, seed):
    rng = random.Random(seed)
    ell = T.total * Fraction(rng.randint(300, 999), 1000)
    S, times = induced_map(T, ell)
    assert S.total == ell
    for x in _points(S, rng, 8):
        y, n = _brute_return(T, x, ell)
        assert S(x) == y
        a = S.locate(x)
        assert times[a] == n


def test_induced_map_of_rotation():
    T = Iem(PermPair("AB", "BA"), [Fraction(2, 5), Fraction(3, 5)])
    S, times = induced_map(T, Fraction(3, 5))
    assert S.perms == PermPair("AB", "BA")
    assert S.lengths == {"A": Fraction(2, 5), "B": Fraction(1, 5)}
    assert times == {"A": 2, "B": 1}


def test_same_map_relabelled():
    S = Iem(PermPair("AB", "BA"), [Fraction(1, 3), Fraction(2, 3)])
    T = Iem(PermPair("XY", "YX"), {"X": Fraction(1, 3), "Y": Fraction(2, 3)}, ["X", "Y"])
    assert same_map(S, T)
    assert not same_map(S, Iem(PermPair("AB", "BA"), [Fraction(1, 2), Fraction(1, 2)]))


# ---------------------------------------------------------------------------
# recurrence
# ---------------------------------------------------------------------------


@given(rational_iems(dims=(2, 3)), st.integers(0, 2**32), st.integers(2, 60))
def test_recurrence_min_brute(T, seed, N):
    x = _points(T, random.Random(seed), 1)[0]
    vals = []
    y = x
    for n in range(1, N + 1):
        y = T(y)
        vals.append(n * abs(y - x))
    best, arg = recurrence_min(T, x, N)
    assert best == min(vals)
    assert arg == vals.index(best) + 1
    start = N // 2 + 1
    assert recurrence_min(T, x, N, start=start)[0] == min(vals[start - 1:])


def test_large_denominator_orbit(rng):
    T = random_iem(rng, 4, 200)
    x = T.total / 3
    assert apply_n(T, apply_n(T, x, 500), -500) == x
