import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_iem
from ietforge.conditions import (
    BOUNDED,
    U_DISCLAIMER,
    UNBOUNDED,
    ConditionError,
    audit_run,
    chained_delta_witness,
    default_grid,
    find_prop32_witnesses,
    small_gap_scan,
    profile_A,
    profile_D,
    profile_U,
    profile_Z,
    prop31_witness,
    prop32_applicable,
    prop32_witness,
)
from ietforge.families import example1_program, golden_rotation, realize
from ietforge.iem import Iem, PermPair, apply_n, delta, discontinuity_set, recurrence_min
from ietforge.induction import rv_run
from ietforge.numerics import golden


@pytest.fixture(scope="module")
def golden_run():
    return rv_run(golden_rotation(), 120)


def quotient_ten():
    # lengths 1 and 10 + 1/3: the first Zorich block has ten arrows
    return Iem(PermPair("AB", "BA"), [Fraction(1), Fraction(31, 3)])


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------


def test_golden_block_norms(golden_run):
    z = profile_Z(golden_run)
    assert {v for _, v in z.samples} == {3}
    assert z.verdict == BOUNDED
    a = profile_A(golden_run)
    assert {v for _, v in a.samples} == {5}


def test_golden_gap_profile():
    p = profile_D(golden_rotation(), 300)
    assert p.extremum == 2 - golden()
    assert p.verdict == BOUNDED
    assert len(p.samples) == 300


def test_golden_recurrence_profile(golden_run):
    p = profile_U(golden_rotation(), golden_run, 2000)
    assert p.note == U_DISCLAIMER
    assert abs(float(p.extremum) - 5**-0.5) < 0.01


def test_profile_needs_blocks():
    run = rv_run(golden_rotation(), 1)
    with pytest.raises(ConditionError):
        profile_Z(run)


def test_first_family_block_norms_grow():
    path = example1_program(range(1, 6)).compile()
    T, _ = realize(path, len(path), backend="rational")
    p = profile_A(rv_run(T, len(path)))
    assert p.verdict == UNBOUNDED
    assert p.samples[-1][1] > 3 * p.samples[0][1]


def test_default_grid_points_are_midpoints(golden_run):
    grid = default_grid(golden_run, max_points=4)
    T1 = golden_run.iems[0]
    lo, hi = T1.interval(T1.top[0])
    assert grid[0] == (lo + hi) / 2 and len(grid) == 4


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------


def test_quotient_ten_witness():
    run = rv_run(quotient_ten(), 40)
    assert prop32_applicable(run, 0)
    w = prop32_witness(run, 0)
    assert run.block(0, 10).norm() == 12
    assert w.bound == Fraction(1, 4)
    assert w.value == Fraction(3, 34) and w.m == 1
    ws = find_prop32_witnesses(run)
    assert [x.block for x in ws] == [0]


def test_golden_has_no_witness(golden_run):
    assert find_prop32_witnesses(golden_run) == []
    with pytest.raises(ConditionError):
        prop32_witness(golden_run, 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([2, 3, 4]))
def test_recurrence_witnesses_hold(seed, d):
    run = rv_run(random_iem(random.Random(seed), d, 40), 30)
    T0 = run.iems[0]
    for w in find_prop32_witnesses(run, max_steps=10**5):
        assert apply_n(T0, w.x, w.m) - w.x in (w.displacement, -w.displacement)
        assert w.value < w.bound
        dw = chained_delta_witness(run, w)
        T = T0.normalized()
        gap = delta(T, 2 * w.m)
        assert gap <= w.displacement / T0.total
        assert gap < w.bound / w.m
        assert dw.distance < w.bound / w.m


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([2, 3]))
def test_close_return_gives_small_gap(seed, d):
    rng = random.Random(seed)
    T = random_iem(rng, d, 20).normalized()
    x = Fraction(rng.randint(0, 999), 1000)
    v, n = recurrence_min(T, x, 50)
    c = v + Fraction(1, 10**9)
    w = prop31_witness(T, x, n, c)
    pts = discontinuity_set(T, 2 * n)
    assert w.power == 2 * n
    assert all(p in pts for p in w.points)
    assert abs(w.points[1] - w.points[0]) == w.distance < c / n


def test_close_return_precondition():
    T = golden_rotation()
    with pytest.raises(ConditionError):
        prop31_witness(T, 0, 1, Fraction(1, 100))


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------


def test_golden_audit(golden_run):
    rep = audit_run(golden_run)
    assert rep.ok
    assert rep.count("positivity") > 50
    assert "dichotomy" in rep.summary()


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([3, 4]))
def test_random_audit(seed, d):
    run = rv_run(random_iem(random.Random(seed), d, 500), 350)
    try:
        rep = audit_run(run, gap_chain_cap=300)
    except ConditionError:
        return
    assert rep.ok, rep.failures()[:3]


def test_audit_needs_blocks():
    run = rv_run(golden_rotation(), 4)
    with pytest.raises(ConditionError):
        audit_run(run)


def test_small_gap_scan(rng):
    run = rv_run(random_iem(rng, 3, 300), 200)
    rep = small_gap_scan(run, M=6, cap=4000)
    assert rep.count("small_gap", "fail") == 0
