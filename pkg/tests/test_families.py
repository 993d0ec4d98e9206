import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_iem
from ietforge.families import (
    EXAMPLE1_START,
    WordError,
    bar_first_return,
    bar_map,
    compile_winner_word,
    cone_lengths,
    example1_program,
    example2_bound,
    example2_height_step,
    example2_program,
    example2_row,
    example2_step,
    expand_word,
    golden_word,
    realize,
    replay_matches,
)
from ietforge.iem import Iem, IemError, PermPair, same_map
from ietforge.induction import rv_run
from ietforge.conditions import profile_Z
from ietforge.numerics import Ball, golden


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------


def test_expand_word():
    assert "".join(expand_word("ABA(AACC)^2")) == "ABAAACCAACC"
    assert "".join(expand_word("CB^3(D^2A^3D)^2B")) == "CBBB" + "DDAAAD" * 2 + "B"
    assert expand_word("") == []
    with pytest.raises(ValueError):
        expand_word("(AB")


def test_compile_two_letters():
    path = compile_winner_word(PermPair("AB", "BA"), "BABA")
    assert [k.value for k in path.kinds()] == ["T", "B", "T", "B"]
    assert len(compile_winner_word(PermPair("AB", "BA"), "")) == 0


def test_compile_reports_illegal_winner():
    # from ABC/CBA the legal winners are C (top) and A (bottom)
    assert len(compile_winner_word(EXAMPLE1_START, "AB")) == 2
    with pytest.raises(WordError) as exc:
        compile_winner_word(EXAMPLE1_START, "B")
    assert exc.value.position == 1 and exc.value.legal == ("C", "A")
    with pytest.raises(WordError) as exc:
        compile_winner_word(EXAMPLE1_START, "ABAB")
    assert exc.value.position == 4


def test_first_family_word():
    prog = example1_program([1])
    assert "".join(prog.word()) == "ABAAACC"
    prog = example1_program(range(1, 5))
    assert len(prog.compile()) == sum(3 + 4 * n for n in range(1, 5))
    with pytest.raises(ValueError):
        example1_program([])


def test_second_family_word():
    prog = example2_program(1)
    assert "".join(prog.word()) == "CBBB" + "DDAAAD" * 2 + "B"
    assert example2_program(5).block_ends() == [17, 46, 99, 200, 397]
    w = example2_program(3).compile().winners()
    runs, cur = [], 1
    for a, b in zip(w, w[1:]):
        cur = cur + 1 if a == b else 1
        runs.append(cur)
    # longest same-winner run is B^3 or A^3
    assert max(runs) == 3


def test_program_json():
    doc = json.loads(json.dumps(example1_program([1, 2]).to_json()))
    assert doc["start"] == {"top": ["A", "B", "C"], "bottom": ["C", "B", "A"]}
    assert doc["schedule"] == [1, 2]
    assert doc["block_template"] == "ABA(A^2C^2)^{n}"


def test_step_counts_and_bounds():
    assert [example2_step(k) for k in (1, 2, 3)] == [17, 43, 93]
    assert [example2_height_step(k) for k in (1, 2, 3)] == [20, 49, 102]
    g = golden()
    assert example2_bound(1) == 2
    assert example2_bound(2) == 2 / g**4
    assert example2_bound(3) == 2 / g**16


# ---------------------------------------------------------------------------
# cones and realization
# ---------------------------------------------------------------------------


def test_empty_cone():
    c = cone_lengths(EXAMPLE1_START, example1_program([1]).compile()[:0])
    assert all(c.lower[a] == 0 and c.upper[a] == 1 for a in "ABC")


def test_golden_cone():
    start = PermPair("AB", "BA")
    c = cone_lengths(start, compile_winner_word(start, golden_word(20)))
    g = golden()
    assert c.width("A") < Fraction(1, 1000)
    assert c.lower["A"] < 2 - g < c.upper["A"]
    assert c.lower["B"] < g - 1 < c.upper["B"]
    b = c.bounds("B", 64)
    assert isinstance(b, Ball) and b.lower <= c.lower["B"] and c.upper["B"] <= b.upper


def test_cone_widths_shrink():
    path = example1_program([1, 2, 3]).compile()
    prev = None
    for N in range(0, len(path) + 1, 3):
        c = cone_lengths(EXAMPLE1_START, path[:N])
        widths = [c.width(a) for a in "ABC"]
        if prev is not None:
            assert all(w <= p for w, p in zip(widths, prev))
        prev = widths


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_cone_contains_true_lengths(seed):
    T = random_iem(random.Random(seed), 3, 200)
    run = rv_run(T, 60)
    c = cone_lengths(T.perms, run.path)
    assert c.contains(T.length_vector())


def test_realize_golden_word():
    start = PermPair("AB", "BA")
    path = compile_winner_word(start, golden_word(40))
    T, prefix = realize(path, 30, margin=10)
    assert isinstance(T.length("A"), Ball)
    assert replay_matches(T, path, 30)


def test_realize_second_family():
    prog = example2_program(2)
    N = prog.block_ends()[1]
    T, prefix = realize(prog, N)
    run = rv_run(T, N)
    assert run.path.winners() == prefix.winners()[:N]


def test_realize_rejects_short_program():
    with pytest.raises(IemError):
        realize(example1_program([1]).compile(), 50)


def test_realize_zero_depth():
    T, prefix = realize(example1_program([1]).compile(), 0, backend="rational")
    assert len(prefix) == 0 and T.total == 1


# ---------------------------------------------------------------------------
# second family bound
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def second_family_run():
    prog = example2_program(5)
    full = len(prog.compile())
    T, _ = realize(prog, full, margin=0, backend="rational")
    return rv_run(T, example2_height_step(3))


def test_second_family_height_reading(second_family_run):
    """Return height of I_C after the k-th block plus three arrows beats the bound."""
    for k in (1, 2, 3):
        row = example2_row(second_family_run, k, direct_budget=3 * 10**7)
        assert row.height_below is True
        assert row.direct_checked
    assert [example2_row(second_family_run, k).height for k in (1, 2, 3)] == [51, 5178, 26276667]


def test_second_family_step_reading_values(second_family_run):
    # frozen values of the literal step count reading, which exceed the bound
    vals = [float(example2_row(second_family_run, k).value) for k in (1, 2, 3)]
    assert vals == pytest.approx([8.937027, 2.157107, 86.844869], rel=1e-6)


def test_second_family_zorich_bounded():
    path = example2_program(3).compile()
    T, _ = realize(path, len(path), backend="rational")
    assert profile_Z(rv_run(T, len(path))).extremum <= 7


# ---------------------------------------------------------------------------
# bar map
# ---------------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_bar_map_first_return(seed):
    rng = random.Random(seed)
    lam = [Fraction(rng.randint(1, 10**6), 10**6) for _ in range(3)]
    T3 = Iem(EXAMPLE1_START, lam).normalized()
    bar = bar_map(T3)
    assert bar.total == 1 + T3.length("B")
    assert same_map(bar_first_return(T3), T3)


def test_bar_map_rejects_other_pairs():
    with pytest.raises(IemError):
        bar_map(Iem(PermPair("ABC", "CAB"), [Fraction(1)] * 3))


def test_first_family_bar_is_golden_rotation():
    T, _ = realize(example1_program(range(1, 10)), 60, backend="rational")
    bar = bar_map(T)
    ratio = bar.length("A") / bar.length("C")
    assert abs(float(ratio) - float(golden())) < 1e-6
    run = rv_run(bar, 8)
    w = run.path.winners()
    assert all(a != b for a, b in zip(w, w[1:]))
