"""Path-defined maps: winner-word compilers, length cones and realization.

Also holds the two explicit families (a 3-IET lying over the golden
rotation and a 4-IET with bounded Zorich blocks but fast recurrence) and
the 3-IET to circle-rotation bar map.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .iem import Iem, IemError, PermPair, apply_n, induced_map
from .induction import InductionRun, rv_run
from .numerics import Ball, Ordering, QuadElem, compare, golden, hull, to_ball
from .rauzy import Arrow, ArrowKind, CocycleMatrix, Path, path_matrix, rauzy_move


class WordError(IemError):
    """A demanded winner is not legal at the current vertex."""

    def __init__(self, position: int, demanded: str, legal: tuple[str, str]):
        super().__init__(
            f"position {position}: winner {demanded!r} not legal, expected one of {legal[0]!r}, {legal[1]!r}"
        )
        self.position = position
        self.demanded = demanded
        self.legal = legal


def expand_word(word: str | Sequence[str]) -> list[str]:
    """Expand ``"AB^3(CD)^2"``-style notation into a list of letters.

    Single-character letters only; exponents apply to the preceding letter
    or parenthesized group.
    """
    if not isinstance(word, str):
        return list(word)
    tokens = re.findall(r"\(|\)|\^\d+|[^\s()^]", word)
    stack: list[list[str]] = [[]]
    last: list[str] = []
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            last = stack.pop()
            stack[-1].extend(last)
        elif tok.startswith("^"):
            k = int(tok[1:])
            stack[-1].extend(last * (k - 1))
        else:
            last = [tok]
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ValueError(f"unbalanced parentheses in {word!r}")
    return stack[0]


def compile_winner_word(start: PermPair, word: str | Sequence[str]) -> Path:
    """The unique path from ``start`` whose winners spell ``word``."""
    cur = start
    arrows: list[Arrow] = []
    for i, w in enumerate(expand_word(word), start=1):
        if w == cur.alpha_t:
            kind = ArrowKind.TOP
        elif w == cur.alpha_b:
            kind = ArrowKind.BOTTOM
        else:
            raise WordError(i, w, (cur.alpha_t, cur.alpha_b))
        cur, arrow = rauzy_move(cur, kind)
        arrows.append(arrow)
    return Path(start, tuple(arrows))


@dataclass
class PathProgram:
    """Winner word ``preperiod + block(s_1) + block(s_2) + ...``."""

    start: PermPair
    preperiod: str
    block: Callable[[int], str]
    schedule: list[int]
    template: str = ""
    name: str = ""

    def word(self, blocks: int | None = None) -> list[str]:
        sched = self.schedule if blocks is None else self.schedule[:blocks]
        out = expand_word(self.preperiod)
        for s in sched:
            out.extend(expand_word(self.block(s)))
        return out

    def block_ends(self) -> list[int]:
        """Word positions at which each scheduled block ends."""
        pos = len(expand_word(self.preperiod))
        ends = []
        for s in self.schedule:
            pos += len(expand_word(self.block(s)))
            ends.append(pos)
        return ends

    def compile(self, blocks: int | None = None) -> Path:
        return compile_winner_word(self.start, self.word(blocks))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "start": {"top": list(self.start.top), "bottom": list(self.start.bottom)},
            "preperiod": self.preperiod,
            "block_template": self.template,
            "schedule": list(self.schedule),
        }


EXAMPLE1_START = PermPair("ABC", "CBA")
EXAMPLE2_START = PermPair("ABDC", "DACB")


def example1_program(n_schedule: Sequence[int]) -> PathProgram:
    """Winners ``ABA (A^2 C^2)^{n_1} ABA (A^2 C^2)^{n_2} ...`` from ``ABC/CBA``."""
    sched = [int(n) for n in n_schedule]
    if not sched or min(sched) < 1:
        raise ValueError("schedule must be nonempty with entries >= 1")
    return PathProgram(
        EXAMPLE1_START,
        "",
        lambda n: f"ABA(AACC)^{n}",
        sched,
        template="ABA(A^2C^2)^{n}",
        name="ex1",
    )


def example2_program(K: int) -> PathProgram:
    """Winners ``C B^3 (D^2 A^3 D)^{2^k} B`` for ``k = 1..K`` from ``ABDC/DACB``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return PathProgram(
        EXAMPLE2_START,
        "",
        lambda k: f"CBBB(DDAAAD)^{2 ** k}B",
        list(range(1, K + 1)),
        template="CB^3(D^2A^3D)^{2^k}B",
        name="dio4",
    )


def example2_step(k: int) -> int:
    """Step count ``2k + 12(2^k - 1) + 3`` attached to the k-th block."""
    return 2 * k + 12 * (2**k - 1) + 3


def example2_bound(k: int) -> QuadElem:
    """Exact bound ``2 g^(2^(k+2) + 5k) / g^(2^(k+3) + k - 4)`` in Q(sqrt 5)."""
    g = golden()
    return 2 * g ** (2 ** (k + 2) + 5 * k) / g ** (2 ** (k + 3) + k - 4)


def example2_height_step(k: int) -> int:
    """Arrow count of the first ``k`` blocks plus the three arrows ``C B B``."""
    return sum(5 + 6 * 2**i for i in range(1, k + 1)) + 3


def _below(value, bound) -> Ordering:
    if isinstance(value, Ball):
        bound = to_ball(bound, value.prec)
    return compare(value, bound)


@dataclass
class Example2Row:
    """Recurrence of the midpoint of ``I_C`` against the block-``k`` bound.

    ``step``/``value`` use the step count ``example2_step(k)``;
    ``height``/``height_value`` use ``m = B_C(n)`` at ``n =
    example2_height_step(k)``, evaluated through ``T^m x = T(n) x``.
    Values are on the map rescaled to total length 1.
    """

    k: int
    bound: QuadElem
    step: int
    value: object
    below: bool | None
    height_step: int
    height: int
    height_value: object
    height_below: bool | None
    direct_checked: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _verdict(o: Ordering) -> bool | None:
    return None if o is Ordering.UNKNOWN else o is Ordering.LT


def example2_row(run: InductionRun, k: int, direct_budget: int = 0) -> Example2Row:
    """Evaluate both readings of the block-``k`` bound on a realized run.

    With ``direct_budget`` >= the height and exact lengths, ``T^m x`` is
    also iterated on the original map and must agree with ``T(n) x``.
    """
    n1, n2 = example2_step(k), example2_height_step(k)
    if max(n1, n2) > run.N:
        raise IemError(f"run has {run.N} steps; block {k} needs {max(n1, n2)}")
    T0 = run.iems[0]
    tot = T0.total
    bound = example2_bound(k)

    lo, hi = run.iems[n1].interval("C")
    x = (lo + hi) / 2
    value = n1 * abs(apply_n(T0, x, n1) - x) / tot

    Tn = run.iems[n2]
    lo, hi = Tn.interval("C")
    x2 = (lo + hi) / 2
    disp = Tn(x2) - x2
    m = run.heights(n2)["C"]
    checked = False
    if direct_budget >= m and T0.is_rational():
        if apply_n(T0, x2, m) - x2 != disp:
            raise AssertionError(f"first-return identity fails at k={k}")
        checked = True
    hvalue = m * abs(disp) / tot
    return Example2Row(
        k, bound, n1, value, _verdict(_below(value, bound)),
        n2, m, hvalue, _verdict(_below(hvalue, bound)), checked,
    )


def golden_word(n: int, first: str = "B") -> list[str]:
    other = "A" if first == "B" else "B"
    return [first if i % 2 == 0 else other for i in range(n)]


def golden_rotation() -> Iem:
    """Rotation by ``g - 1`` written as the 2-IET ``AB/BA`` with lengths ``(2-g, g-1)``."""
    g = golden()
    return Iem(PermPair("AB", "BA"), [2 - g, g - 1])


# ---------------------------------------------------------------------------
# Length cones
# ---------------------------------------------------------------------------


@dataclass
class LengthCone:
    """Bounds on normalized ``lam(0)`` for any map realizing a path prefix.

    ``lam(0) = lam(N) B(0, N)`` with ``lam(N) > 0``, so the normalized
    ``lam(0)`` lies in the convex hull of the normalized rows of ``B(0, N)``.
    """

    N: int
    alphabet: tuple[str, ...]
    matrix: CocycleMatrix
    lower: dict[str, Fraction] = field(default_factory=dict)
    upper: dict[str, Fraction] = field(default_factory=dict)

    @property
    def vertices(self) -> list[tuple[Fraction, ...]]:
        out = []
        for r in self.matrix.rows:
            s = sum(r)
            out.append(tuple(Fraction(v, s) for v in r))
        return out

    def bounds(self, a: str, precision: int = 128) -> Ball:
        return hull(self.lower[a], self.upper[a], precision)

    def width(self, a: str) -> Fraction:
        return self.upper[a] - self.lower[a]

    def contains(self, lengths: Sequence) -> bool:
        tot = sum(lengths, Fraction(0))
        return all(self.lower[a] <= v / tot <= self.upper[a] for a, v in zip(self.alphabet, lengths))

    def range_of(self, num: dict[str, int], den: dict[str, int]) -> tuple[Fraction, Fraction]:
        """Exact range of ``sum num[a] lam_a / sum den[a] lam_a`` over the cone.

        A ratio of positive linear forms is extremal at the cone generators.
        """
        vals = []
        idx = {a: i for i, a in enumerate(self.alphabet)}
        for r in self.matrix.rows:
            n = sum(c * r[idx[a]] for a, c in num.items())
            dd = sum(c * r[idx[a]] for a, c in den.items())
            vals.append(Fraction(n, dd))
        return min(vals), max(vals)


def cone_lengths(start: PermPair, path: Path, alphabet: Sequence[str] | None = None) -> LengthCone:
    alphabet = tuple(alphabet or start.alphabet)
    if path.start != start:
        raise IemError("path does not start at the given vertex")
    M = path_matrix(path, alphabet)
    cone = LengthCone(len(path), alphabet, M)
    if len(path) == 0:
        cone.lower = {a: Fraction(0) for a in alphabet}
        cone.upper = {a: Fraction(1) for a in alphabet}
        return cone
    verts = cone.vertices
    for j, a in enumerate(alphabet):
        col = [v[j] for v in verts]
        cone.lower[a] = min(col)
        cone.upper[a] = max(col)
    return cone


def realize(
    program: PathProgram | Path,
    N: int,
    precision: int = 256,
    margin: int | None = None,
    backend: str = "ball",
) -> tuple[Iem, Path]:
    """A concrete map whose induction follows the program for ``N`` steps.

    The lengths are ``1 B(0, N + margin)`` normalized, an interior point of
    the cone at depth ``N + margin``.  With ``backend="ball"`` they are
    rounded to ``precision`` bits; ``"rational"`` keeps them exact.
    """
    if isinstance(program, PathProgram):
        full = program.compile()
        if margin is None:
            from .induction import mmy_times

            times = mmy_times(full).times
            later = [t for t in times if t > N]
            margin = (later[1] - N) if len(later) > 1 else (later[0] - N if later else 0)
    else:
        full = program
        if margin is None:
            margin = 0
    depth = min(len(full), N + margin)
    if depth < N:
        raise IemError(f"program only defines {len(full)} steps, need {N}")
    prefix = full[:depth]
    start = full.start
    M = path_matrix(prefix, start.alphabet)
    col = [sum(M.rows[i][j] for i in range(len(M.rows))) for j in range(len(M.alphabet))]
    tot = sum(col)
    lam = [Fraction(c, tot) for c in col]
    if backend == "rational":
        lengths = lam
    elif backend == "ball":
        lengths = [to_ball(v, precision) for v in lam]
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return Iem(start, lengths, start.alphabet), full[:depth]


def replay_matches(T: Iem, path: Path, N: int) -> bool:
    """True if the induction of ``T`` reproduces the first ``N`` winners of ``path``."""
    run = rv_run(T, N)
    return run.N >= N and run.path.winners()[:N] == path.winners()[:N]


# ---------------------------------------------------------------------------
# Bar map
# ---------------------------------------------------------------------------


def bar_map(T3: Iem) -> Iem:
    """The 2-IET on ``[0, 1 + lam_B)`` whose first return to ``[0, 1)`` is ``T3``.

    ``T3`` must have permutation ``ABC/CBA`` (letters in that order).  The
    result has letters ``A``, ``C`` with lengths ``lam_A + lam_B`` and
    ``lam_C + lam_B``: rotation by ``lam_B + lam_C``.
    """
    top, bottom = T3.top, T3.bottom
    if len(top) != 3 or tuple(reversed(top)) != bottom:
        raise IemError(f"bar map needs a pair of the form XYZ/ZYX, got {T3.perms}")
    a, b, c = top
    lb = T3.length(b)
    return Iem(PermPair((a, c), (c, a)), {a: T3.length(a) + lb, c: T3.length(c) + lb}, (a, c))


def bar_first_return(T3: Iem) -> Iem:
    """``induced_map(bar_map(T3), total(T3))``: should reproduce ``T3``."""
    S, _ = induced_map(bar_map(T3), T3.total)
    return S
