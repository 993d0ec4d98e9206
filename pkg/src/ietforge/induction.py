"""Rauzy-Veech induction and its Zorich / MMY accelerations."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .iem import Iem, IemError, PermPair, validate_admissible
from .numerics import Ordering, PrecisionExhausted, compare
from .rauzy import Arrow, ArrowKind, CocycleMatrix, Path, rauzy_move


class KeaneViolation(Exception):
    """The two compared final lengths are exactly equal (a connection)."""

    def __init__(self, step: int, letters: tuple[str, str], run: InductionRun | None = None):
        super().__init__(f"equal lengths of {letters[0]} and {letters[1]} at step {step}")
        self.step = step
        self.letters = letters
        self.run = run


class InductionPrecisionError(PrecisionExhausted):
    def __init__(self, step: int, run: InductionRun | None = None):
        super().__init__(f"top/bottom comparison undecidable at step {step}")
        self.step = step
        self.run = run


def rv_step(T: Iem, step: int = 0) -> tuple[Iem, Arrow]:
    """One Rauzy-Veech step: induce on ``[0, total - lambda_loser)``."""
    perms = T.perms
    if not validate_admissible(perms):
        raise IemError(f"{perms} is not admissible")
    at, ab = perms.alpha_t, perms.alpha_b
    c = compare(T.length(at), T.length(ab))
    if c is Ordering.EQ:
        raise KeaneViolation(step, (at, ab))
    if c is Ordering.UNKNOWN:
        raise InductionPrecisionError(step)
    kind = ArrowKind.TOP if c is Ordering.GT else ArrowKind.BOTTOM
    target, arrow = rauzy_move(perms, kind)
    lam = T.lengths
    lam[arrow.winner] = lam[arrow.winner] - lam[arrow.loser]
    return Iem(target, lam, T.alphabet), arrow


@dataclass
class BlockTimes:
    """Acceleration times ``0 = t_0 < t_1 < ...`` along a finite path.

    ``times`` are the boundaries of complete blocks; ``incomplete`` is the
    path length when a trailing block is still open, else ``None``.
    """

    times: list[int]
    incomplete: int | None = None

    @property
    def boundaries(self) -> list[int]:
        return self.times + ([self.incomplete] if self.incomplete is not None else [])

    @property
    def blocks(self) -> list[tuple[int, int]]:
        """Complete blocks as ``(start, end)`` pairs."""
        return list(zip(self.times, self.times[1:]))

    def __len__(self):
        return len(self.times)


def _winners(path) -> list[str]:
    if isinstance(path, Path):
        return path.winners()
    return [a.winner if isinstance(a, Arrow) else a for a in path]


def zorich_times(path: Path | Sequence) -> BlockTimes:
    """Ends of maximal runs of arrows with a common winner.

    The last run may still continue, so it is reported as incomplete.
    """
    w = _winners(path)
    if not w:
        return BlockTimes([0])
    times = [0]
    for i in range(1, len(w)):
        if w[i] != w[i - 1]:
            times.append(i)
    return BlockTimes(times, len(w))


def mmy_times(path: Path | Sequence, alphabet: Iterable[str] | None = None, convention: str = "first") -> BlockTimes:
    """Times at which every letter has won since the previous time.

    ``convention="first"`` (default) closes a block at the first arrow
    completing the set of winners.  ``convention="last"`` closes it just
    before that arrow, so every block misses exactly one winner.
    """
    if isinstance(path, Path):
        letters = set(alphabet or path.start.top)
    else:
        if alphabet is None:
            raise ValueError("alphabet required for a bare winner list")
        letters = set(alphabet)
    w = _winners(path)
    times = [0]
    seen: set[str] = set()
    start = 0
    i = 0
    while i < len(w):
        seen.add(w[i])
        if seen == letters:
            end = i + 1 if convention == "first" else i
            if convention == "last" and end == start:
                raise AssertionError("empty block")
            times.append(end)
            start = end
            seen = set()
            i = end
            continue
        i += 1
    incomplete = len(w) if times[-1] != len(w) else None
    return BlockTimes(times, incomplete)


@dataclass
class InductionRun:
    """Record of ``T(0), ..., T(N)`` with the Rauzy path between them."""

    iems: list[Iem]
    arrows: list[Arrow] = field(default_factory=list)
    violation: KeaneViolation | None = None
    precision_error: InductionPrecisionError | None = None
    _cache: dict[int, CocycleMatrix] = field(default_factory=dict, repr=False)

    @property
    def N(self) -> int:
        return len(self.arrows)

    @property
    def alphabet(self) -> tuple[str, ...]:
        return self.iems[0].alphabet

    @property
    def d(self) -> int:
        return len(self.alphabet)

    @property
    def path(self) -> Path:
        return Path(self.iems[0].perms, tuple(self.arrows))

    @property
    def complete(self) -> bool:
        return self.violation is None and self.precision_error is None

    def zorich_times(self) -> BlockTimes:
        return zorich_times(self.arrows)

    def mmy_times(self, convention: str = "first") -> BlockTimes:
        return mmy_times(self.arrows, self.alphabet, convention)

    def lengths(self, n: int) -> tuple:
        return self.iems[n].length_vector()

    def matrix(self, n: int) -> CocycleMatrix:
        """``B(0, n)``, cached at checkpoints."""
        if not 0 <= n <= self.N:
            raise IndexError(f"step {n} outside run of length {self.N}")
        if n in self._cache:
            return self._cache[n]
        keys = sorted(self._cache)
        i = bisect.bisect_right(keys, n) - 1
        if i >= 0:
            start, M = keys[i], self._cache[keys[i]]
        else:
            start, M = 0, CocycleMatrix.identity(self.alphabet)
        for k in range(start, n):
            M = M.after_arrow(self.arrows[k])
        self._cache[n] = M
        return M

    def block(self, m: int, n: int) -> CocycleMatrix:
        return cocycle_block(self, m, n)

    def heights(self, n: int) -> dict[str, int]:
        return heights(self, n)

    def check_lengths(self, m: int, n: int) -> bool:
        """Exact check of ``lam(m) == lam(n) @ B(m, n)``."""
        lhs = self.lengths(m)
        rhs = self.block(m, n).act(self.lengths(n))
        return all(compare(x, y) is Ordering.EQ for x, y in zip(lhs, rhs))


def rv_run(T: Iem, N: int, strict: bool = False, verify_every: int = 0) -> InductionRun:
    """Iterate :func:`rv_step` up to ``N`` times.

    On an exact tie or an undecidable comparison the run stops and the
    partial record is returned with ``violation`` / ``precision_error`` set;
    with ``strict=True`` the exception is raised with the run attached.
    ``verify_every`` > 0 checks ``lam(0) = lam(n) B(0, n)`` every that many
    steps and at the end.
    """
    run = InductionRun([T])
    run._cache[0] = CocycleMatrix.identity(T.alphabet)
    M = run._cache[0]
    cur = T
    last_winner = None
    seen: set[str] = set()
    for n in range(N):
        try:
            cur, arrow = rv_step(cur, n)
        except KeaneViolation as exc:
            exc.run = run
            run.violation = exc
            if strict:
                raise
            break
        except InductionPrecisionError as exc:
            exc.run = run
            run.precision_error = exc
            if strict:
                raise
            break
        # checkpoint B(0, n) at Zorich and MMY boundaries
        if arrow.winner != last_winner and n > 0:
            run._cache[n] = M
        seen.add(arrow.winner)
        M = M.after_arrow(arrow)
        if len(seen) == T.d:
            run._cache[n + 1] = M
            seen = set()
        last_winner = arrow.winner
        run.iems.append(cur)
        run.arrows.append(arrow)
        if verify_every and (n + 1) % verify_every == 0 and not run.check_lengths(0, n + 1):
            raise AssertionError(f"length cocycle identity broken at step {n + 1}")
    run._cache[run.N] = M
    if verify_every and not run.check_lengths(0, run.N):
        raise AssertionError("length cocycle identity broken at end of run")
    return run


def drive_path(start: PermPair, kinds: Iterable[ArrowKind | str]) -> tuple[Path, CocycleMatrix]:
    """Follow prescribed move kinds symbolically; no lengths involved."""
    cur = start
    arrows = []
    M = CocycleMatrix.identity(start.alphabet)
    for k in kinds:
        if not isinstance(k, ArrowKind):
            k = ArrowKind.parse(k)
        cur, arrow = rauzy_move(cur, k)
        arrows.append(arrow)
        M = M.after_arrow(arrow)
    return Path(start, tuple(arrows)), M


def cocycle_block(run: InductionRun, m: int, n: int) -> CocycleMatrix:
    """``B(m, n)``: product over arrows ``m .. n-1``; identity when ``m == n``."""
    if not 0 <= m <= n <= run.N:
        raise IndexError(f"need 0 <= m <= n <= {run.N}, got {m}, {n}")
    M = CocycleMatrix.identity(run.alphabet)
    for k in range(m, n):
        M = M.after_arrow(run.arrows[k])
    return M


def heights(run: InductionRun, n: int) -> dict[str, int]:
    """Row sums of ``B(0, n)``: return times of ``I_a(n)`` to ``[0, total(n))``."""
    return run.matrix(n).row_sums()
