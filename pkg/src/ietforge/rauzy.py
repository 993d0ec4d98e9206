"""Rauzy moves, diagrams, paths and the integer cocycle."""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .iem import IemError, PermPair, validate_admissible


class ArrowKind(enum.Enum):
    TOP = "T"
    BOTTOM = "B"

    @classmethod
    def parse(cls, s: str) -> ArrowKind:
        s = s.strip().upper()
        if s in ("T", "TOP", "0"):
            return cls.TOP
        if s in ("B", "BOTTOM", "1"):
            return cls.BOTTOM
        raise ValueError(f"not an arrow kind: {s!r}")


@dataclass(frozen=True)
class Arrow:
    source: PermPair
    target: PermPair
    kind: ArrowKind
    winner: str
    loser: str

    def label(self) -> str:
        return f"{self.kind.value}:{self.winner}/{self.loser}"


def _reinsert(row: tuple[str, ...], after: str) -> tuple[str, ...]:
    # move the last letter of ``row`` to just after ``after``
    last = row[-1]
    rest = list(row[:-1])
    rest.insert(rest.index(after) + 1, last)
    return tuple(rest)


def rauzy_move(perms: PermPair, kind: ArrowKind) -> tuple[PermPair, Arrow]:
    """Apply ``R_t`` (``TOP``) or ``R_b`` (``BOTTOM``) to an admissible pair."""
    if not validate_admissible(perms):
        raise IemError(f"{perms} is not admissible")
    at, ab = perms.alpha_t, perms.alpha_b
    if kind is ArrowKind.TOP:
        target = PermPair(perms.top, _reinsert(perms.bottom, at))
        winner, loser = at, ab
    else:
        target = PermPair(_reinsert(perms.top, ab), perms.bottom)
        winner, loser = ab, at
    return target, Arrow(perms, target, kind, winner, loser)


@dataclass(frozen=True)
class Path:
    """A composable sequence of arrows starting at ``start``."""

    start: PermPair
    arrows: tuple[Arrow, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "arrows", tuple(self.arrows))
        cur = self.start
        for i, a in enumerate(self.arrows):
            if a.source != cur:
                raise IemError(f"arrow {i} does not start where arrow {i - 1} ends")
            cur = a.target

    def __len__(self):
        return len(self.arrows)

    def __getitem__(self, i):
        if isinstance(i, slice):
            arrows = self.arrows[i]
            start = arrows[0].source if arrows else self.vertex(i.start or 0)
            return Path(start, arrows)
        return self.arrows[i]

    def __iter__(self):
        return iter(self.arrows)

    def __add__(self, other: Path) -> Path:
        return Path(self.start, self.arrows + other.arrows)

    @property
    def end(self) -> PermPair:
        return self.arrows[-1].target if self.arrows else self.start

    def vertex(self, n: int) -> PermPair:
        """Permutation pair after ``n`` arrows."""
        return self.start if n == 0 else self.arrows[n - 1].target

    def winners(self) -> list[str]:
        return [a.winner for a in self.arrows]

    def kinds(self) -> list[ArrowKind]:
        return [a.kind for a in self.arrows]


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


class CocycleMatrix:
    """Square integer matrix indexed by an alphabet.

    Length vectors are row vectors: ``lam(m) = lam(n) @ B(m, n)``.
    """

    __slots__ = ("alphabet", "rows", "_index")

    def __init__(self, alphabet: Sequence[str], rows: Iterable[Iterable[int]]):
        self.alphabet = tuple(alphabet)
        self.rows = tuple(tuple(int(v) for v in r) for r in rows)
        d = len(self.alphabet)
        if len(self.rows) != d or any(len(r) != d for r in self.rows):
            raise ValueError("matrix shape does not match alphabet")
        self._index = {a: i for i, a in enumerate(self.alphabet)}

    @classmethod
    def identity(cls, alphabet: Sequence[str]) -> CocycleMatrix:
        d = len(alphabet)
        return cls(alphabet, [[int(i == j) for j in range(d)] for i in range(d)])

    def __getitem__(self, key: tuple[str, str]) -> int:
        a, b = key
        return self.rows[self._index[a]][self._index[b]]

    def __matmul__(self, other: CocycleMatrix) -> CocycleMatrix:
        if self.alphabet != other.alphabet:
            raise ValueError("alphabet mismatch")
        cols = list(zip(*other.rows))
        return CocycleMatrix(self.alphabet, [[sum(x * y for x, y in zip(r, c)) for c in cols] for r in self.rows])

    def after_arrow(self, arrow: Arrow) -> CocycleMatrix:
        """``B_arrow @ self``: the loser row gains the winner row."""
        i, j = self._index[arrow.loser], self._index[arrow.winner]
        rows = list(self.rows)
        rows[i] = tuple(x + y for x, y in zip(rows[i], rows[j]))
        out = CocycleMatrix.__new__(CocycleMatrix)
        out.alphabet, out.rows, out._index = self.alphabet, tuple(rows), self._index
        return out

    def act(self, vector: Sequence) -> tuple:
        """Row vector times matrix: ``(v @ M)_b = sum_a v_a M[a, b]``."""
        d = len(self.alphabet)
        out = []
        for j in range(d):
            acc = 0
            for i in range(d):
                m = self.rows[i][j]
                if m:
                    acc = acc + vector[i] * m
            out.append(acc)
        return tuple(out)

    def norm(self) -> int:
        return matrix_norm(self)

    def row_sums(self) -> dict[str, int]:
        return row_sums(self)

    def det(self) -> int:
        # fraction-free Gaussian elimination is overkill at this size
        m = [[Fraction(v) for v in r] for r in self.rows]
        d = len(m)
        det = Fraction(1)
        for c in range(d):
            piv = next((r for r in range(c, d) if m[r][c] != 0), None)
            if piv is None:
                return 0
            if piv != c:
                m[c], m[piv] = m[piv], m[c]
                det = -det
            det *= m[c][c]
            for r in range(c + 1, d):
                f = m[r][c] / m[c][c]
                if f:
                    m[r] = [x - f * y for x, y in zip(m[r], m[c])]
        return int(det)

    def min_entry(self) -> int:
        return min(min(r) for r in self.rows)

    def is_positive(self) -> bool:
        return self.min_entry() >= 1

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def __eq__(self, other):
        if not isinstance(other, CocycleMatrix):
            return NotImplemented
        return self.alphabet == other.alphabet and self.rows == other.rows

    def __hash__(self):
        return hash((self.alphabet, self.rows))

    def __repr__(self):
        return f"CocycleMatrix({list(self.alphabet)}, {self.tolist()})"


def arrow_matrix(arrow: Arrow, alphabet: Sequence[str]) -> CocycleMatrix:
    """``I + E[loser, winner]``."""
    if arrow.winner not in alphabet or arrow.loser not in alphabet:
        raise ValueError("arrow letters not in alphabet")
    return CocycleMatrix.identity(alphabet).after_arrow(arrow)


def path_matrix(path: Path, alphabet: Sequence[str] | None = None) -> CocycleMatrix:
    """``B_{g_n} ... B_{g_1}`` for the path ``g_1 ... g_n``."""
    M = CocycleMatrix.identity(alphabet or path.start.alphabet)
    for a in path:
        M = M.after_arrow(a)
    return M


def matrix_norm(M: CocycleMatrix) -> int:
    return sum(abs(v) for r in M.rows for v in r)


def row_sums(M: CocycleMatrix) -> dict[str, int]:
    return {a: sum(r) for a, r in zip(M.alphabet, M.rows)}


# ---------------------------------------------------------------------------
# Diagrams
# ---------------------------------------------------------------------------


@dataclass
class RauzyDiagram:
    start: PermPair
    vertices: list[PermPair] = field(default_factory=list)
    arrows: list[Arrow] = field(default_factory=list)

    def outgoing(self, v: PermPair) -> dict[ArrowKind, Arrow]:
        return {a.kind: a for a in self.arrows if a.source == v}

    def to_dot(self) -> str:
        ids = {v: i for i, v in enumerate(self.vertices)}
        lines = ["digraph rauzy {"]
        for v, i in ids.items():
            lines.append(f'  v{i} [label="{" ".join(v.top)}\\n{" ".join(v.bottom)}"];')
        for a in self.arrows:
            lines.append(f'  v{ids[a.source]} -> v{ids[a.target]} [label="{a.label()}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        ids = {v: i for i, v in enumerate(self.vertices)}
        doc = {
            "start": {"top": list(self.start.top), "bottom": list(self.start.bottom)},
            "vertices": [{"id": ids[v], "top": list(v.top), "bottom": list(v.bottom)} for v in self.vertices],
            "arrows": [
                {
                    "source": ids[a.source],
                    "target": ids[a.target],
                    "kind": a.kind.value,
                    "winner": a.winner,
                    "loser": a.loser,
                }
                for a in self.arrows
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=2)


def build_diagram(start: PermPair) -> RauzyDiagram:
    """Breadth-first closure of ``start`` under both Rauzy moves."""
    if not validate_admissible(start):
        raise IemError(f"{start} is not admissible")
    diagram = RauzyDiagram(start)
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        diagram.vertices.append(v)
        for kind in (ArrowKind.TOP, ArrowKind.BOTTOM):
            w, arrow = rauzy_move(v, kind)
            diagram.arrows.append(arrow)
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return diagram
