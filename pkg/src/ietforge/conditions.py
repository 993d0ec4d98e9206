"""Finite-horizon profiles of the bounded-type conditions, witnesses and audits.

All scale-dependent quantities are reported for the map rescaled to total
length 1.  Profiles only ever *estimate* boundedness; witnesses are exact
certificates and are re-verified by direct orbit evaluation before being
returned.
"""

from __future__ import annotations

import bisect
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .iem import Iem, apply_n, delta, discontinuity_set, iter_delta, recurrence_min
from .induction import InductionRun
from .numerics import Ordering, compare, scalar_min

BOUNDED = "bounded-so-far"
UNBOUNDED = "unbounded-trend"
INCONCLUSIVE = "inconclusive"

U_DISCLAIMER = "upper estimate of inf_x liminf n|T^n x - x|; (U) cannot be certified at a finite horizon"


class ConditionError(ValueError):
    pass


class WitnessError(AssertionError):
    """A constructed witness failed direct verification."""


@dataclass
class ConditionProfile:
    kind: str
    horizon: int
    samples: list[tuple[int, object]] = field(default_factory=list)
    extremum: object = None
    verdict: str = INCONCLUSIVE
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "horizon": self.horizon,
            "samples": [[i, _fmt(v)] for i, v in self.samples],
            "extremum": _fmt(self.extremum),
            "verdict": self.verdict,
            "note": self.note,
        }


def _fmt(v):
    # scalars stay raw; serialization.encode renders them
    return v


def _smin(values):
    return functools.reduce(scalar_min, values)


def _trend(a, b) -> str:
    # UNBOUNDED when a < b, undecidable ball comparisons give INCONCLUSIVE
    c = compare(a, b)
    if c is Ordering.UNKNOWN:
        return INCONCLUSIVE
    return UNBOUNDED if c is Ordering.LT else BOUNDED


def _max_verdict(values: Sequence) -> str:
    if len(values) < 2:
        return INCONCLUSIVE if not values else BOUNDED
    half = len(values) // 2
    return _trend(2 * max(values[:half]), max(values[half:]))


def _min_verdict(values: Sequence) -> str:
    if len(values) < 2:
        return INCONCLUSIVE if not values else BOUNDED
    half = len(values) // 2
    return _trend(2 * _smin(values[half:]), _smin(values[:half]))


def _block_profile(kind: str, run: InductionRun, blocks: list[tuple[int, int]]) -> ConditionProfile:
    if not blocks:
        raise ConditionError(f"profile {kind} needs at least one complete block")
    samples = [(k, run.block(m, n).norm()) for k, (m, n) in enumerate(blocks, start=1)]
    values = [v for _, v in samples]
    return ConditionProfile(kind, run.N, samples, max(values), _max_verdict(values))


def profile_A(run: InductionRun) -> ConditionProfile:
    """Norms of the MMY blocks ``B(m_k, m_{k+1})``."""
    return _block_profile("A", run, run.mmy_times().blocks)


def profile_Z(run: InductionRun) -> ConditionProfile:
    """Norms of the Zorich blocks ``B(n_k, n_{k+1})``."""
    return _block_profile("Z", run, run.zorich_times().blocks)


def profile_D(T: Iem, N: int, include_endpoints: bool = True) -> ConditionProfile:
    """Samples ``(n, n * delta(T^n))`` for ``n = 1..N`` on the normalized map."""
    T = T.normalized()
    samples = [(n, n * g) for n, g in iter_delta(T, N, include_endpoints)]
    values = [v for _, v in samples]
    return ConditionProfile("D", N, samples, _smin(values), _min_verdict(values))


def default_grid(run: InductionRun, max_points: int = 8) -> list:
    """Midpoints of ``I_a(n_k)`` over letters and the first Zorich times."""
    grid = []
    for n in run.zorich_times().times:
        Tn = run.iems[n]
        for a in Tn.top:
            lo, hi = Tn.interval(a)
            grid.append((lo + hi) / 2)
            if len(grid) >= max_points:
                return grid
    return grid


def _recurrence_job(args):
    T, x, N, start = args
    return recurrence_min(T, x, N, start=start)


def profile_U(
    T: Iem,
    run: InductionRun | None,
    N: int,
    grid: Sequence | None = None,
    tail: float = 0.25,
    witness_budget: int = 10**6,
    map_fn=map,
) -> ConditionProfile:
    """Estimate ``inf_x liminf n |T^n x - x|``.

    For each grid point the minimum of ``n |T^n x - x|`` is taken over the
    window ``tail * N < n <= N`` (transient small ``n`` are excluded).  Every
    recurrence witness in ``run`` with height at most ``witness_budget`` is
    folded in as well.  The result is an upper estimate only.  ``map_fn``
    may be a pool's ordered ``map`` to spread the grid over processes.
    """
    scale = T.total
    if grid is None:
        grid = default_grid(run) if run is not None else []
    start = max(1, int(N * tail) + 1) if N > 1 else 1
    results = map_fn(_recurrence_job, [(T, x, N, start) for x in grid])
    samples = [(n, v / scale) for v, n in results]
    if run is not None:
        for w in find_prop32_witnesses(run, witness_budget):
            samples.append((w.m, w.value))
    samples.sort(key=lambda s: s[0])
    if not samples:
        return ConditionProfile("U", N, [], None, INCONCLUSIVE, U_DISCLAIMER)
    ext = _smin([v for _, v in samples])
    return ConditionProfile("U", N, samples, ext, BOUNDED, U_DISCLAIMER)


# ---------------------------------------------------------------------------
# Witnesses
# ---------------------------------------------------------------------------


@dataclass
class RecurrenceWitness:
    """``m |T^m(x) - x| = value < bound`` on the normalized map."""

    x: object
    m: int
    value: object
    bound: Fraction
    block: int
    displacement: object

    def to_dict(self) -> dict:
        return {
            "x": _fmt(self.x),
            "m": self.m,
            "value": _fmt(self.value),
            "bound": _fmt(self.bound),
            "block": self.block,
            "displacement": _fmt(self.displacement),
        }


@dataclass
class DeltaWitness:
    """Two critical points of ``T^power`` at distance ``distance``."""

    power: int
    points: tuple
    distance: object
    bound: object

    def to_dict(self) -> dict:
        return {
            "power": self.power,
            "points": [_fmt(p) for p in self.points],
            "distance": _fmt(self.distance),
            "bound": _fmt(self.bound),
        }


def _is_member(points: list, x) -> bool:
    i = bisect.bisect_left(points, x)
    return i < len(points) and compare(points[i], x) is Ordering.EQ


def prop31_witness(T: Iem, x, n: int, c) -> DeltaWitness:
    """Critical points of ``T^(2n)`` closer than ``c/n`` from a close return of ``x``.

    Requires ``n |T^n(x) - x| < c``.  With ``[a, b)`` the maximal continuity
    interval of ``T^n`` containing ``x`` and ``delta = T^n(x) - x``, the pair
    is ``(b - delta, b)`` for ``delta > 0`` and ``(a, a - delta)`` otherwise;
    if ``b - a < c/n`` the interval itself is returned.
    """
    y = apply_n(T, x, n)
    shift = y - x
    if compare(shift, 0) is Ordering.EQ:
        raise ConditionError("exact return: x is periodic, the map has a connection")
    if not compare(n * abs(shift), c) is Ordering.LT:
        raise ConditionError("precondition n|T^n x - x| < c does not hold")
    crit_n = discontinuity_set(T, n)
    i = bisect.bisect_right(crit_n, x)
    a, b = crit_n[i - 1], crit_n[i]
    limit = c / n
    if compare(b - a, limit) is Ordering.LT:
        pair = (a, b)
    elif compare(shift, 0) is Ordering.GT:
        pair = (b - shift, b)
    else:
        pair = (a, a - shift)
    dist = pair[1] - pair[0]
    crit_2n = discontinuity_set(T, 2 * n)
    if not all(_is_member(crit_2n, p) for p in pair):
        raise WitnessError(f"witness points {pair} are not critical for T^{2 * n}")
    if compare(dist, limit) is not Ordering.LT:
        raise WitnessError("witness distance does not beat c/n")
    return DeltaWitness(2 * n, pair, dist, limit)


def _zorich_block(run: InductionRun, k: int) -> tuple[int, int]:
    blocks = run.zorich_times().blocks
    if not 0 <= k < len(blocks):
        raise ConditionError(f"no complete Zorich block {k} (have {len(blocks)})")
    return blocks[k]


def prop32_applicable(run: InductionRun, k: int) -> bool:
    s, e = _zorich_block(run, k)
    return e - s >= run.d - 1 and run.block(s, e).norm() > 2 * run.d


def prop32_witness(run: InductionRun, k: int, max_steps: int = 5 * 10**7) -> RecurrenceWitness:
    """Recurrence witness from the ``k``-th Zorich block (0-based).

    With ``a`` the block winner and ``m = B_a(n_k)``, the midpoint ``x`` of
    ``I_a(n_k)`` satisfies ``m |T^m x - x| < d / (|B(n_k, n_k+1)| - 2d)``.
    Both the displacement and the inequality are checked on the orbit.
    """
    s, e = _zorich_block(run, k)
    d = run.d
    B = run.block(s, e)
    norm = B.norm()
    if e - s < d - 1 or norm <= 2 * d:
        raise ConditionError(f"block {k} has length {e - s} and norm {norm}; needs length >= {d - 1} and norm > {2 * d}")
    alpha = run.arrows[s].winner
    Tk = run.iems[s]
    if Tk.perms.alpha_t == alpha:
        row = Tk.bottom
    else:
        row = Tk.top
    losers = row[row.index(alpha) + 1:]
    h = (e - s) // len(losers)
    for beta in losers:
        hb = B[beta, alpha]
        if not h <= hb <= h + 1:
            raise WitnessError(f"loser count {hb} for {beta} outside [{h}, {h + 1}]")
    m = run.heights(s)[alpha]
    if m > max_steps:
        raise ConditionError(f"height {m} exceeds direct-evaluation budget {max_steps}")
    lo, hi = Tk.interval(alpha)
    x = (lo + hi) / 2
    T0 = run.iems[0]
    y = apply_n(T0, x, m)
    disp = abs(y - x)
    expected = sum((Tk.length(b) for b in losers[1:]), Tk.length(losers[0]))
    if compare(disp, expected) is not Ordering.EQ:
        raise WitnessError(f"displacement {disp} differs from loser total {expected}")
    value = m * disp / T0.total
    bound = Fraction(d, norm - 2 * d)
    if compare(value, bound) is not Ordering.LT:
        raise WitnessError(f"witness value {value} not below {bound}")
    return RecurrenceWitness(x, m, value, bound, k, disp)


def find_prop32_witnesses(run: InductionRun, max_steps: int = 5 * 10**7) -> list[RecurrenceWitness]:
    """All witnesses from applicable Zorich blocks whose height fits ``max_steps``."""
    out = []
    for k, (s, _) in enumerate(run.zorich_times().blocks):
        if not prop32_applicable(run, k):
            continue
        if run.heights(s)[run.arrows[s].winner] <= max_steps:
            out.append(prop32_witness(run, k, max_steps))
    return out


def chained_delta_witness(run: InductionRun, w: RecurrenceWitness) -> DeltaWitness:
    """Close critical pair for ``T^(2m)`` derived from a recurrence witness.

    The threshold ``c`` is the witness bound, so the pair is closer than
    ``bound / m``.
    """
    T = run.iems[0].normalized()
    x = w.x / run.iems[0].total
    return prop31_witness(T, x, w.m, w.bound)


# ---------------------------------------------------------------------------
# Audit of the renormalization inequalities
# ---------------------------------------------------------------------------


@dataclass
class AuditCheck:
    name: str
    k: int
    status: str  # "pass", "fail" or "skip"
    detail: str = ""


@dataclass
class AuditReport:
    d: int
    r: int
    M: int
    blocks: int
    checks: list[AuditCheck] = field(default_factory=list)

    def add(self, name: str, k: int, ok: bool | None, detail: str = "") -> None:
        status = "skip" if ok is None else ("pass" if ok else "fail")
        self.checks.append(AuditCheck(name, k, status, detail))

    def failures(self, name: str | None = None) -> list[AuditCheck]:
        return [c for c in self.checks if c.status == "fail" and (name is None or c.name == name)]

    def count(self, name: str, status: str = "pass") -> int:
        return sum(1 for c in self.checks if c.name == name and c.status == status)

    @property
    def ok(self) -> bool:
        return not self.failures()

    def summary(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for c in self.checks:
            out.setdefault(c.name, {"pass": 0, "fail": 0, "skip": 0})[c.status] += 1
        return out

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "r": self.r,
            "M": self.M,
            "blocks": self.blocks,
            "ok": self.ok,
            "summary": self.summary(),
            "failures": [dict(c.__dict__) for c in self.failures()],
        }

    def to_text(self) -> str:
        lines = [f"audit d={self.d} r={self.r} M={self.M} blocks={self.blocks}"]
        for name, s in self.summary().items():
            lines.append(f"  {name:<12} pass={s['pass']:<5} fail={s['fail']:<5} skip={s['skip']}")
        return "\n".join(lines)


def block_depth(d: int) -> int:
    """Number of consecutive MMY blocks whose product is positive."""
    return max(2 * d - 3, 2)


def audit_run(run: InductionRun, M: int | None = None, gap_chain_cap: int = 2000) -> AuditReport:
    """Check the renormalization inequalities at every applicable MMY index.

    Checked per ``k``: positivity of ``B(m_k, m_{k+r})``; submultiplicative
    norm bounds when the block norms are at most ``M``; ``min lam(m_k) >
    max lam(m_{k+r})``; ``|B(m_k)| max lam(m_k) >= 1``; ``|B(m_k)| <=
    B_a(m_{k+r})``; the square-root dichotomy for consecutive times; and the
    gap chain ``min lam(m_{k+r}) <= delta(T(m_k)^2) <= delta(T^n)`` at
    ``n = min_a B_a(m_k)`` when that is at most ``gap_chain_cap``.
    Lengths are compared after rescaling ``lam*(0)`` to 1.
    """
    d = run.d
    r = block_depth(d)
    times = run.mmy_times().times
    nb = len(times) - 1
    if nb < r + 1:
        raise ConditionError(f"run has {nb} complete MMY blocks; need at least {r + 1}")
    block_norms = [run.block(times[k], times[k + 1]).norm() for k in range(nb)]
    if M is None:
        M = max(block_norms)
    rep = AuditReport(d, r, M, nb)
    total0 = run.iems[0].total
    T0 = run.iems[0]

    def lam(n):
        return run.lengths(n)

    for k in range(nb + 1):
        mk = times[k]
        Bk = run.matrix(mk)
        rep.add("length_floor", k, Bk.norm() * max(lam(mk)) >= total0)
        if k + r <= nb:
            mkr = times[k + r]
            blk = run.block(mk, mkr)
            rep.add("positivity", k, blk.is_positive(), f"min entry {blk.min_entry()}")
            if all(v <= M for v in block_norms[k:k + r]):
                ok = blk.norm() <= M**r and run.matrix(mkr).norm() <= M**r * Bk.norm()
                rep.add("norm_bound", k, ok)
            else:
                rep.add("norm_bound", k, None, "block norm above M")
            rep.add("length_decay", k, min(lam(mk)) > max(lam(mkr)))
            hk = run.heights(mkr)
            rep.add("height_floor", k, all(Bk.norm() <= v for v in hk.values()))
            n_top = min(run.heights(mk).values())
            if n_top <= gap_chain_cap:
                lo = min(lam(mkr))
                mid = delta(run.iems[mk], 2)
                hi = delta(T0, n_top)
                rep.add("gap_chain", k, lo <= mid <= hi, f"n={n_top}")
            else:
                rep.add("gap_chain", k, None, f"n={n_top} above cap")
        if k + 1 <= nb:
            mk1 = times[k + 1]
            nrm = block_norms[k]
            a1, t1 = min(lam(mk)), run.iems[mk].total
            a2, t2 = min(lam(mk1)), run.iems[mk1].total
            rep.add("dichotomy", k, a1 * a1 * nrm < t1 * t1 or a2 * a2 * nrm < t2 * t2)
    return rep


def small_gap_scan(run: InductionRun, M: int, cap: int = 20000) -> AuditReport:
    """Opportunistic check of the small-gap conclusion for tiny winners.

    At each ``n`` where the winner of arrow ``n-1`` loses arrow ``n`` and its
    length is below ``lam*(n) / M^d``, look for ``s`` in ``1..d-1`` with
    ``delta(T^e) < (d-1) lam*(n) / M^(s+1)``, ``e = floor(2 M^s / lam*(n))``.
    Powers above ``cap`` are skipped.
    """
    d = run.d
    if M <= d:
        raise ConditionError("needs M > d")
    T = run.iems[0].normalized()
    scale = run.iems[0].total
    rep = AuditReport(d, block_depth(d), M, len(run.mmy_times().blocks))
    for n in range(1, run.N):
        a = run.arrows[n - 1].winner
        if run.arrows[n].loser != a:
            continue
        tot = run.iems[n].total / scale
        if not run.iems[n].length(a) / scale < tot / M**d:
            continue
        found, skipped = False, False
        for s in range(1, d):
            e = math.floor(2 * M**s / tot)
            if e > cap:
                skipped = True
                continue
            if delta(T, e) < (d - 1) * tot / M ** (s + 1):
                found = True
                break
        rep.add("small_gap", n, True if found else (None if skipped else False))
    return rep
