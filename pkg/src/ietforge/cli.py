"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 exact tie during induction,
3 precision exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import ExitStack
from fractions import Fraction

from .conditions import (
    ConditionError,
    audit_run,
    chained_delta_witness,
    find_prop32_witnesses,
    profile_A,
    profile_D,
    profile_U,
    profile_Z,
)
from .families import (
    example1_program,
    example2_height_step,
    example2_program,
    example2_row,
    golden_rotation,
    realize,
    bar_map,
    cone_lengths,
)
from .iem import Iem, IemError, PermPair, delta, validate_admissible
from .induction import KeaneViolation, rv_run
from .numerics import DEFAULT_PRECISION, Ball, PrecisionExhausted, QuadElem, golden, parse_scalar, to_ball
from .rauzy import build_diagram
from .serialize import dumps, encode, iem_from_dict, iem_to_dict, run_to_dict

EXIT_OK, EXIT_USAGE, EXIT_KEANE, EXIT_PRECISION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _env_precision() -> int:
    raw = os.environ.get("IETFORGE_PRECISION")
    if not raw:
        return DEFAULT_PRECISION
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"IETFORGE_PRECISION must be an integer, got {raw!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def _schedule(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad schedule {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("schedule entries must be >= 1")
    return vals


def _add_input(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input (exactly one source)")
    g.add_argument("--example", choices=["golden", "ex1", "dio4"])
    g.add_argument("--lengths", help='comma separated, e.g. "1/3,2/3" or "1+1*sqrt(5),2"')
    g.add_argument("--input", metavar="FILE", help="map as JSON (alphabet, top, bottom, lengths)")
    g.add_argument("--json", metavar="TEXT", help="map as inline JSON")
    p.add_argument("--top", help="top row, e.g. ABC")
    p.add_argument("--bottom", help="bottom row, e.g. CBA")
    p.add_argument("--schedule", type=_schedule, help="block parameters for ex1, e.g. 1,2,3")
    p.add_argument("--blocks", type=_positive, help="number of blocks for ex1/dio4")
    p.add_argument("--backend", help="rational, quad:D or ball")
    p.add_argument("--precision", type=_positive, help="ball precision in bits (default $IETFORGE_PRECISION or 128)")
    p.add_argument("--steps", type=_positive, help="induction depth")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--approx", action="store_true", help="add decimal renderings next to exact values")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ietforge", description="Exact interval exchange maps and Rauzy-Veech induction.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    a = sub.add_parser("analyze", help="induction, condition profiles and audit")
    _add_input(a)
    a.add_argument("--delta-horizon", type=_positive, default=200)
    a.add_argument("--recurrence-horizon", type=_positive, default=1000)
    a.add_argument("--format", choices=["json", "csv", "text"], default="json")
    a.add_argument("--jobs", type=_positive, default=1)

    w = sub.add_parser("witness", help="recurrence witnesses and their gap pairs")
    _add_input(w)
    w.add_argument("--max-height", type=_positive, default=10**6, help="skip witnesses with larger return time")
    w.add_argument("--format", choices=["json", "text"], default="json")

    d = sub.add_parser("diagram", help="export the Rauzy diagram of a pair")
    d.add_argument("--top", required=True)
    d.add_argument("--bottom", required=True)
    d.add_argument("--format", choices=["dot", "json"], default="dot")
    d.add_argument("--out", metavar="PATH")
    return parser


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------


def _parse_backend(text: str | None) -> tuple[str, int | None] | None:
    if text is None:
        return None
    if text in ("rational", "ball"):
        return text, None
    if text.startswith("quad:"):
        try:
            D = int(text[5:])
            QuadElem(0, 1, D)
        except ValueError:
            raise UsageError(f"bad backend {text!r}") from None
        return "quad", D
    raise UsageError(f"backend must be rational, quad:D or ball, got {text!r}")


def _convert(v, backend, precision):
    kind, D = backend
    if kind == "ball":
        return v if isinstance(v, Ball) else to_ball(v, precision)
    if kind == "rational":
        if not isinstance(v, (int, Fraction)):
            raise UsageError(f"value {v} is not rational")
        return Fraction(v)
    if isinstance(v, Ball):
        raise UsageError("ball input with a quad backend")
    if isinstance(v, QuadElem):
        if v.D != D:
            raise UsageError(f"value {v} is not in Q(sqrt {D})")
        return v
    return QuadElem(v, 0, D)


class Job:
    """Resolved input: the map plus context for named examples."""

    def __init__(self, T: Iem, steps: int, name: str = "", program=None, K: int = 0):
        self.T = T
        self.steps = steps
        self.name = name
        self.program = program
        self.K = K


def resolve_input(args) -> Job:
    sources = [s for s in ("example", "lengths", "input", "json") if getattr(args, s) is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one of --example, --lengths, --input, --json")
    precision = args.precision or _env_precision()
    backend = _parse_backend(args.backend)
    if args.example:
        return _example_job(args, backend, precision)
    if args.lengths is not None:
        if not args.top or not args.bottom:
            raise UsageError("--lengths needs --top and --bottom")
        try:
            perms = PermPair(args.top, args.bottom)
            vals = [parse_scalar(t, precision) for t in args.lengths.split(",")]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if backend is not None:
            vals = [_convert(v, backend, precision) for v in vals]
        alphabet = list(args.top) if len(vals) == len(args.top) else None
        T = Iem(perms, vals, alphabet)
    else:
        try:
            if args.input is not None:
                with open(args.input, encoding="utf-8") as fh:
                    doc = json.load(fh)
            else:
                doc = json.loads(args.json)
            T = iem_from_dict(doc)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot read map: {exc}") from None
        if backend is not None:
            T = Iem(T.perms, {a: _convert(v, backend, precision) for a, v in T.lengths.items()}, T.alphabet)
    if not validate_admissible(T.perms):
        raise UsageError(f"{T.perms} is not admissible")
    return Job(T, args.steps or 200)


def _example_job(args, backend, precision) -> Job:
    name = args.example
    if name == "golden":
        T = golden_rotation()
        if backend is not None and backend[0] == "ball":
            T = Iem(T.perms, {a: to_ball(v, precision) for a, v in T.lengths.items()}, T.alphabet)
        elif backend is not None and backend != ("quad", 5):
            raise UsageError("the golden example needs quad:5 or ball")
        return Job(T, args.steps or 200, name)
    kind = "rational" if backend is None else backend[0]
    if kind == "quad":
        raise UsageError(f"{name} is realized with rational or ball lengths")
    if name == "ex1":
        sched = args.schedule or list(range(1, (args.blocks or 4) + 1))
        # one extra block keeps the realized lengths inside the cone
        program = example1_program(sched + [sched[-1] + 1])
        N = program.block_ends()[len(sched) - 1]
        K = len(sched)
    else:
        K = args.blocks or 3
        program = example2_program(K + 2)
        N = example2_height_step(K)
    full = len(program.compile())
    T, _ = realize(program, full, precision=precision, margin=0, backend=kind)
    steps = min(args.steps, full) if args.steps else N
    return Job(T, steps, name, program, K)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _safe(fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except ConditionError as exc:
        return {"unavailable": str(exc)}


def analyze(job: Job, delta_horizon: int, recurrence_horizon: int, jobs: int = 1) -> tuple[dict, int]:
    T = job.T
    run = rv_run(T, job.steps)
    report = {
        "input": iem_to_dict(T),
        "requested_steps": job.steps,
        "run": run_to_dict(run, matrices=(run.N,)),
    }
    if run.violation is not None:
        return report, EXIT_KEANE
    if run.precision_error is not None:
        return report, EXIT_PRECISION
    report["profile_A"] = _safe(profile_A, run)
    report["profile_Z"] = _safe(profile_Z, run)
    report["profile_D"] = profile_D(T, delta_horizon)
    with ExitStack() as stack:
        map_fn = map
        if jobs > 1:
            map_fn = stack.enter_context(ProcessPoolExecutor(max_workers=jobs)).map
        report["profile_U"] = profile_U(T, run, recurrence_horizon, map_fn=map_fn)
    audit = _safe(audit_run, run)
    report["audit"] = audit if isinstance(audit, dict) else audit.to_dict()
    if job.name == "ex1":
        report["example1"] = _example1_extra(T, run)
    if job.name == "dio4":
        report["example2"] = [example2_row(run, k) for k in range(1, job.K + 1)]
    return report, EXIT_OK


def _example1_extra(T: Iem, run) -> dict:
    """Bar-map ratio of the realized map and its certified range over the cone."""
    bar = bar_map(T)
    cone = cone_lengths(run.iems[0].perms, run.path)
    lo, hi = cone.range_of({"A": 1, "B": 1}, {"C": 1, "B": 1})
    g = golden()
    return {
        "bar_lengths": bar.lengths,
        "ratio_A_over_C": bar.length("A") / bar.length("C"),
        "cone_depth": run.N,
        "cone_ratio_range": [lo, hi],
        "cone_ratio_width": hi - lo,
        "cone_contains_golden": lo <= g <= hi,
    }


def witness(job: Job, max_height: int) -> list[dict]:
    run = rv_run(job.T, job.steps)
    T0 = run.iems[0]
    out = []
    for w in find_prop32_witnesses(run, max_height):
        dw = chained_delta_witness(run, w)
        rec = {"recurrence": w, "delta": dw}
        if 2 * w.m <= max_height:
            rec["delta_2m"] = delta(T0.normalized(), 2 * w.m)
        out.append(rec)
    return out


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _csv_series(report: dict) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["series", "index", "value"])
    for key, name in (("profile_A", "A_block_norm"), ("profile_Z", "Z_block_norm"), ("profile_D", "n_delta")):
        prof = report.get(key)
        if prof is None or isinstance(prof, dict):
            continue
        for i, v in prof.samples:
            wr.writerow([name, i, encode(v)])
    return buf.getvalue()


def _text(report: dict, approx: bool) -> str:
    doc = encode(report, approx=True)
    lines = []
    run = doc["run"]
    lines.append(f"map       {' '.join(doc['input']['top'])} / {' '.join(doc['input']['bottom'])}")
    lines.append(f"steps     {len(run['steps'])} of {doc['requested_steps']}")
    if "violation" in run:
        lines.append(f"violation at step {run['violation']['step']} ({'/'.join(run['violation']['letters'])})")
    for key in ("profile_A", "profile_Z", "profile_D", "profile_U"):
        prof = doc.get(key)
        if prof is None:
            continue
        if "unavailable" in prof:
            lines.append(f"{key:<10}unavailable: {prof['unavailable']}")
            continue
        ext = prof["extremum"]
        ext = ext["approx"] if isinstance(ext, dict) else ext
        lines.append(f"{key:<10}{prof['verdict']:<17} extremum {ext}  samples {len(prof['samples'])}")
    audit = doc.get("audit")
    if audit is not None:
        if "unavailable" in audit:
            lines.append(f"audit     unavailable: {audit['unavailable']}")
        else:
            lines.append(f"audit     {'ok' if audit['ok'] else 'FAILED'}")
            for name, s in sorted(audit["summary"].items()):
                lines.append(f"  {name:<14}pass {s['pass']:<6}fail {s['fail']:<6}skip {s['skip']}")
    for row in doc.get("example2", []):
        lines.append(
            f"k={row['k']}  n={row['step']:<4} value {row['value']['approx']:<14} "
            f"m={row['height']:<10} value {row['height_value']['approx']:<14} bound {row['bound']['approx']}"
        )
    ex1 = doc.get("example1")
    if ex1:
        r = ex1["ratio_A_over_C"]
        lines.append(f"bar ratio {r['approx'] if isinstance(r, dict) else r}")
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: analyze, witness or diagram")
        if args.command == "diagram":
            try:
                start = PermPair(args.top, args.bottom)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            if not validate_admissible(start):
                raise UsageError(f"{start} is not admissible")
            D = build_diagram(start)
            _emit(D.to_dot() if args.format == "dot" else D.to_json() + "\n", args.out)
            return EXIT_OK
        job = resolve_input(args)
        if args.command == "analyze":
            report, code = analyze(job, args.delta_horizon, args.recurrence_horizon, args.jobs)
            if args.format == "csv":
                text = _csv_series(report)
            elif args.format == "text":
                text = _text(report, args.approx)
            else:
                text = dumps(report, approx=args.approx)
            _emit(text, args.out)
            return code
        recs = witness(job, args.max_height)
        if args.format == "text":
            text = "".join(
                f"m={r['recurrence'].m} value={encode(r['recurrence'].value)} bound={encode(r['recurrence'].bound)}\n"
                for r in recs
            ) or "no witnesses\n"
        else:
            text = dumps({"witnesses": recs}, approx=args.approx)
        _emit(text, args.out)
        return EXIT_OK
    except UsageError as exc:
        print(f"ietforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IemError as exc:
        print(f"ietforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeaneViolation as exc:
        print(f"ietforge: {exc}", file=sys.stderr)
        return EXIT_KEANE
    except PrecisionExhausted as exc:
        print(f"ietforge: precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION


if __name__ == "__main__":
    sys.exit(main())
