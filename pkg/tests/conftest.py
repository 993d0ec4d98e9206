import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ietforge import Iem, PermPair, validate_admissible

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

LETTERS = "ABCDEFG"


def random_pair(rng: random.Random, d: int) -> PermPair:
    top = LETTERS[:d]
    while True:
        bottom = "".join(rng.sample(top, d))
        p = PermPair(top, bottom)
        if validate_admissible(p):
            return p


def random_iem(rng: random.Random, d: int, bits: int = 30) -> Iem:
    perms = random_pair(rng, d)
    den = rng.randint(2 ** (bits - 1), 2**bits)
    return Iem(perms, [Fraction(rng.randint(1, 2**bits), den) for _ in range(d)])


@st.composite
def rational_iems(draw, dims=(2, 3, 4), bits=40):
    d = draw(st.sampled_from(dims))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_iem(random.Random(seed), d, bits)


@pytest.fixture
def rng():
    return random.Random(20240601)


# ---------------------------------------------------------------------------
# one summary line per acceptance criterion
# ---------------------------------------------------------------------------

_ACCEPTANCE: dict[str, list[tuple[str, str]]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return
    crit = name.split("_")[2].lstrip("0")
    crit = "".join(ch for ch in crit if ch.isdigit())
    outcome = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    _ACCEPTANCE.setdefault(crit, []).append((name, outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE, key=int):
        parts = _ACCEPTANCE[crit]
        verdict = "PASS" if all(o == "PASS" for _, o in parts) else "FAIL"
        detail = ", ".join(f"{n.split('_', 3)[-1]}={o}" for n, o in parts)
        terminalreporter.write_line(f"criterion {crit:>2}: {verdict}  ({detail})")
