import numpy as np
import pytest

from invmeas.rng import RngHandle

# acceptance id -> list of (check name, passed, detail)
ACCEPTANCE = {}

SEEDS = (1, 2, 3)


def record(criterion, name, passed, detail=""):
    ACCEPTANCE.setdefault(criterion, []).append((name, bool(passed), detail))
    return bool(passed)


def vote(criterion, name, check, seeds=SEEDS, needed=2):
    """Run ``check(rng) -> (passed, detail)`` once per seed; pass with ``needed`` wins.

    The outcome is recorded for the acceptance summary and returned.
    """
    outcomes = [check(RngHandle(s, stream=_stream(criterion, name))) for s in seeds]
    wins = sum(bool(p) for p, _ in outcomes)
    detail = "; ".join(str(d) for _, d in outcomes)
    return record(criterion, name, wins >= needed, f"{wins}/{len(seeds)} seeds [{detail}]")


def _stream(*parts):
    h = 0
    for ch in "/".join(map(str, parts)).encode():
        h = (h * 257 + ch) % (2**31 - 1)
    return h


@pytest.fixture
def gen():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[crit]
        ok = all(p for _, p, _ in checks)
        tr.write_line(f"AC{crit:02d} {'PASS' if ok else 'FAIL'}  ({sum(p for _, p, _ in checks)}/{len(checks)} checks)")
        for name, p, detail in checks:
            tr.write_line(f"    {'pass' if p else 'FAIL'}  {name}: {detail}")
