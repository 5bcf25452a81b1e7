"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from collections import defaultdict

import pytest

CRITERIA = {
    1: "algebraic identities (1e-9, 1000 x 5, < 10 s)",
    2: "sign-constraint fuzzing (1e5 sets, < 5 s)",
    3: "integral oracle: ratios, monotone, sandwich (< 30 s)",
    4: "equi-skew reconciliation (1e-12, < 1 s)",
    5: "exponent recovery (5%, < 5 min)",
    6: "constant-level window and trend (< 2 min)",
    7: "quantile suite (1e-10 round trip, 1% expansion, < 5 s)",
    8: "branch (c) boundary dominance (< 1 min)",
}

_outcomes = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        xfail = getattr(rep, "wasxfail", None)
        _outcomes[mark.args[0]].append((item.name, rep.outcome, xfail, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        rows = _outcomes.get(n)
        if not rows:
            tr.write_line(f"criterion {n}: NOT RUN  {CRITERIA[n]}")
            continue
        failed = [r for r in rows if r[1] == "failed"]
        expected = [r for r in rows if r[2] is not None and r[1] == "skipped"]
        verdict = "PASS" if not failed and not expected else "FAIL"
        secs = sum(r[3] for r in rows)
        line = f"criterion {n}: {verdict}  {CRITERIA[n]}  [{len(rows)} checks, {secs:.1f} s]"
        if expected:
            line += "  known failure: " + "; ".join(r[2] for r in expected)
        tr.write_line(line)
