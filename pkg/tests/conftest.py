"""Per-criterion bookkeeping for the acceptance suite.

Tests tagged ``@pytest.mark.criterion(n)`` roll up into one line per
criterion in the terminal summary; a criterion passes when all of its tests
pass. Tests can attach a short detail string through the ``acceptance``
fixture.
"""

from collections import defaultdict

import pytest

_outcomes = defaultdict(list)
_details = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes[n].append(rep.passed)


@pytest.fixture
def acceptance(request):
    marker = request.node.get_closest_marker("criterion")

    def note(text):
        _details[marker.args[0]].append(text)

    return note


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        ok = all(_outcomes[n])
        detail = "; ".join(_details[n])
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'} ({sum(_outcomes[n])}/{len(_outcomes[n])} tests)"
        terminalreporter.write_line(line + (f"  {detail}" if detail else ""))
