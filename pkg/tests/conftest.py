import pytest

from floydlab.group import builtin


@pytest.fixture(scope="session")
def F2():
    return builtin("F2")


@pytest.fixture(scope="session")
def G2():
    return builtin("G2")


@pytest.fixture(scope="session")
def G3():
    return builtin("G3")


@pytest.fixture(scope="session")
def Z():
    return builtin("Z")


# ----------------------------------------------------------------------
# acceptance summary: one line per criterion

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        detail = getattr(item.module, "DETAILS", {}).get(n, "")
        _ACCEPTANCE[n] = (title, report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[n]
        line = f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
