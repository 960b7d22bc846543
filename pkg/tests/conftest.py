from __future__ import annotations

import pytest

_RESULTS: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, name): numbered acceptance criterion")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return report
    n, name = marker.args
    failed_setup = report.when == "setup" and not report.passed
    if report.when == "call" or failed_setup:
        detail = "; ".join(v for k, v in item.user_properties if k == "detail")
        _RESULTS[n] = ("PASS" if report.passed else "FAIL", name, detail)
    return report


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        status, name, detail = _RESULTS[n]
        line = f"ACCEPTANCE {n} {name}: {status}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
