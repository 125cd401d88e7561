import os
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_criteria: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    crit = props.get("criterion")
    if crit is None:
        return
    if report.when == "call" or (report.failed and crit not in _criteria):
        outcome = "PASS" if report.passed else "FAIL"
        _criteria[crit] = (outcome, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_criteria, key=lambda c: int(c.lstrip("C"))):
        outcome, detail = _criteria[crit]
        terminalreporter.write_line(f"{crit:>4} {outcome}  {detail}")
