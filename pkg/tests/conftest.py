import time

import pytest

from ghzprimate.optimizer import OptimizerConfig, optimize_plan

_CRITERIA = {}


class Runs:
    """Optimizations shared by the acceptance tests, each computed once with its wall time."""

    def __init__(self):
        self._cache = {}

    def get(self, n, s, method, fixed=False):
        key = (n, s, method, fixed)
        if key not in self._cache:
            t0 = time.perf_counter()
            rep = optimize_plan(n, s, method, OptimizerConfig(fixed_primates=fixed))
            self._cache[key] = (rep, time.perf_counter() - t0)
        return self._cache[key]

    def nu(self, n, s, method, fixed=False):
        return self.get(n, s, method, fixed)[0].nu


@pytest.fixture(scope="session")
def runs():
    return Runs()


@pytest.fixture
def criterion():
    def record(number, checks):
        """``checks`` maps a short label to ``(ok, detail)``."""
        _CRITERIA.setdefault(number, {}).update(checks)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        checks = _CRITERIA[number]
        ok = all(v[0] for v in checks.values())
        detail = "; ".join(f"{k}: {'ok' if v[0] else 'FAILED'} ({v[1]})" for k, v in checks.items())
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")

