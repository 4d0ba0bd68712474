import os
import time
from contextlib import contextmanager

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_RESULTS = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Context manager recording one acceptance criterion and its runtime.

    The criterion fails when the body raises or the runtime limit is exceeded.
    """
    log = request.config.stash.setdefault(_RESULTS, [])

    @contextmanager
    def run(number: int, title: str, limit: float = None):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            in_time = limit is None or elapsed < limit
            status = "PASS" if ok and in_time else "FAIL"
            note = f"{elapsed:.2f}s" + (f" / limit {limit:g}s" if limit is not None else "")
            if ok and not in_time:
                note += " (too slow)"
            line = f"criterion {number:2d} {status}  {title}  [{note}]"
            log.append((number, line))
            print(line)
        assert in_time, f"criterion {number} took {elapsed:.1f}s, limit {limit}s"

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_RESULTS, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(log):
        terminalreporter.write_line(line)
