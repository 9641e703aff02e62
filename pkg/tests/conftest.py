import os
import time
from contextlib import contextmanager

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


class Recorder:
    def __init__(self, verdicts):
        self._verdicts = verdicts

    @contextmanager
    def criterion(self, number, title, budget=None):
        """Record PASS/FAIL for one acceptance criterion; a blown time budget fails it."""
        t0 = time.perf_counter()
        note = {}
        try:
            yield note
            dt = time.perf_counter() - t0
            if budget is not None and dt > budget:
                raise AssertionError(f"runtime {dt:.1f}s exceeds the {budget:.0f}s budget")
        except BaseException as exc:
            dt = time.perf_counter() - t0
            line = f"[FAIL] criterion {number:>2}: {title} ({dt:.1f}s) {type(exc).__name__}: {exc}"
            self._verdicts.append((number, line))
            print(line)
            raise
        extra = " ".join(f"{k}={v}" for k, v in note.items())
        line = f"[PASS] criterion {number:>2}: {title} ({dt:.1f}s) {extra}".rstrip()
        self._verdicts.append((number, line))
        print(line)


@pytest.fixture
def acceptance(request):
    return Recorder(request.config.stash[_VERDICTS])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = config.stash.get(_VERDICTS, [])
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(verdicts, key=lambda v: v[0]):
        terminalreporter.write_line(line.splitlines()[0])
