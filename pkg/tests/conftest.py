import time
from contextlib import contextmanager

import pytest

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.fixture
def criterion(request):
    """Context manager recording pass/fail and runtime of one acceptance criterion."""
    store = request.config.stash[_CRITERIA]

    @contextmanager
    def run(number: int, title: str, budget: float):
        start = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            store[number] = (title, False, time.perf_counter() - start, budget,
                             str(exc).splitlines()[0][:110] if str(exc) else type(exc).__name__)
            raise
        elapsed = time.perf_counter() - start
        ok = elapsed < budget
        store[number] = (title, ok, elapsed, budget, "" if ok else "over runtime budget")
        assert ok, f"criterion {number} took {elapsed:.2f}s, budget {budget}s"

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_CRITERIA, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        title, ok, elapsed, budget, note = store[number]
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] {number:2d}. {title} ({elapsed:.2f}s / {budget:g}s)"
        if note:
            line += f" -- {note}"
        terminalreporter.write_line(line)
    passed = sum(1 for v in store.values() if v[1])
    terminalreporter.write_line(f"{passed}/{len(store)} criteria pass")
