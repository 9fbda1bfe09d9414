import time
from contextlib import contextmanager

import pytest

ACCEPTANCE: dict = {}


@contextmanager
def _criterion(num: int, title: str, limit: float):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        late = elapsed >= limit
        status = "PASS" if ok and not late else "FAIL"
        note = f" (over the {limit:g} s limit)" if late else ""
        ACCEPTANCE[num] = f"criterion {num:2d} {status}  {title}  [{elapsed:.2f} s]{note}"
        print(ACCEPTANCE[num])
    assert not late, f"criterion {num} took {elapsed:.1f} s, limit {limit:g} s"


@pytest.fixture
def acceptance():
    return _criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
