import time

import pytest

ACCEPTANCE: list[tuple[str, bool, float, float, str]] = []


class Criterion:
    """Times a block and records one PASS/FAIL line for the summary."""

    def __init__(self, label, limit):
        self.label, self.limit, self.detail = label, limit, ""

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        ok = exc_type is None and elapsed < self.limit
        if exc_type is None and not ok:
            self.detail = f"too slow ({elapsed:.2f}s >= {self.limit}s)"
        elif exc_type is not None:
            self.detail = f"{exc_type.__name__}: {exc}"[:200]
        ACCEPTANCE.append((self.label, ok, elapsed, self.limit, self.detail))
        line = f"{'PASS' if ok else 'FAIL'} {self.label} [{elapsed:.2f}s / {self.limit}s] {self.detail}"
        print(line)
        if exc_type is None and not ok:
            pytest.fail(self.detail)
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, elapsed, limit, detail in ACCEPTANCE:
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'} {label} [{elapsed:.2f}s / {limit}s] {detail}".rstrip())
