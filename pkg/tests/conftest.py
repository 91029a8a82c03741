"""Collects acceptance outcomes and prints one line per criterion at the end."""

import contextlib
import time

import pytest

_ACCEPTANCE = {}


class Criterion:
    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.details = []

    def note(self, text):
        self.details.append(text)


@contextlib.contextmanager
def _run(number, title, budget):
    crit = Criterion(number, title, budget)
    t0 = time.perf_counter()
    try:
        yield crit
    except BaseException as exc:
        _ACCEPTANCE[number] = (False, title, time.perf_counter() - t0, budget,
                               crit.details + [f"{type(exc).__name__}: {exc}".splitlines()[0]])
        raise
    elapsed = time.perf_counter() - t0
    ok = elapsed <= budget
    if not ok:
        crit.note(f"runtime {elapsed:.1f}s exceeds budget {budget:g}s")
    _ACCEPTANCE[number] = (ok, title, elapsed, budget, crit.details)
    assert ok, f"runtime {elapsed:.1f}s exceeds budget {budget:g}s"


@pytest.fixture
def criterion():
    return _run


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, title, elapsed, budget, details = _ACCEPTANCE[n]
        tag = "PASS" if ok else "FAIL"
        extra = f" ({'; '.join(details)})" if details else ""
        terminalreporter.write_line(f"criterion {n:>2} {tag}  {title}  [{elapsed:.1f}s / {budget:g}s]{extra}")
