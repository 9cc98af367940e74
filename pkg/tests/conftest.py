from collections import defaultdict

import pytest

_ACCEPTANCE = defaultdict(list)


@pytest.fixture
def accept():
    """Record one checked part of an acceptance criterion: ``accept(number, part, ok, detail)``."""

    def record(number, part, ok, detail=""):
        _ACCEPTANCE[number].append((part, bool(ok), detail))
        print(f"criterion {number} [{'PASS' if ok else 'FAIL'}] {part}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[number]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name}: {d}" if ok_p else f"FAILED {name}: {d}" for name, ok_p, d in parts)
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  ({detail})")
