import numpy as np
import pytest

from msc.corpus import corpus
from msc.graph import path_graph
from msc.protocol import assemble
from msc.scaling import classify, rotation2

# criterion number -> list of (label, passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}
TITLES: dict[int, str] = {}


def record(criterion: int, title: str, label: str, passed: bool, detail: str = "") -> None:
    TITLES[criterion] = title
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[k]
        ok = all(p for _, p, _ in parts)
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {TITLES[k]}")
        for label, passed, detail in parts:
            tr.write_line(f"         {'ok  ' if passed else 'FAIL'} {label}: {detail}")


@pytest.fixture(scope="session")
def cases():
    return list(corpus(7, 200))


@pytest.fixture
def rotated_pair():
    """Two agents on a path, one rotated by pi/4, one with S = -I."""
    return assemble(path_graph(2), [classify(rotation2(np.pi / 4)), classify(-np.eye(2))], 2)
