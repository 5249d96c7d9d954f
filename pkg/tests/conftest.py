import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wpbound.ribbon_graph import enumerate_trivalent, planar_theta, theta  # noqa: E402


@pytest.fixture(scope="session")
def theta_graph():
    return theta()


@pytest.fixture(scope="session")
def planar_theta_graph():
    return planar_theta()


@pytest.fixture(scope="session")
def catalogs():
    return {gn: enumerate_trivalent(*gn) for gn in [(1, 1), (0, 3), (1, 2), (0, 4), (2, 1)]}


@pytest.fixture(scope="session")
def oracle_counts():
    """Brute-force class counts (slow: the (2,1) search takes ~30 s)."""
    import time

    from oracles import brute_force_classes

    t0 = time.perf_counter()
    out = {gn: brute_force_classes(*gn) for gn in [(1, 1), (0, 3), (1, 2), (2, 1)]}
    out["seconds"] = time.perf_counter() - t0
    return out


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Record one pass/fail line per acceptance criterion; echoed in the terminal summary."""
    def report(index: int, ok: bool, text: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {index:2d}: {text}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
