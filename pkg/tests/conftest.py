import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from dsacolor.conflict import ConflictGraph  # noqa: E402
from dsacolor.layout import Layout, Tech, TechRules  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


def complete_graph(n: int, dsa: bool = True) -> ConflictGraph:
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    return ConflictGraph.from_edges(n, edges, edges if dsa else ())


def path_graph(n: int, spacing: float = 25.0) -> ConflictGraph:
    edges = [(i, i + 1) for i in range(n - 1)]
    coords = [(i * spacing, 0.0) for i in range(n)]
    return ConflictGraph.from_edges(n, edges, edges, coords)


def cycle_graph(n: int) -> ConflictGraph:
    edges = [(i, (i + 1) % n) for i in range(n)]
    return ConflictGraph.from_edges(n, edges, edges)


FREE = TechRules(tech=Tech.UNRESTRICTED, lshape=False)


@pytest.fixture
def k3():
    return complete_graph(3)


@pytest.fixture
def three_vias():
    return Layout.from_points([(0, 0), (25, 0), (100, 0)], 10.0)


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
