import random

import pytest

from fdcbench.metric import build_space

from oracles import floyd

RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def random_space(rng, n, max_w=3, p=0.35, id=None):
    """Connected weighted graph metric on 0..n-1, built from a spanning tree plus extras."""
    wedges = [(rng.randrange(i), i, rng.randint(1, max_w)) for i in range(1, n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                wedges.append((i, j, rng.randint(1, max_w)))
    d = floyd(n, wedges)
    triples = [(i, j, int(d[i][j])) for i in range(n) for j in range(i + 1, n)]
    return build_space(range(n), triples, id=id or f"R{n}")


@pytest.fixture
def rng():
    return random.Random(20240611)
