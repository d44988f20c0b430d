import numpy as np
import pytest
from hypothesis import strategies as st

from semipassive.graph import build_graph

ACCEPTANCE = []


def record_acceptance(number, title, passed, detail=""):
    ACCEPTANCE.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@st.composite
def digraphs(draw, min_nodes=1, max_nodes=8, max_weight=5):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    ws = draw(st.lists(st.integers(1, max_weight), min_size=len(chosen), max_size=len(chosen)))
    return build_graph(n, [(i, j, float(w)) for (i, j), w in zip(chosen, ws)])
