import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from maxplus_lln import TropicalMatrix, TropicalVector  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", deadline=None, print_blob=True)
settings.load_profile("default")


@pytest.fixture
def fixtures_dir():
    return FIXTURES


# integer entries in [-5, 5] or ⊥; integer arithmetic keeps every comparison exact
entries = st.one_of(st.integers(-5, 5).map(float), st.just(-math.inf))
finite_entries = st.integers(-5, 5).map(float)


@st.composite
def matrices(draw, d=None, elements=entries, max_dim=3):
    d = d or draw(st.integers(1, max_dim))
    rows = draw(st.lists(st.lists(elements, min_size=d, max_size=d), min_size=d, max_size=d))
    return TropicalMatrix(rows)


@st.composite
def vectors(draw, d, elements=finite_entries):
    return TropicalVector(draw(st.lists(elements, min_size=d, max_size=d)))


def random_matrix(rng: np.random.Generator, d: int, p_bottom: float = 0.3, lo: int = -5, hi: int = 5):
    vals = rng.integers(lo, hi + 1, size=(d, d)).astype(float)
    vals[rng.random((d, d)) < p_bottom] = -math.inf
    return TropicalMatrix(vals)


ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        num = int(report.nodeid.split("test_criterion_")[1].split("_")[0])
        ACCEPTANCE[num] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        status = "PASS" if ACCEPTANCE[num] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {status}")
