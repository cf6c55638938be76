import logging

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from bernprune.poly import Box, Polynomial

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _quiet_policy_warning(caplog):
    caplog.set_level(logging.ERROR, logger="bernprune.solver")


@st.composite
def polynomials(draw, n=None, max_n=3, max_degree=4, max_terms=6, scale=1.0):
    n = draw(st.integers(1, max_n)) if n is None else n
    k = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(k):
        idx = tuple(draw(st.lists(st.integers(0, max_degree), min_size=n, max_size=n)))
        if sum(idx) > max_degree:
            continue
        terms[idx] = draw(st.floats(-scale, scale, allow_nan=False, allow_infinity=False))
    return Polynomial(n, terms)


@st.composite
def boxes(draw, n, lo=-2.0, hi=2.0, min_width=0.05):
    ivs = []
    for _ in range(n):
        a = draw(st.floats(lo, hi - min_width, allow_nan=False))
        w = draw(st.floats(min_width, hi - a, allow_nan=False))
        ivs.append((a, a + w))
    return Box.from_intervals(ivs)


@st.composite
def poly_and_box(draw, max_n=3, max_degree=4, max_terms=6):
    p = draw(polynomials(max_n=max_n, max_degree=max_degree, max_terms=max_terms))
    return p, draw(boxes(p.n))


def random_poly(rng, n, degree, terms=6, scale=1.0):
    from bernprune.oracle import random_polynomial
    return random_polynomial(rng, n, degree, terms, scale)


def sample_box(rng, box, count):
    return rng.uniform(box.lo, box.hi, size=(count, box.n))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report(criterion, ok: bool, detail: str) -> bool:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
