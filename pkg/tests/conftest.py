from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from atrp import QidGroup, load_dataset, partition_by_qid

DATA = Path(__file__).resolve().parent.parent / "data"
ROLES = {"public": ["gender"], "sensitive": ["income"]}

settings.register_profile("default", max_examples=120, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def toy6():
    return load_dataset(DATA / "toy6.csv", ROLES)


@pytest.fixture(scope="session")
def income_audit():
    return load_dataset(DATA / "income_audit.csv", ROLES)


@pytest.fixture(scope="session")
def toy6_groups(toy6):
    female, male = partition_by_qid(toy6)
    return female, male


def random_group(rng, m_lo=1, m_hi=6):
    m = int(rng.integers(m_lo, m_hi + 1))
    if rng.random() < 0.3:
        p = rng.integers(1, 20, m).astype(float)
    else:
        p = rng.random(m) + 0.01
    p /= p.sum()
    d = rng.random(m)
    if rng.random() < 0.5:
        d = rng.choice([0.0, 0.5, 1.0], m)
    return QidGroup.from_arrays(p, d)


DELTAS = (0.0, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 1.0)


@st.composite
def groups(draw, min_size=1, max_size=6):
    m = draw(st.integers(min_size, max_size))
    w = draw(st.lists(st.floats(0.01, 1.0), min_size=m, max_size=m))
    d = draw(st.lists(st.one_of(st.sampled_from([0.0, 0.5, 1.0]), st.floats(0.0, 1.0)),
                      min_size=m, max_size=m))
    p = np.array(w) / sum(w)
    return QidGroup.from_arrays(p, d)


ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    def rec(num, ok, detail):
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return rec


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
