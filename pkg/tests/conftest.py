import itertools

import numpy as np
import pytest

from paritybench import LogicalProblem, generate_instance


def all_spin_states(n):
    """Every +/-1 vector of length n, as an (2**n, n) int8 array."""
    return np.array(list(itertools.product((1, -1), repeat=n)), dtype=np.int8)


def uniform_problem(n, J):
    return LogicalProblem(n, np.full(n * (n - 1) // 2, float(J)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def inst8():
    return generate_instance(8, 0.25, 11)


def _flip(z, m):
    z = z.copy()
    z[m] = -z[m]
    return z


def exact_stationary(model, beta):
    """Stationary law of the rejection-free chain from its transition matrix."""
    size = model.size
    states = [np.array(s, dtype=np.int8) for s in itertools.product((1, -1), repeat=size)]
    index = {tuple(s): a for a, s in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for a, z in enumerate(states):
        w = np.array([min(1.0, np.exp(-beta * (model.energy(_flip(z, m)) - model.energy(z))))
                      for m in range(size)])
        for m in range(size):
            P[a, index[tuple(_flip(z, m))]] += w[m] / w.sum()
    A = np.vstack([P.T - np.eye(len(states)), np.ones(len(states))])
    b = np.zeros(len(states) + 1)
    b[-1] = 1
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    return pi, index


_ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record one acceptance line; it is echoed now and again in the terminal summary."""

    def record(number, title, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} | {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
