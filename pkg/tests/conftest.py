import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from perseusfilter import PomdpModel, kernels  # noqa: E402
from perseusfilter.benchmarks import build_tiger, load_hallway2  # noqa: E402

BACKENDS = ["python"] + (["cython"] if kernels.compiled_backend is not None else [])


@pytest.fixture(scope="session")
def tiger():
    return build_tiger()


@pytest.fixture(scope="session")
def hallway2():
    return load_hallway2()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def identity_model(num_states=3, num_obs=1, num_actions=1, reward=None, discount=0.9, terminal=()):
    T = np.broadcast_to(np.eye(num_states), (num_actions, num_states, num_states)).copy()
    O = np.zeros((num_actions, num_states, num_obs))
    O[:, :, 0] = 1.0
    R = np.zeros((num_actions, num_states, num_states)) if reward is None else reward
    return PomdpModel(T, O, R, discount, frozenset(terminal))


ACCEPTANCE_LINES = []


def report_criterion(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
