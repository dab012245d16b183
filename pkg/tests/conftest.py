import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("chv", deadline=None, max_examples=60)
settings.load_profile("chv")

E1 = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0, 0.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0, 0.0, 0.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_ball(gen, n, lo=0.1, hi=1.0):
    d = gen.standard_normal((n, 5))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * gen.uniform(lo, hi, size=(n, 1))


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail):
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
