import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sglscreen import GroupPartition, ProblemData

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_problem(n, p, n_groups, seed, scattered=True, noise=0.1):
    """Gaussian design with a sparse truth; groups scattered or contiguous."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    labels = np.arange(p) % n_groups
    if scattered:
        labels = labels[rng.permutation(p)]
    else:
        labels = np.sort(labels)
    beta = np.zeros(p)
    k = max(1, p // 10)
    beta[rng.choice(p, k, replace=False)] = rng.standard_normal(k)
    y = x @ beta + noise * rng.standard_normal(n)
    return ProblemData(x, y, GroupPartition(labels, n_groups))


@pytest.fixture
def small_problem():
    return random_problem(30, 60, 10, seed=7)


_VERDICTS = []


def record_verdict(label, ok, detail=""):
    line = f"{label}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
    _VERDICTS.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
