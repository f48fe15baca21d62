import sys

import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")


def random_state_arrays(rng, n, min_sep=1e-2):
    """Random positions on S^3 with tangent velocities, rejecting near-singular pairs."""
    while True:
        q = rng.normal(size=(n, 4))
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        g = q @ q.T
        np.fill_diagonal(g, 0.0)
        if np.min(1 - g**2) > min_sep:
            break
    v = rng.normal(size=(n, 4))
    v -= np.sum(q * v, axis=1, keepdims=True) * q
    m = rng.uniform(0.2, 2.0, size=n)
    return m, q, v


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number][1])
