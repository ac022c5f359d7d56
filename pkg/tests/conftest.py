import numpy as np
import pytest

from gcnlab.graph import build_graph


def random_graph(rng, n, p, num_classes=3, feature_dim=4):
    """Erdos-Renyi graph with random labels and Gaussian features."""
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    edges = np.stack([iu[keep], ju[keep]], axis=1)
    labels = rng.integers(0, num_classes, size=n)
    features = rng.standard_normal((n, feature_dim))
    return build_graph(edges, labels, features, num_classes=num_classes)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    return build_graph([(0, 1), (1, 2), (0, 2)], [0, 0, 0], np.eye(3, dtype=np.float32))


# acceptance criteria register their verdicts here; printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {cid}: {detail}")
