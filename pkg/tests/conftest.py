import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from aanearch.features import AttributeTable, standardize
from aanearch.graph import build_network

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def random_network(n=100, n_features=20, p=0.05, seed=0, timestep=0):
    """Erdos-Renyi graph with Poisson visit counts and standardized Gaussian attributes."""
    rng = np.random.default_rng(seed)
    ids = [f"n{i:03d}" for i in range(n)]
    attrs = standardize(AttributeTable(ids, [f"f{j}" for j in range(n_features)],
                                       rng.normal(size=(n, n_features)), timestep))
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    counts = rng.poisson(5.0, keep.sum()) + 1
    records = [(ids[i], ids[j], int(c)) for i, j, c in zip(iu[keep], ju[keep], counts)]
    return build_network(records, attrs)


@pytest.fixture
def small_network():
    return random_network(n=40, n_features=6, p=0.1, seed=3)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
