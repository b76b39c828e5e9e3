import json

import numpy as np
import pytest

from src.measures import AtomicMeasure
from src.sequence_library import factorial, hilbert


@pytest.fixture
def hilbert_seq():
    return hilbert(17)


@pytest.fixture
def factorial_seq():
    return factorial(5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def write_json(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)
    return write


def spread_measure(rng, atoms, low=-2.5, high=2.5, jitter=0.15):
    """Random atomic measure with nodes near an even grid (well separated)."""
    grid = np.linspace(low, high, atoms) if atoms > 1 else np.array([(low + high) / 2])
    nodes = grid + rng.uniform(-jitter, jitter, size=atoms)
    weights = rng.uniform(0.5, 1.5, size=atoms)
    return AtomicMeasure(tuple(nodes), tuple(weights))
