import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from kbqd.models.samples import GroupedSamples


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture
def make_groups(rng):
    """Factory for small random grouped samples: make_groups(sizes, d, shift=0.0)."""
    def _make(sizes, d=2, shift=0.0):
        samples = [rng.standard_normal((n, d)) for n in sizes]
        samples[-1] = samples[-1] + shift
        return GroupedSamples(tuple(samples))

    return _make


@pytest.fixture
def degenerate_groups():
    point = np.array([[0.3, -1.2]])
    return GroupedSamples((np.repeat(point, 6, axis=0), np.repeat(point, 5, axis=0)))
