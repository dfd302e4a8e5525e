import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from deraintv import corpus


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def clean_tiles():
    """Named 128x128 streak-free tiles shared across the suite."""
    return corpus.clean_corpus(128)


@pytest.fixture(scope="session")
def smooth_tiles():
    return corpus.smooth_corpus(128)
