import numpy as np
import pytest

from tanakasim.paths import RngStream


@pytest.fixture
def rng():
    return RngStream(12345, 0, (7,)).generator()


def stream_rng(seed: int, index: int = 0) -> np.random.Generator:
    return RngStream(seed, index, (9,)).generator()
