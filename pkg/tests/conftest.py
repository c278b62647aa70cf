import numpy as np
import pytest

from ugcsat.planes import natural_image


@pytest.fixture(scope="session")
def pristine():
    """256x256 8-bit-valued natural-statistics test plane."""
    return np.rint(natural_image((256, 256), seed=0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
