import numpy as np
import pytest

from qmac.fixtures import identity_unitary, secure_example_unitary, x_block_unitary
from qmac.protocol import TaggingUnitary


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def u_identity():
    return TaggingUnitary(identity_unitary())


@pytest.fixture
def u_xblock():
    return TaggingUnitary(x_block_unitary())


@pytest.fixture
def u_secure():
    return TaggingUnitary(secure_example_unitary())
