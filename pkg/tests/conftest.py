import pytest

from uslads import generate_dendrite


@pytest.fixture(scope="session")
def dendrite128():
    return generate_dendrite(128, 128, seed=7)


@pytest.fixture(scope="session")
def dendrite64():
    return generate_dendrite(64, 64, seed=3)
