import pytest

import trainutil


@pytest.fixture(scope="session")
def bench():
    return trainutil.benchmark()


@pytest.fixture(scope="session")
def codec():
    # first call trains (~4 min) and caches under tests/.cache
    return trainutil.trained_codec()


@pytest.fixture(scope="session")
def generator(codec):
    return trainutil.trained_generator(codec)


@pytest.fixture(scope="session")
def editor(codec):
    return trainutil.trained_editor(codec)
