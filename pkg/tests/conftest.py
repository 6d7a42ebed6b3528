import pytest

from nhdimer import default_params, symmetric_params


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def sym_params():
    return symmetric_params()
