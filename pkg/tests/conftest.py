import pytest

from flydrive.defaults import (
    default_batteries,
    default_params,
    default_power_model,
    default_rotor,
)


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def rotor():
    return default_rotor()


@pytest.fixture(scope="session")
def power_model():
    return default_power_model()


@pytest.fixture()
def batteries():
    # fresh packs per test: Battery is mutable
    return default_batteries()
