import pytest

from mixdih import calculus


@pytest.fixture(scope="session")
def toy():
    return calculus.build_toy()


@pytest.fixture(scope="session")
def h56():
    return calculus.build_h56()


@pytest.fixture(scope="session")
def p59(h56):
    return calculus.build_p59(h56)
