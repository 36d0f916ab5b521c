import pytest

from u21hecke.fields import build_tower


@pytest.fixture(scope="session")
def tower():
    tw = build_tower(3, 1)
    tw.default_window = 24
    return tw


@pytest.fixture(scope="session")
def tower5():
    return build_tower(5, 1)
