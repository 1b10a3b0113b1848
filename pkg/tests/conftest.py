import random

import pytest

from fieldrec.polyfield import prime_field, rationals


@pytest.fixture
def Q2():
    return rationals("t1", "t2")


@pytest.fixture
def Q3v():
    return rationals("t1", "t2", "t3")


@pytest.fixture
def F2():
    return prime_field(2, "t1", "t2")


@pytest.fixture
def F3():
    return prime_field(3, "t1", "t2")


@pytest.fixture
def F5():
    return prime_field(5, "t1", "t2")


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
