import pathlib

import pytest

from rcptsearch.network import load_network, make_network

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def three_arc():
    return load_network(DATA / "three_arc.json")


@pytest.fixture
def triangle():
    return load_network(DATA / "triangle.json")


@pytest.fixture
def star():
    return load_network(DATA / "star.json")


@pytest.fixture
def lollipop():
    return load_network(DATA / "lollipop.json")


@pytest.fixture
def caterpillar():
    return load_network(DATA / "caterpillar.json")


@pytest.fixture
def path3():
    return make_network("O", ["O", "p", "q"], [("p1", "O", "p", 1.5), ("p2", "p", "q", 0.5)])


@pytest.fixture
def data_dir():
    return DATA
