import pytest
from toyrecords import make_toy_records


@pytest.fixture
def toy_records():
    return make_toy_records(4, seed=3)
