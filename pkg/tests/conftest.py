import pytest

from frd import backends


@pytest.fixture(params=backends.available())
def backend(request):
    """Run the test under every importable kernel backend."""
    previous = backends.active().NAME
    backends.set_backend(request.param)
    yield request.param
    backends.set_backend(previous)
