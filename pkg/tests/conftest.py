import warnings

import pytest
from hypothesis import settings

from infoclock.model import CARA, CRRA, Log, MarketParams

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def params():
    """Reference market: t0 = 4, T = 2, sigma = 0.2, r = 0.02, mu0 = 0.08, x0 = 1000."""
    return MarketParams.from_t0(4.0)


@pytest.fixture(params=["cara", "crra2", "log"])
def utility(request):
    return {"cara": CARA(0.001), "crra2": CRRA(2.0), "log": Log()}[request.param]


@pytest.fixture
def no_quad_warnings():
    from infoclock.numerics import QuadratureWarning

    with warnings.catch_warnings():
        warnings.simplefilter("error", QuadratureWarning)
        yield
