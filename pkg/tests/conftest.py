import pytest

from tracklim.problem import validate_problem
from tracklim.ratfun import RatFun

STEP = ([1.0], [0.0, 1.0])


def make_problem(num, den, ref=STEP, envelope=None):
    return validate_problem(RatFun(num, den), RatFun(*ref), envelope)


@pytest.fixture(scope="session")
def first_order_h1():
    # (s-2)/(s-1): z=2, p=1, h=1
    return make_problem([-2, 1], [-1, 1])


@pytest.fixture(scope="session")
def first_order_h05():
    # (s-3)/(s-1): z=3, p=1, h=0.5
    return make_problem([-3, 1], [-1, 1])


@pytest.fixture(scope="session")
def unstable_pair():
    # 1/(s^2-2s+5): poles 1+-2i, relative degree 2, e(0)=1
    return make_problem([1], [5, -2, 1])
