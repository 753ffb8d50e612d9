import numpy as np
import pytest

from foops.problems import (
    make_example1,
    make_example2,
    make_fig2_problem,
    make_quadratic_pair,
)


def bundled_problems():
    return {
        "example1_q1": make_example1(1)[0],
        "example1_q3": make_example1(3)[0],
        "example1_q20_unit": make_example1(20, normalized=True)[0],
        "fig2": make_fig2_problem(),
        "quadratic_pair": make_quadratic_pair(),
        "example2": make_example2(),
    }


@pytest.fixture(params=sorted(bundled_problems()))
def any_problem(request):
    return bundled_problems()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
