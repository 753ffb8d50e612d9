"""Compiled and pure-Python inner loops must agree."""

import numpy as np
import pytest

from foops import kernels
from foops.oracles import OracleKind, OracleState
from foops.problems import FeasibleSet, make_example1, make_fig2_problem, make_quadratic_pair, make_well_problem

needs_ext = pytest.mark.skipif("cython" not in kernels.AVAILABLE, reason="extension not built")

ORACLES = [OracleKind.pgd(), OracleKind.momentum(0.7), OracleKind.nesterov(0.7), OracleKind.adam()]


def _problems():
    ex, _ = make_example1(5, normalized=True)
    boxed = make_well_problem(ex.well, "boxed", FeasibleSet.box(-0.2 * np.ones(5), 0.3 * np.ones(5)))
    return [ex, make_fig2_problem(), make_quadratic_pair(), boxed]


def _run(problem, kind, tol):
    rng = np.random.default_rng(7)
    x = rng.uniform(-0.4, 0.4, problem.dim)
    state = OracleState.fresh(problem.dim)
    y, it, res = kernels.inner_loop(problem, x, x + 0.05, 1.0, 0.05, 0.02, 300, tol, kind, state)
    return y, it, res, state


@needs_ext
@pytest.mark.parametrize("kind", ORACLES, ids=lambda k: k.variant)
@pytest.mark.parametrize("idx", range(4), ids=["example1", "fig2", "quadratic", "boxed"])
@pytest.mark.parametrize("tol", [0.0, 1e-6])
def test_backends_agree(kind, idx, tol):
    problem = _problems()[idx]
    with kernels.use_backend("python"):
        yp, itp, rp, sp = _run(problem, kind, tol)
    with kernels.use_backend("cython"):
        yc, itc, rc, sc = _run(problem, kind, tol)
    assert itp == itc
    np.testing.assert_allclose(yc, yp, rtol=1e-12, atol=1e-13)
    assert rc == pytest.approx(rp, rel=1e-9, abs=1e-13)
    assert sp.count == sc.count
    np.testing.assert_allclose(sc.first, sp.first, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(sc.second, sp.second, rtol=1e-12, atol=1e-13)


def test_backend_switch():
    before = kernels.backend()
    with kernels.use_backend("python"):
        assert kernels.backend() == "python"
    assert kernels.backend() == before
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_lse_softmax_stable():
    lse, pi = kernels.lse_softmax(np.array([1000.0, 1000.0]))
    assert lse == pytest.approx(1000.0 + np.log(2.0))
    np.testing.assert_allclose(pi, [0.5, 0.5])
    lse, pi = kernels.lse_softmax(np.array([-1e4, 0.0]))
    assert pi[0] == 0.0 and pi[1] == 1.0


def test_python_path_for_generic_problem():
    base = make_quadratic_pair()
    from dataclasses import replace

    generic = replace(base, well=None)
    with kernels.use_backend("python"):
        a = _run(base, OracleKind.pgd(), 0.0)[0]
    b = _run(generic, OracleKind.pgd(), 0.0)[0]
    np.testing.assert_allclose(a, b, rtol=1e-13)
