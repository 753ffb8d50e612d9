import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foops.errors import InvalidInputError, UnsupportedConfigurationError, UnsupportedDimensionError
from foops.merit import GridSpec, brute_u_bar
from foops.metrics import (
    FrontSample,
    eps_weak_pareto_certify,
    hypervolume_2d,
    hypervolume_mc,
    min_norm_combination,
    pareto_stationarity_residual,
    preference_violation,
)
from foops.problems import (
    FeasibleSet,
    PreferenceSpec,
    WellSpec,
    WELL_QUAD,
    make_example1,
    make_example2,
    make_fig2_problem,
    make_quadratic_pair,
    make_well_problem,
)

NADIR = np.ones(2)
points_2d = st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=12)


def hv(points, nadir=NADIR):
    return hypervolume_2d(FrontSample(np.array(points, dtype=float), nadir))


def hv_union_oracle(points, nadir, n=400):
    # midpoint-rule area of the dominated union on an n x n lattice
    g = (np.arange(n) + 0.5) / n
    Z = np.stack(np.meshgrid(g * nadir[0], g * nadir[1], indexing="ij"), -1).reshape(-1, 2)
    dom = np.zeros(len(Z), dtype=bool)
    for p in points:
        dom |= np.all(p <= Z, axis=1)
    return dom.mean() * nadir[0] * nadir[1]


class TestHypervolume2D:
    def test_worked_example(self):
        assert hv([(0.2, 0.8), (0.5, 0.4)]) == pytest.approx(0.36, abs=1e-15)

    def test_nadir_point_only(self):
        assert hv([(1.0, 1.0)]) == 0.0

    def test_duplicates(self):
        assert hv([(0.2, 0.8), (0.5, 0.4), (0.5, 0.4), (0.2, 0.8)]) == hv([(0.2, 0.8), (0.5, 0.4)])

    def test_outside_points_flagged(self):
        s = FrontSample(np.array([[0.5, 0.5], [1.2, 0.1]]), NADIR)
        np.testing.assert_array_equal(s.outside, [False, True])
        assert hypervolume_2d(s) == pytest.approx(0.25)

    def test_dimension(self):
        with pytest.raises(UnsupportedDimensionError):
            hypervolume_2d(FrontSample(np.zeros((1, 3)), np.ones(3)))

    def test_non_finite(self):
        with pytest.raises(InvalidInputError):
            FrontSample(np.array([[np.nan, 0.1]]), NADIR)

    @given(points_2d)
    @settings(max_examples=60, deadline=None)
    def test_matches_lattice_oracle(self, pts):
        pts = np.round(np.array(pts), 2)  # align with the lattice so the midpoint rule is exact
        assert hv(pts) == pytest.approx(hv_union_oracle(pts, NADIR, 200), abs=1e-9)

    @given(points_2d, st.tuples(st.floats(0, 1), st.floats(0, 1)))
    @settings(max_examples=60, deadline=None)
    def test_monotone(self, pts, extra):
        assert hv(pts + [extra]) >= hv(pts) - 1e-15

    @given(points_2d, st.floats(0, 1))
    @settings(max_examples=60, deadline=None)
    def test_dominance(self, pts, shrink):
        B = np.array(pts)
        A = B * shrink
        assert hv(A) >= hv(B) - 1e-15


class TestHypervolumeMC:
    def test_empty(self):
        assert hypervolume_mc(FrontSample(np.zeros((0, 2)), NADIR)) == (0.0, 0.0)

    def test_corner_point(self):
        s = FrontSample(np.array([[0.25, 0.5]]), NADIR)
        est, se = hypervolume_mc(s, 10_000)
        assert est == pytest.approx(0.75 * 0.5)
        assert se == 0.0

    def test_three_objectives(self):
        s = FrontSample(np.array([[0.0, 0.0, 0.5], [0.5, 0.0, 0.0]]), np.ones(3))
        est, se = hypervolume_mc(s, 200_000, seed=3)
        assert abs(est - 0.75) <= 3 * se + 1e-12

    def test_seeded(self):
        s = FrontSample(np.array([[0.2, 0.8], [0.5, 0.4]]), NADIR)
        assert hypervolume_mc(s, 5000, 7) == hypervolume_mc(s, 5000, 7)

    def test_min_samples(self):
        with pytest.raises(InvalidInputError):
            hypervolume_mc(FrontSample(np.array([[0.2, 0.8]]), NADIR), 999)

    @pytest.mark.parametrize("seed", range(5))
    def test_agrees_with_exact(self, seed):
        rng = np.random.default_rng(seed)
        s = FrontSample(rng.random((rng.integers(1, 10), 2)), NADIR)
        est, se = hypervolume_mc(s, 100_000, seed)
        assert abs(est - hypervolume_2d(s)) <= 3 * se


class TestStationarityResidual:
    def test_example1_origin(self):
        p, _ = make_example1(1)
        assert pareto_stationarity_residual(p, np.array([0.0])) <= 1e-10

    def test_example2_kkt_point(self):
        assert pareto_stationarity_residual(make_example2(), np.array([3.0, 0.0])) == pytest.approx(3.0)

    @pytest.mark.parametrize("x", [[0.3, -0.2], [3.0, 0.0], [-1.0, 2.0]])
    def test_permutation_invariant(self, x):
        base = make_example2()
        swapped = type(base)(dim=2, num_objectives=2, F=lambda z: base.F(z)[::-1],
                             jac_F=lambda z: base.jac_F(z)[::-1])
        x = np.array(x)
        assert pareto_stationarity_residual(base, x) == pytest.approx(pareto_stationarity_residual(swapped, x))

    @pytest.mark.parametrize("seed", range(5))
    def test_bounded_by_largest_gradient(self, seed):
        p, _ = make_example1(4)
        x = np.random.default_rng(seed).normal(size=4)
        r = pareto_stationarity_residual(p, x)
        assert np.isfinite(r)
        assert r <= np.linalg.norm(p.jac_F(x), axis=1).max() + 1e-12

    def test_three_objectives(self):
        p = make_well_problem(WellSpec(WELL_QUAD, np.eye(3)), "tri")
        centroid = np.full(3, 1.0 / 3.0)
        assert pareto_stationarity_residual(p, centroid) < 1e-6
        assert pareto_stationarity_residual(p, np.array([2.0, 2.0, 2.0])) > 1.0

    def test_min_norm_weights_on_simplex(self):
        lam = min_norm_combination(np.random.default_rng(0).normal(size=(4, 3)))
        assert lam.sum() == pytest.approx(1.0)
        assert np.all(lam >= 0)

    def test_box_unsupported(self):
        base = make_quadratic_pair()
        boxed = make_well_problem(base.well, "boxed", FeasibleSet.box([-1.0], [1.0]))
        with pytest.raises(UnsupportedConfigurationError):
            pareto_stationarity_residual(boxed, np.array([0.0]))


class TestCertify:
    grid = GridSpec(-3.0, 3.0, 6001)

    def test_fig2_origin(self):
        assert eps_weak_pareto_certify(make_fig2_problem(), [0.0], self.grid, 0.01 * np.log(2))

    def test_fig2_dominated(self):
        assert not eps_weak_pareto_certify(make_fig2_problem(), [2.0], self.grid, 1e-3)

    def test_vacuous(self):
        assert eps_weak_pareto_certify(make_fig2_problem(), [2.5], self.grid, 10.0)

    def test_coarse_grid_warns(self):
        coarse = GridSpec(-3.0, 3.0, 7)
        with pytest.warns(UserWarning, match="grid slack"):
            eps_weak_pareto_certify(make_fig2_problem(), [0.0], coarse, 1e-3, lipschitz=2.0)

    def test_fine_grid_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            eps_weak_pareto_certify(make_quadratic_pair(), [0.0], self.grid, 0.1, lipschitz=8.0)

    @pytest.mark.parametrize("x", [-0.4, 0.0, 0.7, 1.2, 2.0])
    def test_consistency_with_u_bar(self, x):
        p = make_quadratic_pair()
        slack = self.grid.spacing * 8.0
        u = brute_u_bar(p, [x], self.grid)
        assert eps_weak_pareto_certify(p, [x], self.grid, max(u, 0.0) + slack)


class TestPreferenceViolation:
    @pytest.mark.parametrize("ray,F,expected", [
        ([1.0, 1.0], [0.3, 0.3], 0.0),
        ([1.0, 2.0], [0.2, 0.1], 0.09),
        ([4.0, 5.0], [1 - np.exp(-1), 1 - np.exp(-1)], (1 - np.exp(-1)) ** 2),
    ])
    def test_examples(self, ray, F, expected):
        assert preference_violation(PreferenceSpec(np.array(ray)), np.array(F)) == pytest.approx(expected)
