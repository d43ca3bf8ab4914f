"""Regression feasible region: vertices, frontier, Lagrangian, spectrum."""

import math

import numpy as np
import pytest

from conftest import random_regression_plane
from infoplane.metrics import PlanePoint
from infoplane.regression import (
    FrontierCurve,
    RegressionPlane,
    certify_ls,
    classify_point_ls,
    cost_bounds_ls,
    eigenvalues_r,
    frontier,
    frontier_from_dual,
    lagrangian_bound,
    vertex_ea_ls,
    vertex_ey_ls,
)

# Law School back-solve: Var(A)=0.248, E_A*=0.007 pin rho^2; E_Y*=0.040 pins Var(Y)
LAW_RHO_SQ = 0.007 / 0.248
LAW_VAR_Y = 0.040 / (1.0 - LAW_RHO_SQ)
LAW_PLANE = RegressionPlane(
    var_y=LAW_VAR_Y, var_a=0.248, cov_ya=math.sqrt(LAW_RHO_SQ * LAW_VAR_Y * 0.248)
)


class TestVertices:
    def test_uncorrelated_keeps_all_variance(self):
        plane = RegressionPlane(var_y=2.0, var_a=3.0, cov_ya=0.0)
        assert vertex_ey_ls(plane) == 2.0
        assert vertex_ea_ls(plane) == 0.0

    def test_perfect_correlation_destroys_utility(self):
        plane = RegressionPlane(var_y=2.0, var_a=3.0, cov_ya=math.sqrt(6.0))
        assert vertex_ey_ls(plane) == pytest.approx(0.0, abs=1e-12)
        assert vertex_ea_ls(plane) == pytest.approx(3.0, abs=1e-12)

    def test_law_school_self_consistency(self):
        assert LAW_PLANE.rho_sq == pytest.approx(0.028226, abs=1e-6)
        assert LAW_PLANE.var_y == pytest.approx(0.041162, abs=1e-6)
        assert vertex_ea_ls(LAW_PLANE) == pytest.approx(0.007, abs=1e-6)
        assert vertex_ey_ls(LAW_PLANE) == pytest.approx(0.040, abs=1e-3)

    def test_cauchy_schwarz_enforced(self):
        with pytest.raises(ValueError, match="Cauchy-Schwarz"):
            RegressionPlane(var_y=1.0, var_a=1.0, cov_ya=1.1)

    def test_zero_variance_degenerates_rho(self):
        plane = RegressionPlane(var_y=0.0, var_a=1.0, cov_ya=0.0)
        assert plane.rho_sq == 0.0
        assert vertex_ey_ls(plane) == 0.0


class TestFrontier:
    def test_endpoints_exact_on_random_planes(self, rng):
        for _ in range(1000):
            plane = random_regression_plane(rng)
            assert frontier(plane, 0.0) == vertex_ey_ls(plane)
            assert frontier(plane, plane.rho_sq) == plane.var_y

    def test_concavity(self, rng):
        for _ in range(200):
            plane = random_regression_plane(rng)
            if plane.rho_sq <= 0:
                continue
            a1, a2 = np.sort(rng.uniform(0.0, plane.rho_sq, size=2))
            mid = frontier(plane, (a1 + a2) / 2)
            assert mid >= (frontier(plane, a1) + frontier(plane, a2)) / 2 - 1e-10

    def test_monotone_nondecreasing(self, rng):
        for _ in range(200):
            plane = random_regression_plane(rng)
            alphas = np.linspace(0.0, plane.rho_sq, 64)
            vals = [frontier(plane, a) for a in alphas]
            assert np.all(np.diff(vals) >= -1e-12)

    def test_pinned_value(self):
        # independent dual evaluation agrees to 1e-13 on this point
        plane = RegressionPlane(var_y=1.0, var_a=1.0, cov_ya=0.5)
        assert frontier(plane, 0.125) == pytest.approx(0.9739109809, abs=1e-9)

    def test_beyond_rho_sq_warns_and_returns_var_y(self):
        plane = RegressionPlane(var_y=2.0, var_a=1.0, cov_ya=0.5)
        with pytest.warns(RuntimeWarning, match="no tradeoff"):
            assert frontier(plane, 0.9) == 2.0

    def test_negative_alpha_rejected(self):
        with pytest.raises(ValueError):
            frontier(LAW_PLANE, -0.01)

    def test_curve_sampling(self):
        curve = FrontierCurve(LAW_PLANE).sample(33)
        assert curve[0]["utility"] == pytest.approx(vertex_ey_ls(LAW_PLANE))
        assert curve[-1]["utility"] == pytest.approx(LAW_PLANE.var_y)
        assert curve[-1]["leakage"] == pytest.approx(vertex_ea_ls(LAW_PLANE))


class TestDualAgreement:
    def test_frontier_matches_dual_on_random_planes(self, rng):
        for _ in range(100):
            plane = random_regression_plane(rng)
            if plane.rho_sq <= 1e-6:
                continue
            for frac in rng.uniform(1e-3, 1.0, size=10):
                alpha = float(frac * plane.rho_sq)
                direct = frontier(plane, alpha)
                sol = frontier_from_dual(plane, alpha * plane.var_a)
                assert sol.value == pytest.approx(direct, rel=1e-6)
                assert sol.closed_form == pytest.approx(direct, rel=1e-9)

    def test_no_tradeoff_budget(self):
        plane = RegressionPlane(var_y=3.0, var_a=2.0, cov_ya=1.0)
        sol = frontier_from_dual(plane, c=plane.rho_sq * plane.var_a * 1.5)
        assert sol.value == pytest.approx(3.0, rel=1e-9)
        assert sol.closed_form == 3.0

    def test_zero_budget_endpoint(self):
        plane = RegressionPlane(var_y=3.0, var_a=2.0, cov_ya=1.0)
        sol = frontier_from_dual(plane, c=0.0)
        assert sol.closed_form == pytest.approx(vertex_ey_ls(plane), rel=1e-12)
        # grid-only supremum sits at the top of the lambda grid; looser match
        assert sol.value == pytest.approx(vertex_ey_ls(plane), rel=1e-4)


class TestLagrangian:
    def test_lambda_zero(self):
        plane = RegressionPlane(var_y=1.7, var_a=0.4, cov_ya=0.3)
        assert lagrangian_bound(plane, 0.0) == pytest.approx(-1.7, abs=1e-12)

    def test_pinned_value(self):
        plane = RegressionPlane(var_y=1.0, var_a=1.0, cov_ya=0.5)
        assert lagrangian_bound(plane, 1.0) == pytest.approx(-math.sqrt(3) / 2, abs=1e-12)

    def test_perfect_alignment_no_slack(self):
        plane = RegressionPlane(var_y=1.0, var_a=1.0, cov_ya=1.0)
        assert lagrangian_bound(plane, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_nonpositive_everywhere(self, rng):
        for _ in range(1000):
            plane = random_regression_plane(rng)
            lam = float(rng.uniform(0.0, 1.0) ** 2 * 1000.0)
            assert lagrangian_bound(plane, lam) <= 0.0


class TestEigenvalues:
    def test_orthogonal_case(self):
        assert eigenvalues_r(1.0, 1.0, 0.0, 2.0) == pytest.approx((2.0, -1.0), abs=1e-12)

    def test_pinned_symmetric_pair(self):
        s1, sd = eigenvalues_r(1.0, 1.0, 0.5, 1.0)
        assert s1 == pytest.approx(math.sqrt(3) / 2, abs=1e-12)
        assert sd == pytest.approx(-math.sqrt(3) / 2, abs=1e-12)

    def test_lambda_zero_rank_one(self):
        s1, sd = eigenvalues_r(2.5, 1.0, 0.7, 0.0)
        assert s1 == 0.0
        assert sd == pytest.approx(-2.5, abs=1e-12)

    @staticmethod
    def _realized_matrix(var_y, var_a, cov, lam):
        # explicit 2-D realization with identity feature covariance
        a = np.array([math.sqrt(var_a), 0.0])
        y = np.array([cov / math.sqrt(var_a), math.sqrt(max(var_y - cov**2 / var_a, 0.0))])
        return lam * np.outer(a, a) - np.outer(y, y)

    def test_matches_generic_eigensolver(self, rng):
        for _ in range(1000):
            plane = random_regression_plane(rng)
            lam = float(rng.uniform(1e-3, 1e3) if rng.random() < 0.5 else rng.uniform(0, 5))
            s1, sd = eigenvalues_r(plane.var_y, plane.var_a, plane.cov_ya, lam)
            r = self._realized_matrix(plane.var_y, plane.var_a, plane.cov_ya, lam)
            ref = np.linalg.eigvalsh(r)
            scale = max(1.0, abs(ref[0]), abs(ref[1]))
            assert sd == pytest.approx(ref[0], abs=1e-10 * scale)
            assert s1 == pytest.approx(ref[1], abs=1e-10 * scale)

    def test_product_and_sum_identities(self, rng):
        for _ in range(1000):
            plane = random_regression_plane(rng)
            lam = float(rng.uniform(1e-3, 1e3))
            s1, sd = eigenvalues_r(plane.var_y, plane.var_a, plane.cov_ya, lam)
            prod = lam * plane.cov_ya**2 - lam * plane.var_a * plane.var_y
            summ = lam * plane.var_a - plane.var_y
            assert s1 * sd == pytest.approx(prod, abs=1e-10 * max(1.0, abs(prod)))
            assert s1 + sd == pytest.approx(summ, abs=1e-10 * max(1.0, abs(summ)))


class TestNoisyFlag:
    def test_outputs_bit_identical(self, rng):
        for _ in range(50):
            clean = random_regression_plane(rng)
            noisy = RegressionPlane(
                var_y=clean.var_y, var_a=clean.var_a, cov_ya=clean.cov_ya, noisy=True
            )
            alpha = 0.5 * clean.rho_sq
            lam = 0.7
            assert vertex_ey_ls(clean) == vertex_ey_ls(noisy)
            assert vertex_ea_ls(clean) == vertex_ea_ls(noisy)
            assert frontier(clean, alpha) == frontier(noisy, alpha)
            assert lagrangian_bound(clean, lam) == lagrangian_bound(noisy, lam)
            assert cost_bounds_ls(clean) == cost_bounds_ls(noisy)


class TestCostBounds:
    def test_uncorrelated(self):
        plane = RegressionPlane(var_y=1.0, var_a=2.0, cov_ya=0.0)
        out = cost_bounds_ls(plane)
        assert out["mse_floor_under_invariance"] == 0.0
        assert out["attribute_mse_ceiling_under_sufficiency"] == 2.0

    def test_perfectly_correlated(self):
        plane = RegressionPlane(var_y=1.0, var_a=2.0, cov_ya=math.sqrt(2.0))
        out = cost_bounds_ls(plane)
        assert out["mse_floor_under_invariance"] == pytest.approx(1.0, abs=1e-12)
        assert out["attribute_mse_ceiling_under_sufficiency"] == pytest.approx(0.0, abs=1e-12)

    def test_law_school_values(self):
        out = cost_bounds_ls(LAW_PLANE)
        assert out["mse_floor_under_invariance"] == pytest.approx(0.001162, abs=1e-5)
        assert out["attribute_mse_ceiling_under_sufficiency"] == pytest.approx(0.241, abs=1e-6)


class TestClassifyPoint:
    def test_invariance_vertex_on_frontier(self):
        p = PlanePoint(utility=vertex_ey_ls(LAW_PLANE), leakage=0.0, kind="regression")
        out = classify_point_ls(LAW_PLANE, p)
        assert out.status == "frontier-or-beyond"
        assert out.frontier_distance == 0.0

    def test_origin_dominated(self):
        out = classify_point_ls(LAW_PLANE, PlanePoint(0.0, 0.0, "regression"))
        assert out.status == "interior-suboptimal"
        assert out.frontier_distance > 0.0

    def test_reported_mlp_point_is_interior(self):
        out = classify_point_ls(LAW_PLANE, PlanePoint(0.022, 0.012, "regression"))
        assert out.status == "interior-suboptimal"
        assert out.frontier_distance > 0.0
        assert out.alpha_of_point == pytest.approx(0.012 / 0.248, rel=1e-12)

    def test_outside_rectangle(self):
        out = classify_point_ls(LAW_PLANE, PlanePoint(1.0, 0.0, "regression"))
        assert out.status == "outside-known-bounds"

    def test_wrong_kind_rejected(self):
        with pytest.raises(ValueError):
            classify_point_ls(LAW_PLANE, PlanePoint(0.0, 0.0, "classification"))


class TestCertifyLS:
    def test_chord_statistic_is_one_at_vertices(self):
        cert = certify_ls(LAW_PLANE, vertex_ey_ls(LAW_PLANE), 0.0, epsilon=0.05, n=100)
        assert cert.statistic == pytest.approx(1.0, abs=1e-9)
        assert cert.verdict == "not-certified"
        cert = certify_ls(LAW_PLANE, LAW_PLANE.var_y, vertex_ea_ls(LAW_PLANE), epsilon=0.05, n=100)
        assert cert.statistic == pytest.approx(1.0, abs=1e-9)

    def test_dominated_point_certified(self):
        cert = certify_ls(LAW_PLANE, 0.0, 0.0, epsilon=0.05, n=100)
        assert cert.verdict == "suboptimal"

    def test_degenerate_plane_not_certified(self):
        plane = RegressionPlane(var_y=1.0, var_a=1.0, cov_ya=0.0)
        cert = certify_ls(plane, 0.5, 0.0, epsilon=0.05, n=100)
        assert cert.verdict == "not-certified"
