import math

import numpy as np
import pytest

from tdoakit import (
    AnchorSet,
    DegenerateGeometryError,
    GaussNewtonConfig,
    NearAnchorError,
    Point,
    gauss_newton_step,
    jacobian,
    locate_gauss_newton,
    residual,
    true_distance_differences,
)
from tdoakit.gauss_newton import default_initial_guess
from tdoakit.geometry import TdoaVector, anchor_distances, pair_indices

from conftest import random_layout_cases

SITE_TRIANGULAR = AnchorSet(
    [(20.961, 68.941), (20.911, 63.929), (22.652, 66.441), (28.324, 68.961)]
)


def _pair_diffs(p, anchors):
    d = anchor_distances(np.array([p.x, p.y]), anchors.xy)
    pairs = pair_indices(anchors.n)
    return d[pairs[:, 0]] - d[pairs[:, 1]]


class TestResidual:
    def test_zero_at_truth(self, square_center_anchors):
        target = Point(0.2, 0.1)
        dhat = true_distance_differences(target, square_center_anchors)
        r = residual(target, square_center_anchors, dhat)
        assert np.abs(r).max() < 1e-12

    def test_collinear_arithmetic(self):
        anchors = AnchorSet([(0, 0), (4, 0)])
        dhat = TdoaVector(np.array([0.0]), 2)
        r = residual(Point(1, 0), anchors, dhat)
        assert r.tolist() == [-2.0]  # (1 - 3) - 0

    def test_matches_direct_evaluation(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            anchors = AnchorSet(rng.uniform(-5, 5, (5, 2)))
            p = Point(*rng.uniform(-5, 5, 2))
            dhat = TdoaVector(rng.standard_normal(10), 5)
            want = _pair_diffs(p, anchors) - dhat.values
            got = residual(p, anchors, dhat)
            assert np.allclose(got, want, atol=0)

    def test_near_anchor_guard(self, square_center_anchors):
        dhat = true_distance_differences(Point(0.2, 0.1), square_center_anchors)
        with pytest.raises(NearAnchorError):
            residual(Point(1, 0), square_center_anchors, dhat)


class TestJacobian:
    def test_opposing_unit_vectors(self):
        anchors = AnchorSet([(1, 0), (-1, 0)])
        j = jacobian(Point(0, 0), anchors)
        assert j.shape == (1, 2)
        assert np.allclose(j, [[-2.0, 0.0]], atol=0)

    def test_finite_difference_oracle(self):
        step = 1e-6
        for anchors, p in random_layout_cases(100, seed=13):
            j = jacobian(p, anchors)
            fd = np.empty_like(j)
            for col, (dx, dy) in enumerate(((step, 0.0), (0.0, step))):
                plus = _pair_diffs(Point(p.x + dx, p.y + dy), anchors)
                minus = _pair_diffs(Point(p.x - dx, p.y - dy), anchors)
                fd[:, col] = (plus - minus) / (2 * step)
            scale = np.abs(j).max()
            assert np.abs(j - fd).max() <= 1e-5 * max(scale, 1.0)

    def test_sigma_min_equals_direction_dispersion(self):
        from tdoakit import nonlinear_dop

        for anchors, p in random_layout_cases(50, seed=29):
            smin = np.linalg.svd(jacobian(p, anchors), compute_uv=False)[-1]
            assert abs(smin - nonlinear_dop(anchors, p)) <= 1e-12


class TestStep:
    def test_zero_at_truth(self, square_center_anchors):
        target = Point(0.2, 0.1)
        dhat = true_distance_differences(target, square_center_anchors)
        delta, diag = gauss_newton_step(target, square_center_anchors, dhat)
        assert np.linalg.norm(delta) < 1e-12
        assert diag.residual_norm < 1e-12

    def test_collinear_geometry_degenerate(self):
        anchors = AnchorSet([(0, 0), (1, 0), (2, 0), (3, 0)])
        dhat = TdoaVector(np.zeros(6), 4)
        with pytest.raises(DegenerateGeometryError) as e:
            gauss_newton_step(Point(-1.0, 0.0), anchors, dhat)
        assert e.value.sigma_min < 1e-10

    def test_step_decreases_residual(self, square_center_anchors):
        target = Point(0.2, 0.1)
        dhat = true_distance_differences(target, square_center_anchors)
        p0 = Point(0.5, -0.3)
        r0 = np.linalg.norm(residual(p0, square_center_anchors, dhat))
        delta, _ = gauss_newton_step(p0, square_center_anchors, dhat)
        p1 = Point(p0.x + delta[0], p0.y + delta[1])
        r1 = np.linalg.norm(residual(p1, square_center_anchors, dhat))
        assert r1 < r0

    def test_descent_direction(self):
        # the step has negative inner product with the gradient J^T r
        for anchors, target in random_layout_cases(30, seed=41):
            dhat = true_distance_differences(target, anchors)
            p = Point(target.x + 0.2, target.y - 0.15)
            try:
                r = residual(p, anchors, dhat)
            except NearAnchorError:
                continue
            if np.linalg.norm(r) < 1e-12:
                continue
            j = jacobian(p, anchors)
            delta, _ = gauss_newton_step(p, anchors, dhat)
            assert float(delta @ (j.T @ r)) < 0


class TestLocate:
    def test_init_at_truth_converges_immediately(self, square_center_anchors):
        target = Point(0.2, 0.1)
        dhat = true_distance_differences(target, square_center_anchors)
        report = locate_gauss_newton(
            square_center_anchors, dhat, GaussNewtonConfig(initial_guess=target)
        )
        assert report.converged
        assert report.iterations <= 1
        assert abs(report.estimate.x - target.x) < 1e-12

    def test_square_center_from_offset_init(self, square_center_anchors):
        target = Point(0.2, 0.1)
        dhat = true_distance_differences(target, square_center_anchors)
        cfg = GaussNewtonConfig(initial_guess=Point(0.5, -0.3), tolerance=1e-9)
        report = locate_gauss_newton(square_center_anchors, dhat, cfg)
        assert report.converged
        assert report.iterations <= 20
        err = math.hypot(report.estimate.x - target.x, report.estimate.y - target.y)
        assert err < 1e-8

    def test_site_recovery_from_default_init(self):
        target = Point(22.650, 66.667)
        dhat = true_distance_differences(target, SITE_TRIANGULAR)
        report = locate_gauss_newton(SITE_TRIANGULAR, dhat)
        err = math.hypot(report.estimate.x - target.x, report.estimate.y - target.y)
        assert report.converged and err < 1e-6

    def test_noise_free_recovery_random_layouts(self):
        for anchors, target in random_layout_cases(100, seed=3):
            dhat = true_distance_differences(target, anchors)
            report = locate_gauss_newton(
                anchors, dhat, GaussNewtonConfig(max_iterations=50)
            )
            err = math.hypot(report.estimate.x - target.x, report.estimate.y - target.y)
            assert report.converged and err < 1e-6

    def test_translation_invariance(self):
        shift = (7.5, -11.25)
        for anchors, target in random_layout_cases(20, seed=47):
            dhat = true_distance_differences(target, anchors)
            init = Point(target.x + 0.1, target.y + 0.1)
            base = locate_gauss_newton(
                anchors, dhat, GaussNewtonConfig(initial_guess=init)
            )
            moved = locate_gauss_newton(
                anchors.translated(*shift),
                dhat,
                GaussNewtonConfig(initial_guess=init.translated(*shift)),
            )
            assert abs(moved.estimate.x - base.estimate.x - shift[0]) < 1e-9
            assert abs(moved.estimate.y - base.estimate.y - shift[1]) < 1e-9

    def test_non_convergence_reported_not_raised(self, square_center_anchors):
        dhat = true_distance_differences(Point(0.2, 0.1), square_center_anchors)
        cfg = GaussNewtonConfig(initial_guess=Point(0.5, -0.3), max_iterations=1)
        report = locate_gauss_newton(square_center_anchors, dhat, cfg)
        assert not report.converged
        assert report.iterations == 1
        assert report.final_step_norm > cfg.tolerance

    def test_converged_implies_small_step(self):
        for anchors, target in random_layout_cases(20, seed=53):
            dhat = true_distance_differences(target, anchors)
            report = locate_gauss_newton(anchors, dhat)
            if report.converged:
                assert report.final_step_norm <= 1e-9


class TestDefaultInit:
    def test_plain_centroid_when_clear(self, corner_anchors):
        g = default_initial_guess(corner_anchors)
        assert g.x == 0.0 and g.y == 0.0

    def test_nudges_off_central_anchor(self, square_center_anchors):
        g = default_initial_guess(square_center_anchors)
        d = np.hypot(*(g.as_array()[None, :] - square_center_anchors.xy).T)
        assert d.min() > 1e-9

    def test_config_validation(self):
        with pytest.raises(ValueError):
            GaussNewtonConfig(tolerance=0.0)
        with pytest.raises(ValueError):
            GaussNewtonConfig(max_iterations=0)
        with pytest.raises(ValueError):
            GaussNewtonConfig(min_anchor_distance=-1.0)
