import json
import math

import numpy as np
import pytest

from tdoakit import (
    AnchorSet,
    DopGrid,
    GridSpec,
    Point,
    angular_dispersion,
    dop_map,
    jacobian,
    linear_dop,
    nonlinear_dop,
)

from conftest import random_layout_cases


def brute_force_dispersion(points):
    """Independent oracle: build the pairwise difference matrix explicitly
    and take the smallest singular value from a direct SVD."""
    pts = np.asarray(points, dtype=float)
    u = pts / np.linalg.norm(pts, axis=1)[:, None]
    rows = []
    for i in range(len(u)):
        for j in range(i + 1, len(u)):
            rows.append(u[i] - u[j])
    return float(np.linalg.svd(np.array(rows), compute_uv=False)[-1])


class TestAngularDispersion:
    def test_codirectional_pair_is_zero(self):
        assert angular_dispersion([(1, 0), (5, 0)]) == pytest.approx(0.0, abs=1e-15)

    def test_four_even_directions(self):
        pts = [(1, 0), (0, 1), (-1, 0), (0, -1)]
        want = 2 * math.sqrt(2)
        assert angular_dispersion(pts) == pytest.approx(want, abs=1e-9)
        assert angular_dispersion(pts) == pytest.approx(
            brute_force_dispersion(pts), abs=1e-9
        )

    def test_three_at_120_degrees(self):
        pts = [(1, 0), (-0.5, math.sqrt(3) / 2), (-0.5, -math.sqrt(3) / 2)]
        want = 3 / math.sqrt(2)
        assert angular_dispersion(pts) == pytest.approx(want, abs=1e-9)
        assert angular_dispersion(pts) == pytest.approx(
            brute_force_dispersion(pts), abs=1e-9
        )

    def test_matches_bruteforce_on_random_sets(self):
        rng = np.random.default_rng(19)
        for _ in range(50):
            n = int(rng.integers(2, 9))
            pts = rng.standard_normal((n, 2))
            if np.linalg.norm(pts, axis=1).min() < 1e-3:
                continue
            assert angular_dispersion(pts) == pytest.approx(
                brute_force_dispersion(pts), abs=1e-12
            )

    def test_per_point_scale_invariance(self):
        rng = np.random.default_rng(23)
        pts = rng.standard_normal((5, 2))
        base = angular_dispersion(pts)
        scaled = pts * rng.uniform(0.1, 10.0, (5, 1))
        assert angular_dispersion(scaled) == pytest.approx(base, abs=1e-12)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(29)
        pts = rng.standard_normal((6, 2))
        base = angular_dispersion(pts)
        for theta in rng.uniform(0, 2 * math.pi, 5):
            rot = np.array(
                [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
            )
            assert angular_dispersion(pts @ rot.T) == pytest.approx(base, abs=1e-12)

    def test_dispersion_grows_with_spread(self):
        # clustered directions score lower than evenly spread ones
        tight = [(1, 0.0), (1, 0.1), (1, -0.1), (1, 0.2)]
        spread = [(1, 0), (0, 1), (-1, 0), (0, -1)]
        assert angular_dispersion(tight) < angular_dispersion(spread)

    def test_rejects_zero_norm_point(self):
        with pytest.raises(ValueError):
            angular_dispersion([(0, 0), (1, 0)])


class TestNonlinearDop:
    def test_center_of_square_corners(self, corner_anchors):
        assert nonlinear_dop(corner_anchors, Point(0, 0)) == pytest.approx(
            2 * math.sqrt(2), abs=1e-12
        )

    def test_far_target_tends_to_zero(self, corner_anchors):
        near = nonlinear_dop(corner_anchors, Point(0.3, 0.2))
        far = nonlinear_dop(corner_anchors, Point(1e5, 0.0))
        assert far < 1e-3 < near

    def test_masked_on_anchor(self, corner_anchors):
        assert math.isnan(nonlinear_dop(corner_anchors, Point(1, 1)))

    def test_equals_jacobian_sigma_min(self):
        for anchors, p in random_layout_cases(50, seed=59):
            smin = float(np.linalg.svd(jacobian(p, anchors), compute_uv=False)[-1])
            assert abs(nonlinear_dop(anchors, p) - smin) <= 1e-12


class TestLinearDop:
    def test_finite_at_central_with_dispersed_ring(self, square_center_anchors):
        c = linear_dop(square_center_anchors, 0, Point(0, 0))
        assert math.isfinite(c)
        assert c < 10

    def test_equals_dispersion_reciprocal_structure_at_origin(self, square_center_anchors):
        # noise-free at the central anchor the normalized matrix rows are
        # exactly the pairwise differences of unit directions
        cond = linear_dop(square_center_anchors, 0, Point(0, 0))
        rel = square_center_anchors.xy[1:] - square_center_anchors.xy[0]
        u = rel / np.linalg.norm(rel, axis=1)[:, None]
        rows = [u[i] - u[j] for i in range(4) for j in range(i + 1, 4)]
        sv = np.linalg.svd(np.array(rows), compute_uv=False)
        assert cond == pytest.approx(sv[0] / sv[-1], rel=1e-12)

    def test_half_plane_cluster_is_much_worse(self):
        dispersed = AnchorSet([(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1)])
        clustered = AnchorSet([(0, 0), (1, 0.05), (1, 0.15), (1, -0.1), (1.1, 0.02)])
        target = Point(0.05, 0.02)
        cd = linear_dop(dispersed, 0, target)
        cc = linear_dop(clustered, 0, target)
        assert cc >= 10 * cd

    def test_product_with_dispersion_stays_banded(self, square_center_anchors):
        # cond(M_normalized) * dispersion stays within a fixed band for
        # targets in a small disc around the central anchor
        r_min = np.linalg.norm(
            square_center_anchors.xy[1:] - square_center_anchors.xy[0], axis=1
        ).min()
        rng = np.random.default_rng(61)
        products = []
        rel = square_center_anchors.xy[1:] - square_center_anchors.xy[0]
        kappa_ring = angular_dispersion(rel)
        for _ in range(100):
            delta = rng.uniform(-0.05, 0.05, 2) * r_min
            c = linear_dop(
                square_center_anchors, 0, Point(float(delta[0]), float(delta[1]))
            )
            products.append(c * kappa_ring)
        assert max(products) / min(products) <= 10

    def test_raw_flag_exposes_unnormalized_cond(self):
        # radii differ, so the r_i * r_j row scaling actually changes cond
        anchors = AnchorSet([(0, 0), (1, 0), (0, 2), (-3, 0), (0, -1)])
        t = Point(0.1, 0.05)
        raw = linear_dop(anchors, 0, t, normalized=False)
        norm = linear_dop(anchors, 0, t, normalized=True)
        assert raw != norm
        assert math.isfinite(raw) and math.isfinite(norm)


class TestDopMap:
    def test_nonlinear_map_argmin_inside_hull(self, corner_anchors):
        grid = GridSpec(-2, 2, -2, 2, 40, 40)
        m = dop_map(corner_anchors, grid, "nonlinear-kappa")
        # the dispersion is maximal (best) inside; the argmin of kappa must
        # sit at the outer boundary, so the arg-MAX sits inside the hull
        v = np.where(m.mask, -np.inf, m.values)
        ix, iy = np.unravel_index(int(np.argmax(v)), v.shape)
        best = m.cell_center(ix, iy)
        assert -1 <= best.x <= 1 and -1 <= best.y <= 1
        # and the worst cells hug the window edge
        worst = np.unravel_index(int(np.argmin(np.where(m.mask, np.inf, m.values))), v.shape)
        assert worst[0] in (0, 39) or worst[1] in (0, 39)

    def test_linear_map_bounded_near_central_for_dispersed(self, square_center_anchors):
        grid = GridSpec(-0.4, 0.4, -0.4, 0.4, 30, 30)
        m = dop_map(square_center_anchors, grid, "linear-cond", central=0)
        assert not m.mask.all()
        lo, hi = m.finite_range()
        assert math.isfinite(hi)
        assert hi < 100

    def test_linear_map_clustered_much_worse(self):
        dispersed = AnchorSet([(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1)])
        clustered = AnchorSet([(0, 0), (1, 0.05), (1, 0.35), (1, -0.3), (1.2, 0.1)])
        grid = GridSpec(-0.25, 0.25, -0.25, 0.25, 20, 20)
        md = dop_map(dispersed, grid, "linear-cond", central=0)
        mc = dop_map(clustered, grid, "linear-cond", central=0)
        _, hi_d = md.finite_range()
        _, hi_c = mc.finite_range()
        assert mc.mask.any() or hi_c >= 10 * hi_d

    def test_symmetric_mode_map(self, corner_anchors):
        # odd cell count puts a cell center exactly on the equidistant
        # point, which is singular for the triple construction
        grid = GridSpec(-2, 2, -2, 2, 5, 5)
        m = dop_map(corner_anchors, grid, "linear-cond", symmetric=True)
        assert m.mask[2, 2]
        assert not m.mask[0, 0]

    def test_linear_kind_requires_central_or_symmetric(self, corner_anchors):
        with pytest.raises(ValueError):
            dop_map(corner_anchors, GridSpec(-1, 1, -1, 1, 4, 4), "linear-cond")

    def test_unknown_kind(self, corner_anchors):
        with pytest.raises(ValueError):
            dop_map(corner_anchors, GridSpec(-1, 1, -1, 1, 4, 4), "bogus")

    def test_grid_cells_match_scalar_values(self, square_center_anchors):
        grid = GridSpec(-0.5, 0.5, -0.5, 0.5, 7, 5)
        m_nl = dop_map(square_center_anchors, grid, "nonlinear-kappa")
        m_l = dop_map(square_center_anchors, grid, "linear-cond", central=0)
        for ix in (0, 3, 6):
            for iy in (0, 2, 4):
                p = m_nl.cell_center(ix, iy)
                if not m_nl.mask[ix, iy]:
                    assert m_nl.values[ix, iy] == pytest.approx(
                        nonlinear_dop(square_center_anchors, p), abs=1e-9
                    )
                if not m_l.mask[ix, iy]:
                    assert m_l.values[ix, iy] == pytest.approx(
                        linear_dop(square_center_anchors, 0, p), rel=1e-9
                    )

    def test_masked_cell_on_anchor(self):
        anchors = AnchorSet([(0.5, 0.5), (2.5, 0.5), (0.5, 2.5), (2.5, 2.5)])
        # 3x3 cells over (0,3): centers at 0.5, 1.5, 2.5 -> anchors sit on centers
        grid = GridSpec(0, 3, 0, 3, 3, 3)
        m = dop_map(anchors, grid, "nonlinear-kappa")
        assert m.mask[0, 0] and m.mask[2, 2]
        assert not m.mask[1, 1]


class TestSerialization:
    def test_csv_shape_and_determinism(self, corner_anchors):
        grid = GridSpec(-1, 1, -1, 1, 5, 4)
        m = dop_map(corner_anchors, grid, "nonlinear-kappa")
        csv1 = m.to_csv()
        csv2 = dop_map(corner_anchors, grid, "nonlinear-kappa").to_csv()
        assert csv1 == csv2
        lines = csv1.strip().split("\n")
        assert lines[0].startswith("# bounds=")
        assert len(lines) == 1 + 5
        assert all(len(ln.split(",")) == 4 for ln in lines[1:])

    def test_json_round_trip_fields(self, corner_anchors):
        grid = GridSpec(-1, 1, -1, 1, 4, 4)
        m = dop_map(corner_anchors, grid, "nonlinear-kappa")
        d = json.loads(m.to_json())
        assert d["nx"] == 4 and d["ny"] == 4
        assert d["kind"] == "nonlinear-kappa"
        assert len(d["values"]) == 16
        assert len(d["mask"]) == 16
        assert d["bounds"]["x_min"] == -1

    def test_grid_spec_validation(self):
        with pytest.raises(ValueError):
            GridSpec(1, -1, 0, 1, 4, 4)
        with pytest.raises(ValueError):
            GridSpec(0, 1, 0, 1, 0, 4)
