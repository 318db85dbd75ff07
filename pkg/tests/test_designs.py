"""Design generators and the fill/separation/mesh-ratio metrics."""

import numpy as np
import pytest

from gprates.designs import (
    Domain,
    PointSet,
    fill_distance,
    gen_grid,
    gen_p_greedy,
    gen_uniform_random,
    mesh_ratio,
    pointset_from_csv,
    pointset_to_csv,
    quasi_uniformity_trace,
    separation_radius,
)
from gprates.errors import ConfigurationError
from gprates.fitting import MeanSpec, fit, posterior_var
from gprates.kernels import KernelSpec

UNIT = Domain((0.0,), (1.0,))
SQUARE = Domain((0.0, 0.0), (1.0, 1.0))


class TestDomain:
    def test_validation(self):
        with pytest.raises(ConfigurationError):
            Domain((0.0,), (0.0,))
        with pytest.raises(ConfigurationError):
            Domain((0.0, 0.0), (1.0,))

    def test_volume_and_corners(self):
        d = Domain((0.0, 1.0), (2.0, 4.0))
        assert d.volume == 6.0
        assert len(d.corners()) == 4

    def test_points_must_be_strictly_inside(self):
        with pytest.raises(ConfigurationError):
            PointSet(np.array([[0.0]]), UNIT)


class TestGrid:
    def test_one_point(self):
        X = gen_grid(1, UNIT)
        np.testing.assert_allclose(X.points, [[0.5]])

    def test_two_points(self):
        X = gen_grid(2, UNIT)
        np.testing.assert_allclose(X.points, [[0.25], [0.75]])

    def test_square_midpoints(self):
        X = gen_grid(2, SQUARE)
        assert len(X) == 4
        expected = {(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)}
        assert {tuple(p) for p in X.points} == expected


class TestUniformRandom:
    def test_rejects_zero(self):
        with pytest.raises(ConfigurationError):
            gen_uniform_random(0, UNIT, seed=1)

    def test_single_point_inside(self):
        X = gen_uniform_random(1, UNIT, seed=5)
        assert 0.0 < X.points[0, 0] < 1.0

    def test_determinism(self):
        a = gen_uniform_random(50, SQUARE, seed=123)
        b = gen_uniform_random(50, SQUARE, seed=123)
        assert np.array_equal(a.points, b.points)
        c = gen_uniform_random(50, SQUARE, seed=124)
        assert not np.array_equal(a.points, c.points)

    def test_law_of_large_numbers(self):
        X = gen_uniform_random(10_000, UNIT, seed=42)
        assert abs(X.points.mean() - 0.5) < 0.02


class TestFillDistance:
    def test_single_center_point(self):
        X = PointSet(np.array([[0.5]]), UNIT)
        h, bound = fill_distance(X, probe_resolution=2048)
        assert h == pytest.approx(0.5, abs=bound + 1e-12)

    def test_two_points(self):
        X = PointSet(np.array([[0.25], [0.75]]), UNIT)
        h, bound = fill_distance(X, probe_resolution=2048)
        assert h == pytest.approx(0.25, abs=bound + 1e-12)

    def test_midpoint_grid_formula(self):
        # farthest point of a d-dim midpoint grid is a domain corner:
        # h = sqrt(d) / (2 n)
        for d, n in ((1, 8), (2, 5)):
            dom = UNIT if d == 1 else SQUARE
            X = gen_grid(n, dom)
            h, bound = fill_distance(X)
            assert h == pytest.approx(np.sqrt(d) / (2 * n), abs=bound + 1e-12)

    def test_bracket_contains_finer_oracle(self):
        rng = np.random.default_rng(9)
        X = PointSet(rng.uniform(0.05, 0.95, (17, 1)), UNIT)
        h, bound = fill_distance(X, probe_resolution=128)
        oracle, _ = fill_distance(X, probe_resolution=512)
        assert h - bound / 4 - 1e-12 <= oracle <= h + bound


class TestSeparationAndMeshRatio:
    def test_examples(self):
        X = PointSet(np.array([[0.25], [0.75]]), UNIT)
        assert separation_radius(X) == 0.25
        grid = gen_grid(8, UNIT)
        assert separation_radius(grid) == pytest.approx(1.0 / 16)

    def test_needs_two_points(self):
        with pytest.raises(ConfigurationError):
            separation_radius(PointSet(np.array([[0.5]]), UNIT))

    def test_mesh_ratio_grid_is_one(self):
        assert mesh_ratio(gen_grid(16, UNIT), probe_resolution=4096) == pytest.approx(1.0, abs=0.01)

    def test_mesh_ratio_three_points(self):
        X = PointSet(np.array([[0.25], [0.5], [0.75]]), UNIT)
        assert mesh_ratio(X, probe_resolution=4096) == pytest.approx(2.0, abs=0.01)

    def test_removing_a_point_grows_rho(self):
        full = gen_grid(16, UNIT)
        holed = PointSet(np.delete(full.points, 7, axis=0), UNIT)
        assert mesh_ratio(holed) > mesh_ratio(full)

    def test_rho_at_least_one(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            X = PointSet(rng.uniform(0.02, 0.98, (12, 1)), UNIT)
            assert mesh_ratio(X) >= 1.0 - 1e-9


class TestQuasiUniformityTrace:
    def test_grid_slope_1d(self):
        rows, slope = quasi_uniformity_trace([gen_grid(n, UNIT) for n in (4, 8, 16, 32)])
        assert slope == pytest.approx(-1.0, abs=0.01)
        assert all(r[3] <= 1.1 for r in rows)

    def test_grid_slope_2d(self):
        rows, slope = quasi_uniformity_trace([gen_grid(n, SQUARE) for n in (2, 4, 8)])
        assert slope == pytest.approx(-0.5, abs=0.05)

    def test_random_trace_is_reported_only(self):
        sets = [gen_uniform_random(n, UNIT, seed=n) for n in (16, 32, 64)]
        rows, slope = quasi_uniformity_trace(sets)
        assert len(rows) == 3 and np.isfinite(slope)


class TestPGreedy:
    def test_first_point_is_lowest_index(self):
        spec = KernelSpec(tau=2.0, lengthscale=0.3)
        cand = gen_grid(32, UNIT)
        X = gen_p_greedy(1, spec, cand)
        np.testing.assert_allclose(X.points, cand.points[:1])

    def test_second_point_maximizes_posterior_sd(self):
        # brute force over the candidate set
        spec = KernelSpec(tau=1.0, lengthscale=1.0)
        cand = PointSet(np.array([[0.1], [0.5], [0.9]]), UNIT)
        X = gen_p_greedy(2, spec, cand)
        first = PointSet(X.points[:1], UNIT)
        model = fit(spec, MeanSpec("constant", 0.0), first, [0.0], 0.0)
        variances = [posterior_var(model, c) for c in cand.points]
        best = cand.points[int(np.argmax(variances))]
        np.testing.assert_allclose(X.points[1], best)
        np.testing.assert_allclose(X.points[1], [0.9])  # farthest from 0.1

    def test_selected_points_have_zero_variance(self):
        spec = KernelSpec(tau=2.0, lengthscale=0.3)
        X = gen_p_greedy(9, spec, gen_grid(64, UNIT))
        model = fit(spec, MeanSpec("constant", 0.0), X, np.zeros(9), 0.0)
        assert max(posterior_var(model, p) for p in X.points) <= 1e-8

    def test_needs_enough_candidates(self):
        spec = KernelSpec(tau=2.0)
        with pytest.raises(ConfigurationError):
            gen_p_greedy(5, spec, gen_grid(2, UNIT))

    def test_mesh_ratio_stays_bounded(self):
        # smooth kernel (tau > d/2 + 1): rho trend over doublings within 20%
        spec = KernelSpec(tau=2.0, lengthscale=0.25)
        cand = gen_grid(1024, UNIT)
        rhos = []
        for n in (16, 32, 64, 128):
            X = gen_p_greedy(n, spec, cand)
            rhos.append(mesh_ratio(X))
        cap = max(rhos)
        assert cap < 4.0
        for a, b in zip(rhos, rhos[1:]):
            assert b <= 1.2 * a

    def test_low_smoothness_trace_is_diagnostic_only(self):
        # d/2 < tau <= d/2 + 1 carries no quasi-uniformity claim; just run it
        spec = KernelSpec(tau=1.25, lengthscale=0.25)
        X = gen_p_greedy(12, spec, gen_grid(256, UNIT))
        assert np.isfinite(mesh_ratio(X))


class TestCsv:
    def test_round_trip_and_header(self):
        X = gen_uniform_random(7, SQUARE, seed=3)
        text = pointset_to_csv(X)
        assert text.splitlines()[0] == "x1,x2"
        back = pointset_from_csv(text, SQUARE)
        assert np.array_equal(back.points, X.points)
