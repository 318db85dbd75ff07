"""Grid norms, residuals, and the midpoint integration oracle."""

import math

import numpy as np
import pytest

from gprates.designs import Domain, PointSet, gen_grid
from gprates.fitting import MeanSpec, fit
from gprates.kernels import KernelSpec, matern_eval
from gprates.norms import integrate, lq_error, lq_norms, make_grid, residual_norm
from gprates.targets import TargetSpec, named_target

UNIT = Domain((0.0,), (1.0,))
ZERO = MeanSpec("constant", 0.0)


def named(fn, tau_f=1.0):
    return TargetSpec(name="inline", tau_f=tau_f, domain=UNIT, kind="named", fn=fn)


def zero_model(spec=None, mean_value=0.0):
    spec = spec or KernelSpec(tau=2.0, lengthscale=0.3)
    X = gen_grid(4, UNIT)
    mean = MeanSpec("constant", mean_value)
    return fit(spec, mean, X, np.full(4, mean_value), 0.0)


class TestLqError:
    def test_identity_target_against_zero_model(self):
        # f(x) = x vs the zero approximant: L2 norm is 1/sqrt(3)
        t = named(lambda x: np.atleast_2d(x)[:, 0])
        grid = make_grid(UNIT, 4096)
        err = lq_error(t, zero_model(), 2, grid)
        assert err == pytest.approx(1 / math.sqrt(3), abs=1e-4)

    def test_constant_target_with_matching_mean(self):
        t = named(lambda x: np.full(np.atleast_2d(x).shape[0], 0.7))
        model = zero_model(mean_value=0.7)
        grid = make_grid(UNIT, 512)
        assert lq_error(t, model, 2, grid) <= 1e-10

    def test_self_interpolation_is_exact(self):
        # target defined as the model's own posterior mean
        spec = KernelSpec(tau=2.0, lengthscale=0.3)
        X = gen_grid(6, UNIT)
        base = fit(spec, ZERO, X, np.sin(3 * X.points[:, 0]), 0.0)
        from gprates.fitting import posterior_mean

        t = named(lambda x: posterior_mean(base, np.atleast_2d(x)))
        grid = make_grid(UNIT, 1024)
        assert lq_error(t, base, 2, grid) <= 1e-8

    def test_invalid_q(self):
        t = named(lambda x: np.atleast_2d(x)[:, 0])
        with pytest.raises(Exception):
            lq_error(t, zero_model(), 3, make_grid(UNIT, 64))

    def test_norm_ordering(self):
        # normalized: mean-absolute <= rms <= max on unit-volume domains
        t = named(lambda x: np.sin(7 * np.atleast_2d(x)[:, 0]))
        grid = make_grid(UNIT, 2048)
        norms = lq_norms(t, zero_model(), grid)
        assert norms[1] <= norms[2] + 1e-15
        assert norms[2] <= norms["inf"] + 1e-15


class TestResidualNorm:
    def test_zero_for_interpolation(self):
        t = named_target("bump")
        spec = KernelSpec(tau=2.0, lengthscale=0.3)
        X = gen_grid(12, UNIT)
        y = np.asarray(
            [float(v) for v in np.atleast_1d(np.asarray(eval_t(t, X)))]
        ) if False else None
        from gprates.targets import eval_target

        model = fit(spec, ZERO, X, eval_target(t, X.points), 0.0)
        assert residual_norm(t, model) <= 1e-6

    def test_single_point_ridge_formula(self):
        # residual = |y| sigma^2 / (A + sigma^2) for one noiseless point
        A, sig2, c = 1.3, 0.25, 2.0
        spec = KernelSpec(tau=2.0, amplitude=A)
        X = PointSet(np.array([[0.5]]), UNIT)
        t = named(lambda x: np.full(np.atleast_2d(x).shape[0], c))
        model = fit(spec, ZERO, X, [c], sig2)
        assert residual_norm(t, model) == pytest.approx(c * sig2 / (A + sig2), rel=1e-9)

    def test_monotone_in_lambda(self):
        t = named_target("layered_tau2")
        from gprates.targets import eval_target

        spec = KernelSpec(tau=2.0, lengthscale=0.3)
        X = gen_grid(24, UNIT)
        y = eval_target(t, X.points)
        values = [
            residual_norm(t, fit(spec, ZERO, X, y, lam))
            for lam in (0.0, 1e-4, 1e-2, 1.0, 100.0)
        ]
        assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


class TestIntegrate:
    def test_constant(self):
        grid = make_grid(UNIT, 1024)
        assert integrate(1.0, 1.0, grid) == pytest.approx(1.0, abs=1e-12)

    def test_linear(self):
        grid = make_grid(UNIT, 1024)
        assert integrate(lambda x: np.atleast_2d(x)[:, 0], 1.0, grid) == pytest.approx(
            0.5, abs=1e-10
        )

    def test_full_period_sine(self):
        grid = make_grid(UNIT, 2048)
        val = integrate(lambda x: np.sin(2 * np.pi * np.atleast_2d(x)[:, 0]), 1.0, grid)
        assert val == pytest.approx(0.0, abs=1e-12)

    def test_weights_sum_to_volume(self):
        dom = Domain((0.0, -1.0), (2.0, 1.0))
        grid = make_grid(dom, 32)
        assert grid.weights.sum() == pytest.approx(dom.volume, rel=1e-12)
        assert grid.size == 32 ** 2
