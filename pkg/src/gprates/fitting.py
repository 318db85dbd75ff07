"""Conditioning: the unified approximant, posterior variance, and RKHS norms.

``fit`` builds the regularized kernel system ``(K + lambda I) w = y - m_X``
once, by Cholesky factorization; the fitted model is immutable and its
predictors are pure functions.  ``lambda = 0`` is interpolation and gets a
small diagonal jitter (escalated on factorization failure, and recorded,
since a large jitter technically shifts the estimator toward approximate
interpolation).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .designs import PointSet
from .errors import ConfigurationError, SingularDesignError
from .kernels import KernelSpec, cross_matrix, gram

logger = logging.getLogger(__name__)

DEFAULT_JITTER_FACTOR = 1e-10
MAX_JITTER_FACTOR = 1e-6


@dataclass(frozen=True)
class MeanSpec:
    """Prior mean: constant, per-axis polynomial of degree <= 2, or a callable.

    Smooth means are trivially in every Sobolev class on a bounded domain;
    supplying a mean rough enough to break that is the caller's problem.
    """

    kind: str = "constant"
    value: float = 0.0
    coeffs: tuple = ()  # (c0, c1[d], c2[d]) flattened for kind="polynomial"
    fn: Callable | None = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "constant":
            return np.full(x.shape[0], self.value)
        if self.kind == "polynomial":
            d = x.shape[1]
            c = np.asarray(self.coeffs, dtype=float)
            if c.size != 1 + 2 * d:
                raise ConfigurationError(
                    f"polynomial mean needs 1 + 2*dim coefficients, got {c.size}"
                )
            return c[0] + x @ c[1 : 1 + d] + (x * x) @ c[1 + d :]
        if self.kind == "named":
            if self.fn is None:
                raise ConfigurationError("named mean requires a callable")
            return np.asarray(self.fn(x), dtype=float).reshape(x.shape[0])
        raise ConfigurationError(f"unknown mean kind {self.kind!r}")


ZERO_MEAN = MeanSpec("constant", 0.0)


@dataclass(frozen=True)
class PosteriorModel:
    """Immutable fitted state: Cholesky factor of ``K + lambda I`` and dual weights."""

    kernel: KernelSpec
    prior_mean: MeanSpec
    design: PointSet
    lam: float
    y: np.ndarray
    chol: np.ndarray  # lower triangular
    dual: np.ndarray
    jitter: float


def _closest_pair(pts: np.ndarray):
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    d2[np.diag_indices(len(pts))] = np.inf
    i, j = np.unravel_index(int(np.argmin(d2)), d2.shape)
    return i, j, float(np.sqrt(d2[i, j]))


def fit(
    kernel: KernelSpec,
    prior_mean: MeanSpec,
    X: PointSet,
    y,
    lam: float = 0.0,
) -> PosteriorModel:
    """Condition on observations ``y`` at ``X`` with regularization ``lam``."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if len(y) != len(X):
        raise ConfigurationError(f"got {len(y)} observations for {len(X)} points")
    if lam < 0:
        raise ConfigurationError(f"lambda must be nonnegative, got {lam}")
    K = gram(kernel, X, jitter=0.0)
    resid = y - prior_mean(X.points)
    n = len(X)
    A = kernel.amplitude
    # jitter ladder: none needed when lam > 0, else start at 1e-10*A and
    # escalate by 100x up to 1e-6*A before giving up
    ladder = [0.0] if lam > 0 else []
    ladder += [f * A for f in (DEFAULT_JITTER_FACTOR, 1e-8, MAX_JITTER_FACTOR)]
    c = low = None
    jitter = ladder[0]
    for jitter in ladder:
        try:
            c, low = cho_factor(K + (lam + jitter) * np.eye(n), lower=True)
            break
        except np.linalg.LinAlgError:
            logger.warning("cholesky failed at jitter %.1e, escalating", jitter)
            c = None
    if c is None:
        i, j, d = _closest_pair(X.points)
        raise SingularDesignError(
            f"Cholesky failed up to jitter {MAX_JITTER_FACTOR * A:.1e}; closest "
            f"design pair is ({i}, {j}) at distance {d:.3e}"
        )
    if jitter > DEFAULT_JITTER_FACTOR * A:
        logger.warning("fit used escalated jitter %.1e", jitter)
    L = np.tril(c)
    dual = cho_solve((c, low), resid)
    return PosteriorModel(
        kernel=kernel,
        prior_mean=prior_mean,
        design=X,
        lam=float(lam),
        y=y,
        chol=L,
        dual=dual,
        jitter=float(jitter),
    )


def _as_query(dim: int, x):
    """Normalize x to an (n, dim) batch; flag whether it denoted one point."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        if dim != 1:
            raise ConfigurationError(f"scalar query for a {dim}-dimensional kernel")
        return x.reshape(1, 1), True
    if x.ndim == 1:
        if x.size == dim:
            return x[None, :], True
        if dim == 1:
            return x[:, None], False
        raise ConfigurationError(f"1-d query of length {x.size} for dim {dim}")
    if x.shape[1] != dim:
        raise ConfigurationError(f"query has dimension {x.shape[1]}, expected {dim}")
    return x, False


def posterior_mean(model: PosteriorModel, x) -> np.ndarray | float:
    """``m(x) + k_xX (K + lambda I)^{-1} (y - m_X)``; vectorized over rows of x."""
    xq, single = _as_query(model.kernel.dim, x)
    Kq = cross_matrix(model.kernel, xq, model.design)
    out = model.prior_mean(xq) + Kq @ model.dual
    return float(out[0]) if single else out


def posterior_var(model: PosteriorModel, x) -> np.ndarray | float:
    """``k(x,x) - k_xX (K + lambda I)^{-1} k_Xx``, clamped at zero."""
    xq, single = _as_query(model.kernel.dim, x)
    Kq = cross_matrix(model.kernel, xq, model.design)
    V = solve_triangular(model.chol, Kq.T, lower=True)
    raw = model.kernel.amplitude - np.sum(V * V, axis=0)
    mn = raw.min() if raw.size else 0.0
    if mn < -1e-8 * model.kernel.amplitude:
        logger.warning("posterior variance clamped from %.3e to 0", mn)
    out = np.maximum(raw, 0.0)
    return float(out[0]) if single else out


def posterior_sd(model: PosteriorModel, x) -> np.ndarray | float:
    v = posterior_var(model, x)
    return np.sqrt(v) if isinstance(v, np.ndarray) else float(np.sqrt(v))


def rkhs_norm_expansion(spec: KernelSpec, centers, alpha) -> float:
    """RKHS norm of the finite expansion ``sum_i alpha_i k(., c_i)``.

    By the reproducing property this is exactly ``sqrt(alpha' K alpha)``;
    a small negative quadratic form from round-off is clamped at zero.
    """
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    K = gram(spec, centers, jitter=0.0)
    if len(alpha) != K.shape[0]:
        raise ConfigurationError("alpha length must match the number of centers")
    q = float(alpha @ K @ alpha)
    return float(np.sqrt(max(q, 0.0)))


def noise_interpolant_norm(spec: KernelSpec, X, eps) -> float:
    """RKHS norm of the noise interpolant: ``sqrt(eps' K^{-1} eps)``."""
    eps = np.asarray(eps, dtype=float).reshape(-1)
    K = gram(spec, X, jitter=DEFAULT_JITTER_FACTOR * spec.amplitude)
    if len(eps) != K.shape[0]:
        raise ConfigurationError("eps length must match the number of points")
    try:
        c, low = cho_factor(K, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularDesignError("kernel matrix is singular") from exc
    q = float(eps @ cho_solve((c, low), eps))
    return float(np.sqrt(max(q, 0.0)))
