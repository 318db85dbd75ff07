"""Design-point generation and the geometric quantities that drive the bounds.

The fill distance of a finite set over a continuous hyper-rectangle is
approximated on a tensor probe grid (plus the domain corners) with an
explicit bracket: the reported value underestimates the true supremum by at
most half a probe-cell diagonal, and that bound is returned alongside.
"""

from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .kernels import KernelSpec, matern_of_r

DEFAULT_PROBE_RESOLUTION = {1: 512, 2: 128, 3: 32}


@dataclass(frozen=True)
class Domain:
    """Axis-aligned hyper-rectangle with open interior."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(lo) != len(hi):
            raise ConfigurationError("lower and upper must have the same dimension")
        if any(l >= u for l, u in zip(lo, hi)):
            raise ConfigurationError("domain must satisfy lower[i] < upper[i]")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def widths(self) -> np.ndarray:
        return np.array(self.upper) - np.array(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def corners(self) -> np.ndarray:
        cs = list(itertools.product(*zip(self.lower, self.upper)))
        return np.array(cs, dtype=float)

    def contains(self, pts: np.ndarray, strict: bool = True) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        lo = np.array(self.lower)
        hi = np.array(self.upper)
        if strict:
            return np.all((pts > lo) & (pts < hi), axis=1)
        return np.all((pts >= lo) & (pts <= hi), axis=1)


UNIT_INTERVAL = Domain((0.0,), (1.0,))


@dataclass
class PointSet:
    """Ordered design points inside a domain, with lazily cached metrics."""

    points: np.ndarray
    domain: Domain
    _metrics: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        self.points = pts
        if pts.shape[1] != self.domain.dim:
            raise ConfigurationError(
                f"points have dimension {pts.shape[1]}, domain has {self.domain.dim}"
            )
        if pts.shape[0] and not np.all(self.domain.contains(pts, strict=True)):
            raise ConfigurationError("all points must lie strictly inside the domain")

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def metrics(self, probe_resolution: int | None = None) -> dict:
        """Cached ``{'h': ..., 'h_bound': ..., 'q': ..., 'rho': ...}``."""
        key = probe_resolution or _default_probe(self.dim)
        if key not in self._metrics:
            h, bound = fill_distance(self, probe_resolution)
            q = separation_radius(self) if len(self) >= 2 else float("nan")
            rho = h / q if q > 0 else float("inf")
            self._metrics[key] = {"h": h, "h_bound": bound, "q": q, "rho": rho}
        return self._metrics[key]


def _default_probe(dim: int) -> int:
    return DEFAULT_PROBE_RESOLUTION.get(dim, 8)


def gen_grid(n_per_dim: int, domain: Domain) -> PointSet:
    """Tensor grid of cell midpoints: coordinate i of cell j at
    ``lower + (j + 1/2) * width / n_per_dim``.  Quasi-uniform by construction."""
    if n_per_dim < 1:
        raise ConfigurationError("n_per_dim must be >= 1")
    axes = [
        domain.lower[i] + (np.arange(n_per_dim) + 0.5) * domain.widths[i] / n_per_dim
        for i in range(domain.dim)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    return PointSet(pts, domain)


def gen_uniform_random(n: int, domain: Domain, seed: int) -> PointSet:
    """``n`` i.i.d. uniform draws; identical seed gives identical points."""
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random((n, domain.dim))
    pts = np.array(domain.lower) + u * domain.widths
    return PointSet(pts, domain)


def gen_p_greedy(n: int, spec: KernelSpec, candidates: PointSet) -> PointSet:
    """Greedy posterior-variance (power function) point selection.

    The first point maximizes ``k(x, x)`` (constant for a translation
    invariant kernel, so the lowest index wins); every later point maximizes
    the interpolation posterior standard deviation given the points chosen
    so far.  Ties always break to the lowest candidate index.
    """
    cand = candidates.points
    m = cand.shape[0]
    if m < n:
        raise ConfigurationError(f"need at least {n} candidates, got {m}")
    if cand.shape[1] != spec.dim:
        raise ConfigurationError("candidate dimension does not match kernel dim")
    # Incremental Newton basis: power[i] is the posterior variance of
    # candidate i given the selected prefix; one column per selected point.
    power = np.full(m, spec.amplitude)
    basis = np.zeros((m, n))
    selected = np.zeros(n, dtype=int)
    for step in range(n):
        j = int(np.argmax(power))  # np.argmax returns the first maximizer
        selected[step] = j
        pj = power[j]
        if pj <= 0:
            raise ConfigurationError(
                "candidate pool exhausted: remaining posterior variance is zero"
            )
        r = np.linalg.norm(cand - cand[j], axis=1)
        col = matern_of_r(spec, r) - basis[:, :step] @ basis[j, :step]
        col /= np.sqrt(pj)
        basis[:, step] = col
        power = np.maximum(power - col * col, 0.0)
    return PointSet(cand[selected], candidates.domain)


def _probe_points(domain: Domain, probe_resolution: int) -> np.ndarray:
    grid = gen_grid(probe_resolution, domain).points
    return np.vstack([grid, domain.corners()])


def fill_distance(X: PointSet, probe_resolution: int | None = None):
    """Approximate ``sup_x inf_y ||x - y||`` over the domain.

    Returns ``(value, bound)`` where the true fill distance lies in
    ``[value, value + bound]``; ``bound`` is half the probe-cell diagonal.
    """
    if len(X) == 0:
        raise ConfigurationError("fill_distance requires a nonempty point set")
    res = probe_resolution or _default_probe(X.dim)
    probes = _probe_points(X.domain, res)
    # chunk the probe grid so the pairwise distance block stays small
    best = 0.0
    pts = X.points
    chunk = max(1, int(2.0e6 // max(len(X), 1)))
    for start in range(0, probes.shape[0], chunk):
        block = probes[start : start + chunk]
        d2 = np.sum((block[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        best = max(best, float(np.sqrt(d2.min(axis=1).max())))
    cell_diag = float(np.linalg.norm(X.domain.widths / res))
    return best, cell_diag / 2.0


def separation_radius(X: PointSet) -> float:
    """Exact ``min_{i != j} ||x_i - x_j|| / 2``."""
    if len(X) < 2:
        raise ConfigurationError("separation radius needs at least two points")
    pts = X.points
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    d2[np.diag_indices(len(X))] = np.inf
    return float(np.sqrt(d2.min()) / 2.0)


def mesh_ratio(X: PointSet, probe_resolution: int | None = None) -> float:
    """Fill distance over separation radius."""
    q = separation_radius(X)
    if q == 0.0:
        raise ZeroDivisionError("separation radius is zero (duplicate points)")
    h, _ = fill_distance(X, probe_resolution)
    return h / q


def quasi_uniformity_trace(sequence, probe_resolution: int | None = None):
    """Per-set ``(n, h, q, rho)`` rows plus the fitted slope of log h vs log n."""
    rows = []
    for X in sequence:
        if len(X) < 2:
            raise ConfigurationError("trace requires sets with at least two points")
        h, _ = fill_distance(X, probe_resolution)
        q = separation_radius(X)
        rows.append((len(X), h, q, h / q))
    ns = np.array([r[0] for r in rows], dtype=float)
    hs = np.array([r[1] for r in rows], dtype=float)
    slope = float(np.polyfit(np.log(ns), np.log(hs), 1)[0]) if len(rows) >= 2 else float("nan")
    return rows, slope


def pointset_to_csv(X: PointSet) -> str:
    """CSV with header ``x1..xd``, one row per point, 17 significant digits."""
    buf = io.StringIO()
    buf.write(",".join(f"x{i + 1}" for i in range(X.dim)) + "\n")
    for row in X.points:
        buf.write(",".join(format(v, ".17g") for v in row) + "\n")
    return buf.getvalue()


def pointset_from_csv(text: str, domain: Domain) -> PointSet:
    lines = [ln for ln in text.strip().split("\n") if ln]
    header = lines[0].split(",")
    if header != [f"x{i + 1}" for i in range(len(header))]:
        raise ConfigurationError(f"unexpected CSV header: {lines[0]!r}")
    pts = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return PointSet(pts, domain)
