"""Riemannian measure on the round sphere, the pulled-back metric on the
glued manifold, and Monte Carlo absolute-continuity checks.

The round measure nu is realized by uniform sampling scaled by the
geometric sphere area (total mass = area, not 1).  The metric on the
glued manifold is the pullback of the round metric through the
identification, represented at a chart point by the Gram matrix of the
embedding Jacobian on an orthonormal basis of the chart's tangent
space; by construction pushforward vectors then have the same length as
their sphere preimages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .brownian import brownian_increments
from .errors import BadParams, DegenerateChartPoint
from .manifold import CHART_A, ChartPoint, TwistPair, embed_jacobian


def sphere_area(n_ambient: int) -> float:
    """Surface measure of the unit sphere S^{N-1} in R^N."""
    if n_ambient < 2:
        raise BadParams("ambient dimension must be >= 2")
    return 2.0 * math.pi ** (n_ambient / 2.0) / math.gamma(n_ambient / 2.0)


def sample_nu(n: int, n_ambient: int, seed: int) -> np.ndarray:
    """n i.i.d. uniform points on S^{N-1} (normalized Gaussians).

    Deterministic in (seed, index): the stream is a counter-based Philox
    generator keyed by the seed.
    """
    if n < 1:
        raise BadParams("need at least one sample")
    key = np.array([np.uint64(seed % (1 << 64)), np.uint64(0x5EED)], dtype=np.uint64)
    g = np.random.Generator(np.random.Philox(key=key))
    Z = g.standard_normal((n, n_ambient))
    return Z / np.linalg.norm(Z, axis=-1, keepdims=True)


@dataclass(frozen=True)
class MeasureModel:
    """Ambient dimension, sphere area, and the sampling seed."""

    n_ambient: int
    seed: int = 0

    @property
    def area(self) -> float:
        return sphere_area(self.n_ambient)

    def sample(self, n: int) -> np.ndarray:
        return sample_nu(n, self.n_ambient, self.seed)


# ---------------------------------------------------------------------------
# pullback metric
# ---------------------------------------------------------------------------

def _orthonormal_complement(v: np.ndarray) -> np.ndarray:
    """Columns spanning v^perp, via a Householder reflector (deterministic)."""
    k = v.shape[0]
    e = np.zeros(k)
    e[0] = 1.0
    w = v / np.linalg.norm(v)
    u = w - e if w[0] > 0 else w + e
    if np.linalg.norm(u) < 1e-14:
        H = np.eye(k)
    else:
        u = u / np.linalg.norm(u)
        H = np.eye(k) - 2.0 * np.outer(u, u)
    # H maps +-e1 to w, so its last k-1 columns span w^perp
    return H[:, 1:]


def chart_tangent_basis(p: ChartPoint, tw: TwistPair) -> np.ndarray:
    """Orthonormal basis of the chart's tangent space at p.

    Shape (m+n+2, m+n+1): the free factor contributes full coordinate
    directions, the sphere factor the complement of its unit vector.
    """
    m1, n1 = tw.m + 1, tw.n + 1
    N = m1 + n1
    cols = []
    if p.chart == CHART_A:
        for j in range(m1):
            e = np.zeros(N)
            e[j] = 1.0
            cols.append(e)
        C = _orthonormal_complement(p.v)
        for j in range(C.shape[1]):
            e = np.zeros(N)
            e[m1:] = C[:, j]
            cols.append(e)
    else:
        C = _orthonormal_complement(p.u)
        for j in range(C.shape[1]):
            e = np.zeros(N)
            e[:m1] = C[:, j]
            cols.append(e)
        for j in range(n1):
            e = np.zeros(N)
            e[m1 + j] = 1.0
            cols.append(e)
    return np.stack(cols, axis=1)


@dataclass
class PullbackMetric:
    """Gram matrix of the pulled-back round metric at a chart point.

    ``matrix`` is symmetric positive definite away from the chart's
    singular locus; ``basis`` holds the orthonormal tangent directions
    (ambient chart coordinates) in which it is expressed.
    """

    at: ChartPoint
    matrix: np.ndarray
    basis: np.ndarray

    def norm_of(self, w: np.ndarray) -> float:
        """Length of a tangent vector w (ambient chart coordinates)."""
        c = self.basis.T @ w
        return float(np.sqrt(c @ self.matrix @ c))


def pullback_metric(p: ChartPoint, tw: TwistPair, tol: float = 1e-13) -> PullbackMetric:
    """Pullback of the round metric: Gram = B^T (Dh^T Dh) B.

    Dh is the analytic Jacobian of the embedding and B the chart tangent
    basis, so |f_* X| in this metric reproduces |X| on the sphere up to
    numerical error.
    """
    if p.chart != CHART_A and float(np.linalg.norm(p.v)) <= tol:
        raise DegenerateChartPoint("pullback metric undefined at y-bar = 0")
    Dh = embed_jacobian(p, tw)
    B = chart_tangent_basis(p, tw)
    DB = Dh @ B
    G = DB.T @ DB
    return PullbackMetric(at=p, matrix=0.5 * (G + G.T), basis=B)


# ---------------------------------------------------------------------------
# absolute continuity of the flow image measure
# ---------------------------------------------------------------------------

def _heun_ensemble_step(V0, Vks, Q, dt, dW):
    """One vectorized Heun step for a (paths, points, N) state block.

    dW has shape (paths, d); each path's increment is shared by all of
    its points.
    """
    drift = V0.eval(Q)
    diff = [Vk.eval(Q) for Vk in Vks]
    pred = Q + drift * dt
    for k, g in enumerate(diff):
        pred = pred + g * dW[:, k, None, None]
    drift2 = V0.eval(pred)
    out = Q + 0.5 * (drift + drift2) * dt
    for k, g in enumerate(diff):
        g2 = Vks[k].eval(pred)
        out = out + 0.5 * (g + g2) * dW[:, k, None, None]
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


@dataclass(frozen=True)
class AbsContReport:
    """Empirical bound for sup_t E int zeta(q_t) dnu <= K int zeta dnu."""

    t_grid: np.ndarray
    zeta_label: str
    ratio: np.ndarray
    ci: np.ndarray
    K_hat: float

    def to_dict(self) -> dict:
        return {
            "t_grid": [float(t) for t in self.t_grid],
            "zeta_label": self.zeta_label,
            "ratio": [float(r) for r in self.ratio],
            "ci": [float(c) for c in self.ci],
            "K_hat": float(self.K_hat),
        }


def abscont_check(V0, Vks, T, grid, n_points, n_paths, zeta_fixtures,
                  seed, dt=0.01):
    """Monte Carlo estimate of the flow-image mass ratios.

    For each nonnegative test function zeta, integrates an ensemble of
    ``n_points`` starting points under ``n_paths`` independent Brownian
    paths and reports ratio(t) = E int zeta(q_t) dnu / int zeta dnu on
    the time grid, its 95% half-width across paths, and the sup K_hat.
    The uniform-measure denominator uses the same starting sample, which
    cancels most of the sampling variance.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0) or np.any(grid > T + 1e-12):
        raise BadParams("grid times must lie in [0, T]")
    n_ambient = V0.dim
    n_steps = int(round(T / dt))
    dt = T / n_steps
    Q0 = sample_nu(n_points, n_ambient, seed)
    # per-path seeds derived as seed xor (index + 1); streams stay
    # independent because the generators are counter-based
    dW = np.stack([
        brownian_increments(seed ^ (j + 1), T, n_steps, len(Vks))
        for j in range(n_paths)
    ])  # (paths, steps, d)
    Q = np.broadcast_to(Q0, (n_paths, n_points, n_ambient)).copy()
    grid_idx = np.unique(np.clip(np.round(grid / dt).astype(int), 0, n_steps))
    t_grid = grid_idx * dt
    snapshots = {}
    if 0 in grid_idx:
        snapshots[0] = Q.copy()
    for i in range(n_steps):
        Q = _heun_ensemble_step(V0, Vks, Q, dt, dW[:, i, :])
        if (i + 1) in grid_idx:
            snapshots[i + 1] = Q.copy()
    reports = []
    for zeta in zeta_fixtures:
        denom = float(np.mean(zeta.value(Q0)))
        if denom <= 0:
            raise BadParams("test functions must have positive mass")
        ratios, cis = [], []
        for gi in grid_idx:
            per_path = np.mean(zeta.value(snapshots[gi]), axis=-1)  # (paths,)
            r = float(np.mean(per_path)) / denom
            ci = 1.96 * float(np.std(per_path, ddof=1)) / np.sqrt(n_paths) / denom
            ratios.append(r)
            cis.append(ci)
        ratios = np.array(ratios)
        reports.append(AbsContReport(
            t_grid=t_grid, zeta_label=getattr(zeta, "label", "zeta"),
            ratio=ratios, ci=np.array(cis), K_hat=float(np.max(ratios)),
        ))
    return reports
