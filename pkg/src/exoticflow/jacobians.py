"""Analytic differentials of the inverse identification f and pushforward
vector fields, with finite-difference oracles.

``f`` maps the round sphere to the glued manifold.  Its differential is
assembled in closed form, block by block, for both chart regions:

* region A (target R^{m+1} x S^n): twist-independent polynomial blocks;
* region B (target S^m x R^{n+1}): blocks built from the twist maps and
  their first derivatives, singular on the ray y-bar = 0.

The blocks are the ambient partial derivatives of the literal branch
formulas ``f_chart_a_raw`` / ``f_chart_b_raw``, so central finite
differences of those maps are an independent check of every entry.

Note the two published chart-coordinate forms of the region-B lower
blocks disagree with the chain rule of the branch formula itself (one
|y-bar| factor); the forms implemented here are the chain-rule ones and
are the ones that match finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParams, DegenerateChartPoint
from .manifold import (CHART_A, CHART_B, ChartPoint, SpherePoint, TwistPair,
                       embed_h)


@dataclass
class JacobianF:
    """Differential of f at a point, split into the two coordinate blocks.

    d_gamma: (m+n+2) x (m+1) block of partials in the gamma directions.
    d_kappa: (m+n+2) x (n+1) block of partials in the kappa directions.
    """

    d_gamma: np.ndarray
    d_kappa: np.ndarray
    region: str

    @property
    def matrix(self) -> np.ndarray:
        return np.concatenate([self.d_gamma, self.d_kappa], axis=-1)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Apply to an ambient vector split as (gamma part, kappa part)."""
        m1 = self.d_gamma.shape[-1]
        return self.d_gamma @ vec[..., :m1] + self.d_kappa @ vec[..., m1:]


def df_region_a(p: ChartPoint) -> JacobianF:
    """Differential of the chart-A branch of f (twist independent).

    With u = x-tilde, v = y-tilde and s = sqrt(1 + |u|^2):

        d gamma-block = u u^T / s + s I   |   -|u|^2 (u v^T) / s
        d kappa-block = (v u^T) / s       |   s I - |u|^2 (v v^T) / s
    """
    if p.chart != CHART_A:
        raise BadParams("df_region_a expects a chart-A point")
    u, v = p.u, p.v
    m1, n1 = u.shape[-1], v.shape[-1]
    uu = float(u @ u)
    s = np.sqrt(1.0 + uu)
    UL = np.outer(u, u) / s + s * np.eye(m1)
    UR = -(uu / s) * np.outer(u, v)
    LL = np.outer(v, u) / s
    LR = s * np.eye(n1) - (uu / s) * np.outer(v, v)
    return JacobianF(np.concatenate([UL, LL]), np.concatenate([UR, LR]), CHART_A)


def df_region_b(p: ChartPoint, tw: TwistPair, tol: float = 1e-13) -> JacobianF:
    """Differential of the chart-B branch of f.

    With gh = h1^{-1}(x-bar), kh = h2^{-1}(y-bar/|y-bar|), ny = |y-bar|,
    s = sqrt(1 + ny^2), D1 = dh1 at gh, D2 = dh2 at kh:

        upper-gamma[nu, j] = s D1[nu, j] - (ny^2/s) (D1 gh)[nu] gh[j]
        upper-kappa[nu, r] = (ny/s) (D1 gh)[nu] kh[r]
        lower-gamma[rho, j] = -s ybar[rho] gh[j] + (ny/s) (D2 kh)[rho] gh[j]
        lower-kappa[rho, r] = (s/ny) ybar[rho] kh[r] + s D2[rho, r]
                              - (1/s) (D2 kh)[rho] kh[r]
    """
    if p.chart != CHART_B:
        raise BadParams("df_region_b expects a chart-B point")
    u, v = p.u, p.v
    ny = float(np.linalg.norm(v))
    if ny <= tol:
        raise DegenerateChartPoint("chart-B differential is singular at y-bar = 0")
    s = np.sqrt(1.0 + ny * ny)
    gh = tw.h1.inv(u)
    kh = tw.h2.inv(v / ny)
    D1 = tw.h1.d_eval(gh)
    D2 = tw.h2.d_eval(kh)
    D1g = D1 @ gh
    D2k = D2 @ kh
    UL = s * D1 - (ny * ny / s) * np.outer(D1g, gh)
    UR = (ny / s) * np.outer(D1g, kh)
    LL = -s * np.outer(v, gh) + (ny / s) * np.outer(D2k, gh)
    LR = (s / ny) * np.outer(v, kh) + s * D2 - (1.0 / s) * np.outer(D2k, kh)
    return JacobianF(np.concatenate([UL, LL]), np.concatenate([UR, LR]), CHART_B)


def df(p: ChartPoint, tw: TwistPair) -> JacobianF:
    return df_region_a(p) if p.chart == CHART_A else df_region_b(p, tw)


# ---------------------------------------------------------------------------
# pushforward fields
# ---------------------------------------------------------------------------

def _split(vec, m1):
    return vec[..., :m1], vec[..., m1:]


def pushforward_values(values, p: ChartPoint, tw: TwistPair) -> list[np.ndarray]:
    """Push a list of ambient vectors at h(p) forward through f at p.

    Evaluates the explicit component sums of the differential blocks (not
    a generic matrix product); shared coefficient vectors are computed
    once per point, which is what the SDE integrator relies on.
    """
    m1 = tw.m + 1
    if p.chart == CHART_A:
        u, v = p.u, p.v
        uu = float(u @ u)
        s = np.sqrt(1.0 + uu)
        out = []
        for val in values:
            vg, vk = _split(val, m1)
            a = float(u @ vg)
            b = float(v @ vk)
            upper = (a / s) * u + s * vg - (uu * b / s) * u
            lower = (a / s) * v + s * vk - (uu * b / s) * v
            out.append(np.concatenate([upper, lower]))
        return out
    u, v = p.u, p.v
    ny = float(np.linalg.norm(v))
    if ny <= 1e-13:
        raise DegenerateChartPoint("chart-B pushforward is singular at y-bar = 0")
    s = np.sqrt(1.0 + ny * ny)
    gh = tw.h1.inv(u)
    kh = tw.h2.inv(v / ny)
    D1 = tw.h1.d_eval(gh)
    D1g = D1 @ gh
    D2 = tw.h2.d_eval(kh)
    D2k = D2 @ kh
    out = []
    for val in values:
        vg, vk = _split(val, m1)
        a = float(gh @ vg)
        b = float(kh @ vk)
        upper = s * (D1 @ vg) - (ny * ny / s) * a * D1g + (ny / s) * b * D1g
        lower = (-s * a) * v + (ny / s) * a * D2k \
            + (s * b / ny) * v + s * (D2 @ vk) - (b / s) * D2k
        out.append(np.concatenate([upper, lower]))
    return out


def pushforward(V, p: ChartPoint, tw: TwistPair) -> np.ndarray:
    """Value of the pushforward field f_* V at a chart point."""
    z = embed_h(p, tw)
    return pushforward_values([V.eval(z.z)], p, tw)[0]


def pushforward_via_matrix(V, p: ChartPoint, tw: TwistPair) -> np.ndarray:
    """Matrix-product evaluation of f_* V; kept as a cross-check oracle."""
    z = embed_h(p, tw)
    return df(p, tw).apply(V.eval(z.z))


@dataclass(frozen=True)
class PushforwardField:
    """The vector field f_* V on the glued manifold, in chart coordinates."""

    base: object          # AmbientVectorField on the sphere
    tw: TwistPair

    def __call__(self, p: ChartPoint) -> np.ndarray:
        return pushforward(self.base, p, self.tw)

    @property
    def label(self) -> str:
        return f"push({getattr(self.base, 'label', 'field')})"


# ---------------------------------------------------------------------------
# literal branch formulas and finite-difference oracles
# ---------------------------------------------------------------------------

def f_chart_a_raw(z: np.ndarray, m: int) -> np.ndarray:
    """Chart-A branch of f exactly as displayed, as an ambient map.

    (gamma, kappa) -> (gamma, kappa) * sqrt(1 + |gamma|^2/|kappa|^2).
    Used by the finite-difference oracles; the analytic blocks are its
    ambient derivatives restricted to the sphere.
    """
    z = np.asarray(z, dtype=float)
    g, k = z[..., :m + 1], z[..., m + 1:]
    s = np.sqrt(1.0 + np.sum(g * g, axis=-1, keepdims=True)
                / np.sum(k * k, axis=-1, keepdims=True))
    return np.concatenate([g * s, k * s], axis=-1)


def f_chart_b_raw(z: np.ndarray, tw: TwistPair) -> np.ndarray:
    """Chart-B branch of f exactly as displayed, as an ambient map.

    (gamma, kappa) -> (h1(gamma sqrt(|kappa|^2/|gamma|^2 + 1)),
                       (|kappa|/|gamma|) h2(kappa sqrt(1 + |gamma|^2/|kappa|^2))).
    """
    z = np.asarray(z, dtype=float)
    m = tw.m
    g, k = z[..., :m + 1], z[..., m + 1:]
    gg = np.sum(g * g, axis=-1, keepdims=True)
    kk = np.sum(k * k, axis=-1, keepdims=True)
    u = tw.h1.eval(g * np.sqrt(kk / gg + 1.0))
    v = np.sqrt(kk / gg) * tw.h2.eval(k * np.sqrt(1.0 + gg / kk))
    return np.concatenate([u, v], axis=-1)


def fd_jacobian(map_, point, step: float) -> np.ndarray:
    """Central-difference Jacobian of ``map_`` at ``point``.

    ``map_`` must be vectorized over a leading batch axis; the 2k
    perturbed evaluations are done in one call.  Exact for affine maps,
    O(step^2) truncation for C^3 maps.
    """
    if not step > 0:
        raise BadParams("fd step must be positive")
    x = np.asarray(point, dtype=float)
    k = x.shape[-1]
    eye = step * np.eye(k)
    stack = np.concatenate([x + eye, x - eye], axis=0)
    vals = np.asarray(map_(stack))
    return (vals[:k] - vals[k:]).T / (2.0 * step)


def fd_directional(map_, point, direction, step: float) -> np.ndarray:
    """Central difference of ``map_`` along ``direction``."""
    x = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    return (map_(x + step * d) - map_(x - step * d)) / (2.0 * step)
