"""Second-derivative structure of fields pulled back through the chart-B
embedding, and the numerical C^2 probe for the twist map near the
chart-B pole.

The chart-B embedding sends (x-bar, y-bar) to

    gamma = h1^{-1}(x-bar) / sqrt(1 + |y|^2),
    kappa = |y| h2^{-1}(y/|y|) / sqrt(1 + |y|^2),

so second y-derivatives of a pulled-back component V o h decompose into
six coefficient tensors (products of first partials of gamma and kappa,
and their second partials).  Every tensor here is assembled in closed
form from the twist derivatives and cross-checked against second central
differences of the embedding itself.

The probe studies the two maps whose regularity at y-bar = 0 decides
whether the transported fields stay C^2:

    g(y)  = h2^{-1}(y / |y|)          (degree-0 homogeneous)
    rg(y) = |y| h2^{-1}(y / |y|)      (degree-1 homogeneous)

On shells |y| = r it records the step-normalized second difference
sup |delta2 f| / h with step h = fd_step_frac * r.  This statistic is
h * |D2 f| up to truncation: flat in r when the map is linear (D2 = 0),
slope -1 when D2 grows like 1/r^2 (as it does for the direction map g of
any diffeomorphism), and slope >= 0 whenever D2 is bounded.  Fitting the
slope of log sup against log r therefore turns the C^2 question into a
scale law.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, DegenerateChartPoint
from .manifold import CHART_B, ChartPoint, SphereDiffeo, TwistPair, embed_b


def _chart_b_pieces(p: ChartPoint, tw: TwistPair):
    if p.chart != CHART_B:
        raise BadParams("second-derivative assembly expects a chart-B point")
    v = p.v
    ny = float(np.linalg.norm(v))
    if ny <= 1e-13:
        raise DegenerateChartPoint("chart-B derivatives are singular at y-bar = 0")
    yhat = v / ny
    s = 1.0 + ny * ny
    q1 = tw.h1.inv(p.u)
    g = tw.h2.inv(yhat)
    G = tw.h2.d_inv(yhat)
    return v, ny, yhat, s, q1, g, G


def dgamma_dxbar(p: ChartPoint, tw: TwistPair) -> np.ndarray:
    _, _, _, s, _, _, _ = _chart_b_pieces(p, tw)
    return tw.h1.d_inv(p.u) / np.sqrt(s)


def dgamma_dybar(p: ChartPoint, tw: TwistPair) -> np.ndarray:
    v, _, _, s, q1, _, _ = _chart_b_pieces(p, tw)
    return -np.outer(q1, v) / s**1.5


def dkappa_dybar(p: ChartPoint, tw: TwistPair) -> np.ndarray:
    v, ny, yhat, s, _, g, G = _chart_b_pieces(p, tw)
    Fc = v / (ny * s**1.5)
    Phat = (np.eye(len(v)) - np.outer(yhat, yhat)) / ny
    return np.outer(g, Fc) + (ny / np.sqrt(s)) * (G @ Phat)


def d2gamma_dxbar_dybar(p: ChartPoint, tw: TwistPair) -> np.ndarray:
    """Mixed second partials, indexed [i, l, c] for d2 gamma^i / dx^l dy^c."""
    v, _, _, s, _, _, _ = _chart_b_pieces(p, tw)
    Q1 = tw.h1.d_inv(p.u)
    return -Q1[:, :, None] * v[None, None, :] / s**1.5


def d2gamma_dybar2(p: ChartPoint, tw: TwistPair) -> np.ndarray:
    """Second y-partials of gamma, indexed [i, c, d]."""
    v, _, _, s, q1, _, _ = _chart_b_pieces(p, tw)
    n1 = len(v)
    yy = np.outer(v, v)
    core = 3.0 * yy / s**2.5 - np.eye(n1) / s**1.5
    return q1[:, None, None] * core[None, :, :]


def d2kappa_dybar2(p: ChartPoint, tw: TwistPair) -> np.ndarray:
    """Second y-partials of kappa, indexed [r, c, d].

    Assembled from the product rule on kappa = F(y) g(y/|y|) with
    F = |y| / sqrt(1 + |y|^2); uses the twist's second derivative.
    """
    v, ny, yhat, s, _, g, G = _chart_b_pieces(p, tw)
    n1 = len(v)
    eye = np.eye(n1)
    G2 = tw.h2.d2_inv(yhat)
    F = ny / np.sqrt(s)
    Fc = v / (ny * s**1.5)
    Fcd = (eye / (ny * s**1.5)
           - np.outer(v, v) / (ny**3 * s**1.5)
           - 3.0 * np.outer(v, v) / (ny * s**2.5))
    Phat = (eye - np.outer(yhat, yhat)) / ny
    dPhat = (3.0 * np.einsum("t,c,d->tcd", yhat, yhat, yhat)
             - np.einsum("tc,d->tcd", eye, yhat)
             - np.einsum("td,c->tcd", eye, yhat)
             - np.einsum("cd,t->tcd", eye, yhat)) / ny**2
    Damb = G @ Phat
    Gcd = (np.einsum("rtu,ud,tc->rcd", G2, Phat, Phat)
           + np.einsum("rt,tcd->rcd", G, dPhat))
    return (np.einsum("cd,r->rcd", Fcd, g)
            + np.einsum("c,rd->rcd", Fc, Damb)
            + np.einsum("d,rc->rcd", Fc, Damb)
            + F * Gcd)


def koe_terms(p: ChartPoint, tw: TwistPair, which: int) -> np.ndarray:
    """The six coefficient tensors of the second y-derivatives of V o h.

    1: (dgamma^i/dy^c)(dgamma^j/dy^d)      -> [i, j, c, d]
    2: d2gamma^i/dy^c dy^d                 -> [i, c, d]
    3: (dkappa^r/dy^c)(dgamma^j/dy^d)      -> [r, j, c, d]
    4: (dkappa^r/dy^d)(dgamma^j/dy^c)      -> [r, j, c, d]
    5: (dkappa^r/dy^c)(dkappa^s/dy^d)      -> [r, s, c, d]
    6: d2kappa^r/dy^c dy^d                 -> [r, c, d]

    All are closed forms in the twist derivatives; term 6 is the only
    one that needs the second derivative of h2^{-1} and is the term
    whose behavior as y-bar -> 0 depends on the twist.
    """
    if which == 1:
        dg = dgamma_dybar(p, tw)
        return np.einsum("ic,jd->ijcd", dg, dg)
    if which == 2:
        return d2gamma_dybar2(p, tw)
    if which == 3:
        return np.einsum("rc,jd->rjcd", dkappa_dybar(p, tw), dgamma_dybar(p, tw))
    if which == 4:
        return np.einsum("rd,jc->rjcd", dkappa_dybar(p, tw), dgamma_dybar(p, tw))
    if which == 5:
        dk = dkappa_dybar(p, tw)
        return np.einsum("rc,sd->rscd", dk, dk)
    if which == 6:
        return d2kappa_dybar2(p, tw)
    raise BadParams("koe term index must be 1..6")


def d2_pullback_components(V, p: ChartPoint, tw: TwistPair, pair: str) -> np.ndarray:
    """Second partials of the pulled-back components V^nu o h at a chart-B
    point, for coordinate pair "xx", "xy" (one x-bar, one y-bar) or "yy".

    Output indices: [nu, a, b] with a, b the two differentiation slots
    ("xy" means [nu, c, l] with c a y-index and l an x-index).  Requires
    closed-form first and second derivatives of V.
    """
    if V.d_eval is None or V.d2_eval is None:
        raise BadParams("field must carry closed-form first and second derivatives")
    m1 = tw.m + 1
    gamma, kappa = embed_b(p.u, p.v, tw)
    z = np.concatenate([gamma, kappa])
    dV = V.d_eval(z)
    d2V = V.d2_eval(z)
    dVg = dV[:, :m1]
    dVk = dV[:, m1:]
    d2Vgg = d2V[:, :m1, :m1]
    d2Vgk = d2V[:, :m1, m1:]
    d2Vkk = d2V[:, m1:, m1:]
    if pair == "xx":
        dgx = dgamma_dxbar(p, tw)
        Q2 = tw.h1.d2_inv(p.u)
        s = 1.0 + float(p.v @ p.v)
        return (np.einsum("nai,ij,al->njl", d2Vgg, dgx, dgx)
                + np.einsum("ni,ijl->njl", dVg, Q2 / np.sqrt(s)))
    if pair == "xy":
        dgx = dgamma_dxbar(p, tw)
        dgy = dgamma_dybar(p, tw)
        dky = dkappa_dybar(p, tw)
        d2gxy = d2gamma_dxbar_dybar(p, tw)
        return (np.einsum("nai,ic,al->ncl", d2Vgg, dgy, dgx)
                + np.einsum("ni,ilc->ncl", dVg, d2gxy)
                + np.einsum("nar,rc,al->ncl", d2Vgk, dky, dgx))
    if pair == "yy":
        return (np.einsum("nji,ijcd->ncd", d2Vgg, koe_terms(p, tw, 1))
                + np.einsum("ni,icd->ncd", dVg, koe_terms(p, tw, 2))
                + np.einsum("njr,rjcd->ncd", d2Vgk, koe_terms(p, tw, 3))
                + np.einsum("njr,rjcd->ncd", d2Vgk, koe_terms(p, tw, 4))
                + np.einsum("nrs,rscd->ncd", d2Vkk, koe_terms(p, tw, 5))
                + np.einsum("nr,rcd->ncd", dVk, koe_terms(p, tw, 6)))
    raise BadParams("pair must be one of 'xx', 'xy', 'yy'")


# ---------------------------------------------------------------------------
# C^2 probe
# ---------------------------------------------------------------------------

@dataclass
class RegularityReport:
    """Shell-wise second-difference sups and fitted growth exponents.

    ``d2_sup_g`` / ``d2_sup_rg`` hold, per shell radius r, the sup over
    sampled points and coordinate pairs of |delta2 f| / h (second
    central difference divided by one step factor, h = fd_step_frac * r).
    ``verdict`` is "bounded" when the |y| g map shows no negative scale
    law (exponent >= -0.1), "blows_up" below -0.25, else "inconclusive".
    """

    shells: np.ndarray
    d2_sup_g: np.ndarray
    d2_sup_rg: np.ndarray
    growth_exponent_g: float
    growth_exponent_rg: float
    verdict: str
    samples_per_shell: int
    fd_step_frac: float

    def to_dict(self) -> dict:
        return {
            "shells": [float(r) for r in self.shells],
            "d2_sup_g": [float(x) for x in self.d2_sup_g],
            "d2_sup_rg": [float(x) for x in self.d2_sup_rg],
            "growth_exponent_g": float(self.growth_exponent_g),
            "growth_exponent_rg": float(self.growth_exponent_rg),
            "verdict": self.verdict,
            "samples_per_shell": self.samples_per_shell,
            "fd_step_frac": self.fd_step_frac,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _second_diff_sup(f, Y, h):
    """sup over points and coordinate pairs of |delta2 f| / h."""
    k = Y.shape[-1]
    sup = 0.0
    eye = np.eye(k)
    for c in range(k):
        ec = h * eye[c]
        d2 = f(Y + ec) - 2.0 * f(Y) + f(Y - ec)
        sup = max(sup, float(np.max(np.linalg.norm(d2, axis=-1))) / h)
        for d in range(c + 1, k):
            ed = h * eye[d]
            d2 = (f(Y + ec + ed) - f(Y + ec - ed)
                  - f(Y - ec + ed) + f(Y - ec - ed)) / 4.0
            sup = max(sup, float(np.max(np.linalg.norm(d2, axis=-1))) / h)
    return sup


def probe_c2(h2: SphereDiffeo, shells=None, samples_per_shell: int = 64,
             fd_step_frac: float = 1e-2, seed: int = 0) -> RegularityReport:
    """Probe the twist's regularity near the chart-B pole by scale law.

    Samples each shell |y| = r with a deterministic per-shell stream,
    measures the step-normalized second differences of g = h2^{-1}(y/|y|)
    and of |y| g, and fits the slopes of log2 sup against log2 r by least
    squares.
    """
    if shells is None:
        shells = 2.0 ** -np.arange(1, 9)
    shells = np.asarray(shells, dtype=float)
    if len(shells) < 5:
        raise BadParams("need at least five shells for the exponent fit")
    if np.any(shells <= 0) or np.any(shells > 1) or np.any(np.diff(shells) >= 0):
        raise BadParams("shells must be strictly decreasing in (0, 1]")
    if not 0 < fd_step_frac < 0.5:
        raise BadParams("fd_step_frac must lie in (0, 1/2)")
    k = h2.dim + 1

    def gmap(Y):
        return h2.inv(Y / np.linalg.norm(Y, axis=-1, keepdims=True))

    def rgmap(Y):
        ny = np.linalg.norm(Y, axis=-1, keepdims=True)
        return ny * h2.inv(Y / ny)

    sup_g, sup_rg = [], []
    for idx, r in enumerate(shells):
        key = np.array([np.uint64(seed % (1 << 64)), np.uint64(idx + 1)], dtype=np.uint64)
        gstream = np.random.Generator(np.random.Philox(key=key))
        Y = gstream.standard_normal((samples_per_shell, k))
        Y *= r / np.linalg.norm(Y, axis=-1, keepdims=True)
        h = fd_step_frac * r
        sup_g.append(_second_diff_sup(gmap, Y, h))
        sup_rg.append(_second_diff_sup(rgmap, Y, h))
    sup_g = np.array(sup_g)
    sup_rg = np.array(sup_rg)
    lr = np.log2(shells)
    slope_g = float(np.polyfit(lr, np.log2(np.maximum(sup_g, 1e-300)), 1)[0])
    slope_rg = float(np.polyfit(lr, np.log2(np.maximum(sup_rg, 1e-300)), 1)[0])
    if slope_rg >= -0.1:
        verdict = "bounded"
    elif slope_rg < -0.25:
        verdict = "blows_up"
    else:
        verdict = "inconclusive"
    return RegularityReport(
        shells=shells, d2_sup_g=sup_g, d2_sup_rg=sup_rg,
        growth_exponent_g=slope_g, growth_exponent_rg=slope_rg,
        verdict=verdict, samples_per_shell=samples_per_shell,
        fd_step_frac=fd_step_frac,
    )
