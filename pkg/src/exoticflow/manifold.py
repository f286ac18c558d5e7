"""Two-chart atlas for twisted spheres and their identification with the
round sphere.

The manifold is glued from chart A = R^{m+1} x S^n and chart B =
S^m x R^{n+1} by the twisted identification

    (t*x, y)  ~  (h1(x), h2(y) / t),      t > 0, x in S^m, y in S^n,

where h1, h2 are diffeomorphisms of the two sphere factors.  The module
provides the chart transition maps, the homeomorphism onto the round
sphere S^{m+n+1} (``embed_h``), its inverse (``project_f``), first
derivatives of the embedding, and a catalog of twist fixtures with
analytic derivatives.

Conventions
-----------
* Points of the ambient space R^{m+n+2} are split as z = (gamma, kappa)
  with gamma the first m+1 and kappa the last n+1 coordinates.
* All array functions accept arbitrary leading batch axes; coordinates
  live on the last axis.
* Twist maps are stored as ambient maps on R^{k+1} that restrict to
  sphere diffeomorphisms.  Their derivative callables return the ambient
  Jacobian/second-derivative of that same formula, which is what the
  analytic chart differentials are built from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BadParams, DegenerateChartPoint, PoleChartMismatch

CHART_A = "A"
CHART_B = "B"

# chart selection thresholds on |kappa|^2, with hysteresis band for flows
_CHART_SPLIT = 0.5
_HYSTERESIS = 0.05


def _norm(x, keepdims=False):
    return np.linalg.norm(x, axis=-1, keepdims=keepdims)


@dataclass(frozen=True)
class ModelParams:
    """Dimensions of the two sphere factors and the geometric tolerance.

    The glued manifold has dimension m + n + 1 and ambient dimension
    N = m + n + 2.
    """

    m: int
    n: int
    tol: float = 1e-9

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise BadParams(f"factor dimensions must be >= 1, got m={self.m}, n={self.n}")
        if not self.tol > 0:
            raise BadParams("tol must be positive")

    @property
    def ambient_dim(self) -> int:
        return self.m + self.n + 2


@dataclass(frozen=True)
class SphereDiffeo:
    """A diffeomorphism of S^k given as an ambient map with derivatives.

    ``eval``/``inv`` map (..., k+1) arrays to (..., k+1) arrays and
    restrict to mutually inverse maps of the unit sphere.  ``d_eval`` and
    ``d_inv`` return the ambient Jacobian with shape (..., k+1, k+1),
    ``d2_eval``/``d2_inv`` the symmetric second derivative tensor with
    shape (..., k+1, k+1, k+1), indexed [out, in, in].
    """

    dim: int
    eval: Callable
    inv: Callable
    d_eval: Callable
    d2_eval: Callable
    d_inv: Callable
    d2_inv: Callable
    label: str = "custom"

    @classmethod
    def from_maps(cls, dim, eval, inv, d_eval=None, d2_eval=None,
                  d_inv=None, d2_inv=None, label="custom",
                  fd_step=1e-6, fd_step2=1e-4):
        """Wrap user-supplied sphere maps, filling missing derivatives with
        central differences of the normalized-argument extension
        x -> f(x / |x|).

        The wrapped ``eval``/``inv`` are replaced by that 0-homogeneous
        extension so the stored derivatives and the stored map agree as
        ambient objects.
        """
        ev = _normalized_extension(eval)
        iv = _normalized_extension(inv)
        return cls(
            dim=dim,
            eval=ev,
            inv=iv,
            d_eval=d_eval if d_eval is not None else _fd_map_jacobian(ev, fd_step),
            d2_eval=d2_eval if d2_eval is not None else _fd_map_second(ev, fd_step2),
            d_inv=d_inv if d_inv is not None else _fd_map_jacobian(iv, fd_step),
            d2_inv=d2_inv if d2_inv is not None else _fd_map_second(iv, fd_step2),
            label=label,
        )


def _normalized_extension(f):
    def ext(x):
        x = np.asarray(x, dtype=float)
        return f(x / _norm(x, keepdims=True))
    return ext


def _fd_map_jacobian(f, step):
    def jac(x):
        x = np.asarray(x, dtype=float)
        k = x.shape[-1]
        eye = step * np.eye(k)
        xp = x[..., None, :] + eye
        xm = x[..., None, :] - eye
        J = (f(xp) - f(xm)) / (2.0 * step)        # (..., in, out)
        return np.swapaxes(J, -1, -2)
    return jac


def _fd_map_second(f, step):
    def d2(x):
        x = np.asarray(x, dtype=float)
        k = x.shape[-1]
        out = np.empty(x.shape[:-1] + (k, k, k))
        eye = np.eye(k)
        f0 = f(x)
        for a in range(k):
            ea = step * eye[a]
            out[..., :, a, a] = (f(x + ea) - 2.0 * f0 + f(x - ea)) / step**2
            for b in range(a + 1, k):
                eb = step * eye[b]
                mixed = (f(x + ea + eb) - f(x + ea - eb)
                         - f(x - ea + eb) + f(x - ea - eb)) / (4.0 * step**2)
                out[..., :, a, b] = mixed
                out[..., :, b, a] = mixed
        return out
    return d2


@dataclass(frozen=True)
class TwistPair:
    """The pair (h1, h2) of sphere diffeomorphisms defining the gluing."""

    h1: SphereDiffeo
    h2: SphereDiffeo

    @property
    def m(self) -> int:
        return self.h1.dim

    @property
    def n(self) -> int:
        return self.h2.dim

    @property
    def ambient_dim(self) -> int:
        return self.m + self.n + 2

    @property
    def label(self) -> str:
        return f"{self.h1.label}*{self.h2.label}"


@dataclass
class ChartPoint:
    """A point of the glued manifold in one of the two charts.

    chart A: u = x-tilde in R^{m+1} (free), v = y-tilde on S^n.
    chart B: u = x-bar on S^m, v = y-bar in R^{n+1} (free).
    """

    chart: str
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.chart not in (CHART_A, CHART_B):
            raise BadParams(f"unknown chart {self.chart!r}")

    def validate(self, tol=1e-9):
        constrained = self.v if self.chart == CHART_A else self.u
        err = abs(float(_norm(constrained)) - 1.0)
        if err > tol:
            raise BadParams(
                f"chart {self.chart} constraint violated by {err:.3e}")
        return self

    @property
    def coords(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])


@dataclass
class SpherePoint:
    """A point (gamma, kappa) of the embedded round sphere S^{m+n+1}."""

    gamma: np.ndarray
    kappa: np.ndarray

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float)
        self.kappa = np.asarray(self.kappa, dtype=float)

    @classmethod
    def from_ambient(cls, z, m):
        z = np.asarray(z, dtype=float)
        return cls(z[..., :m + 1], z[..., m + 1:])

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.gamma, self.kappa], axis=-1)

    def validate(self, tol=1e-9):
        err = abs(float(_norm(self.gamma)) ** 2 + float(_norm(self.kappa)) ** 2 - 1.0)
        if err > tol:
            raise BadParams(f"point off the unit sphere by {err:.3e}")
        return self

    @property
    def gamma_hat(self) -> np.ndarray:
        return self.gamma / _norm(self.gamma, keepdims=True)

    @property
    def kappa_hat(self) -> np.ndarray:
        return self.kappa / _norm(self.kappa, keepdims=True)

    @property
    def radial(self) -> float:
        """The gluing parameter t = |gamma| / |kappa|."""
        return float(_norm(self.gamma) / _norm(self.kappa))


# ---------------------------------------------------------------------------
# embeddings onto the round sphere (batch array level)
# ---------------------------------------------------------------------------

def embed_a(u, v):
    """Chart-A embedding (u, v) -> (u, v) / sqrt(1 + |u|^2).

    Exact on the chart: with |v| = 1 the image satisfies
    |gamma|^2 + |kappa|^2 = 1.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    s = np.sqrt(1.0 + np.sum(u * u, axis=-1, keepdims=True))
    return u / s, v / s


def embed_b(u, v, tw: TwistPair):
    """Chart-B embedding.

    gamma = h1^{-1}(u) / sqrt(1 + |v|^2),
    kappa = |v| h2^{-1}(v / |v|) / sqrt(1 + |v|^2), extended by kappa = 0
    at the pole v = 0.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    ny = _norm(v, keepdims=True)
    s = np.sqrt(1.0 + ny * ny)
    gamma = tw.h1.inv(u) / s
    safe = np.where(ny > 0.0, ny, 1.0)
    vhat = np.where(ny > 0.0, v / safe, _e1_like(v))
    kappa = tw.h2.inv(vhat) * np.where(ny > 0.0, ny / s, 0.0)
    return gamma, kappa


def _e1_like(v):
    e = np.zeros_like(v)
    e[..., 0] = 1.0
    return e


def project_a(gamma, kappa):
    """Chart-A branch of the inverse map: (gamma/|kappa|, kappa/|kappa|).

    This is the algebraically reduced form of the inverse (exact on the
    sphere); it extends continuously to gamma = 0 and is singular only at
    kappa = 0.  Callers must keep |kappa| > 0.
    """
    gamma = np.asarray(gamma, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    nk = _norm(kappa, keepdims=True)
    return gamma / nk, kappa / nk


def project_b(gamma, kappa, tw: TwistPair):
    """Chart-B branch of the inverse map.

    u = h1(gamma / |gamma|),  v = (|kappa| / |gamma|) h2(kappa / |kappa|),
    extended by v = 0 at kappa = 0.  Singular only at gamma = 0.
    """
    gamma = np.asarray(gamma, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    ng = _norm(gamma, keepdims=True)
    nk = _norm(kappa, keepdims=True)
    u = tw.h1.eval(gamma / ng)
    safe = np.where(nk > 0.0, nk, 1.0)
    khat = np.where(nk > 0.0, kappa / safe, _e1_like(kappa))
    v = tw.h2.eval(khat) * np.where(nk > 0.0, nk / ng, 0.0)
    return u, v


def embed_jacobian(p: ChartPoint, tw: TwistPair):
    """Ambient-coordinate Jacobian of the embedding at a chart point.

    Returns the (m+n+2) x (m+n+2) matrix d(gamma, kappa)/d(u, v) of the
    chart's embedding formula, differentiated as an ambient map.
    """
    m, n = tw.m, tw.n
    u, v = p.u, p.v
    if p.chart == CHART_A:
        s2 = 1.0 + float(u @ u)
        s = np.sqrt(s2)
        dgu = np.eye(m + 1) / s - np.outer(u, u) / s**3
        dgv = np.zeros((m + 1, n + 1))
        dku = -np.outer(v, u) / s**3
        dkv = np.eye(n + 1) / s
    else:
        ny = float(_norm(v))
        if ny == 0.0:
            raise DegenerateChartPoint("embedding Jacobian needs |y-bar| > 0 in chart B")
        s2 = 1.0 + ny * ny
        s = np.sqrt(s2)
        yhat = v / ny
        g = tw.h2.inv(yhat)
        G = tw.h2.d_inv(yhat)
        dgu = tw.h1.d_inv(u) / s
        dgv = -np.outer(tw.h1.inv(u), v) / s**3
        dku = np.zeros((n + 1, m + 1))
        # d kappa / d y-bar, from kappa = |y| g(y/|y|) / sqrt(1+|y|^2)
        P = (np.eye(n + 1) - np.outer(yhat, yhat))
        dkv = (np.outer(g, yhat) / s**3) + (G @ P) / s
    top = np.concatenate([dgu, dgv], axis=1)
    bot = np.concatenate([dku, dkv], axis=1)
    return np.concatenate([top, bot], axis=0)


# ---------------------------------------------------------------------------
# object-level operations
# ---------------------------------------------------------------------------

def embed_h(p: ChartPoint, tw: TwistPair) -> SpherePoint:
    """Map a chart point to the round sphere (the gluing homeomorphism)."""
    if p.chart == CHART_A:
        gamma, kappa = embed_a(p.u, p.v)
    else:
        gamma, kappa = embed_b(p.u, p.v, tw)
    return SpherePoint(gamma, kappa)


def select_chart(z: SpherePoint, prev: str | None = None) -> str:
    """Pick the chart whose formulas are well conditioned at z.

    Plain rule: chart A iff |kappa|^2 >= 1/2 (ties to A).  With a
    previous-chart hint the switch only fires once |kappa|^2 leaves the
    hysteresis band 1/2 +- 0.05, which prevents seam chattering along
    trajectories.
    """
    ks = float(np.sum(z.kappa * z.kappa))
    if prev is None:
        return CHART_A if ks >= _CHART_SPLIT else CHART_B
    if prev == CHART_A:
        return CHART_B if ks < _CHART_SPLIT - _HYSTERESIS else CHART_A
    if prev == CHART_B:
        return CHART_A if ks > _CHART_SPLIT + _HYSTERESIS else CHART_B
    raise BadParams(f"unknown chart hint {prev!r}")


def project_f(z: SpherePoint, tw: TwistPair, want: str = "auto",
              prev: str | None = None, tol: float = 1e-9) -> ChartPoint:
    """Map a sphere point to the glued manifold (inverse of ``embed_h``).

    ``want`` may force a chart; "auto" uses ``select_chart`` (with the
    optional previous-chart hint).  Raises PoleChartMismatch if the
    requested chart is singular at z.
    """
    if want == "auto":
        want = select_chart(z, prev)
    if want == CHART_A:
        if float(_norm(z.kappa)) <= tol:
            raise PoleChartMismatch("chart A is singular at kappa = 0")
        u, v = project_a(z.gamma, z.kappa)
        return ChartPoint(CHART_A, u, v)
    if want == CHART_B:
        if float(_norm(z.gamma)) <= tol:
            raise PoleChartMismatch("chart B is singular at gamma = 0")
        u, v = project_b(z.gamma, z.kappa, tw)
        return ChartPoint(CHART_B, u, v)
    raise BadParams(f"unknown chart request {want!r}")


def transition_ab(p: ChartPoint, tw: TwistPair, tol: float = 1e-9) -> ChartPoint:
    """Chart A -> chart B through the twisted gluing.

    (x, y) -> (h1(x/|x|), h2(y)/|x|); undefined at x = 0.
    """
    if p.chart != CHART_A:
        raise BadParams("transition_ab expects a chart-A point")
    nx = float(_norm(p.u))
    if nx <= tol:
        raise DegenerateChartPoint("point has no chart-B representative (x-tilde = 0)")
    u = tw.h1.eval(p.u / nx)
    v = tw.h2.eval(p.v) / nx
    return ChartPoint(CHART_B, u, v)


def transition_ba(p: ChartPoint, tw: TwistPair, tol: float = 1e-9) -> ChartPoint:
    """Chart B -> chart A, the inverse gluing.

    (x, y) -> (h1^{-1}(x)/|y|, h2^{-1}(y/|y|)); undefined at y = 0.
    """
    if p.chart != CHART_B:
        raise BadParams("transition_ba expects a chart-B point")
    ny = float(_norm(p.v))
    if ny <= tol:
        raise DegenerateChartPoint("point has no chart-A representative (y-bar = 0)")
    u = tw.h1.inv(p.u) / ny
    v = tw.h2.inv(p.v / ny)
    return ChartPoint(CHART_A, u, v)


# ---------------------------------------------------------------------------
# twist fixtures
# ---------------------------------------------------------------------------

def _identity_diffeo(dim: int) -> SphereDiffeo:
    k = dim + 1

    def ev(x):
        return np.array(x, dtype=float, copy=True)

    def dv(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(k), x.shape[:-1] + (k, k))

    def d2(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (k, k, k))

    return SphereDiffeo(dim, ev, ev, dv, d2, dv, d2, label="identity")


def _linear_diffeo(M: np.ndarray, label: str) -> SphereDiffeo:
    M = np.asarray(M, dtype=float)
    k = M.shape[0]
    Mi = M.T  # orthogonal

    def make(mat):
        def ev(x):
            return np.asarray(x, dtype=float) @ mat.T

        def dv(x):
            x = np.asarray(x, dtype=float)
            return np.broadcast_to(mat, x.shape[:-1] + (k, k))
        return ev, dv

    def d2(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (k, k, k))

    ev, dv = make(M)
    iv, di = make(Mi)
    return SphereDiffeo(k - 1, ev, iv, dv, d2, di, d2, label=label)


def rotation_diffeo(R: np.ndarray, tol: float = 1e-9) -> SphereDiffeo:
    """Sphere diffeomorphism x -> R x for orthogonal R."""
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise BadParams("rotation matrix must be square")
    if np.max(np.abs(R.T @ R - np.eye(R.shape[0]))) > tol:
        raise BadParams("rotation matrix is not orthogonal")
    return _linear_diffeo(R, label="rotation")


def _quat_mul(a, b):
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 + y1 * w2 + z1 * x2 - x1 * z2,
        w1 * z2 + z1 * w2 + x1 * y2 - y1 * x2,
    ])


def quaternion_conjugation_matrix(q) -> np.ndarray:
    """4x4 matrix of y -> q y q^{-1} for a unit quaternion q=(w,x,y,z)."""
    q = np.asarray(q, dtype=float)
    cols = []
    qc = q * np.array([1.0, -1.0, -1.0, -1.0])
    for j in range(4):
        e = np.zeros(4)
        e[j] = 1.0
        cols.append(_quat_mul(_quat_mul(q, e), qc))
    return np.stack(cols, axis=1)


def quaternion_conj_diffeo(q, tol: float = 1e-9) -> SphereDiffeo:
    """Diffeomorphism of S^3 by quaternion conjugation y -> q y q^{-1}."""
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise BadParams("quaternion must have 4 components")
    if abs(float(np.linalg.norm(q)) - 1.0) > tol:
        raise BadParams("quaternion must be unit")
    M = quaternion_conjugation_matrix(q)
    d = _linear_diffeo(M, label="quaternion_conj")
    return d


def linear_phi(a: float):
    """Angle profile phi(s) = a s with its derivatives."""
    return (lambda s: a * s, lambda s: a * np.ones_like(s), lambda s: np.zeros_like(s))


def sine_phi(a: float, w: float = 1.0):
    """Angle profile phi(s) = a sin(w s) with its derivatives."""
    return (
        lambda s: a * np.sin(w * s),
        lambda s: a * w * np.cos(w * s),
        lambda s: -a * w * w * np.sin(w * s),
    )


def latitude_shear_diffeo(dim: int, phi, label: str = "latitude_shear") -> SphereDiffeo:
    """Rotate coordinates (1, 2) by the angle phi(y_last).

    The rotation angle depends only on the last coordinate, so the map
    preserves every ambient sphere and its inverse is the shear with
    angle -phi.  Requires dim >= 2 (at least three ambient coordinates)
    and a smooth phi given as callables (phi, phi', phi'').
    """
    if dim < 2:
        raise BadParams("latitude_shear needs a sphere factor of dimension >= 2")
    try:
        f, df, d2f = phi
        if not all(callable(g) for g in (f, df, d2f)):
            raise TypeError
    except (TypeError, ValueError):
        raise BadParams("phi must be a triple of callables (phi, dphi, d2phi)") from None
    k = dim + 1

    def build(sign):
        def ev(x):
            x = np.asarray(x, dtype=float)
            th = sign * f(x[..., -1])
            c, s = np.cos(th), np.sin(th)
            out = np.array(x, copy=True)
            out[..., 0] = c * x[..., 0] - s * x[..., 1]
            out[..., 1] = s * x[..., 0] + c * x[..., 1]
            return out

        def dv(x):
            x = np.asarray(x, dtype=float)
            w = x[..., -1]
            th = sign * f(w)
            dth = sign * df(w)
            c, s = np.cos(th), np.sin(th)
            J = np.zeros(x.shape[:-1] + (k, k))
            idx = np.arange(k)
            J[..., idx, idx] = 1.0
            J[..., 0, 0] = c
            J[..., 0, 1] = -s
            J[..., 1, 0] = s
            J[..., 1, 1] = c
            p1 = c * x[..., 0] - s * x[..., 1]
            p2 = s * x[..., 0] + c * x[..., 1]
            J[..., 0, k - 1] += dth * (-p2)
            J[..., 1, k - 1] += dth * p1
            return J

        def d2(x):
            x = np.asarray(x, dtype=float)
            w = x[..., -1]
            th = sign * f(w)
            dth = sign * df(w)
            d2th = sign * d2f(w)
            c, s = np.cos(th), np.sin(th)
            p1 = c * x[..., 0] - s * x[..., 1]
            p2 = s * x[..., 0] + c * x[..., 1]
            H = np.zeros(x.shape[:-1] + (k, k, k))
            last = k - 1
            # mixed (y1, w) and (y2, w) entries of the rotated pair
            H[..., 0, 0, last] = H[..., 0, last, 0] = -s * dth
            H[..., 0, 1, last] = H[..., 0, last, 1] = -c * dth
            H[..., 1, 0, last] = H[..., 1, last, 0] = c * dth
            H[..., 1, 1, last] = H[..., 1, last, 1] = -s * dth
            H[..., 0, last, last] = -d2th * p2 - dth * dth * p1
            H[..., 1, last, last] = d2th * p1 - dth * dth * p2
            return H

        return ev, dv, d2

    ev, dv, d2 = build(+1.0)
    iv, di, d2i = build(-1.0)
    return SphereDiffeo(dim, ev, iv, dv, d2, di, d2i, label=label)


def plane_rotation(dim: int, i: int, j: int, angle: float) -> np.ndarray:
    """Orthogonal rotation of R^dim by ``angle`` in the (i, j) plane."""
    R = np.eye(dim)
    c, s = np.cos(angle), np.sin(angle)
    R[i, i] = c
    R[j, j] = c
    R[i, j] = -s
    R[j, i] = s
    return R


def _default_rotation(k: int, angle: float) -> np.ndarray:
    R = plane_rotation(k, 0, 1, angle)
    if k >= 3:
        R = R @ plane_rotation(k, 1, k - 1, 0.6 * angle)
    return R


_DEFAULT_Q1 = np.array([1.0, 2.0, -1.0, 0.5])
_DEFAULT_Q2 = np.array([0.3, -1.0, 0.2, 2.0])


def twist_fixtures(name: str, params: ModelParams, **kw) -> TwistPair:
    """Build a named twist pair.

    identity            -- both factors untouched.
    rotation            -- orthogonal maps; kw: R1, R2 or angle1, angle2.
    quaternion_conj     -- m = n = 3 conjugations; kw: q1, q2 (unit).
    latitude_shear      -- both factors sheared; kw: phi1, phi2 (callable
                           triples) or amp1, amp2 for linear profiles.
    """
    m, n = params.m, params.n
    if name == "identity":
        return TwistPair(_identity_diffeo(m), _identity_diffeo(n))
    if name == "rotation":
        R1 = kw.get("R1")
        R2 = kw.get("R2")
        if R1 is None:
            R1 = _default_rotation(m + 1, kw.get("angle1", 0.9))
        if R2 is None:
            R2 = _default_rotation(n + 1, kw.get("angle2", -0.55))
        return TwistPair(rotation_diffeo(R1, params.tol), rotation_diffeo(R2, params.tol))
    if name == "quaternion_conj":
        if m != 3 or n != 3:
            raise BadParams("quaternion_conj twists need m = n = 3")
        q1 = np.asarray(kw.get("q1", _DEFAULT_Q1 / np.linalg.norm(_DEFAULT_Q1)), dtype=float)
        q2 = np.asarray(kw.get("q2", _DEFAULT_Q2 / np.linalg.norm(_DEFAULT_Q2)), dtype=float)
        return TwistPair(quaternion_conj_diffeo(q1, params.tol),
                         quaternion_conj_diffeo(q2, params.tol))
    if name == "latitude_shear":
        if m < 2 or n < 2:
            raise BadParams("latitude_shear twists need m >= 2 and n >= 2")
        phi1 = kw.get("phi1", linear_phi(kw.get("amp1", 0.8)))
        phi2 = kw.get("phi2", linear_phi(kw.get("amp2", -1.1)))
        return TwistPair(latitude_shear_diffeo(m, phi1),
                         latitude_shear_diffeo(n, phi2))
    raise BadParams(f"unknown twist fixture {name!r}")
