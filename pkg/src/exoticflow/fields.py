"""Vector fields on the round sphere: fixtures, divergence, and Sobolev /
L^p norm estimators.

Fields are stored in ambient coordinates.  Tangency (z . V(z) = 0 on the
sphere) is a contract of every fixture; user fields can be checked with
``tangency_defect``.  The intrinsic divergence and the covariant
derivative are realized through the tangential projector P = I - z z^T:
for an embedded round sphere the Levi-Civita connection is the projected
ambient derivative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadParams
from .measure import sample_nu, sphere_area


@dataclass(frozen=True)
class AmbientVectorField:
    """A vector field on S^{N-1} in ambient coordinates.

    ``eval`` maps (..., N) to (..., N).  ``d_eval`` (optional) returns
    the ambient Jacobian (..., N, N) indexed [out, in]; ``d2_eval``
    (optional) the symmetric second derivative (..., N, N, N).  Fields
    without closed-form derivatives fall back to central differences
    where a derivative is needed.
    """

    dim: int
    eval: Callable
    smoothness: str = "C2"            # "C2" or "sobolev_only"
    label: str = "field"
    d_eval: Callable | None = None
    d2_eval: Callable | None = None

    def jacobian(self, z, step: float = 1e-5) -> np.ndarray:
        if self.d_eval is not None:
            return self.d_eval(z)
        return _fd_field_jacobian(self.eval, z, step)


def _fd_field_jacobian(f, z, step):
    z = np.asarray(z, dtype=float)
    k = z.shape[-1]
    eye = step * np.eye(k)
    zp = z[..., None, :] + eye
    zm = z[..., None, :] - eye
    J = (f(zp) - f(zm)) / (2.0 * step)   # (..., in, out)
    return np.swapaxes(J, -1, -2)


def zero_field(n_ambient: int) -> AmbientVectorField:
    def ev(z):
        return np.zeros_like(np.asarray(z, dtype=float))

    def dv(z):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape[:-1] + (n_ambient, n_ambient))

    def d2(z):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape[:-1] + (n_ambient,) * 3)

    return AmbientVectorField(n_ambient, ev, "C2", "zero", dv, d2)


def rotation_field(A: np.ndarray, tol: float = 1e-12) -> AmbientVectorField:
    """V(z) = A z for antisymmetric A: tangent, divergence free, smooth."""
    A = np.asarray(A, dtype=float)
    if np.max(np.abs(A + A.T)) > tol:
        raise BadParams("rotation generator must be antisymmetric")
    k = A.shape[0]

    def ev(z):
        return np.asarray(z, dtype=float) @ A.T

    def dv(z):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(A, z.shape[:-1] + (k, k))

    def d2(z):
        z = np.asarray(z, dtype=float)
        return np.zeros(z.shape[:-1] + (k,) * 3)

    return AmbientVectorField(k, ev, "C2", "rotation", dv, d2)


def rotation_generator(n_ambient: int, i: int, j: int, scale: float = 1.0) -> np.ndarray:
    """Antisymmetric generator of a rotation in the (i, j) plane."""
    A = np.zeros((n_ambient, n_ambient))
    A[i, j] = -scale
    A[j, i] = scale
    return A


def gradient_linear_field(c: np.ndarray) -> AmbientVectorField:
    """Spherical gradient of z -> c . z, i.e. V(z) = c - (c.z) z.

    Its intrinsic divergence on S^{N-1} is -(N-1)(c . z): coordinate
    functions are degree-one eigenfunctions of the sphere Laplacian.
    """
    c = np.asarray(c, dtype=float)
    if not np.any(c):
        raise BadParams("direction c must be nonzero")
    k = c.shape[0]
    eye = np.eye(k)
    # constant second derivative: -c^mu delta^nu_lam - c^lam delta^nu_mu
    H = -(np.einsum("m,nl->nml", c, eye) + np.einsum("l,nm->nml", c, eye))

    def ev(z):
        z = np.asarray(z, dtype=float)
        cz = np.sum(z * c, axis=-1, keepdims=True)
        return c - cz * z

    def dv(z):
        z = np.asarray(z, dtype=float)
        cz = np.sum(z * c, axis=-1)
        return -z[..., :, None] * c - cz[..., None, None] * eye

    def d2(z):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(H, z.shape[:-1] + (k, k, k))

    return AmbientVectorField(k, ev, "C2", "gradient_linear", dv, d2)


def sobolev_drift(alpha: float, A: np.ndarray) -> AmbientVectorField:
    """V0(z) = |z_1|^alpha A z: bounded and tangent, continuous but not C^1
    across {z_1 = 0}."""
    if not 0.0 < alpha < 1.0:
        raise BadParams("alpha must lie in (0, 1)")
    A = np.asarray(A, dtype=float)
    if np.max(np.abs(A + A.T)) > 1e-12:
        raise BadParams("rotation generator must be antisymmetric")
    k = A.shape[0]

    def ev(z):
        z = np.asarray(z, dtype=float)
        w = np.abs(z[..., :1]) ** alpha
        return w * (z @ A.T)

    return AmbientVectorField(k, ev, "sobolev_only", "sobolev_drift")


# ---------------------------------------------------------------------------
# divergence and norms
# ---------------------------------------------------------------------------

def tangency_defect(V: AmbientVectorField, z) -> np.ndarray:
    """|z . V(z)| on unit points; zero for honest tangent fields."""
    z = np.asarray(z, dtype=float)
    return np.abs(np.sum(z * V.eval(z), axis=-1))


def divergence(V: AmbientVectorField, z, step: float = 1e-5) -> np.ndarray:
    """Intrinsic divergence on the sphere at unit z (batched).

    div V = tr(P DV) with P = I - z z^T; closed-form DV when the field
    carries one, central differences otherwise.
    """
    z = np.asarray(z, dtype=float)
    J = V.jacobian(z, step)
    trJ = np.trace(J, axis1=-2, axis2=-1)
    zJz = np.einsum("...i,...ij,...j->...", z, J, z)
    return trJ - zJz


def covariant_gradient_norm(V: AmbientVectorField, z, step: float = 1e-5) -> np.ndarray:
    """Frobenius norm of P DV P, the projected ambient derivative."""
    z = np.asarray(z, dtype=float)
    J = V.jacobian(z, step)
    P = np.eye(z.shape[-1]) - z[..., :, None] * z[..., None, :]
    PJP = P @ J @ P
    return np.sqrt(np.sum(PJP * PJP, axis=(-2, -1)))


@dataclass(frozen=True)
class NormReport:
    """Monte Carlo L^p and first-order Sobolev norm estimates."""

    p: float
    lp: float
    h1p: float
    n_samples: int
    ci95: float

    def __post_init__(self):
        if self.lp > self.h1p + 1e-12:
            raise BadParams("Sobolev norm cannot be smaller than the L^p norm")


def norms(V: AmbientVectorField, p: float, n_samples: int, seed: int) -> NormReport:
    """Estimate |V|_p and |V|_{1,p} under the round measure.

    The measure carries total mass equal to the geometric sphere area,
    so both estimators read area * mean(integrand) over uniform samples.
    ci95 is the delta-method 95% half-width of the L^p estimate.
    """
    if p < 1:
        raise BadParams("p must be >= 1")
    if n_samples < 2:
        raise BadParams("need at least two samples")
    Z = sample_nu(n_samples, V.dim, seed)
    area = sphere_area(V.dim)
    vals = np.linalg.norm(V.eval(Z), axis=-1) ** p
    mean = float(np.mean(vals))
    lp = (area * mean) ** (1.0 / p)
    grads = covariant_gradient_norm(V, Z) ** p
    h1p = lp + (area * float(np.mean(grads))) ** (1.0 / p)
    sd = float(np.std(vals, ddof=1)) / np.sqrt(n_samples)
    if mean > 0:
        ci95 = 1.96 * sd * (area ** (1.0 / p)) * mean ** (1.0 / p - 1.0) / p
    else:
        ci95 = 0.0
    return NormReport(p=p, lp=lp, h1p=h1p, n_samples=n_samples, ci95=ci95)
