"""Stratonovich flows on the embedded sphere and their chart-side
counterparts on the glued manifold.

The integrator is the stochastic Heun scheme (predictor-corrector with
trapezoidal averaging), whose strong limit is the Stratonovich solution.
Sphere trajectories are renormalized to the sphere after every step;
chart trajectories renormalize their constrained factor (|v| = 1 in
chart A, |u| = 1 in chart B) and switch charts through the twisted
transition maps when the hysteresis rule fires.

A single Brownian path object drives matched runs on both sides, and
its dyadic refinement keeps pathwise dt-halving comparisons exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .brownian import BrownianPath
from .errors import BadParams, DegenerateChartPoint, StepBlowup
from .fields import divergence
from .jacobians import pushforward_values, PushforwardField
from .manifold import (CHART_A, CHART_B, ChartPoint, SpherePoint, TwistPair,
                       embed_a, embed_b, embed_h, project_f, select_chart,
                       transition_ab, transition_ba)

_BLOWUP = 1e6


@dataclass(frozen=True)
class FlowConfig:
    """Time horizon and step for a flow integration."""

    T: float
    dt: float
    scheme: str = "heun"
    renormalize: bool = True

    def __post_init__(self):
        if not (self.T > 0 and self.dt > 0):
            raise BadParams("T and dt must be positive")
        if self.scheme != "heun":
            raise BadParams(f"unknown scheme {self.scheme!r}")
        n = round(self.T / self.dt)
        if n < 1 or abs(n * self.dt - self.T) > 1e-9 * max(1.0, self.T):
            raise BadParams("T must be an integral number of steps")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass
class FlowSample:
    """A discrete trajectory with its density accumulator.

    ``points`` has shape (n_steps + 1, N).  For manifold-side runs the
    rows are chart coordinates and ``charts`` tags each row 'A' or 'B';
    ``switch_steps`` lists the steps after which a seam crossing
    happened, so divergences between descriptions can be localized.
    """

    times: np.ndarray
    points: np.ndarray
    rho: np.ndarray
    seed: int
    charts: np.ndarray | None = None
    switch_steps: list = field(default_factory=list)

    @property
    def is_manifold_run(self) -> bool:
        return self.charts is not None

    def chart_point(self, i: int, m: int) -> ChartPoint:
        return ChartPoint(str(self.charts[i]), self.points[i, :m + 1],
                          self.points[i, m + 1:])


def _check_fields(V0, Vks, path: BrownianPath):
    if len(Vks) != path.d:
        raise BadParams(f"need one noise field per channel: {len(Vks)} != {path.d}")


def _guard(vecs, step):
    for w in vecs:
        if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > _BLOWUP:
            raise StepBlowup(f"field evaluation blew up at step {step}", step=step)


def integrate_sphere(V0, Vks: Sequence, q0: SpherePoint, path: BrownianPath,
                     cfg: FlowConfig) -> FlowSample:
    """Heun integration of dq = V0 dt + sum_k Vk o dW^k on the sphere."""
    _check_fields(V0, Vks, path)
    if abs(path.n_steps * path.dt - cfg.T) > 1e-9 or abs(path.dt - cfg.dt) > 1e-12:
        raise BadParams("Brownian path grid does not match the flow config")
    z = np.asarray(q0.z, dtype=float)
    n = path.n_steps
    out = np.empty((n + 1, z.shape[0]))
    out[0] = z
    dW = path.increments
    dt = path.dt
    for i in range(n):
        b = V0.eval(z)
        gs = [Vk.eval(z) for Vk in Vks]
        _guard([b, *gs], i)
        zp = z + b * dt
        for k, g in enumerate(gs):
            zp = zp + g * dW[i, k]
        b2 = V0.eval(zp)
        z1 = z + 0.5 * (b + b2) * dt
        for k, g in enumerate(gs):
            z1 = z1 + 0.5 * (g + Vks[k].eval(zp)) * dW[i, k]
        if cfg.renormalize:
            z1 = z1 / np.linalg.norm(z1)
        z = z1
        out[i + 1] = z
    rho = _density_along(out, V0, Vks, path)
    return FlowSample(times=path.times, points=out, rho=rho, seed=path.seed)


def transport_flow(qbar0: ChartPoint, sphere_run: FlowSample, tw: TwistPair,
                   tol: float = 1e-8) -> FlowSample:
    """Pointwise image of a sphere trajectory on the glued manifold.

    This realizes the transported flow (inverse identification applied to
    the sphere flow started at the matching point), with hysteresis-based
    chart selection along the trajectory.
    """
    z0 = embed_h(qbar0, tw).z
    if np.max(np.abs(z0 - sphere_run.points[0])) > tol:
        raise BadParams("chart start point does not match the sphere trajectory")
    m = tw.m
    n_rows = sphere_run.points.shape[0]
    pts = np.empty_like(sphere_run.points)
    charts = np.empty(n_rows, dtype="<U1")
    switches = []
    prev = qbar0.chart
    for i in range(n_rows):
        z = SpherePoint.from_ambient(sphere_run.points[i], m)
        chart = select_chart(z, prev)
        p = project_f(z, tw, want=chart)
        pts[i] = p.coords
        charts[i] = chart
        if chart != prev:
            switches.append(i)
        prev = chart
    return FlowSample(times=sphere_run.times, points=pts, rho=sphere_run.rho.copy(),
                      seed=sphere_run.seed, charts=charts, switch_steps=switches)


def _kappa_sq_of_chart(chart: str, u: np.ndarray, v: np.ndarray) -> float:
    if chart == CHART_A:
        return 1.0 / (1.0 + float(u @ u))
    ny2 = float(v @ v)
    return ny2 / (1.0 + ny2)


def integrate_exotic(pushV0: PushforwardField, pushVks: Sequence[PushforwardField],
                     qbar0: ChartPoint, path: BrownianPath, tw: TwistPair,
                     cfg: FlowConfig, tol: float = 1e-9) -> FlowSample:
    """Heun integration in chart coordinates with the pushforward fields.

    The state lives in the current chart; every field evaluation embeds
    the point, evaluates the base fields there, and applies the chart
    differential blocks (computed once per point for all channels).
    After each step the constrained factor is renormalized, and the
    hysteresis rule decides whether to hand the state to the other chart
    through the twisted transition.
    """
    fields_ = [pushV0.base] + [pv.base for pv in pushVks]
    for pv in (pushV0, *pushVks):
        if pv.tw is not tw:
            raise BadParams("pushforward fields must share the twist pair")
    _check_fields(pushV0.base, [pv.base for pv in pushVks], path)
    m = tw.m
    m1 = m + 1

    def eval_all(chart, w):
        p = ChartPoint(chart, w[:m1], w[m1:])
        if chart == CHART_B and float(np.linalg.norm(p.v)) <= tol:
            raise DegenerateChartPoint(
                "step reached the chart-B singular ray; reduce dt")
        ga, ka = (embed_a(p.u, p.v) if chart == CHART_A
                  else embed_b(p.u, p.v, tw))
        z = np.concatenate([ga, ka])
        vals = [f.eval(z) for f in fields_]
        return pushforward_values(vals, p, tw)

    chart = qbar0.chart
    w = qbar0.coords.copy()
    n = path.n_steps
    N = w.shape[0]
    pts = np.empty((n + 1, N))
    charts = np.empty(n + 1, dtype="<U1")
    pts[0] = w
    charts[0] = chart
    switches = []
    dW = path.increments
    dt = path.dt
    for i in range(n):
        ws = eval_all(chart, w)
        _guard(ws, i)
        wp = w + ws[0] * dt
        for k in range(path.d):
            wp = wp + ws[k + 1] * dW[i, k]
        ws2 = eval_all(chart, wp)
        w1 = w + 0.5 * (ws[0] + ws2[0]) * dt
        for k in range(path.d):
            w1 = w1 + 0.5 * (ws[k + 1] + ws2[k + 1]) * dW[i, k]
        if cfg.renormalize:
            if chart == CHART_A:
                w1[m1:] /= np.linalg.norm(w1[m1:])
            else:
                w1[:m1] /= np.linalg.norm(w1[:m1])
        # hysteresis chart switching through the twisted transitions
        ks = _kappa_sq_of_chart(chart, w1[:m1], w1[m1:])
        if chart == CHART_A and ks < 0.45:
            p = transition_ab(ChartPoint(chart, w1[:m1], w1[m1:]), tw, tol)
            chart = CHART_B
            w1 = p.coords
            switches.append(i + 1)
        elif chart == CHART_B and ks > 0.55:
            p = transition_ba(ChartPoint(chart, w1[:m1], w1[m1:]), tw, tol)
            chart = CHART_A
            w1 = p.coords
            switches.append(i + 1)
        w = w1
        pts[i + 1] = w
        charts[i + 1] = chart
    run = FlowSample(times=path.times, points=pts, rho=np.ones(n + 1),
                     seed=path.seed, charts=charts, switch_steps=switches)
    run.rho = density(run, fields_[0], fields_[1:], path, tw=tw)
    return run


# ---------------------------------------------------------------------------
# density and test-function residuals
# ---------------------------------------------------------------------------

def _embedded_points(run: FlowSample, tw: TwistPair | None) -> np.ndarray:
    if not run.is_manifold_run:
        return run.points
    if tw is None:
        raise BadParams("manifold-side runs need the twist pair to embed")
    m1 = tw.m + 1
    out = np.empty_like(run.points)
    for i in range(run.points.shape[0]):
        u, v = run.points[i, :m1], run.points[i, m1:]
        ga, ka = (embed_a(u, v) if run.charts[i] == CHART_A
                  else embed_b(u, v, tw))
        out[i] = np.concatenate([ga, ka])
    return out


def _density_along(Q: np.ndarray, V0, Vks, path: BrownianPath) -> np.ndarray:
    dt = path.dt
    log_rho = np.zeros(Q.shape[0])
    div0 = divergence(V0, Q)
    acc = np.cumsum(0.5 * (div0[:-1] + div0[1:]) * dt)
    for k, Vk in enumerate(Vks):
        dk = divergence(Vk, Q)
        acc = acc + np.cumsum(0.5 * (dk[:-1] + dk[1:]) * path.increments[:, k])
    log_rho[1:] = acc
    return np.exp(log_rho)


def density(run: FlowSample, V0, Vks: Sequence, path: BrownianPath,
            tw: TwistPair | None = None) -> np.ndarray:
    """Flow density rho_t along a realized trajectory.

    rho_t = exp( int_0^t div V0 ds + sum_k int_0^t div Vk o dW^k ), with
    midpoint (Stratonovich-consistent) quadrature on the trajectory's own
    grid.  Manifold-side runs are embedded first; the identification is
    an isometry for the pulled-back metric, so the divergences of the
    base fields along the embedded path are the transported divergences.
    """
    if run.points.shape[0] != path.n_steps + 1:
        raise BadParams("trajectory and Brownian path grids differ")
    Q = _embedded_points(run, tw)
    return _density_along(Q, V0, Vks, path)


@dataclass(frozen=True)
class TestFunction:
    """Smooth scalar observable with its ambient gradient."""

    value: Callable
    grad: Callable
    label: str = "zeta"


def coordinate_function(nu: int, n_ambient: int) -> TestFunction:
    e = np.zeros(n_ambient)
    e[nu] = 1.0

    def val(z):
        return np.asarray(z, dtype=float)[..., nu]

    def grad(z):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(e, z.shape)

    return TestFunction(val, grad, label=f"z{nu}")


def smooth_cap(nu: int, n_ambient: int) -> TestFunction:
    """Nonnegative smooth observable (1 + z_nu) / 2."""
    base = coordinate_function(nu, n_ambient)

    def val(z):
        return 0.5 * (1.0 + base.value(z))

    def grad(z):
        return 0.5 * base.grad(z)

    return TestFunction(val, grad, label=f"cap{nu}")


def test_function_check(run: FlowSample, V0, Vks: Sequence, zeta: TestFunction,
                        path: BrownianPath, tw: TwistPair | None = None) -> float:
    """Residual of the flow identity for a smooth test function.

    | zeta(q_T) - zeta(q_0) - int X0 zeta ds - sum_k int Xk zeta o dW^k |
    with X_i zeta = grad(zeta) . V_i and midpoint quadrature along the
    realized trajectory; contracts at the scheme's order under halving.
    """
    if run.points.shape[0] != path.n_steps + 1:
        raise BadParams("trajectory and Brownian path grids differ")
    Q = _embedded_points(run, tw)
    dt = path.dt
    d0 = np.sum(zeta.grad(Q) * V0.eval(Q), axis=-1)
    total = float(np.sum(0.5 * (d0[:-1] + d0[1:]) * dt))
    for k, Vk in enumerate(Vks):
        dk = np.sum(zeta.grad(Q) * Vk.eval(Q), axis=-1)
        total += float(np.sum(0.5 * (dk[:-1] + dk[1:]) * path.increments[:, k]))
    return abs(float(zeta.value(Q[-1]) - zeta.value(Q[0]) - total))
