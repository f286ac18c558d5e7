"""Seeded Brownian increments with exact dyadic refinement.

Increments are generated level by level with counter-based Philox
streams keyed on (seed, level), so a path depends only on its seed and
never on call order.  A path regenerated with the step halved reproduces
the coarse path exactly at shared times: the base level holds the odd
factor of ``n_steps`` and every further power of two is obtained by
Brownian-bridge midpoint splitting with its own keyed stream.  Halving
``dt`` adds one split level and leaves all coarser levels untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParams


def _philox(seed: int, level: int) -> np.random.Generator:
    key = np.array([np.uint64(seed % (1 << 64)), np.uint64(level)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def brownian_increments(seed: int, T: float, n_steps: int, d: int) -> np.ndarray:
    """N(0, dt) increments of shape (n_steps, d), dt = T / n_steps."""
    if n_steps < 1 or d < 1:
        raise BadParams("n_steps and d must be >= 1")
    if not T > 0:
        raise BadParams("horizon T must be positive")
    n0 = n_steps
    levels = 0
    while n0 % 2 == 0:
        n0 //= 2
        levels += 1
    inc = _philox(seed, 0).standard_normal((n0, d)) * np.sqrt(T / n0)
    for lev in range(1, levels + 1):
        ncur = inc.shape[0]
        delta = T / ncur
        xi = _philox(seed, lev).standard_normal((ncur, d)) * (np.sqrt(delta) / 2.0)
        fine = np.empty((2 * ncur, d))
        fine[0::2] = inc / 2.0 + xi
        fine[1::2] = inc / 2.0 - xi
        inc = fine
    return inc


@dataclass(frozen=True)
class BrownianPath:
    """A d-channel Brownian path sampled on a uniform grid.

    Reproducible from (seed, n_steps, d) alone; ``refine`` returns the
    same path on the doubled grid (coarse increments are exactly the
    pairwise sums of the fine ones).
    """

    d: int
    dt: float
    n_steps: int
    increments: np.ndarray
    seed: int

    @classmethod
    def generate(cls, seed: int, T: float, n_steps: int, d: int) -> "BrownianPath":
        inc = brownian_increments(seed, T, n_steps, d)
        return cls(d=d, dt=T / n_steps, n_steps=n_steps, increments=inc, seed=seed)

    @property
    def T(self) -> float:
        return self.dt * self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def refine(self) -> "BrownianPath":
        return BrownianPath.generate(self.seed, self.T, 2 * self.n_steps, self.d)

    def path_values(self) -> np.ndarray:
        """W at the grid times, shape (n_steps + 1, d), W_0 = 0."""
        W = np.zeros((self.n_steps + 1, self.d))
        np.cumsum(self.increments, axis=0, out=W[1:])
        return W
