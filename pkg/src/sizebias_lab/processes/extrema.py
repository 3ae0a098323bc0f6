"""Local maxima of i.i.d. values on a periodic lattice.

The lattice is the d-dimensional torus Z_n^d (side n, dim p >= 1, N = n^p
vertices); vertex v is a local maximum when its value beats all 2p lattice
neighbors. Rebiasing resamples the closed neighborhood of a uniform vertex
conditioned on the center being its maximum.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .base import ProcessConfigError, ProcessInfo


@dataclass(frozen=True)
class Extrema:
    n: int    # lattice side
    dim: int  # lattice dimension

    name = "extrema"

    def __post_init__(self):
        if self.n < 5:
            raise ProcessConfigError("lattice side must be >= 5 (keeps neighborhoods distinct)")
        if self.dim < 1:
            raise ProcessConfigError("dimension must be >= 1")

    @property
    def n_vertices(self) -> int:
        return self.n ** self.dim

    def info(self) -> ProcessInfo:
        p = self.dim
        big_n = float(self.n_vertices)
        mu = big_n / (2.0 * p + 1.0)
        sigma2 = big_n * (4.0 * p * p - p - 1.0) / ((2.0 * p + 1.0) ** 2 * (4.0 * p + 1.0))
        return ProcessInfo(
            mu=mu,
            sigma2=sigma2,
            c=2.0 * p * p + 2.0 * p + 1.0,
            monotone=False,
            supports_left_tail=False,
            coupling_exact=True,
            family="thm-main",
        )

    # -- lattice tables ------------------------------------------------------

    @cached_property
    def _neighborhood(self) -> np.ndarray:
        """(N, 2p+1) flat indices: column 0 the vertex, then its 2p neighbors."""
        n, p, big_n = self.n, self.dim, self.n_vertices
        coords = np.array(np.unravel_index(np.arange(big_n), (n,) * p)).T  # (N, p)
        cols = [np.arange(big_n)]
        for axis in range(p):
            for step in (1, -1):
                shifted = coords.copy()
                shifted[:, axis] = (shifted[:, axis] + step) % n
                cols.append(np.ravel_multi_index(shifted.T, (n,) * p))
        return np.stack(cols, axis=1)

    @cached_property
    def _two_ball(self) -> np.ndarray:
        """(N, K) flat indices within lattice distance 2 of each vertex."""
        nb = self._neighborhood
        big_n = self.n_vertices
        balls = []
        for v in range(big_n):
            ball = set(nb[v].tolist())
            for w in nb[v]:
                ball.update(nb[w].tolist())
            balls.append(sorted(ball))
        width = max(len(b) for b in balls)
        if any(len(b) != width for b in balls):  # torus is vertex-transitive
            raise AssertionError("inconsistent two-ball sizes")
        return np.array(balls, dtype=np.int64)

    # -- sampling -----------------------------------------------------------

    def sample_config(self, gen, size: int) -> np.ndarray:
        return gen.random((size, self.n_vertices))

    def statistic(self, vals: np.ndarray) -> np.ndarray:
        size = vals.shape[0]
        grid = vals.reshape((size,) + (self.n,) * self.dim)
        is_max = np.ones_like(grid, dtype=bool)
        for axis in range(1, self.dim + 1):
            for step in (1, -1):
                is_max &= grid > np.roll(grid, step, axis=axis)
        return is_max.reshape(size, -1).sum(axis=1).astype(np.float64)

    def sample_y(self, gen, size: int) -> np.ndarray:
        return self.statistic(self.sample_config(gen, size))

    def sample_coupled(self, gen, size: int):
        """Resample V_I(1) conditioned on the center being maximal.

        Fresh i.i.d. uniforms fill the closed neighborhood with their maximum
        swapped into the center; by exchangeability that is the conditional
        law. Exact float ties (probability ~2^-53) are redrawn.
        """
        k = 2 * self.dim + 1
        vals = self.sample_config(gen, size)
        y = self.statistic(vals)
        i = gen.integers(0, self.n_vertices, size)
        rows = np.arange(size)
        nb = self._neighborhood[i]  # (B, k), col 0 = center
        new = gen.random((size, k))
        vals2 = vals.copy()
        pending = rows
        for _ in range(100):
            jmax = np.argmax(new[pending], axis=1)
            arranged = new[pending].copy()
            arranged[np.arange(pending.size), jmax] = new[pending, 0]
            arranged[:, 0] = new[pending, jmax]
            vals2[pending[:, None], nb[pending]] = arranged
            # tie check over every value within comparison range of a change
            ball = vals2[pending[:, None], self._two_ball[i[pending]]]
            ball.sort(axis=1)
            tied = (np.diff(ball, axis=1) == 0.0).any(axis=1)
            if not tied.any():
                break
            pending = pending[tied]
            new = new.copy()
            new[pending] = gen.random((pending.size, k))
        else:
            raise AssertionError("persistent float ties in extrema resampling")
        return y, self.statistic(vals2)
