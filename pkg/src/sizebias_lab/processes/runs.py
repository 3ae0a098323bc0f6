"""Cyclic m-runs in an i.i.d. Bernoulli(p) sequence.

Y = sum over i of xi_i * xi_{i+1} * ... * xi_{i+m-1} (indices mod n). The
coupling forces one uniformly chosen window to all-ones, which can only
create runs, so the coupling is monotone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import ProcessConfigError, ProcessInfo


@dataclass(frozen=True)
class Runs:
    n: int
    m: int
    p: float

    name = "runs"

    def __post_init__(self):
        if self.m < 1:
            raise ProcessConfigError("m must be >= 1")
        if self.n < 2 * self.m:
            raise ProcessConfigError("need n >= 2m")
        if not 0.0 < self.p < 1.0:
            raise ProcessConfigError("p must lie in (0,1)")

    def info(self) -> ProcessInfo:
        n, m, p = self.n, self.m, self.p
        mu = n * p ** m
        sigma2 = n * p ** m * (1.0 + 2.0 * (p - p ** m) / (1.0 - p) - (2.0 * m - 1.0) * p ** m)
        return ProcessInfo(
            mu=mu,
            sigma2=sigma2,
            c=2.0 * m - 1.0,
            monotone=True,
            supports_left_tail=True,
            coupling_exact=True,
            family="thm-main",
        )

    # -- sampling -----------------------------------------------------------

    def sample_config(self, gen, size: int) -> np.ndarray:
        # float32 uniforms suffice for thresholding (granularity 2^-24) and
        # halve the RNG cost, which dominates this sampler.
        return (gen.random((size, self.n), dtype=np.float32) < np.float32(self.p)).astype(np.uint8)

    def statistic(self, xi: np.ndarray) -> np.ndarray:
        xi = xi.astype(np.uint8, copy=False)
        w = xi
        for j in range(1, self.m):
            w = w & np.roll(xi, -j, axis=1)
        return w.sum(axis=1, dtype=np.int64).astype(np.float64)

    def sample_y(self, gen, size: int) -> np.ndarray:
        return self.statistic(self.sample_config(gen, size))

    def sample_coupled(self, gen, size: int):
        """(Y, Y^s) pairs; Y^s recounted only on the windows meeting V_I.

        Forcing xi on V_I = {I..I+m-1} only changes window products for
        starts in {I-m+1..I+m-1} (distinct mod n since n >= 2m), so Y^s is Y
        plus the local before/after difference.
        """
        n, m = self.n, self.m
        xi = self.sample_config(gen, size)
        y = self.statistic(xi)
        i = gen.integers(0, n, size)
        # Strip of offsets -(m-1)..(2m-2) around I; window starting at strip
        # slot s is all-ones iff its zero-count is 0. With n >= 2m a global
        # position inside V_I never reappears at a non-forced strip slot, so
        # zeroing the middle m entries recounts the forced configuration.
        offs = np.arange(-(m - 1), 2 * m - 1)
        pos = (i[:, None] + offs[None, :]) % n
        strip = np.take_along_axis(xi, pos, axis=1)
        zeros = (strip == 0).astype(np.int32)
        csum = np.zeros((size, 3 * m - 1), dtype=np.int32)
        np.cumsum(zeros, axis=1, out=csum[:, 1:])
        old = ((csum[:, m:] - csum[:, :-m]) == 0).sum(axis=1)
        zeros[:, m - 1 : 2 * m - 1] = 0
        np.cumsum(zeros, axis=1, out=csum[:, 1:])
        new = ((csum[:, m:] - csum[:, :-m]) == 0).sum(axis=1)
        ys = y + (new - old)
        return y, ys.astype(np.float64)
