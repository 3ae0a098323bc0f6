"""Boolean-model coverage on the volume-n torus.

n centers are dropped uniformly on a d-dimensional torus of volume n and each
carries a ball of radius rho. Two statistics come out of one configuration:
V, the volume covered by the union of balls, and S, the number of balls whose
center has no other center within distance rho. Which one a Coverage instance
exposes as its Y is chosen by ``statistic``: "volume" (Y = V) or
"nonisolated" (Y = n - S).

No coupled sampler is provided; the couplings behind the tail bounds for V
and n - S are not sampled here, only their constants are (C = phi for the
volume, C = kappa_d + 1 for the non-isolated count).

d = 1 computes V exactly from sorted gap lengths. d in {2, 3} estimates V by
hit-or-miss with ``hit_points`` uniform probe points per replication
(default 4096*n, unbiased), while S is always exact via pairwise toroidal
distances.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..bounds import CoverageCtx, coverage_moments
from .base import ProcessCapabilityError, ProcessConfigError, ProcessInfo

_STATS = ("volume", "nonisolated")

# Cap transient pairwise-distance buffers at ~4M doubles.
_MAX_CELLS = 1 << 22


@dataclass(frozen=True)
class Coverage:
    n: int
    rho: float
    d: int = 1
    kappa_d: int | None = None
    statistic: str = "volume"
    hit_points: int | None = None

    name = "coverage"

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ProcessConfigError("only d in {1,2,3} is supported")
        if self.statistic not in _STATS:
            raise ProcessConfigError(f"statistic must be one of {_STATS}")
        if self.hit_points is not None and self.hit_points < 1:
            raise ProcessConfigError("hit_points must be positive")
        # CoverageCtx re-checks n >= 4, rho > 0, phi < n and the kappa_d rule.
        try:
            self.ctx
        except ValueError as exc:
            raise ProcessConfigError(str(exc)) from None

    @cached_property
    def ctx(self) -> CoverageCtx:
        return CoverageCtx(n=self.n, rho=self.rho, d=self.d, kappa_d=self.kappa_d)

    @cached_property
    def _moments(self):
        return coverage_moments(self.ctx)

    @property
    def side(self) -> float:
        return self.n ** (1.0 / self.d)

    @property
    def n_probes(self) -> int:
        return self.hit_points if self.hit_points is not None else 4096 * self.n

    def info(self) -> ProcessInfo:
        m = self._moments
        if self.statistic == "volume":
            mu, sigma2, c = m.mu_v, m.sigma2_v, self.ctx.phi
        else:
            mu, sigma2, c = self.n - m.mu_s, m.sigma2_s, float(self.ctx.kappa_d + 1)
        return ProcessInfo(
            mu=mu,
            sigma2=sigma2,
            c=c,
            monotone=False,
            supports_left_tail=False,
            coupling_exact=False,
            family="coverage",
            ctx=self.ctx,
        )

    # -- sampling -----------------------------------------------------------

    def _isolated_counts(self, pts: np.ndarray) -> np.ndarray:
        """pts: (B, n, d) centers -> (B,) isolated-ball counts, exact."""
        side = self.side
        delta = np.abs(pts[:, :, None, :] - pts[:, None, :, :])
        delta = np.minimum(delta, side - delta)
        dist2 = (delta * delta).sum(axis=3)
        np.einsum("bii->bi", dist2)[...] = np.inf
        return (dist2.min(axis=2) > self.rho * self.rho).sum(axis=1)

    def _volume_d1(self, pts: np.ndarray):
        """pts: (B, n) sorted in place; returns exact (V, S) for d=1."""
        pts.sort(axis=1)
        gaps = np.empty_like(pts)
        gaps[:, :-1] = np.diff(pts, axis=1)
        gaps[:, -1] = self.n - pts[:, -1] + pts[:, 0]
        v = np.minimum(gaps, 2.0 * self.rho).sum(axis=1)
        far = gaps > self.rho
        s = (far & np.roll(far, 1, axis=1)).sum(axis=1)
        return v, s

    def _volume_hit_or_miss(self, pts: np.ndarray, gen) -> np.ndarray:
        """pts: (B, n, d) centers -> (B,) unbiased volume estimates."""
        side = self.side
        rho2 = self.rho * self.rho
        nprobe = self.n_probes
        out = np.empty(len(pts))
        # probe points in chunks so the (chunk, n, d) buffer stays small
        chunk = max(1, _MAX_CELLS // (self.n * self.d))
        for b, centers in enumerate(pts):
            hits = 0
            left = nprobe
            while left > 0:
                k = min(left, chunk)
                probes = gen.random((k, 1, self.d)) * side
                delta = np.abs(probes - centers[None, :, :])
                delta = np.minimum(delta, side - delta)
                dist2 = (delta * delta).sum(axis=2)
                hits += int((dist2.min(axis=1) <= rho2).sum())
                left -= k
            out[b] = self.n * hits / nprobe
        return out

    def _batches(self, size: int):
        per = self.n * self.n * self.d if self.d > 1 else self.n
        chunk = max(1, _MAX_CELLS // per)
        for lo in range(0, size, chunk):
            yield lo, min(size - lo, chunk)

    def sample_vs(self, gen, size: int):
        """size independent configurations -> (V: (size,) float, S: (size,) int)."""
        v = np.empty(size)
        s = np.empty(size, dtype=np.int64)
        for lo, count in self._batches(size):
            if self.d == 1:
                pts = gen.random((count, self.n)) * self.n
                vb, sb = self._volume_d1(pts)
            else:
                pts = gen.random((count, self.n, self.d)) * self.side
                sb = self._isolated_counts(pts)
                vb = self._volume_hit_or_miss(pts, gen)
            v[lo:lo + count] = vb
            s[lo:lo + count] = sb
        return v, s

    def sample_y(self, gen, size: int) -> np.ndarray:
        v, s = self.sample_vs(gen, size)
        if self.statistic == "volume":
            return v
        return (self.n - s).astype(np.float64)

    def sample_coupled(self, gen, size: int):
        raise ProcessCapabilityError(
            "coverage has no coupled sampler; only bounds and plain simulation"
        )
