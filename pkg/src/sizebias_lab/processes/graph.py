"""Isolated vertices of an Erdos-Renyi graph G(n, p).

Y counts degree-zero vertices. The coupling picks a uniform vertex V and
detaches it: Y^s = Y + d1(V) + 1(d(V) != 0) where d1(V) is the number of
degree-1 neighbors of V. The coupling is monotone but unbounded, so bounds
come from the dedicated graph family (gamma_s / H machinery), carried in the
process info's context.

Sampling draws one uniform per vertex pair (the upper triangle, packed);
degrees come from a single matmul against the pair-vertex incidence matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..bounds import GraphBoundCtx
from .base import ProcessConfigError, ProcessInfo

# Cap transient (chunk, n*(n-1)/2) buffers at ~4M doubles.
_MAX_CELLS = 1 << 22


@dataclass(frozen=True)
class GraphIso:
    n: int
    p: float

    name = "graph"

    def __post_init__(self):
        if self.n < 2:
            raise ProcessConfigError("need n >= 2 vertices")
        if not 0.0 < self.p < 1.0:
            raise ProcessConfigError("p must lie in (0,1)")

    @cached_property
    def bound_ctx(self) -> GraphBoundCtx:
        return GraphBoundCtx(self.n, self.p)

    @cached_property
    def _incidence(self) -> np.ndarray:
        """(n(n-1)/2, n) float32 matrix: pair e touches vertices iu[e], iv[e]."""
        iu, iv = np.triu_indices(self.n, 1)
        inc = np.zeros((iu.size, self.n), dtype=np.float32)
        e = np.arange(iu.size)
        inc[e, iu] = 1.0
        inc[e, iv] = 1.0
        return inc

    @cached_property
    def _vertex_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """(n, n-1) arrays: packed pair indices touching vertex v, and the
        other endpoint of each such pair."""
        n = self.n
        iu, iv = np.triu_indices(n, 1)
        pair_idx = np.empty((n, n - 1), dtype=np.int64)
        other = np.empty((n, n - 1), dtype=np.int64)
        fill = np.zeros(n, dtype=np.int64)
        for e in range(iu.size):
            a, b = int(iu[e]), int(iv[e])
            pair_idx[a, fill[a]] = e
            other[a, fill[a]] = b
            fill[a] += 1
            pair_idx[b, fill[b]] = e
            other[b, fill[b]] = a
            fill[b] += 1
        return pair_idx, other

    def info(self) -> ProcessInfo:
        n, p = self.n, self.p
        q = 1.0 - p
        mu = n * q ** (n - 1)
        sigma2 = n * q ** (n - 1) * (1.0 + n * p * q ** (n - 2) - q ** (n - 2))
        return ProcessInfo(
            mu=mu,
            sigma2=sigma2,
            c=None,
            monotone=True,
            supports_left_tail=True,
            coupling_exact=True,
            family="graph",
            ctx=self.bound_ctx,
        )

    # -- sampling -----------------------------------------------------------

    def _chunks(self, size: int):
        n_pairs = self.n * (self.n - 1) // 2
        chunk = max(1, _MAX_CELLS // n_pairs)
        for lo in range(0, size, chunk):
            yield lo, min(size - lo, chunk)

    def sample_y(self, gen, size: int) -> np.ndarray:
        y = np.empty(size, dtype=np.float64)
        inc = self._incidence
        n_pairs = inc.shape[0]
        for lo, count in self._chunks(size):
            e = (gen.random((count, n_pairs)) < self.p).astype(np.float32)
            deg = e @ inc
            y[lo:lo + count] = (deg == 0.0).sum(axis=1)
        return y

    def sample_coupled(self, gen, size: int):
        n = self.n
        y = np.empty(size, dtype=np.float64)
        ys = np.empty(size, dtype=np.float64)
        inc = self._incidence
        pair_idx, other = self._vertex_pairs
        n_pairs = inc.shape[0]
        for lo, count in self._chunks(size):
            e = (gen.random((count, n_pairs)) < self.p).astype(np.float32)
            deg = (e @ inc).astype(np.int32)
            yc = (deg == 0).sum(axis=1)
            rows = np.arange(count)
            v = gen.integers(0, n, count)
            # edges at V, and the degree of each opposite endpoint
            edge_at_v = np.take_along_axis(e, pair_idx[v], axis=1) != 0.0
            deg_other = np.take_along_axis(deg, other[v], axis=1)
            d_v = deg[rows, v]
            d1 = (edge_at_v & (deg_other == 1)).sum(axis=1)
            y[lo:lo + count] = yc
            ys[lo:lo + count] = yc + d1 + (d_v != 0)
        return y, ys
