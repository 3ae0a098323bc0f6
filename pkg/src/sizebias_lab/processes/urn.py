"""Uniform urn occupancy: Y counts the non-isolated balls.

n balls land independently and uniformly in m urns; ball i is non-isolated
when at least one other ball shares its urn. The coupling tilts the
occupancy of a uniform ball's urn one step upward (probabilities pi_k) by
moving one other uniform ball in.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import comb

import numpy as np
from scipy import stats

from .base import ProcessConfigError, ProcessInfo

# Flatten occupancy counting so a block never materializes more than this
# many urn cells at once.
_MAX_CELLS = 1 << 24


def urn_pi_fractions(n: int, m: int) -> list[Fraction]:
    """The tilting probabilities pi_0..pi_{n-1} as exact rationals.

    With N ~ Binomial(n-1, 1/m),
    pi_k = (P(N>k|N>0) - P(N>k)) / (P(N=k) (1 - k/(n-1)))
    for k <= n-2 and pi_{n-1} = 0. Equivalent integer form:
    pi_k = sf_k * pmf_0 * (n-1) / (pmf_k * sf_0 * (n-1-k)) with weights
    pmf_k = C(n-1,k)(m-1)^{n-1-k}.
    """
    nm1 = n - 1
    w = [comb(nm1, k) * (m - 1) ** (nm1 - k) for k in range(n)]
    sf = [sum(w[k + 1:]) for k in range(n)]  # P(N > k) numerators
    out = []
    for k in range(nm1):
        out.append(Fraction(sf[k] * w[0] * nm1, w[k] * sf[0] * (nm1 - k)))
    out.append(Fraction(0))
    return out


@dataclass(frozen=True)
class UrnUniform:
    n: int  # balls
    m: int  # urns

    name = "urn"

    def __post_init__(self):
        if self.n < 2 or self.m < 2:
            raise ProcessConfigError("need at least 2 balls and 2 urns")

    def info(self) -> ProcessInfo:
        n, m = self.n, float(self.m)
        q1 = 1.0 - 1.0 / m
        q2 = 1.0 - 2.0 / m
        # 0^0 = 1 by convention (Python's ** already returns 1.0)
        mu = n * (1.0 - q1 ** (n - 1))
        sigma2 = n * q1 ** (n - 1) + (m - 1.0) / m * n * (n - 1.0) * q2 ** (n - 2) - n * n * q1 ** (2 * n - 2)
        return ProcessInfo(
            mu=mu,
            sigma2=sigma2,
            c=2.0,
            monotone=False,
            supports_left_tail=False,
            coupling_exact=True,
            family="thm-main",
        )

    @cached_property
    def pi_table(self) -> np.ndarray:
        """pi_0..pi_{n-1} via log-space binomial pmf/survival.

        Clamped to [0,1]; anything outside by more than 1e-9 signals an
        implementation bug and raises. The enumeration oracle recomputes the
        same table in exact rational arithmetic as an independent route.
        """
        n = self.n
        k = np.arange(n - 1)
        dist = stats.binom(n - 1, 1.0 / self.m)
        log_pi = dist.logsf(k) + dist.logpmf(0) - dist.logsf(0) - dist.logpmf(k)
        pi = np.exp(log_pi) * (n - 1) / (n - 1 - k)
        pi = np.append(pi, 0.0)
        if np.any(pi < -1e-9) or np.any(pi > 1.0 + 1e-9):
            raise AssertionError(f"pi_k outside [0,1] beyond slack: {pi}")
        return np.clip(pi, 0.0, 1.0)

    # -- sampling -----------------------------------------------------------

    def sample_config(self, gen, size: int) -> np.ndarray:
        return gen.integers(0, self.m, size=(size, self.n), dtype=np.int64)

    def _occupancy(self, x: np.ndarray) -> np.ndarray:
        """Per-ball occupancy of its own urn, (B, n)."""
        size = x.shape[0]
        chunk = max(1, _MAX_CELLS // self.m)
        occ = np.empty_like(x)
        for lo in range(0, size, chunk):
            xs = x[lo:lo + chunk]
            rows = np.arange(xs.shape[0])[:, None]
            codes = rows * self.m + xs
            counts = np.bincount(codes.ravel(), minlength=xs.shape[0] * self.m)
            occ[lo:lo + chunk] = counts[codes]
        return occ

    def statistic(self, x: np.ndarray) -> np.ndarray:
        return (self._occupancy(x) >= 2).sum(axis=1).astype(np.float64)

    def sample_y(self, gen, size: int) -> np.ndarray:
        return self.statistic(self.sample_config(gen, size))

    def sample_coupled(self, gen, size: int):
        """(Y, Y^s) with the move applied as a local occupancy update.

        Moving ball J from urn with count cJ into ball I's urn (count cI)
        changes the non-isolated count by (cJ==1) - (cJ==2) + (cI==1).
        """
        n = self.n
        x = self.sample_config(gen, size)
        occ = self._occupancy(x)
        y = (occ >= 2).sum(axis=1).astype(np.float64)
        rows = np.arange(size)
        i = gen.integers(0, n, size)
        m_i = occ[rows, i] - 1
        move = gen.random(size) < self.pi_table[m_i]
        j = gen.integers(0, n - 1, size)
        j = j + (j >= i)
        u_i = x[rows, i]
        u_j = x[rows, j]
        c_i = occ[rows, i]
        c_j = occ[rows, j]
        moved = move & (u_i != u_j)
        delta = np.where(moved, (c_j == 1).astype(np.int64) - (c_j == 2) + (c_i == 1), 0)
        return y, y + delta
