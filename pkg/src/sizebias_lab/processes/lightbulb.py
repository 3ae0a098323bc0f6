"""The lightbulb process: n bulbs, stage r toggles a uniform r-subset.

Y is the number of bulbs on after stage n. The plain sampler walks the exact
ON-count Markov chain (stage r flips a Hypergeometric(n; k, r) number of ON
bulbs), which is equal in law to simulating the subsets but O(n) per draw.
The coupled sampler (even n only) simulates the stage rows it needs and
interchanges one stage-n/2 entry pair, giving Y^s - Y in {0, 2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base import ProcessCapabilityError, ProcessConfigError, ProcessInfo


def _lightbulb_products(n: int) -> tuple[float, float]:
    """The two product terms of the mean/variance displays."""
    p1 = 1.0
    p2 = 1.0
    for i in range(1, n + 1):
        p1 *= 1.0 - 2.0 * i / n
        p2 *= 1.0 - 4.0 * i / n + 4.0 * i * (i - 1) / (n * (n - 1))
    return p1, p2


@dataclass(frozen=True)
class Lightbulb:
    n: int

    name = "lightbulb"

    def __post_init__(self):
        if self.n < 2:
            raise ProcessConfigError("need n >= 2 bulbs")

    def info(self) -> ProcessInfo:
        n = self.n
        p1, p2 = _lightbulb_products(n)
        mu = n / 2.0 * (1.0 - p1)
        sigma2 = n / 4.0 * (1.0 - p2) + n * n / 4.0 * (p2 - p1 * p1)
        even = n % 2 == 0
        sigma = math.sqrt(sigma2) if sigma2 > 0.0 else 0.0
        return ProcessInfo(
            mu=mu,
            sigma2=sigma2,
            c=2.0,
            monotone=True,
            supports_left_tail=True,
            coupling_exact=even,
            family="thm-main",
            t_shift=0.0 if even or sigma == 0.0 else 2.0 / sigma,
            approximate=not even,
        )

    # -- sampling -----------------------------------------------------------

    def _chain_counts(self, gen, size: int, skip: int | None = None) -> np.ndarray:
        """ON-counts after running the toggle chain, optionally skipping a stage."""
        k = np.zeros(size, dtype=np.int64)
        for r in range(1, self.n + 1):
            if r == skip:
                continue
            flipped_on = gen.hypergeometric(k, self.n - k, r)
            k = k + r - 2 * flipped_on
        return k

    def sample_y(self, gen, size: int) -> np.ndarray:
        return self._chain_counts(gen, size).astype(np.float64)

    def sample_switch_rows(self, gen, size: int):
        """Full simulation: returns (parity, stage_half) 0/1 arrays (B, n).

        parity[b, j] is bulb j's final state; stage_half the stage-n/2 row.
        Used by the coupled sampler and as a law cross-check for the chain.
        """
        n = self.n
        parity = np.zeros((size, n), dtype=np.uint8)
        stage_half = None
        rows = np.arange(size)[:, None]
        for r in range(1, n + 1):
            if r == n:
                toggled = np.ones((size, n), dtype=np.uint8)
            else:
                keys = gen.random((size, n))
                idx = np.argpartition(keys, r - 1, axis=1)[:, :r]
                toggled = np.zeros((size, n), dtype=np.uint8)
                toggled[rows, idx] = 1
            parity ^= toggled
            if 2 * r == n:
                stage_half = toggled
        return parity, stage_half

    def sample_coupled(self, gen, size: int):
        if self.n % 2 != 0:
            raise ProcessCapabilityError(
                "odd-n lightbulb coupling is approximation-only: no exact sampler; "
                "bounds are evaluated with the documented t-shift"
            )
        n = self.n
        # The XOR of every stage except n/2 is an exchangeable 0/1 vector, so
        # it is a uniform subset given its size, and its size is the toggle
        # chain with that stage skipped. This avoids materializing all n
        # stage rows (which sample_switch_rows does; kept as the slow
        # reference for law cross-checks).
        w = self._chain_counts(gen, size, skip=n // 2)
        rank_w = gen.random((size, n)).argsort(axis=1).argsort(axis=1)
        other = rank_w < w[:, None]
        rank_h = gen.random((size, n)).argsort(axis=1).argsort(axis=1)
        stage_half = (rank_h < (n // 2)).astype(np.uint8)
        parity = other.astype(np.uint8) ^ stage_half
        y = parity.sum(axis=1).astype(np.float64)
        rows = np.arange(size)
        i = gen.integers(0, n, size)
        pick = gen.integers(0, n // 2, size)  # rank of J among candidates
        bulb_on = parity[rows, i] == 1
        cand = stage_half != stage_half[rows, i][:, None]  # exactly n/2 candidates
        ranks = np.cumsum(cand, axis=1)
        j = np.argmax(ranks == (pick + 1)[:, None], axis=1)
        j_off = parity[rows, j] == 0
        ys = np.where(bulb_on, y, y + 2.0 * j_off)
        return y, ys
