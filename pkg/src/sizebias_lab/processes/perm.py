"""Cyclic pattern counts in uniform random permutations.

Y counts the windows (mod n) at which a fixed length-m pattern tau appears:
the window starting at alpha matches when pi(tau^{-1}(v) + alpha - 1),
v = 1..m, is increasing. The coupled sampler reorders one uniformly chosen
window into tau-order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .base import ProcessConfigError, ProcessInfo


def _validate_perm(seq, length: int | None = None, what: str = "permutation") -> tuple[int, ...]:
    seq = tuple(int(v) for v in seq)
    n = len(seq)
    if length is not None and n != length:
        raise ProcessConfigError(f"{what} must have length {length}, got {n}")
    if sorted(seq) != list(range(1, n + 1)):
        raise ProcessConfigError(f"{what} must be a permutation of 1..{n}")
    return seq


def _relative_order(values) -> tuple[int, ...]:
    """Ranks of a sequence of distinct values (1 = smallest)."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0] * len(values)
    for rank, idx in enumerate(order, start=1):
        ranks[idx] = rank
    return tuple(ranks)


def perm_statistic(pi, tau) -> int:
    """Number of cyclic windows of ``pi`` carrying the pattern ``tau``."""
    pi = _validate_perm(pi, what="pi")
    tau = _validate_perm(tau, what="tau")
    n, m = len(pi), len(tau)
    if n < m:
        raise ProcessConfigError("pi must be at least as long as tau")
    tau_inv0 = [tau.index(v + 1) for v in range(m)]  # 0-based positions of values 1..m
    count = 0
    for alpha in range(n):
        window = [pi[(alpha + tau_inv0[j]) % n] for j in range(m)]
        if all(window[j] < window[j + 1] for j in range(m - 1)):
            count += 1
    return count


@dataclass(frozen=True)
class PermPattern:
    """Pattern-count process: n >= m >= 3, tau a permutation of 1..m."""

    n: int
    m: int
    tau: tuple[int, ...]

    name = "perm"

    def __post_init__(self):
        object.__setattr__(self, "tau", _validate_perm(self.tau, self.m, "tau"))
        if self.m < 3:
            raise ProcessConfigError("pattern length m must be >= 3")
        if self.n < self.m:
            raise ProcessConfigError("n must be >= m")

    @classmethod
    def identity(cls, n: int, m: int) -> "PermPattern":
        return cls(n=n, m=m, tau=tuple(range(1, m + 1)))

    @cached_property
    def _tau_inv0(self) -> np.ndarray:
        return np.array([self.tau.index(v + 1) for v in range(self.m)], dtype=np.int64)

    @cached_property
    def _window_index(self) -> np.ndarray:
        # win[a, j] = position of the j-th placement slot of the window at a
        a = np.arange(self.n)[:, None]
        return (a + self._tau_inv0[None, :]) % self.n

    def overlap_indicators(self) -> tuple[int, ...]:
        """I_k = 1 iff tau(1..m-k) and tau(k+1..m) share their relative order."""
        out = []
        for k in range(1, self.m):
            head = _relative_order(self.tau[: self.m - k])
            tail = _relative_order(self.tau[k:])
            out.append(1 if head == tail else 0)
        return tuple(out)

    def variance_formula(self) -> float:
        """The closed-form variance, with overlap indicators taken literally.

        For non-identity tau this can disagree with exhaustive enumeration
        (the overlap term assumes the two order constraints merge into one
        total order); callers wanting ground truth should compare against the
        enumeration oracle.
        """
        if self.n < 2 * self.m:
            raise ProcessConfigError("variance formula needs n >= 2m")
        mf = math.factorial(self.m)
        overlap = sum(
            ik / math.factorial(self.m + k)
            for k, ik in enumerate(self.overlap_indicators(), start=1)
        )
        return self.n * (1.0 / mf * (1.0 - (2.0 * self.m - 1.0) / mf) + 2.0 * overlap)

    def info(self) -> ProcessInfo:
        mu = self.n / math.factorial(self.m)
        return ProcessInfo(
            mu=mu,
            sigma2=self.variance_formula(),
            c=2.0 * self.m - 1.0,
            monotone=False,
            supports_left_tail=False,
            coupling_exact=True,
            family="thm-main",
        )

    # -- sampling -----------------------------------------------------------

    def sample_config(self, gen, size: int) -> np.ndarray:
        """Uniform permutations as (size, n) rows with values 0..n-1."""
        return np.argsort(gen.random((size, self.n)), axis=1, kind="stable")

    def statistic(self, pi_block: np.ndarray) -> np.ndarray:
        vals = pi_block[:, self._window_index]  # (B, n, m)
        inc = np.all(vals[:, :, 1:] > vals[:, :, :-1], axis=2)
        return inc.sum(axis=1).astype(np.float64)

    def sample_y(self, gen, size: int) -> np.ndarray:
        return self.statistic(self.sample_config(gen, size))

    def sample_coupled(self, gen, size: int):
        pi = self.sample_config(gen, size)
        y = self.statistic(pi)
        alpha = gen.integers(0, self.n, size)
        rows = np.arange(size)[:, None]
        window_set = (alpha[:, None] + np.arange(self.m)[None, :]) % self.n
        w = np.take_along_axis(pi, window_set, axis=1)
        s = np.sort(w, axis=1)
        placement = (alpha[:, None] + self._tau_inv0[None, :]) % self.n
        pi2 = pi.copy()
        pi2[rows, placement] = s
        return y, self.statistic(pi2)
