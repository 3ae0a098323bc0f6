"""High-throughput Monte Carlo tail estimation and bound-domination verdicts.

Replication is split into fixed blocks of 2**16 draws, each driven by its own
derived substream, so results are bit-identical for a given seed no matter
how many workers share the blocks. Tail estimates carry exact one-sided
binomial (Clopper-Pearson) confidence bounds; domination is judged by
comparing the analytic curve against the empirical LOWER confidence bound
(the bound dominates the true tail, not the noisy estimate).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as _beta

from .distcore import FinitePmf, RngStream, exact_tail
from .processes import bound_curves
from .processes.base import BoundCurve, ProcessCapabilityError
from .sizebias import audit_characterization

BLOCK_SIZE = 1 << 16
DEFAULT_CL = 0.999
SIDES = ("right", "left")


def clopper_pearson_low(k: int, n: int, cl: float) -> float:
    """One-sided lower confidence bound for a binomial proportion."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if k == 0:
        return 0.0
    return float(_beta.ppf(1.0 - cl, k, n - k + 1))


def clopper_pearson_high(k: int, n: int, cl: float) -> float:
    """One-sided upper confidence bound for a binomial proportion."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if k == n:
        return 1.0
    return float(_beta.ppf(cl, k + 1, n - k))


@dataclass(frozen=True)
class EmpiricalTail:
    """Tail-count summary of one experiment.

    ``raw_mode`` means the process is degenerate (sigma^2 = 0) and deviations
    y - mu are compared against t directly instead of standardized ones.
    """

    process: str
    t_grid: tuple[float, ...]
    n: int
    cl: float
    seed: int
    block_size: int
    raw_mode: bool
    counts_right: tuple[int, ...]
    counts_left: tuple[int, ...]

    def __post_init__(self):
        for counts in (self.counts_right, self.counts_left):
            if len(counts) != len(self.t_grid):
                raise ValueError("one count per grid point per side required")
            if any(c < 0 or c > self.n for c in counts):
                raise ValueError("counts must lie in [0, N]")
            if any(a < b for a, b in zip(counts, counts[1:])):
                raise ValueError("tail counts must be nonincreasing in t")

    def counts(self, side: str) -> tuple[int, ...]:
        if side == "right":
            return self.counts_right
        if side == "left":
            return self.counts_left
        raise ValueError(f"unknown side {side!r}")

    def estimate(self, side: str) -> tuple[float, ...]:
        return tuple(k / self.n for k in self.counts(side))

    def ci_low(self, side: str) -> tuple[float, ...]:
        return tuple(clopper_pearson_low(k, self.n, self.cl) for k in self.counts(side))

    def ci_high(self, side: str) -> tuple[float, ...]:
        return tuple(clopper_pearson_high(k, self.n, self.cl) for k in self.counts(side))


@dataclass(frozen=True)
class ExactTail:
    """Exact standardized tails of a finite law on a t grid."""

    process: str
    t_grid: tuple[float, ...]
    right: tuple[float, ...]
    left: tuple[float, ...]


def exact_tail_curve(pmf: FinitePmf, mu: float, sigma: float, t_grid, process: str = "") -> ExactTail:
    ts = tuple(float(t) for t in t_grid)
    return ExactTail(
        process=process,
        t_grid=ts,
        right=tuple(exact_tail(pmf, mu, sigma, t, "right") for t in ts),
        left=tuple(exact_tail(pmf, mu, sigma, t, "left") for t in ts),
    )


def _count_block(w: np.ndarray, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Counts of w >= t (right) and w <= -t (left) per grid point."""
    w = np.sort(w)
    right = len(w) - np.searchsorted(w, ts, side="left")
    left = np.searchsorted(w, -ts, side="right")
    return right.astype(np.int64), left.astype(np.int64)


def _tail_block(args) -> tuple[np.ndarray, np.ndarray]:
    proc, seed, block_index, count, ts, mu, denom = args
    gen = RngStream(seed).child(block_index).generator()
    y = np.asarray(proc.sample_y(gen, count), dtype=np.float64)
    return _count_block((y - mu) / denom, ts)


def _experiment_layout(n: int, block_size: int):
    blocks = []
    done = 0
    b = 0
    while done < n:
        count = min(block_size, n - done)
        blocks.append((b, count))
        done += count
        b += 1
    return blocks


def run_tail_experiment(
    proc,
    t_grid,
    n: int,
    seed: int,
    workers: int = 1,
    cl: float = DEFAULT_CL,
    block_size: int = BLOCK_SIZE,
) -> EmpiricalTail:
    """Estimate both standardized tails of Y over a sorted t grid.

    Deterministic for fixed (proc, t_grid, n, seed, block_size): the block
    layout is fixed by n, every block b draws from substream b, and counts
    merge by integer addition, so the worker count cannot change the result.
    """
    if n < 10 ** 4:
        raise ValueError("tail experiments need N >= 10^4")
    ts = np.asarray([float(t) for t in t_grid], dtype=np.float64)
    if ts.size == 0 or np.any(np.diff(ts) < 0.0):
        raise ValueError("t grid must be nonempty and sorted ascending")
    if not hasattr(proc, "sample_y"):
        raise ProcessCapabilityError(f"{proc!r} has no plain sampler")
    info = proc.info()
    raw_mode = info.sigma2 <= 0.0
    denom = 1.0 if raw_mode else info.sigma
    tasks = [
        (proc, seed, b, count, ts, info.mu, denom)
        for b, count in _experiment_layout(n, block_size)
    ]
    right = np.zeros(ts.size, dtype=np.int64)
    left = np.zeros(ts.size, dtype=np.int64)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for r, l in pool.map(_tail_block, tasks, chunksize=1):
                right += r
                left += l
    else:
        for task in tasks:
            r, l = _tail_block(task)
            right += r
            left += l
    return EmpiricalTail(
        process=getattr(proc, "name", type(proc).__name__),
        t_grid=tuple(float(t) for t in ts),
        n=n,
        cl=cl,
        seed=seed,
        block_size=block_size,
        raw_mode=raw_mode,
        counts_right=tuple(int(k) for k in right),
        counts_left=tuple(int(k) for k in left),
    )


@dataclass(frozen=True)
class VerdictRow:
    side: str
    t: float
    bound: float
    tested: float  # empirical lower CB, or the exact tail
    passed: bool


@dataclass(frozen=True)
class Verdict:
    rows: tuple[VerdictRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def failures(self) -> tuple[VerdictRow, ...]:
        return tuple(r for r in self.rows if not r.passed)


def verify_domination(tail, curve: BoundCurve, sides=None) -> Verdict:
    """Per-t pass/fail of an analytic curve against a tail.

    ``tail`` is an EmpiricalTail (tested value: lower confidence bound) or an
    ExactTail (tested value: the exact tail itself). A point fails when the
    tested value strictly exceeds the bound. Sides default to every side both
    arguments carry.
    """
    if tuple(tail.t_grid) != tuple(curve.t_grid):
        raise ValueError("tail and bound curve must share one t grid")
    if sides is None:
        sides = [s for s in SIDES if curve.side(s) is not None]
    rows = []
    for side in sides:
        bounds = curve.side(side)
        if bounds is None:
            raise ValueError(f"bound curve has no {side} side")
        if isinstance(tail, ExactTail):
            tested = tail.right if side == "right" else tail.left
        else:
            tested = tail.ci_low(side)
        for t, b, v in zip(tail.t_grid, bounds, tested):
            rows.append(VerdictRow(side=side, t=t, bound=float(b), tested=float(v), passed=not v > b))
    return Verdict(rows=tuple(rows))


def run_coupling_audit(proc, n_samples: int, seed: int, fs=None):
    """Audit a process's coupled sampler against the size-bias identity."""
    info = proc.info()
    return audit_characterization(
        proc.sample_coupled,
        n_samples,
        info.mu,
        RngStream(seed),
        fs=fs,
        c_bound=info.c,
        expect_monotone=info.monotone,
    )


def result_rows(tail, curve: BoundCurve, verdict: Verdict) -> list[dict]:
    """Flatten (tail, curve, verdict) into export rows.

    Columns: process, side, t, N, estimate, ci_low, ci_high, bound, verdict.
    Exact tails export with N = 0 and degenerate confidence columns.
    """
    by_key = {(r.side, r.t): r for r in verdict.rows}
    rows = []
    for side in SIDES:
        bounds = curve.side(side)
        if bounds is None:
            continue
        if isinstance(tail, ExactTail):
            n = 0
            est = tail.right if side == "right" else tail.left
            low = high = est
        else:
            n = tail.n
            est = tail.estimate(side)
            low = tail.ci_low(side)
            high = tail.ci_high(side)
        for i, t in enumerate(tail.t_grid):
            row = by_key.get((side, float(t)))
            rows.append(
                {
                    "process": tail.process,
                    "side": side,
                    "t": float(t),
                    "N": n,
                    "estimate": float(est[i]),
                    "ci_low": float(low[i]),
                    "ci_high": float(high[i]),
                    "bound": float(bounds[i]),
                    "verdict": "pass" if (row is None or row.passed) else "fail",
                }
            )
    return rows


__all__ = [
    "BLOCK_SIZE",
    "DEFAULT_CL",
    "EmpiricalTail",
    "ExactTail",
    "Verdict",
    "VerdictRow",
    "clopper_pearson_high",
    "clopper_pearson_low",
    "exact_tail_curve",
    "result_rows",
    "run_coupling_audit",
    "run_tail_experiment",
    "verify_domination",
    "bound_curves",
]
