"""Exact finite distributions, size biasing, and the shared RNG-stream contract.

Everything downstream (samplers, oracles, Monte Carlo) speaks two small types:
``FinitePmf`` for exact laws on finitely many real atoms, and ``RngStream``
for reproducible, worker-count-independent randomness.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

# Mass-conservation slack for a FinitePmf and for joint laws built from one.
PROB_TOL = 1e-12

# Atoms produced by enumeration are rounded to this many significant digits
# before merging, so that float noise cannot split one atom into two.
ATOM_SIG_DIGITS = 12

RNG_ALGORITHM = "philox4x64"

_TWO64 = 1 << 64


class DistributionError(ValueError):
    """Invalid distribution data (bad probabilities, unusable atoms)."""


def round_sig(x: float, digits: int = ATOM_SIG_DIGITS) -> float:
    """Round ``x`` to ``digits`` significant digits (0.0 stays 0.0)."""
    if x == 0.0 or not math.isfinite(x):
        return x + 0.0  # normalizes -0.0
    exponent = math.floor(math.log10(abs(x)))
    return round(x, digits - 1 - exponent)


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float


class FinitePmf:
    """A probability mass function on finitely many real atoms.

    Atoms are strictly increasing, probabilities are nonnegative and sum to 1
    within ``PROB_TOL``. Zero-probability atoms are pruned on construction.
    """

    __slots__ = ("atoms", "probs")

    def __init__(self, atoms, probs):
        atoms = np.asarray(atoms, dtype=np.float64)
        probs = np.asarray(probs, dtype=np.float64)
        if atoms.ndim != 1 or probs.ndim != 1 or atoms.shape != probs.shape:
            raise DistributionError("atoms and probs must be 1-d arrays of equal length")
        if atoms.size == 0:
            raise DistributionError("a pmf needs at least one atom")
        if not np.all(np.isfinite(atoms)):
            raise DistributionError("atoms must be finite")
        if np.any(probs < 0.0):
            raise DistributionError("probabilities must be nonnegative")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise DistributionError(f"probabilities sum to {total!r}, not 1 within {PROB_TOL}")
        keep = probs > 0.0
        atoms, probs = atoms[keep], probs[keep]
        if atoms.size == 0:
            raise DistributionError("all probabilities are zero")
        order = np.argsort(atoms, kind="stable")
        atoms, probs = atoms[order], probs[order]
        if np.any(np.diff(atoms) <= 0.0):
            raise DistributionError("atoms must be distinct (merge duplicates first)")
        atoms.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("FinitePmf is immutable")

    def __reduce__(self):  # the immutability guard blocks default slot unpickling
        return (FinitePmf, (self.atoms.tolist(), self.probs.tolist()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinitePmf):
            return NotImplemented
        return (
            self.atoms.shape == other.atoms.shape
            and bool(np.all(self.atoms == other.atoms))
            and bool(np.all(self.probs == other.probs))
        )

    def __hash__(self) -> int:
        return hash((self.atoms.tobytes(), self.probs.tobytes()))

    def __len__(self) -> int:
        return int(self.atoms.size)

    def __repr__(self) -> str:
        pairs = ", ".join(f"{a:g}: {p:.6g}" for a, p in zip(self.atoms, self.probs))
        return f"FinitePmf({{{pairs}}})"

    @classmethod
    def from_weighted(cls, values, weights) -> "FinitePmf":
        """Merge (value, weight) pairs into a pmf.

        Values are canonically rounded to ``ATOM_SIG_DIGITS`` significant
        digits before merging and weights are normalized by their total, so
        enumeration output with float dust collapses to clean atoms.
        """
        acc: dict[float, float] = {}
        for v, w in zip(np.asarray(values, dtype=np.float64), np.asarray(weights, dtype=np.float64)):
            if w == 0.0:
                continue
            key = round_sig(float(v))
            acc[key] = acc.get(key, 0.0) + float(w)
        if not acc:
            raise DistributionError("no positive weights")
        total = math.fsum(acc.values())
        atoms = sorted(acc)
        return cls(atoms, [acc[a] / total for a in atoms])

    def to_json(self) -> str:
        return json.dumps({"atoms": self.atoms.tolist(), "probs": self.probs.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "FinitePmf":
        data = json.loads(text)
        return cls(data["atoms"], data["probs"])

    def sample(self, rng: Generator, size: int) -> np.ndarray:
        """Draw ``size`` iid atoms by inverse CDF on a single uniform block."""
        cdf = np.cumsum(self.probs)
        cdf[-1] = 1.0
        u = rng.random(size)
        return self.atoms[np.searchsorted(cdf, u, side="right")]


def pmf_moments(pmf: FinitePmf) -> Moments:
    """Mean and variance of a finite pmf, accumulated with exact summation."""
    mean = math.fsum(a * p for a, p in zip(pmf.atoms, pmf.probs))
    var = math.fsum(p * (a - mean) ** 2 for a, p in zip(pmf.atoms, pmf.probs))
    return Moments(mean=mean, variance=var)


def size_bias_pmf(pmf: FinitePmf) -> FinitePmf:
    """The size-biased law: atom y gets probability y*p(y)/mean.

    Requires nonnegative atoms and positive mean; the atom at 0 (if any)
    drops out, which is exactly the size-biased transform on finite support.
    """
    if float(pmf.atoms[0]) < 0.0:
        raise DistributionError("size biasing requires nonnegative atoms")
    mean = pmf_moments(pmf).mean
    if mean <= 0.0:
        raise DistributionError("size biasing requires a positive mean")
    weights = pmf.atoms * pmf.probs
    keep = weights > 0.0
    return FinitePmf(pmf.atoms[keep], weights[keep] / mean)


def tv_distance(p: FinitePmf, q: FinitePmf) -> float:
    """Total variation distance between two finite pmfs."""
    support = np.union1d(p.atoms, q.atoms)
    pp = np.zeros(support.size)
    qq = np.zeros(support.size)
    pp[np.searchsorted(support, p.atoms)] = p.probs
    qq[np.searchsorted(support, q.atoms)] = q.probs
    return 0.5 * float(np.abs(pp - qq).sum())


def exact_tail(pmf: FinitePmf, mu: float, sigma: float, t: float, side: str) -> float:
    """P((Y-mu)/sigma >= t) (side="right") or <= -t (side="left"), exactly.

    Atom-vs-threshold comparisons get a relative slack of 1e-9 toward
    inclusion: thresholds routinely land exactly on atoms (integer laws,
    rational moments) and float dust must not drop that mass.
    """
    if sigma <= 0.0:
        raise DistributionError("exact_tail requires sigma > 0 (degenerate laws have no standardized tail)")
    if t < 0.0:
        raise DistributionError("tail threshold t must be >= 0")
    if side == "right":
        threshold = mu + t * sigma
        slack = 1e-9 * max(1.0, abs(threshold))
        mask = pmf.atoms >= threshold - slack
    elif side == "left":
        threshold = mu - t * sigma
        slack = 1e-9 * max(1.0, abs(threshold))
        mask = pmf.atoms <= threshold + slack
    else:
        raise DistributionError(f"side must be 'left' or 'right', got {side!r}")
    return float(pmf.probs[mask].sum())


def _splitmix64(a: int, b: int) -> int:
    """Deterministic 64-bit mix of two integers (splitmix64 finalizer)."""
    z = (a * 0x9E3779B97F4A7C15 + b + 0x9E3779B97F4A7C15) % _TWO64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) % _TWO64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) % _TWO64
    z ^= z >> 31
    return z


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    Wraps the Philox4x64 counter-based generator keyed by
    ``(seed, stream_id)``: equal keys reproduce identical draws on any
    platform and worker layout, distinct keys give statistically independent
    streams. ``child(k)`` derives a sub-stream id with a splitmix64 mix so
    block k of an experiment always sees the same stream no matter which
    worker runs it.
    """

    seed: int
    stream_id: int = 0
    algorithm: str = RNG_ALGORITHM

    def __post_init__(self):
        if self.algorithm != RNG_ALGORITHM:
            raise ValueError(f"unsupported RNG algorithm {self.algorithm!r}")
        if not isinstance(self.seed, int) or not isinstance(self.stream_id, int):
            raise ValueError("seed and stream_id must be integers")

    def generator(self) -> Generator:
        key = np.array([self.seed % _TWO64, self.stream_id % _TWO64], dtype=np.uint64)
        return Generator(Philox(key=key))

    def child(self, k: int) -> "RngStream":
        return RngStream(self.seed, _splitmix64(self.stream_id % _TWO64, k))
