"""Exact enumeration oracles for tiny process instances.

Ground truth, computed independently of the samplers: statistics are
re-derived here with plain loops and bit twiddling rather than by calling the
processes' vectorized code, so the two routes cross-check each other. Exact
rational weights are used wherever the outcome measure is uniform or rational
(permutations, urns, lightbulb stages); otherwise weights are floats
accumulated with compensated summation, accurate to well under 1e-12.

Guards keep the enumerated state space small; exceeding one raises
InfeasibleError rather than silently approximating. Poisson-type laws have
no finite enumeration and get truncated-series oracles instead.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .distcore import FinitePmf, round_sig, size_bias_pmf
from .processes import (
    CompoundPoisson,
    Coverage,
    Extrema,
    GraphIso,
    Lightbulb,
    PermPattern,
    Poisson,
    Runs,
    UrnUniform,
)
from .processes.urn import urn_pi_fractions

GUARD_MAX_OUTCOMES = 10 ** 8
_PROB_TOL = 1e-12
_CHUNK = 1 << 18


class InfeasibleError(ValueError):
    """The requested enumeration exceeds the supported state-space guards."""


# ---------------------------------------------------------------------------
# joint law container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JointLaw:
    """Exact joint law of (y, y_s) under a process's coupling.

    ``pairs`` is a sorted tuple of (y, y_s, prob) triples with distinct
    (y, y_s) keys and probabilities summing to 1 within 1e-12.
    """

    pairs: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        keys = [(y, ys) for y, ys, _ in self.pairs]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (y, y_s) pairs")
        if keys != sorted(keys):
            raise ValueError("pairs must be sorted by (y, y_s)")
        total = math.fsum(p for _, _, p in self.pairs)
        if any(p < 0.0 for _, _, p in self.pairs) or abs(total - 1.0) > _PROB_TOL:
            raise ValueError("pair probabilities must be nonnegative and sum to 1")

    @classmethod
    def from_weighted(cls, triples) -> "JointLaw":
        """Merge (y, y_s, weight) triples; weights normalized by their total."""
        acc: dict[tuple[float, float], list[float]] = {}
        for y, ys, w in triples:
            w = float(w)
            if w == 0.0:
                continue
            key = (round_sig(float(y)), round_sig(float(ys)))
            acc.setdefault(key, []).append(w)
        if not acc:
            raise ValueError("no mass")
        merged = {k: math.fsum(v) for k, v in acc.items()}
        total = math.fsum(merged.values())
        pairs = tuple(
            (y, ys, w / total) for (y, ys), w in sorted(merged.items())
        )
        return cls(pairs)

    def marginal_y(self) -> FinitePmf:
        return FinitePmf.from_weighted(
            [y for y, _, _ in self.pairs], [p for _, _, p in self.pairs]
        )

    def marginal_ys(self) -> FinitePmf:
        return FinitePmf.from_weighted(
            [ys for _, ys, _ in self.pairs], [p for _, _, p in self.pairs]
        )

    def to_json(self) -> str:
        return json.dumps({"pairs": [[y, ys, p] for y, ys, p in self.pairs]})

    @classmethod
    def from_json(cls, text: str) -> "JointLaw":
        data = json.loads(text)
        return cls(tuple((float(y), float(ys), float(p)) for y, ys, p in data["pairs"]))


def _law_from_counts(values, weights) -> FinitePmf:
    vals = [float(v) for v, w in zip(values, weights) if w]
    ws = [float(w) for w in weights if w]
    return FinitePmf.from_weighted(vals, ws)


# ---------------------------------------------------------------------------
# runs: cyclic Bernoulli strings
# ---------------------------------------------------------------------------

def _runs_stat_block(bits: np.ndarray, m: int) -> np.ndarray:
    win = bits
    for j in range(1, m):
        win = win * np.roll(bits, -j, axis=1)
    return win.sum(axis=1)


def _runs_guard(cfg: Runs, per_string: int):
    if cfg.n > 24 or per_string * (1 << cfg.n) > GUARD_MAX_OUTCOMES:
        raise InfeasibleError(f"runs enumeration infeasible at n={cfg.n}")


def _runs_counts(cfg: Runs, with_coupling: bool):
    n, m = cfg.n, cfg.m
    width = n + 1
    law = np.zeros(width * width, dtype=np.int64)          # (y, ones)
    joint = np.zeros(width ** 3, dtype=np.int64)           # (y, ys, ones)
    shifts = np.arange(n, dtype=np.int64)
    for lo in range(0, 1 << n, _CHUNK):
        codes = np.arange(lo, min(lo + _CHUNK, 1 << n), dtype=np.int64)
        bits = ((codes[:, None] >> shifts) & 1).astype(np.int64)
        ones = bits.sum(axis=1)
        y = _runs_stat_block(bits, m)
        law += np.bincount(y * width + ones, minlength=width * width)
        if with_coupling:
            for i in range(n):
                forced = bits.copy()
                forced[:, [(i + j) % n for j in range(m)]] = 1
                ys = _runs_stat_block(forced, m)
                joint += np.bincount(
                    (y * width + ys) * width + ones, minlength=width ** 3
                )
    return law.reshape(width, width), joint.reshape(width, width, width)


def _string_weight(counts_by_ones: np.ndarray, n: int, p: float) -> float:
    return math.fsum(
        int(c) * p ** k * (1.0 - p) ** (n - k)
        for k, c in enumerate(counts_by_ones)
        if c
    )


def _runs_law(cfg: Runs) -> FinitePmf:
    _runs_guard(cfg, 1)
    law, _ = _runs_counts(cfg, with_coupling=False)
    n = cfg.n
    values = range(n + 1)
    weights = [_string_weight(law[y], n, cfg.p) for y in values]
    return _law_from_counts(values, weights)


def _runs_coupling(cfg: Runs) -> JointLaw:
    _runs_guard(cfg, cfg.n)
    _, joint = _runs_counts(cfg, with_coupling=True)
    n = cfg.n
    triples = []
    for y in range(n + 1):
        for ys in range(n + 1):
            if joint[y, ys].any():
                triples.append((y, ys, _string_weight(joint[y, ys], n, cfg.p)))
    return JointLaw.from_weighted(triples)


# ---------------------------------------------------------------------------
# permutations: pattern counts and cyclic local maxima
# ---------------------------------------------------------------------------

def _all_ranks(n: int) -> np.ndarray:
    k = math.factorial(n)
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.permutations(range(n))),
        dtype=np.int8,
        count=k * n,
    )
    return flat.reshape(k, n)


def _perm_stat_block(ranks: np.ndarray, tau: tuple[int, ...]) -> np.ndarray:
    n = ranks.shape[1]
    m = len(tau)
    inv0 = [tau.index(v) for v in range(1, m + 1)]
    y = np.zeros(len(ranks), dtype=np.int64)
    for a in range(n):
        w = ranks[:, [(a + inv0[j]) % n for j in range(m)]]
        y += np.all(w[:, 1:] > w[:, :-1], axis=1)
    return y


def _perm_law(cfg: PermPattern) -> FinitePmf:
    if cfg.n > 8:
        raise InfeasibleError(f"perm enumeration infeasible at n={cfg.n}")
    ranks = _all_ranks(cfg.n)
    y = _perm_stat_block(ranks, cfg.tau)
    counts = np.bincount(y, minlength=cfg.n + 1)
    return _law_from_counts(range(cfg.n + 1), counts)


def _perm_coupling(cfg: PermPattern) -> JointLaw:
    n, m = cfg.n, cfg.m
    if n > 8 or math.factorial(n) * n > GUARD_MAX_OUTCOMES:
        raise InfeasibleError(f"perm coupling enumeration infeasible at n={n}")
    ranks = _all_ranks(n)
    y = _perm_stat_block(ranks, cfg.tau)
    inv0 = [cfg.tau.index(v) for v in range(1, m + 1)]
    width = n + 1
    acc = np.zeros(width * width, dtype=np.int64)
    for a in range(n):
        pos = [(a + inv0[j]) % n for j in range(m)]
        rearranged = ranks.copy()
        rearranged[:, pos] = np.sort(ranks[:, pos], axis=1)
        ys = _perm_stat_block(rearranged, cfg.tau)
        acc += np.bincount(y * width + ys, minlength=width * width)
    acc = acc.reshape(width, width)
    triples = [
        (y0, ys0, int(acc[y0, ys0]))
        for y0 in range(width)
        for ys0 in range(width)
        if acc[y0, ys0]
    ]
    return JointLaw.from_weighted(triples)


def _extrema_stat_block(ranks: np.ndarray) -> np.ndarray:
    up = ranks > np.roll(ranks, 1, axis=1)
    dn = ranks > np.roll(ranks, -1, axis=1)
    return (up & dn).sum(axis=1)


def _extrema_check(cfg: Extrema):
    if cfg.dim != 1:
        raise InfeasibleError("extrema enumeration supports dim=1 only")
    if cfg.n > 9:
        raise InfeasibleError(f"extrema enumeration infeasible at n={cfg.n}")


def _extrema_law(cfg: Extrema) -> FinitePmf:
    _extrema_check(cfg)
    y = _extrema_stat_block(_all_ranks(cfg.n))
    counts = np.bincount(y, minlength=cfg.n + 1)
    return _law_from_counts(range(cfg.n + 1), counts)


def _extrema_coupling(cfg: Extrema) -> JointLaw:
    """Enumerate the refresh coupling: uniform center I, three fresh values.

    Distinct iid uniforms reduce to ranks: the fresh triple occupies a
    uniform 3-subset S of the n ranks (the survivors keep their relative
    order on the complement), the largest of S sits at the center and the
    other two land left/right in either order, each equally likely.
    """
    _extrema_check(cfg)
    n = cfg.n
    total = math.factorial(n) * n * math.comb(n, 3) * 2
    if total > GUARD_MAX_OUTCOMES:
        raise InfeasibleError(f"extrema coupling enumeration infeasible at n={n}")
    ranks = _all_ranks(n)
    y = _extrema_stat_block(ranks)
    width = n + 1
    acc = np.zeros(width * width, dtype=np.int64)
    all_ranks = set(range(n))
    for i in range(n):
        left, right = (i - 1) % n, (i + 1) % n
        kept = [j for j in range(n) if j not in {left, i, right}]
        comp = np.argsort(np.argsort(ranks[:, kept], axis=1), axis=1)
        for s in itertools.combinations(range(n), 3):
            rem = np.array(sorted(all_ranks - set(s)), dtype=np.int8)
            new_kept = rem[comp]
            s0, s1, s2 = s
            for a, b in ((s0, s1), (s1, s0)):
                cfg2 = np.empty_like(ranks)
                cfg2[:, kept] = new_kept
                cfg2[:, i] = s2
                cfg2[:, left] = a
                cfg2[:, right] = b
                ys = _extrema_stat_block(cfg2)
                acc += np.bincount(y * width + ys, minlength=width * width)
    acc = acc.reshape(width, width)
    triples = [
        (y0, ys0, int(acc[y0, ys0]))
        for y0 in range(width)
        for ys0 in range(width)
        if acc[y0, ys0]
    ]
    return JointLaw.from_weighted(triples)


# ---------------------------------------------------------------------------
# urn occupancy
# ---------------------------------------------------------------------------

def _urn_law(cfg: UrnUniform) -> FinitePmf:
    n, m = cfg.n, cfg.m
    total = m ** n
    if total > 10 ** 7:
        raise InfeasibleError(f"urn enumeration infeasible at m^n={total}")
    counts = np.zeros(n + 1, dtype=np.int64)
    powers = m ** np.arange(n, dtype=np.int64)
    for lo in range(0, total, _CHUNK):
        codes = np.arange(lo, min(lo + _CHUNK, total), dtype=np.int64)
        digits = (codes[:, None] // powers) % m
        b = len(codes)
        occ = np.bincount(
            (np.arange(b)[:, None] * m + digits).ravel(), minlength=b * m
        ).reshape(b, m)
        ball_occ = np.take_along_axis(occ, digits, axis=1)
        y = n - (ball_occ == 1).sum(axis=1)
        counts += np.bincount(y, minlength=n + 1)
    return _law_from_counts(range(n + 1), counts)


def _urn_nonisolated(throw: tuple[int, ...], m: int) -> int:
    occ = [0] * m
    for u in throw:
        occ[u] += 1
    return sum(1 for u in throw if occ[u] > 1)


def _urn_coupling(cfg: UrnUniform) -> JointLaw:
    """Exact-rational enumeration of (throw, I, move?, J) with pi from
    urn_pi_fractions — an independent route from the sampler's log-space
    pi table and delta recounting."""
    n, m = cfg.n, cfg.m
    total = m ** n * n * (n - 1)
    if total > 2 * 10 ** 6:
        raise InfeasibleError(f"urn coupling enumeration infeasible at n={n}, m={m}")
    pis = urn_pi_fractions(n, m)
    acc: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
    w_throw = Fraction(1, m ** n * n)
    for throw in itertools.product(range(m), repeat=n):
        y = _urn_nonisolated(throw, m)
        occ = [0] * m
        for u in throw:
            occ[u] += 1
        for i in range(n):
            pi = pis[occ[throw[i]] - 1]
            if pi != 1:
                acc[(y, y)] += w_throw * (1 - pi)
            if pi != 0:
                w_move = w_throw * pi / (n - 1)
                for j in range(n):
                    if j == i:
                        continue
                    moved = list(throw)
                    moved[j] = throw[i]
                    acc[(y, _urn_nonisolated(tuple(moved), m))] += w_move
    return JointLaw.from_weighted(
        [(y, ys, float(w)) for (y, ys), w in sorted(acc.items())]
    )


# ---------------------------------------------------------------------------
# lightbulb toggles
# ---------------------------------------------------------------------------

def _stage_masks(n: int, r: int) -> list[int]:
    return [sum(1 << i for i in c) for c in itertools.combinations(range(n), r)]


def _lightbulb_parity_dist(n: int, skip: int | None = None) -> dict[int, int]:
    """Counts of the XOR of one uniform size-r subset per stage r (optionally
    skipping one stage). Total count is the product of the stage subset counts."""
    dist = {0: 1}
    for r in range(1, n + 1):
        if r == skip:
            continue
        new: dict[int, int] = defaultdict(int)
        masks = _stage_masks(n, r)
        for mask, c in dist.items():
            for sm in masks:
                new[mask ^ sm] += c
        dist = dict(new)
    return dist


def _lightbulb_guard(cfg: Lightbulb):
    if cfg.n > 6:
        raise InfeasibleError(f"lightbulb enumeration infeasible at n={cfg.n}")


def _lightbulb_law(cfg: Lightbulb) -> FinitePmf:
    _lightbulb_guard(cfg)
    n = cfg.n
    dist = _lightbulb_parity_dist(n)
    counts = [0] * (n + 1)
    for mask, c in dist.items():
        counts[mask.bit_count()] += c
    return _law_from_counts(range(n + 1), counts)


def _lightbulb_coupling(cfg: Lightbulb) -> JointLaw:
    _lightbulb_guard(cfg)
    n = cfg.n
    if n % 2:
        raise InfeasibleError("odd-n lightbulb has no exact coupling to enumerate")
    half = n // 2
    dist = _lightbulb_parity_dist(n, skip=half)
    half_masks = _stage_masks(n, half)
    # integer units over the common denominator |dist| * C(n, half) * n * half
    acc: dict[tuple[int, int], int] = defaultdict(int)
    for rest, c in dist.items():
        for h in half_masks:
            parity = rest ^ h
            y = parity.bit_count()
            for i in range(n):
                if (parity >> i) & 1:
                    acc[(y, y)] += c * half  # bulb already on: no swap
                    continue
                h_i = (h >> i) & 1
                for j in range(n):
                    if j != i and ((h >> j) & 1) != h_i:
                        swapped = h ^ (1 << i) ^ (1 << j)
                        ys = (rest ^ swapped).bit_count()
                        acc[(y, ys)] += c
    return JointLaw.from_weighted(
        [(y, ys, c) for (y, ys), c in sorted(acc.items())]
    )


# ---------------------------------------------------------------------------
# graph isolated vertices
# ---------------------------------------------------------------------------

def _graph_adj(mask: int, edges: list[tuple[int, int]], n: int) -> list[int]:
    adj = [0] * n
    for idx, (u, v) in enumerate(edges):
        if (mask >> idx) & 1:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
    return adj


def _graph_guard(cfg: GraphIso):
    if cfg.n > 6:
        raise InfeasibleError(f"graph enumeration infeasible at n={cfg.n}")


def _graph_law(cfg: GraphIso) -> FinitePmf:
    _graph_guard(cfg)
    n = cfg.n
    edges = list(itertools.combinations(range(n), 2))
    n_edges = len(edges)
    counts = np.zeros((n_edges + 1, n + 1), dtype=np.int64)
    for mask in range(1 << n_edges):
        adj = _graph_adj(mask, edges, n)
        y = sum(1 for a in adj if a == 0)
        counts[mask.bit_count(), y] += 1
    p = cfg.p
    weights = [
        math.fsum(
            int(counts[e, y]) * p ** e * (1.0 - p) ** (n_edges - e)
            for e in range(n_edges + 1)
            if counts[e, y]
        )
        for y in range(n + 1)
    ]
    return _law_from_counts(range(n + 1), weights)


def _graph_coupling(cfg: GraphIso) -> JointLaw:
    """Enumerate (graph, V); y_s is recounted on the graph with V's edges
    removed, independently of the d1(V) + 1(d(V) != 0) shortcut."""
    _graph_guard(cfg)
    n = cfg.n
    edges = list(itertools.combinations(range(n), 2))
    n_edges = len(edges)
    acc: dict[tuple[int, int, int], int] = defaultdict(int)
    for mask in range(1 << n_edges):
        adj = _graph_adj(mask, edges, n)
        y = sum(1 for a in adj if a == 0)
        e = mask.bit_count()
        for v in range(n):
            drop = ~(1 << v)
            ys = sum(
                1
                for w in range(n)
                if (0 if w == v else adj[w] & drop) == 0
            )
            acc[(y, ys, e)] += 1
    p = cfg.p
    merged: dict[tuple[int, int], list[float]] = {}
    for (y, ys, e), c in acc.items():
        merged.setdefault((y, ys), []).append(c * p ** e * (1.0 - p) ** (n_edges - e))
    return JointLaw.from_weighted(
        [(y, ys, math.fsum(ws)) for (y, ys), ws in sorted(merged.items())]
    )


# ---------------------------------------------------------------------------
# truncated-series oracles for Poisson-type laws
# ---------------------------------------------------------------------------

def _poisson_weights(lam: float, eps: float) -> list[float]:
    if eps > 1e-10 or eps <= 0.0:
        raise ValueError("eps must lie in (0, 1e-10]")
    if not 0.0 < lam <= 700.0:
        raise InfeasibleError("lambda out of supported range (0, 700]")
    w = math.exp(-lam)
    weights = [w]
    cum = w
    k = 0
    while 1.0 - cum >= eps:
        k += 1
        if k > 10 ** 6:
            raise InfeasibleError("Poisson truncation did not converge")
        w *= lam / k
        weights.append(w)
        cum += w
    return weights


def poisson_truncated_pmf(lam: float, eps: float = 1e-12) -> FinitePmf:
    """Poisson(lam) pmf truncated where the right tail mass drops below eps.

    The removed remainder (< eps) is restored by renormalization, so the
    result is a proper pmf within eps of the true law in total variation.
    """
    weights = _poisson_weights(lam, eps)
    return FinitePmf.from_weighted(range(len(weights)), weights)


def compound_truncated_pmf(lam: float, z: FinitePmf, eps: float = 1e-12) -> FinitePmf:
    """Law of Z_1 + ... + Z_N, N ~ Poisson(lam), by convolution powers.

    The Poisson count is truncated where its tail mass drops below eps and
    the remainder renormalized away: total-variation error < eps. Meant for
    small summand supports (atom sets grow with each convolution power).
    """
    if float(z.atoms[0]) < 0.0:
        raise ValueError("summand atoms must be nonnegative")
    weights = _poisson_weights(lam, eps)
    acc: dict[float, float] = defaultdict(float)
    power = {0.0: 1.0}  # Z^{*k}, starting at the zero-sum point mass
    for k, wk in enumerate(weights):
        for atom, q in power.items():
            acc[atom] += wk * q
        if k < len(weights) - 1:
            nxt: dict[float, float] = defaultdict(float)
            for atom, q in power.items():
                for a, pa in zip(z.atoms, z.probs):
                    nxt[round_sig(atom + float(a))] += q * float(pa)
            power = nxt
    items = sorted(acc.items())
    return FinitePmf.from_weighted([a for a, _ in items], [w for _, w in items])


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_LAW = {
    Runs: _runs_law,
    PermPattern: _perm_law,
    Extrema: _extrema_law,
    UrnUniform: _urn_law,
    Lightbulb: _lightbulb_law,
    GraphIso: _graph_law,
}

_COUPLING = {
    Runs: _runs_coupling,
    PermPattern: _perm_coupling,
    Extrema: _extrema_coupling,
    UrnUniform: _urn_coupling,
    Lightbulb: _lightbulb_coupling,
    GraphIso: _graph_coupling,
}

_NO_ENUMERATION = (CompoundPoisson, Poisson, Coverage)


def enumerate_law(cfg) -> FinitePmf:
    """Exact law of Y for a tiny instance, by exhaustive enumeration."""
    handler = _LAW.get(type(cfg))
    if handler is None:
        if isinstance(cfg, _NO_ENUMERATION):
            raise InfeasibleError(
                f"{cfg.name} has no finite enumeration (use the truncated-series "
                "oracles for Poisson-type laws)"
            )
        raise TypeError(f"not a process config: {cfg!r}")
    return handler(cfg)


def enumerate_coupling(cfg) -> JointLaw:
    """Exact joint law of (Y, Y^s) under the process's coupling."""
    handler = _COUPLING.get(type(cfg))
    if handler is None:
        if isinstance(cfg, _NO_ENUMERATION):
            raise InfeasibleError(f"{cfg.name} coupling has no finite enumeration")
        raise TypeError(f"not a process config: {cfg!r}")
    return handler(cfg)


def size_biased_reference(cfg) -> FinitePmf:
    """size_bias_pmf(enumerate_law(cfg)) — the target for coupling marginals."""
    return size_bias_pmf(enumerate_law(cfg))
