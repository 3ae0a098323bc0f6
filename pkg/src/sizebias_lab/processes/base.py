"""Shared process-facing types: parameter bundles and bound-curve assembly."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..bounds import (
    BoundParams,
    GraphBoundCtx,
    InfDivCtx,
    bound_left_monotone,
    bound_right,
    graph_left_tail,
    graph_right_tail,
    infdiv_bounds,
    poisson_bounds,
)


class ProcessConfigError(ValueError):
    """Invalid process parameters."""


class ProcessCapabilityError(RuntimeError):
    """The requested operation is not available for this process/config."""


@dataclass(frozen=True)
class ProcessInfo:
    """Closed-form parameters and coupling capabilities of one process.

    ``c`` is the almost-sure coupling bound (None when unbounded, e.g. the
    graph and compound Poisson families, which carry their own bound context
    in ``ctx``). ``t_shift`` implements the odd-lightbulb evaluation: curves
    are the even-case bounds read at max(t - t_shift, 0), flagged
    ``approximate``.
    """

    mu: float
    sigma2: float
    c: float | None
    monotone: bool
    supports_left_tail: bool
    coupling_exact: bool
    family: str
    ctx: object = None
    t_shift: float = 0.0
    approximate: bool = False

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def bound_params(self, force_monotone: bool = False) -> BoundParams | None:
        if self.sigma2 <= 0.0 or self.c is None:
            return None
        return BoundParams(
            mu=self.mu,
            sigma2=self.sigma2,
            c=self.c,
            monotone=self.monotone or force_monotone,
            family=self.family,
        )


@dataclass(frozen=True)
class BoundCurve:
    """Tail-bound values on a t grid, ready for CSV/JSON export."""

    t_grid: tuple[float, ...]
    right: tuple[float, ...]
    left: tuple[float, ...] | None
    family: str
    approximate: bool = False
    left_forced: bool = False

    def side(self, side: str):
        if side == "right":
            return self.right
        if side == "left":
            return self.left
        raise ValueError(f"unknown side {side!r}")


def bound_curves(info: ProcessInfo, t_grid, force_monotone: bool = False) -> BoundCurve:
    """Evaluate the analytic left/right tail-bound curves for a process.

    Left curves are produced only when the process supports them or the
    caller explicitly asserts a monotone coupling with ``force_monotone``
    (the assertion is recorded on the returned curve).
    """
    ts = [float(t) for t in t_grid]
    if any(t < 0.0 for t in ts):
        raise ValueError("t grid must be nonnegative")
    if info.sigma2 <= 0.0:
        raise ProcessCapabilityError("degenerate process (sigma^2 = 0) has no standardized bounds")
    left_forced = force_monotone and not info.supports_left_tail

    if info.family == "graph":
        right = tuple(graph_right_tail(info.ctx, t) for t in ts)
        left = tuple(graph_left_tail(info.ctx, t) for t in ts)
        return BoundCurve(tuple(ts), right, left, "graph")

    if info.family == "poisson":
        pairs = [poisson_bounds(info.ctx, t) for t in ts]
        return BoundCurve(tuple(ts), tuple(r for _, r in pairs), tuple(l for l, _ in pairs), "poisson")

    if info.family == "infdiv":
        pairs = [infdiv_bounds(info.ctx, t) for t in ts]
        return BoundCurve(tuple(ts), tuple(r for _, r in pairs), tuple(l for l, _ in pairs), "infdiv")

    bp = info.bound_params(force_monotone)
    if bp is None:
        raise ProcessCapabilityError("no bounded-coupling parameters available for this process")
    shifted = [max(t - info.t_shift, 0.0) for t in ts]
    right = tuple(bound_right(bp, t) for t in shifted)
    left = None
    if info.supports_left_tail or force_monotone:
        left = tuple(bound_left_monotone(bp, t) for t in shifted)
    return BoundCurve(
        tuple(ts), right, left, info.family,
        approximate=info.approximate, left_forced=left_forced,
    )


def as_float_array(y) -> np.ndarray:
    return np.asarray(y, dtype=np.float64)
