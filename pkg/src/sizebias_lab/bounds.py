"""Analytic tail bounds and closed-form constants.

Covers the two-sided bounds for bounded couplings, the isolated-vertex
bounds for random graphs (including the implicit quadrature and 1-d
minimization), infinitely-divisible / compound Poisson bounds, the
nonuniform urn constants, and the coverage-process moments and limits.

All probability bounds are clamped to (0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge."""


class BoundOverflowError(OverflowError):
    """A bound ingredient exceeds float64 range; reported, never saturated."""


BOUND_FAMILIES = ("thm-main", "graph", "infdiv", "poisson", "coverage", "urn-nonuniform")

# Largest exponent we let through exp(); anything above float64 overflow is
# reported via BoundOverflowError instead.
_EXP_MAX = 700.0


def adaptive_simpson(f, a: float, b: float, abs_tol: float = 1e-10, max_depth: int = 52) -> float:
    """Adaptive Simpson quadrature of ``f`` on [a, b].

    A panel is accepted when |S2 - S1| <= 15 * max(tol, 1e-12 * |S2|); the
    relative floor keeps astronomically large (but smooth) integrands from
    recursing past float64 resolution. For O(1) integrands this is a plain
    absolute tolerance of ``abs_tol``.
    """
    if b < a:
        raise QuadratureError("integration bounds out of order")
    if a == b:
        return 0.0

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, tol, depth):
        x1 = 0.5 * (x0 + x2)
        lm = 0.5 * (x0 + x1)
        rm = 0.5 * (x1 + x2)
        flm = f(lm)
        frm = f(rm)
        left = simpson(x0, x1, f0, flm, f1)
        right = simpson(x1, x2, f1, frm, f2)
        delta = left + right - whole
        if abs(delta) <= 15.0 * max(tol, 1e-12 * abs(left + right)):
            return left + right + delta / 15.0
        if depth <= 0:
            raise QuadratureError(f"adaptive Simpson did not converge on [{x0}, {x2}]")
        return recurse(x0, x1, f0, flm, f1, left, tol / 2.0, depth - 1) + recurse(
            x1, x2, f1, frm, f2, right, tol / 2.0, depth - 1
        )

    mid = 0.5 * (a + b)
    fa, fm, fb = f(a), f(mid), f(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, abs_tol, max_depth)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f, lo: float, hi: float, rel_tol: float = 1e-8):
    """Minimize a unimodal ``f`` on [lo, hi] by golden-section search.

    Returns (x, f(x)). Handles boundary minima (the bracket never needs an
    interior low point), which is why this is used instead of a
    bracketing-based routine: the objective's minimizer sits at the left
    endpoint for small t.
    """
    if hi < lo:
        raise ValueError("empty interval")
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > rel_tol * max(1.0, abs(a) + abs(b)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    fx = f(x)
    # boundary minima: never return worse than an endpoint
    for cand, fcand in ((lo, f(lo)), (hi, f(hi))):
        if fcand < fx:
            x, fx = cand, fcand
    return x, fx


def _clamp_prob(x: float) -> float:
    return min(1.0, float(x))


@dataclass(frozen=True)
class BoundParams:
    """Parameters of the two-sided bounds for a bounded size-bias coupling."""

    mu: float
    sigma2: float
    c: float
    monotone: bool
    family: str = "thm-main"

    def __post_init__(self):
        if not (self.mu > 0.0 and self.sigma2 > 0.0 and self.c > 0.0):
            raise ValueError("BoundParams requires mu, sigma2, C > 0")
        if self.family not in BOUND_FAMILIES:
            raise ValueError(f"unknown bound family {self.family!r}")

    @property
    def a(self) -> float:
        return self.c * self.mu / self.sigma2

    @property
    def b(self) -> float:
        return self.c / (2.0 * math.sqrt(self.sigma2))


def bound_left_monotone(bp: BoundParams, t: float) -> float:
    """Left-tail bound exp(-t^2/(2A)); requires a monotone coupling."""
    if not bp.monotone:
        raise ValueError("left-tail bound requires a monotone coupling (bp.monotone)")
    if t < 0.0:
        raise ValueError("t must be >= 0")
    return _clamp_prob(math.exp(-t * t / (2.0 * bp.a)))


def bound_right(bp: BoundParams, t: float) -> float:
    """Right-tail bound exp(-t^2/(2(A+Bt)))."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    return _clamp_prob(math.exp(-t * t / (2.0 * (bp.a + bp.b * t))))


# ---------------------------------------------------------------------------
# Isolated vertices of an Erdos-Renyi graph
# ---------------------------------------------------------------------------


def graph_mean_var(n: int, p: float) -> tuple[float, float]:
    """Mean and variance of the isolated-vertex count of G(n, p)."""
    q = 1.0 - p
    mu = n * q ** (n - 1)
    sigma2 = n * q ** (n - 1) + n * (n - 1) * q ** (2 * n - 3) - n * n * q ** (2 * (n - 1))
    return mu, sigma2


@dataclass(frozen=True)
class GraphBoundCtx:
    n: int
    p: float
    beta: float = field(init=False)
    mu: float = field(init=False)
    sigma2: float = field(init=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("graph bounds require n >= 2")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0,1)")
        log_beta = -self.n * math.log1p(-self.p)
        if log_beta > _EXP_MAX:
            raise BoundOverflowError(f"beta=(1-p)^(-n) overflows for n={self.n}, p={self.p}")
        mu, sigma2 = graph_mean_var(self.n, self.p)
        object.__setattr__(self, "beta", math.exp(log_beta))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma2", sigma2)
        if not (self.beta >= 1.0 and self.mu > 0.0 and self.sigma2 > 0.0):
            raise ValueError("degenerate graph bound context")


# gamma_s tolerates slightly more than the theta_max search cap (700): the
# minimization probes its own endpoint, where the leading term carries an
# extra log 2 on top of the capped exponent. Still well short of the float64
# exp limit (~709.8).
_GAMMA_EXP_MAX = 705.0


def graph_gamma_s(s: float, ctx: GraphBoundCtx) -> float:
    """gamma_s = 2 e^{2s} (1 + p e^s / (1-p))^n + beta + 1."""
    if s < 0.0:
        raise ValueError("s must be >= 0")
    ratio = ctx.p / (1.0 - ctx.p)
    # log of the leading term, with the large-s branch of log1p
    if s > 690.0:
        log1p_term = math.log(ratio) + s
    else:
        log1p_term = math.log1p(ratio * math.exp(s))
    log_lead = math.log(2.0) + 2.0 * s + ctx.n * log1p_term
    if log_lead > _GAMMA_EXP_MAX:
        raise BoundOverflowError(f"gamma_s overflows at s={s} for n={ctx.n}, p={ctx.p}")
    return math.exp(log_lead) + ctx.beta + 1.0


def graph_H(theta: float, ctx: GraphBoundCtx, abs_tol: float = 1e-10) -> float:
    """H(theta) = (mu / 2 sigma^2) * integral_0^theta s * gamma_s ds."""
    if theta < 0.0:
        raise ValueError("theta must be >= 0")
    if theta == 0.0:
        return 0.0
    integral = adaptive_simpson(lambda s: s * graph_gamma_s(s, ctx), 0.0, theta, abs_tol)
    return ctx.mu / (2.0 * ctx.sigma2) * integral


def _graph_theta_max(ctx: GraphBoundCtx) -> float:
    """Largest theta with n*log(1 + p e^theta/(1-p)) + 2*theta < 700."""
    ratio = ctx.p / (1.0 - ctx.p)

    def log_growth(theta):
        if theta > 690.0:
            term = math.log(ratio) + theta
        else:
            term = math.log1p(ratio * math.exp(theta))
        return ctx.n * term + 2.0 * theta

    hi = 1.0
    while log_growth(hi) < _EXP_MAX:
        hi *= 2.0
        if hi > 1e6:
            return 1e6
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if log_growth(mid) < _EXP_MAX:
            lo = mid
        else:
            hi = mid
    return lo


def graph_right_tail(ctx: GraphBoundCtx, t: float, rel_tol: float = 1e-8) -> float:
    """inf over theta >= 0 of exp(-theta*t + H(theta)).

    The objective -theta*t + H(theta) is convex (H is convex), so
    golden-section on [0, theta_max] finds the minimum; theta_max caps the
    search where gamma_theta would overflow, which only weakens the bound
    (any theta yields a valid bound).
    """
    if t < 0.0:
        raise ValueError("t must be >= 0")
    theta_max = _graph_theta_max(ctx)

    def objective(theta):
        return -theta * t + graph_H(theta, ctx)

    # Expand the bracket geometrically: the objective is convex, so once it
    # stops decreasing the minimum is inside. This keeps the quadratures on
    # small intervals instead of probing all the way out to theta_max, where
    # H is astronomically large and slow to integrate.
    hi = min(0.5, theta_max)
    f_hi = objective(hi)
    while hi < theta_max:
        nxt = min(2.0 * hi, theta_max)
        f_nxt = objective(nxt)
        if f_nxt >= f_hi:
            hi = nxt
            break
        hi, f_hi = nxt, f_nxt

    _, fmin = golden_section_min(objective, 0.0, hi, rel_tol)
    fmin = min(fmin, 0.0)  # theta=0 always gives 0, so the true min is <= 0
    return _clamp_prob(math.exp(fmin))


def graph_right_tail_capped(ctx: GraphBoundCtx, t: float, theta0: float) -> float:
    """Closed-form right bound from a fixed theta0 cap.

    Below t* = theta0*mu*gamma_{theta0}/(2 sigma^2) the bound is
    exp(-t^2 sigma^2/(mu gamma_{theta0})); above it the linear branch
    exp(-theta0*t + mu*gamma_{theta0}*theta0^2/(4 sigma^2)) takes over.
    Both branches agree at t*.
    """
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if theta0 <= 0.0:
        raise ValueError("theta0 must be > 0")
    gamma0 = graph_gamma_s(theta0, ctx)
    t_star = theta0 * ctx.mu * gamma0 / (2.0 * ctx.sigma2)
    if t <= t_star:
        return _clamp_prob(math.exp(-t * t * ctx.sigma2 / (ctx.mu * gamma0)))
    return _clamp_prob(math.exp(-theta0 * t + ctx.mu * gamma0 * theta0 ** 2 / (4.0 * ctx.sigma2)))


def graph_left_tail(ctx: GraphBoundCtx, t: float) -> float:
    """Left-tail bound exp(-(t^2/2) * sigma^2 / (mu (beta+1)))."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    return _clamp_prob(math.exp(-0.5 * t * t * ctx.sigma2 / (ctx.mu * (ctx.beta + 1.0))))


# ---------------------------------------------------------------------------
# Infinitely divisible / compound Poisson
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InfDivCtx:
    mu: float
    sigma2: float
    nu: float        # E X
    c_x: float       # E X e^{gamma X}
    gamma: float

    def __post_init__(self):
        if not (self.mu > 0.0 and self.sigma2 > 0.0 and self.nu > 0.0 and self.gamma > 0.0):
            raise ValueError("InfDivCtx requires mu, sigma2, nu, gamma > 0")
        if not self.k >= self.nu / 2.0:
            raise ValueError("invariant K >= nu/2 violated (C_x must be >= 0)")

    @property
    def k(self) -> float:
        return (self.c_x + self.nu) / 2.0


def infdiv_bounds(ctx: InfDivCtx, t: float) -> tuple[float, float]:
    """(left, right) tail bounds for an infinitely divisible sum.

    right: exp(-t^2 sigma^2/(2 K mu)) while t < gamma*K*mu/sigma^2, then the
    linear branch exp(-gamma t + K mu gamma^2/(2 sigma^2)); the branches meet
    at the breakpoint. left: exp(-t^2 sigma^2/(2 nu mu)).
    """
    if t < 0.0:
        raise ValueError("t must be >= 0")
    k = ctx.k
    t_star = ctx.gamma * k * ctx.mu / ctx.sigma2
    if t < t_star:
        right = math.exp(-t * t * ctx.sigma2 / (2.0 * k * ctx.mu))
    else:
        right = math.exp(-ctx.gamma * t + k * ctx.mu * ctx.gamma ** 2 / (2.0 * ctx.sigma2))
    left = math.exp(-t * t * ctx.sigma2 / (2.0 * ctx.nu * ctx.mu))
    return _clamp_prob(left), _clamp_prob(right)


def gamma_compound_constants(alpha: float, beta_scale: float, lambda_tau: float, M: float) -> InfDivCtx:
    """Bound constants for a compound Poisson sum of Gamma(alpha, beta) terms.

    nu = (alpha+1) beta is the size-biased mean, C_x = (alpha+1) beta
    (M/(M-1))^(alpha+2) the exponential-moment constant at gamma = 1/(M beta).
    sigma2 follows the source display lambda*tau*beta^2*alpha (see ledger:
    the bound is self-consistent for any sigma used on both sides).
    """
    if not (alpha > 0.0 and beta_scale > 0.0 and lambda_tau > 0.0):
        raise ValueError("alpha, beta, lambda_tau must be > 0")
    if not M > 1.0:
        raise ValueError("M must exceed 1")
    nu = (alpha + 1.0) * beta_scale
    mu = lambda_tau * alpha * beta_scale
    sigma2 = lambda_tau * beta_scale ** 2 * alpha
    gamma = 1.0 / (M * beta_scale)
    c_x = (alpha + 1.0) * beta_scale * (M / (M - 1.0)) ** (alpha + 2.0)
    return InfDivCtx(mu=mu, sigma2=sigma2, nu=nu, c_x=c_x, gamma=gamma)


def poisson_bounds(lam: float, t: float) -> tuple[float, float]:
    """(left, right) tail bounds for a Poisson(lambda) variable."""
    if lam <= 0.0:
        raise ValueError("lambda must be > 0")
    if t < 0.0:
        raise ValueError("t must be >= 0")
    left = math.exp(-t * t / 2.0)
    right = math.exp(-t * t / (2.0 + t / math.sqrt(lam)))
    return _clamp_prob(left), _clamp_prob(right)


# ---------------------------------------------------------------------------
# Nonuniform urn constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UrnNonuniformConstants:
    gamma: float
    a: float
    b: float
    valid: bool


def urn_nonuniform_constants(n: int, p) -> UrnNonuniformConstants:
    """Explicit (A, B) constants for the nonuniform urn occupancy count.

    gamma = max(n*max(p), 1); A = 24495 gamma^2 e^{2.1 gamma};
    B = 1.5 sqrt(7776) gamma e^{1.05 gamma} / (n sqrt(sum p_i^2));
    valid only when max(p) <= 1/11 and n >= 83 gamma^2 (1+3gamma+3gamma^2) e^{1.05 gamma}.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p must be a nonempty 1-d probability vector")
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("all urn probabilities must lie in (0,1)")
    if abs(float(p.sum()) - 1.0) > 1e-12:
        raise ValueError("urn probabilities must sum to 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    pmax = float(p.max())
    gamma = max(n * pmax, 1.0)
    a = 24495.0 * gamma ** 2 * math.exp(2.1 * gamma)
    b = 1.5 * math.sqrt(7776.0) * gamma * math.exp(1.05 * gamma) / (n * math.sqrt(float((p ** 2).sum())))
    valid = pmax <= 1.0 / 11.0 and n >= 83.0 * gamma ** 2 * (1.0 + 3.0 * gamma + 3.0 * gamma ** 2) * math.exp(1.05 * gamma)
    return UrnNonuniformConstants(gamma=gamma, a=a, b=b, valid=valid)


def urn_limit(alpha: float) -> float:
    """Limiting variance factor g^2(alpha) = e^{-a} - e^{-2a}(a^2 - a + 1)."""
    if alpha <= 0.0:
        raise ValueError("alpha must be > 0")
    return math.exp(-alpha) - math.exp(-2.0 * alpha) * (alpha * alpha - alpha + 1.0)


# ---------------------------------------------------------------------------
# Coverage process (torus of volume n)
# ---------------------------------------------------------------------------


def unit_ball_volume(d: int) -> float:
    """Volume pi_d of the d-dimensional unit ball."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return math.pi ** (d / 2.0) / math.gamma(1.0 + d / 2.0)


def coverage_omega(d: int, r: float, abs_tol: float = 1e-10) -> float:
    """Volume omega_d(r) of the union of two unit balls at center distance r.

    d=1 closed form 2+r; d >= 2 via
    pi_d + pi_{d-1} * integral_0^r (1-(t/2)^2)^((d-1)/2) dt.
    """
    if not 0.0 <= r <= 2.0:
        raise ValueError("r must lie in [0,2]")
    if d == 1:
        return 2.0 + r
    pd_minus = unit_ball_volume(d - 1)
    expo = (d - 1) / 2.0
    integral = adaptive_simpson(lambda t: (1.0 - (t / 2.0) ** 2) ** expo, 0.0, r, abs_tol)
    return unit_ball_volume(d) + pd_minus * integral


@dataclass(frozen=True)
class CoverageCtx:
    n: int
    rho: float
    d: int = 1
    kappa_d: int | None = None
    phi: float = field(init=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.rho <= 0.0:
            raise ValueError("rho must be > 0")
        if self.n < 4:
            raise ValueError("coverage needs n >= 4")
        if self.d == 1:
            object.__setattr__(self, "kappa_d", 2)
        elif self.kappa_d is None:
            raise ValueError("kappa_d must be supplied for d >= 2")
        phi = unit_ball_volume(self.d) * self.rho ** self.d
        object.__setattr__(self, "phi", phi)
        if not phi < self.n:
            raise ValueError("validity guard phi < n violated")


@dataclass(frozen=True)
class CoverageMoments:
    mu_v: float
    sigma2_v: float
    mu_s: float
    sigma2_s: float


def coverage_moments(ctx: CoverageCtx, abs_tol: float = 1e-9) -> CoverageMoments:
    """Exact mean/variance of covered volume V and isolated-ball count S.

    Ball integrals reduce to radial form
    integral_{B_R} h(|y|) dy = d * pi_d * integral_0^R h(r) r^{d-1} dr,
    and the annulus rho < |y| < 2 rho analogously.
    """
    n, rho, d, phi = ctx.n, ctx.rho, ctx.d, ctx.phi
    pd = unit_ball_volume(d)
    mu_v = n * (1.0 - (1.0 - phi / n) ** n)
    mu_s = n * (1.0 - phi / n) ** (n - 1)

    def overlap(r):  # rho^d * omega_d(r/rho) = volume of union of two rho-balls at distance r
        return rho ** d * coverage_omega(d, r / rho)

    int_v = adaptive_simpson(
        lambda r: (1.0 - overlap(r) / n) ** n * r ** (d - 1), 0.0, 2.0 * rho, abs_tol
    )
    sigma2_v = (
        n * d * pd * int_v
        + n * (n - 2.0 ** d * phi) * (1.0 - 2.0 * phi / n) ** n
        - n * n * (1.0 - phi / n) ** (2 * n)
    )

    int_s = adaptive_simpson(
        lambda r: (1.0 - overlap(r) / n) ** (n - 2) * r ** (d - 1), rho, 2.0 * rho, abs_tol
    )
    sigma2_s = (
        mu_s * (1.0 - (1.0 - phi / n) ** (n - 1))
        + (n - 1) * d * pd * int_s
        + n * (n - 1.0) * (
            (1.0 - 2.0 ** d * phi / n) * (1.0 - 2.0 * phi / n) ** (n - 2)
            - (1.0 - phi / n) ** (2 * n - 2)
        )
    )
    return CoverageMoments(mu_v=mu_v, sigma2_v=sigma2_v, mu_s=mu_s, sigma2_s=sigma2_s)


@dataclass(frozen=True)
class CoverageLimits:
    vol_frac_limit: float
    g_v: float
    g_s: float


def _coverage_j(r: float, d: int, rho: float, abs_tol: float = 1e-10) -> float:
    """J_{r,d}(rho) = d pi_d integral_0^r exp(-rho^d omega_d(t)) t^{d-1} dt."""
    pd = unit_ball_volume(d)
    return d * pd * adaptive_simpson(
        lambda t: math.exp(-(rho ** d) * coverage_omega(d, t)) * t ** (d - 1), 0.0, r, abs_tol
    )


def coverage_limits(rho: float, d: int) -> CoverageLimits:
    """Limiting volume fraction and variance factors g_V, g_S."""
    if rho <= 0.0:
        raise ValueError("rho must be > 0")
    if d < 1:
        raise ValueError("d must be >= 1")
    phi = unit_ball_volume(d) * rho ** d
    j2 = _coverage_j(2.0, d, rho)
    j1 = _coverage_j(1.0, d, rho)
    g_v = rho ** d * j2 - (2.0 ** d * phi + phi * phi) * math.exp(-2.0 * phi)
    g_s = (
        math.exp(-phi)
        - (1.0 + (2.0 ** d - 2.0) * phi + phi * phi) * math.exp(-2.0 * phi)
        + rho ** d * (j2 - j1)
    )
    return CoverageLimits(vol_frac_limit=1.0 - math.exp(-phi), g_v=g_v, g_s=g_s)
