"""Compound Poisson sums and the plain Poisson, with additive couplings.

Y = Z_1 + ... + Z_N with N ~ Poisson(lam) and Z i.i.d. nonnegative. The
coupled sampler draws an independent size-biased summand and adds it:
y_s = y + z_s, which is monotone. Two summand families are supported:

* GammaZ(alpha, beta): Z ~ Gamma(alpha, scale beta), z_s ~ Gamma(alpha+1,
  beta). Unbounded, so bounds run through the exponential-moment machinery
  (family "infdiv") with constants from gamma_compound_constants; m_factor
  is the M > 1 knob trading the usable t range against the constant K.
* FinitePmf: z_s has the discrete size-biased law; the coupling increment is
  bounded by the largest atom, and the exponential-moment constant is
  computed exactly at gamma = gamma_exp / max_atom.

Poisson(lam) itself is the degenerate case Z = 1: y_s = y + 1, with its own
sharper bound family.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from ..bounds import InfDivCtx, gamma_compound_constants
from ..distcore import FinitePmf, pmf_moments, size_bias_pmf
from .base import ProcessConfigError, ProcessInfo


@dataclass(frozen=True)
class GammaZ:
    """Gamma(alpha, scale beta) summand parameters."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise ProcessConfigError("Gamma summand needs alpha > 0 and beta > 0")


@dataclass(frozen=True)
class CompoundPoisson:
    lam: float
    z: object  # GammaZ | FinitePmf
    m_factor: float = 2.0
    gamma_exp: float = 1.0

    name = "cpoisson"

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ProcessConfigError("lam must be > 0")
        if isinstance(self.z, GammaZ):
            if not self.m_factor > 1.0:
                raise ProcessConfigError("m_factor must exceed 1")
        elif isinstance(self.z, FinitePmf):
            if not self.gamma_exp > 0.0:
                raise ProcessConfigError("gamma_exp must be > 0")
            if float(self.z.atoms[0]) < 0.0 or pmf_moments(self.z).mean <= 0.0:
                raise ProcessConfigError("summand law must be nonnegative with positive mean")
        else:
            raise ProcessConfigError("z must be a GammaZ or a FinitePmf")

    @cached_property
    def _zs_pmf(self) -> FinitePmf:
        return size_bias_pmf(self.z)

    @cached_property
    def ctx(self) -> InfDivCtx:
        if isinstance(self.z, GammaZ):
            return gamma_compound_constants(self.z.alpha, self.z.beta, self.lam, self.m_factor)
        m = pmf_moments(self.z)
        ez2 = m.variance + m.mean * m.mean
        zs = self._zs_pmf
        zmax = float(zs.atoms[-1])
        gamma = self.gamma_exp / zmax
        c_x = math.fsum(a * math.exp(gamma * a) * p for a, p in zip(zs.atoms, zs.probs))
        return InfDivCtx(
            mu=self.lam * m.mean,
            sigma2=self.lam * ez2,
            nu=ez2 / m.mean,
            c_x=c_x,
            gamma=gamma,
        )

    def info(self) -> ProcessInfo:
        ctx = self.ctx
        c = None if isinstance(self.z, GammaZ) else float(self._zs_pmf.atoms[-1])
        return ProcessInfo(
            mu=ctx.mu,
            sigma2=ctx.sigma2,
            c=c,
            monotone=True,
            supports_left_tail=True,
            coupling_exact=True,
            family="infdiv",
            ctx=ctx,
        )

    # -- sampling -----------------------------------------------------------

    def sample_y(self, gen, size: int) -> np.ndarray:
        if isinstance(self.z, GammaZ):
            counts = gen.poisson(self.lam, size)
            return gen.gamma(counts * self.z.alpha, self.z.beta)
        # thin the Poisson stream by atom: independent Poisson counts per atom
        y = np.zeros(size)
        for a, p in zip(self.z.atoms, self.z.probs):
            if a != 0.0 and p > 0.0:
                y += a * gen.poisson(self.lam * p, size)
        return y

    def _sample_zs(self, gen, size: int) -> np.ndarray:
        if isinstance(self.z, GammaZ):
            return gen.gamma(self.z.alpha + 1.0, self.z.beta, size)
        return self._zs_pmf.sample(gen, size)

    def sample_coupled(self, gen, size: int):
        y = self.sample_y(gen, size)
        return y, y + self._sample_zs(gen, size)


@dataclass(frozen=True)
class Poisson:
    lam: float

    name = "poisson"

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ProcessConfigError("lam must be > 0")

    def info(self) -> ProcessInfo:
        return ProcessInfo(
            mu=self.lam,
            sigma2=self.lam,
            c=1.0,
            monotone=True,
            supports_left_tail=True,
            coupling_exact=True,
            family="poisson",
            ctx=self.lam,
        )

    def sample_y(self, gen, size: int) -> np.ndarray:
        return gen.poisson(self.lam, size).astype(np.float64)

    def sample_coupled(self, gen, size: int):
        y = self.sample_y(gen, size)
        return y, y + 1.0
