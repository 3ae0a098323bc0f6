"""The example processes: statistics, closed-form parameters, coupled samplers.

Every process is a frozen dataclass with a canonical ``name`` and a common
surface: ``info() -> ProcessInfo``, ``sample_y(gen, size)`` for plain draws,
and ``sample_coupled(gen, size) -> (y, y_s)`` where available. Configs parse
from plain dicts (JSON) via :func:`process_from_dict` and serialize back via
:func:`process_to_dict`; the two functions are inverse on canonical dicts.
"""

from __future__ import annotations

import dataclasses

from ..distcore import FinitePmf
from .base import (
    BoundCurve,
    ProcessCapabilityError,
    ProcessConfigError,
    ProcessInfo,
    bound_curves,
)
from .coverage import Coverage
from .cpoisson import CompoundPoisson, GammaZ, Poisson
from .extrema import Extrema
from .graph import GraphIso
from .lightbulb import Lightbulb
from .perm import PermPattern, perm_statistic
from .runs import Runs
from .urn import UrnUniform, urn_pi_fractions

REGISTRY = {
    "perm": PermPattern,
    "runs": Runs,
    "extrema": Extrema,
    "urn": UrnUniform,
    "lightbulb": Lightbulb,
    "graph": GraphIso,
    "coverage": Coverage,
    "cpoisson": CompoundPoisson,
    "poisson": Poisson,
}

CANONICAL_NAMES = tuple(REGISTRY)


def _parse_summand(value) -> object:
    if isinstance(value, (GammaZ, FinitePmf)):
        return value
    if not isinstance(value, dict):
        raise ProcessConfigError("summand spec must be an object")
    kind = value.get("kind")
    if kind == "gamma":
        return GammaZ(alpha=float(value["alpha"]), beta=float(value["beta"]))
    if kind == "pmf":
        return FinitePmf(value["atoms"], value["probs"])
    raise ProcessConfigError(f"unknown summand kind {kind!r} (want 'gamma' or 'pmf')")


def process_from_dict(spec: dict):
    """Build a process from a plain dict like {"process": "runs", "n": 4, ...}.

    Accepted conveniences: "lambda" as an alias for "lam"; for cpoisson,
    either a nested {"z": {"kind": ...}} or flat alpha/beta (gamma summand)
    or z_atoms/z_probs (pmf summand).
    """
    if not isinstance(spec, dict):
        raise ProcessConfigError("process spec must be an object")
    params = dict(spec)
    name = params.pop("process", None)
    cls = REGISTRY.get(name)
    if cls is None:
        raise ProcessConfigError(
            f"unknown process {name!r}; choose one of {', '.join(CANONICAL_NAMES)}"
        )
    if "lambda" in params:
        params["lam"] = params.pop("lambda")
    if name == "perm":
        if params.get("tau") is not None:
            params["tau"] = tuple(int(v) for v in params["tau"])
            params.setdefault("m", len(params["tau"]))
        elif "m" in params:
            params["tau"] = tuple(range(1, int(params["m"]) + 1))
        else:
            raise ProcessConfigError("perm needs tau or m")
    if name == "cpoisson":
        if "z" in params:
            params["z"] = _parse_summand(params["z"])
        elif "z_atoms" in params or "z_probs" in params:
            try:
                params["z"] = FinitePmf(params.pop("z_atoms"), params.pop("z_probs"))
            except KeyError as exc:
                raise ProcessConfigError("z_atoms and z_probs must come together") from None
        elif "alpha" in params or "beta" in params:
            try:
                params["z"] = GammaZ(float(params.pop("alpha")), float(params.pop("beta")))
            except KeyError:
                raise ProcessConfigError("gamma summand needs both alpha and beta") from None
        else:
            raise ProcessConfigError("cpoisson needs a summand: z, alpha/beta, or z_atoms/z_probs")
    field_names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(params) - field_names)
    if unknown:
        raise ProcessConfigError(f"unknown parameters for {name}: {', '.join(unknown)}")
    try:
        return cls(**params)
    except TypeError as exc:
        raise ProcessConfigError(str(exc)) from None


def process_to_dict(proc) -> dict:
    """Canonical JSON-ready dict for a process config (inverse of from_dict)."""
    out = {"process": proc.name}
    for f in dataclasses.fields(proc):
        v = getattr(proc, f.name)
        if v is None:
            continue
        if isinstance(v, GammaZ):
            v = {"kind": "gamma", "alpha": v.alpha, "beta": v.beta}
        elif isinstance(v, FinitePmf):
            v = {"kind": "pmf", "atoms": v.atoms.tolist(), "probs": v.probs.tolist()}
        elif isinstance(v, tuple):
            v = list(v)
        out[f.name] = v
    return out


__all__ = [
    "BoundCurve",
    "CANONICAL_NAMES",
    "CompoundPoisson",
    "Coverage",
    "Extrema",
    "GammaZ",
    "GraphIso",
    "Lightbulb",
    "PermPattern",
    "Poisson",
    "ProcessCapabilityError",
    "ProcessConfigError",
    "ProcessInfo",
    "REGISTRY",
    "Runs",
    "UrnUniform",
    "bound_curves",
    "perm_statistic",
    "process_from_dict",
    "process_to_dict",
    "urn_pi_fractions",
]
