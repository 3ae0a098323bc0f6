"""Command-line front end: bounds, simulation, coupling audits, oracles, reports.

Commands
    bounds           evaluate analytic tail-bound curves on a t grid
    simulate         Monte Carlo tail estimation + domination verdicts
    verify-coupling  audit a coupled sampler against the size-bias identity
    oracle           exact law / joint coupling law / truncated series
    report           merge prior outputs into a summary keyed (process, side)

Exit codes: 0 success, 1 a domination check or coupling audit failed (the
report is still written), 2 invalid configuration. Flags override --config
file values; SIZEBIAS_LAB_SEED supplies the default seed. Outputs are UTF-8
CSV (comma separator, '.' decimal) or JSON; repeated runs are byte-identical
apart from the timestamp header, which --no-timestamp suppresses.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone

from .bounds import BoundOverflowError, QuadratureError
from .distcore import DistributionError
from .mc import (
    DEFAULT_CL,
    result_rows,
    run_coupling_audit,
    run_tail_experiment,
    verify_domination,
)
from .oracle import (
    InfeasibleError,
    compound_truncated_pmf,
    enumerate_coupling,
    enumerate_law,
    poisson_truncated_pmf,
)
from .processes import (
    CANONICAL_NAMES,
    CompoundPoisson,
    Poisson,
    ProcessCapabilityError,
    ProcessConfigError,
    bound_curves,
    process_from_dict,
    process_to_dict,
)

ENV_SEED = "SIZEBIAS_LAB_SEED"

_CONFIG_ERRORS = (
    ProcessConfigError,
    InfeasibleError,
    DistributionError,
    BoundOverflowError,
    QuadratureError,
    ProcessCapabilityError,
    ValueError,
    KeyError,
    OSError,
    json.JSONDecodeError,
)


# ---------------------------------------------------------------------------
# RunSpec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunSpec:
    """A fully-resolved invocation; round-trips losslessly through JSON."""

    command: str
    process: dict | None = None
    t: str | None = None
    n: int | None = None
    samples: int | None = None
    seed: int = 0
    workers: int = 1
    cl: float = DEFAULT_CL
    eps: float = 1e-12
    coupling: bool = False
    assume_monotone: bool = False
    out: str | None = None
    fmt: str | None = None
    timestamp: bool = True
    inputs: tuple[str, ...] = ()

    def to_json(self) -> str:
        d = asdict(self)
        d["inputs"] = list(self.inputs)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunSpec":
        d = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown RunSpec fields: {', '.join(unknown)}")
        if "inputs" in d:
            d["inputs"] = tuple(d["inputs"])
        return cls(**d)


def parse_t_grid(spec: str) -> list[float]:
    """Parse "start:stop:step" (inclusive stop) or a single value."""
    parts = spec.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        start, stop, step = (float(x) for x in parts)
    except ValueError:
        raise ValueError(f"malformed t grid {spec!r} (want start:stop:step)") from None
    if step <= 0.0 or stop < start:
        raise ValueError(f"malformed t grid {spec!r} (need step > 0 and stop >= start)")
    count = int((stop - start) / step + 1e-9) + 1
    return [round(start + i * step, 12) for i in range(count)]


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _render_csv(rows: list[dict], columns: list[str], timestamp: bool) -> str:
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _render_json(payload, timestamp: bool) -> str:
    if isinstance(payload, dict) and timestamp:
        payload = {"generated": datetime.now(timezone.utc).isoformat(), **payload}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: str | None):
    if out is None or out in ("csv", "json", "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _resolve_format(spec: RunSpec, default: str = "csv") -> str:
    if spec.fmt:
        return spec.fmt
    if spec.out in ("csv", "json"):
        return spec.out
    if spec.out and spec.out.endswith(".json"):
        return "json"
    if spec.out and spec.out.endswith(".csv"):
        return "csv"
    return default


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _require(spec: RunSpec, attr: str, what: str):
    value = getattr(spec, attr)
    if value is None:
        raise ValueError(f"{spec.command} requires {what}")
    return value


def _build_process(spec: RunSpec):
    if not spec.process:
        raise ProcessConfigError("no process given (use --process and its parameters)")
    return process_from_dict(spec.process)


def _cmd_bounds(spec: RunSpec) -> int:
    proc = _build_process(spec)
    ts = parse_t_grid(_require(spec, "t", "a t grid (--t start:stop:step)"))
    curve = bound_curves(proc.info(), ts, force_monotone=spec.assume_monotone)
    rows = []
    for i, t in enumerate(curve.t_grid):
        rows.append(
            {
                "t": t,
                "bound_left": None if curve.left is None else curve.left[i],
                "bound_right": curve.right[i],
                "family": curve.family,
                "approximate": curve.approximate,
                "left_forced": curve.left_forced,
            }
        )
    fmt = _resolve_format(spec)
    columns = ["t", "bound_left", "bound_right", "family", "approximate", "left_forced"]
    if fmt == "json":
        payload = {"process": process_to_dict(proc), "rows": rows}
        _emit(_render_json(payload, spec.timestamp), spec.out)
    else:
        _emit(_render_csv(rows, columns, spec.timestamp), spec.out)
    return 0


_SIM_COLUMNS = ["process", "side", "t", "N", "estimate", "ci_low", "ci_high", "bound", "verdict"]


def _cmd_simulate(spec: RunSpec) -> int:
    proc = _build_process(spec)
    ts = parse_t_grid(_require(spec, "t", "a t grid (--t start:stop:step)"))
    n = _require(spec, "n", "a replication count (--n-samples)")
    tail = run_tail_experiment(
        proc, ts, n, seed=spec.seed, workers=spec.workers, cl=spec.cl
    )
    try:
        curve = bound_curves(proc.info(), ts, force_monotone=spec.assume_monotone)
    except ProcessCapabilityError:
        curve = None
    if curve is None:
        rows = []
        for side in ("right", "left"):
            est = tail.estimate(side)
            low = tail.ci_low(side)
            high = tail.ci_high(side)
            for i, t in enumerate(tail.t_grid):
                rows.append(
                    {
                        "process": tail.process,
                        "side": side,
                        "t": t,
                        "N": tail.n,
                        "estimate": est[i],
                        "ci_low": low[i],
                        "ci_high": high[i],
                        "bound": None,
                        "verdict": None,
                    }
                )
        failed = False
    else:
        verdict = verify_domination(tail, curve)
        rows = result_rows(tail, curve, verdict)
        failed = not verdict.passed
    fmt = _resolve_format(spec)
    if fmt == "json":
        payload = {"process": process_to_dict(proc), "rows": rows, "raw_mode": tail.raw_mode}
        _emit(_render_json(payload, spec.timestamp), spec.out)
    else:
        _emit(_render_csv(rows, _SIM_COLUMNS, spec.timestamp), spec.out)
    return 1 if failed else 0


def _cmd_verify_coupling(spec: RunSpec) -> int:
    proc = _build_process(spec)
    n = spec.samples if spec.samples is not None else 10 ** 5
    audit = run_coupling_audit(proc, n, seed=spec.seed)
    payload = json.loads(audit.to_json())
    payload["process"] = process_to_dict(proc)
    _emit(_render_json(payload, spec.timestamp), spec.out)
    return 0 if audit.passed else 1


def _cmd_oracle(spec: RunSpec) -> int:
    proc = _build_process(spec)
    fmt = _resolve_format(spec, default="json")
    if spec.coupling:
        law = enumerate_coupling(proc)
        rows = [{"y": y, "ys": ys, "prob": p} for y, ys, p in law.pairs]
        columns = ["y", "ys", "prob"]
        payload = {"process": process_to_dict(proc), "pairs": [[y, ys, p] for y, ys, p in law.pairs]}
    else:
        if isinstance(proc, Poisson):
            pmf = poisson_truncated_pmf(proc.lam, spec.eps)
        elif isinstance(proc, CompoundPoisson):
            pmf = compound_truncated_pmf(proc.lam, proc.z, spec.eps)
        else:
            pmf = enumerate_law(proc)
        rows = [{"atom": a, "prob": p} for a, p in zip(pmf.atoms.tolist(), pmf.probs.tolist())]
        columns = ["atom", "prob"]
        payload = {
            "process": process_to_dict(proc),
            "atoms": pmf.atoms.tolist(),
            "probs": pmf.probs.tolist(),
        }
    if fmt == "json":
        _emit(_render_json(payload, spec.timestamp), spec.out)
    else:
        _emit(_render_csv(rows, columns, spec.timestamp), spec.out)
    return 0


def _read_rows(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{") or stripped.startswith("["):
        data = json.loads(text)
        rows = data["rows"] if isinstance(data, dict) else data
        return [dict(r) for r in rows]
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return [dict(r) for r in csv.DictReader(lines)]


def _cmd_report(spec: RunSpec) -> int:
    if not spec.inputs:
        raise ValueError("report requires at least one input file")
    groups: dict[tuple[str, str], list[dict]] = {}
    for path in spec.inputs:
        for row in _read_rows(path):
            if "process" not in row or "side" not in row or not row.get("side"):
                continue
            groups.setdefault((str(row["process"]), str(row["side"])), []).append(row)
    rows = []
    for (process, side), members in sorted(groups.items()):
        fails = sum(1 for r in members if str(r.get("verdict", "")).strip() == "fail")
        margins = []
        for r in members:
            try:
                margins.append(float(r["bound"]) - float(r["ci_low"]))
            except (KeyError, TypeError, ValueError):
                pass
        rows.append(
            {
                "process": process,
                "side": side,
                "points": len(members),
                "failures": fails,
                "min_margin": min(margins) if margins else None,
                "verdict": "fail" if fails else "pass",
            }
        )
    fmt = _resolve_format(spec)
    columns = ["process", "side", "points", "failures", "min_margin", "verdict"]
    if fmt == "json":
        _emit(_render_json({"rows": rows}, spec.timestamp), spec.out)
    else:
        _emit(_render_csv(rows, columns, spec.timestamp), spec.out)
    return 1 if any(r["verdict"] == "fail" for r in rows) else 0


_COMMANDS = {
    "bounds": _cmd_bounds,
    "simulate": _cmd_simulate,
    "verify-coupling": _cmd_verify_coupling,
    "oracle": _cmd_oracle,
    "report": _cmd_report,
}


# ---------------------------------------------------------------------------
# argv -> RunSpec
# ---------------------------------------------------------------------------

def _csv_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _csv_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


_PROCESS_FLAGS = (
    # (flag, dest, parser)
    ("--n", "n", int),
    ("--m", "m", int),
    ("--p", "p", float),
    ("--tau", "tau", _csv_ints),
    ("--dim", "dim", int),
    ("--rho", "rho", float),
    ("--d", "d", int),
    ("--kappa-d", "kappa_d", int),
    ("--statistic", "statistic", str),
    ("--hit-points", "hit_points", int),
    ("--lambda", "lam", float),
    ("--alpha", "alpha", float),
    ("--beta", "beta", float),
    ("--m-factor", "m_factor", float),
    ("--gamma-exp", "gamma_exp", float),
    ("--z-atoms", "z_atoms", _csv_floats),
    ("--z-probs", "z_probs", _csv_floats),
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sizebias-lab",
        description="Size-biased couplings: tail bounds, simulation, and exact oracles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _COMMANDS:
        p = sub.add_parser(command)
        p.add_argument("--config", help="JSON file with defaults; flags override")
        p.add_argument("--out", help="output path, or literal 'csv'/'json' for stdout")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"))
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--no-timestamp", action="store_true", default=None,
                       help="suppress the generated-at header for byte-identical output")
        if command == "report":
            p.add_argument("inputs", nargs="*", help="prior CSV/JSON outputs to merge")
            continue
        p.add_argument("--process", choices=CANONICAL_NAMES)
        for flag, dest, kind in _PROCESS_FLAGS:
            p.add_argument(flag, dest=f"proc_{dest}", type=kind)
        if command in ("bounds", "simulate"):
            p.add_argument("--t", help="t grid as start:stop:step (inclusive)")
            p.add_argument("--assume-monotone", action="store_true", default=None,
                           help="assert a monotone coupling to unlock left-tail bounds")
        if command == "simulate":
            p.add_argument("--n-samples", "-N", dest="n_samples", type=int,
                           help="Monte Carlo replications (>= 10^4)")
            p.add_argument("--cl", type=float, help="one-sided confidence level")
        if command == "verify-coupling":
            p.add_argument("--samples", type=int, help="coupled draws to audit")
        if command == "oracle":
            p.add_argument("--coupling", action="store_true", default=None,
                           help="emit the joint (y, y_s) law instead of the law of y")
            p.add_argument("--eps", type=float,
                           help="truncation tolerance for Poisson-type laws")
    return parser


def build_runspec(argv) -> RunSpec:
    args = _build_parser().parse_args(argv)
    config: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ValueError("--config must hold a JSON object")

    process = dict(config.get("process") or {})
    for _, dest, _kind in _PROCESS_FLAGS:
        v = getattr(args, f"proc_{dest}", None)
        if v is not None:
            process[dest] = v
    if getattr(args, "process", None):
        process["process"] = args.process

    def pick(flag_value, key, fallback):
        if flag_value is not None:
            return flag_value
        if key in config:
            return config[key]
        return fallback

    env_seed = os.environ.get(ENV_SEED)
    default_seed = int(env_seed) if env_seed else 0
    no_ts = pick(args.no_timestamp, "no_timestamp", False)
    spec = RunSpec(
        command=args.command,
        process=process or None,
        t=pick(getattr(args, "t", None), "t", None),
        n=pick(getattr(args, "n_samples", None), "n_samples", None),
        samples=pick(getattr(args, "samples", None), "samples", None),
        seed=int(pick(args.seed, "seed", default_seed)),
        workers=int(pick(args.workers, "workers", 1)),
        cl=float(pick(getattr(args, "cl", None), "cl", DEFAULT_CL)),
        eps=float(pick(getattr(args, "eps", None), "eps", 1e-12)),
        coupling=bool(pick(getattr(args, "coupling", None), "coupling", False)),
        assume_monotone=bool(
            pick(getattr(args, "assume_monotone", None), "assume_monotone", False)
        ),
        out=pick(args.out, "out", None),
        fmt=pick(args.fmt, "format", None),
        timestamp=not no_ts,
        inputs=tuple(pick(getattr(args, "inputs", None) or None, "inputs", ()) or ()),
    )
    return spec


def dispatch(spec: RunSpec) -> int:
    handler = _COMMANDS.get(spec.command)
    if handler is None:
        raise ValueError(f"unknown command {spec.command!r}")
    return handler(spec)


def parse_and_dispatch(argv=None) -> int:
    try:
        spec = build_runspec(argv)
    except SystemExit as exc:  # argparse already printed diagnostics
        return int(exc.code or 0)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return dispatch(spec)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
