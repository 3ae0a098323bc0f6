"""Concentration bounds for nonnegative statistics via size-biased couplings.

The package combines four layers:

* exact finite distributions and size-bias transforms (``distcore``),
* analytic tail-bound curves for bounded, graph, infinitely-divisible,
  coverage, and Poisson families (``bounds``),
* concrete processes with coupled samplers (``processes``) plus brute-force
  enumeration oracles (``oracle``),
* deterministic Monte Carlo tail experiments with one-sided confidence
  bounds and domination verdicts (``mc``), wired together by a CLI (``cli``).
"""

from .bounds import (
    BoundOverflowError,
    BoundParams,
    CoverageCtx,
    CoverageLimits,
    CoverageMoments,
    GraphBoundCtx,
    InfDivCtx,
    QuadratureError,
    UrnNonuniformConstants,
    adaptive_simpson,
    bound_left_monotone,
    bound_right,
    coverage_limits,
    coverage_moments,
    coverage_omega,
    gamma_compound_constants,
    golden_section_min,
    graph_H,
    graph_gamma_s,
    graph_left_tail,
    graph_mean_var,
    graph_right_tail,
    graph_right_tail_capped,
    infdiv_bounds,
    poisson_bounds,
    unit_ball_volume,
    urn_limit,
    urn_nonuniform_constants,
)
from .distcore import (
    DistributionError,
    FinitePmf,
    Moments,
    RngStream,
    exact_tail,
    pmf_moments,
    size_bias_pmf,
    tv_distance,
)
from .mc import (
    EmpiricalTail,
    ExactTail,
    Verdict,
    VerdictRow,
    clopper_pearson_high,
    clopper_pearson_low,
    exact_tail_curve,
    result_rows,
    run_coupling_audit,
    run_tail_experiment,
    verify_domination,
)
from .oracle import (
    InfeasibleError,
    JointLaw,
    compound_truncated_pmf,
    enumerate_coupling,
    enumerate_law,
    poisson_truncated_pmf,
    size_biased_reference,
)
from .processes import (
    CANONICAL_NAMES,
    REGISTRY,
    BoundCurve,
    CompoundPoisson,
    Coverage,
    Extrema,
    GammaZ,
    GraphIso,
    Lightbulb,
    PermPattern,
    Poisson,
    ProcessCapabilityError,
    ProcessConfigError,
    ProcessInfo,
    Runs,
    UrnUniform,
    bound_curves,
    perm_statistic,
    process_from_dict,
    process_to_dict,
    urn_pi_fractions,
)
from .sizebias import (
    CouplingAudit,
    audit_characterization,
    default_test_functions,
    local_dependence_bias,
)

__version__ = "0.1.0"

__all__ = [
    "BoundCurve",
    "BoundOverflowError",
    "BoundParams",
    "CANONICAL_NAMES",
    "CompoundPoisson",
    "CouplingAudit",
    "Coverage",
    "CoverageCtx",
    "CoverageLimits",
    "CoverageMoments",
    "DistributionError",
    "EmpiricalTail",
    "ExactTail",
    "Extrema",
    "FinitePmf",
    "GammaZ",
    "GraphBoundCtx",
    "GraphIso",
    "InfDivCtx",
    "InfeasibleError",
    "JointLaw",
    "Lightbulb",
    "Moments",
    "PermPattern",
    "Poisson",
    "ProcessCapabilityError",
    "ProcessConfigError",
    "ProcessInfo",
    "QuadratureError",
    "REGISTRY",
    "RngStream",
    "Runs",
    "UrnNonuniformConstants",
    "UrnUniform",
    "Verdict",
    "VerdictRow",
    "adaptive_simpson",
    "audit_characterization",
    "bound_curves",
    "bound_left_monotone",
    "bound_right",
    "clopper_pearson_high",
    "clopper_pearson_low",
    "compound_truncated_pmf",
    "coverage_limits",
    "coverage_moments",
    "coverage_omega",
    "default_test_functions",
    "enumerate_coupling",
    "enumerate_law",
    "exact_tail",
    "exact_tail_curve",
    "gamma_compound_constants",
    "golden_section_min",
    "graph_H",
    "graph_gamma_s",
    "graph_left_tail",
    "graph_mean_var",
    "graph_right_tail",
    "graph_right_tail_capped",
    "infdiv_bounds",
    "local_dependence_bias",
    "perm_statistic",
    "pmf_moments",
    "poisson_bounds",
    "poisson_truncated_pmf",
    "process_from_dict",
    "process_to_dict",
    "result_rows",
    "run_coupling_audit",
    "run_tail_experiment",
    "size_bias_pmf",
    "size_biased_reference",
    "tv_distance",
    "urn_limit",
    "urn_nonuniform_constants",
    "urn_pi_fractions",
    "verify_domination",
]
