"""Tests for the example processes: statistics, parameters, coupled samplers."""

import math

import numpy as np
import pytest

from sizebias_lab import oracle
from sizebias_lab.distcore import FinitePmf, RngStream, pmf_moments
from sizebias_lab.processes import (
    CompoundPoisson,
    Coverage,
    Extrema,
    GammaZ,
    GraphIso,
    Lightbulb,
    PermPattern,
    Poisson,
    Runs,
    UrnUniform,
    process_from_dict,
    process_to_dict,
)
from sizebias_lab.processes.base import ProcessCapabilityError, ProcessConfigError
from sizebias_lab.processes.urn import urn_pi_fractions


def gen_for(seed):
    return RngStream(seed).generator()


# ---------------------------------------------------------------------------
# pattern counts in permutations
# ---------------------------------------------------------------------------


def test_perm_statistic_identity_windows():
    from sizebias_lab.processes.perm import perm_statistic

    assert perm_statistic((1, 2, 3, 4, 5, 6), (1, 2, 3)) == 4
    assert perm_statistic((6, 5, 4, 3, 2, 1), (1, 2, 3)) == 0
    assert perm_statistic((2, 1, 3, 4, 5, 6), (1, 2, 3)) == 3


def test_perm_statistic_rejects_non_permutations():
    from sizebias_lab.processes.perm import perm_statistic

    with pytest.raises(ProcessConfigError):
        perm_statistic((1, 1, 3), (1, 2))
    with pytest.raises(ProcessConfigError):
        perm_statistic((1, 2, 3), (2, 3))  # tau not a permutation of 1..2
    with pytest.raises(ProcessConfigError):
        perm_statistic((1, 2), (1, 2, 3))  # pattern longer than pi


def test_perm_params_identity_pattern():
    info = PermPattern.identity(6, 3).info()
    assert info.mu == pytest.approx(1.0, abs=1e-12)
    assert info.sigma2 == pytest.approx(23.0 / 30.0, abs=1e-12)
    assert info.c == 5.0
    assert not info.supports_left_tail


def test_perm_params_match_enumeration():
    proc = PermPattern.identity(6, 3)
    mo = pmf_moments(oracle.enumerate_law(proc))
    info = proc.info()
    assert info.mu == pytest.approx(mo.mean, abs=1e-12)
    assert info.sigma2 == pytest.approx(mo.variance, abs=1e-12)


@pytest.mark.parametrize("m", [3, 4])
def test_perm_variance_lower_bound(m):
    proc = PermPattern.identity(2 * m, m)
    info = proc.info()
    mf = math.factorial(m)
    assert info.sigma2 >= (2 * m / mf) * (1.0 - (2 * m - 1.0) / mf) - 1e-12


def test_perm_nonidentity_formula_vs_enumeration():
    # For tau=(1,3,2) the literal overlap-indicator formula and exhaustive
    # enumeration disagree; both values are pinned here so any change to
    # either side is visible. The formula gives n(1/3! * (1-5/3!) + 2/5!).
    proc = PermPattern(n=6, m=3, tau=(1, 3, 2))
    assert proc.overlap_indicators() == (0, 1)
    formula = proc.variance_formula()
    assert formula == pytest.approx(4.0 / 15.0, abs=1e-12)
    mo = pmf_moments(oracle.enumerate_law(proc))
    assert mo.variance == pytest.approx(7.0 / 15.0, abs=1e-12)
    assert formula != pytest.approx(mo.variance, abs=1e-3)


def test_perm_window_reorder_example():
    # pi=(2,1,3,4,5,6), window at alpha=1 sorted into identity order turns pi
    # into the identity, so the coupled value moves from 3 to 4
    from sizebias_lab.processes.perm import perm_statistic

    pi = (2, 1, 3, 4, 5, 6)
    tau = (1, 2, 3)
    window = sorted(pi[0:3])
    pi2 = tuple(window) + pi[3:]
    assert pi2 == (1, 2, 3, 4, 5, 6)
    assert perm_statistic(pi, tau) == 3
    assert perm_statistic(pi2, tau) == 4


def test_perm_in_order_window_is_fixed_point():
    # reordering a window that already carries the pattern changes nothing
    proc = PermPattern.identity(6, 3)
    y, ys = proc.sample_coupled(gen_for(31), 4000)
    assert np.all(np.abs(ys - y) <= proc.info().c)


def test_perm_validation():
    with pytest.raises(ProcessConfigError):
        PermPattern(n=6, m=2, tau=(1, 2))  # m >= 3 required
    with pytest.raises(ProcessConfigError):
        PermPattern(n=2, m=3, tau=(1, 2, 3))
    with pytest.raises(ProcessConfigError):
        PermPattern(n=6, m=3, tau=(1, 2))  # tau length mismatch


# ---------------------------------------------------------------------------
# runs
# ---------------------------------------------------------------------------


def test_runs_params():
    info = Runs(n=4, m=2, p=0.5).info()
    assert info.mu == pytest.approx(1.0)
    assert info.sigma2 == pytest.approx(1.25)
    assert info.c == 3.0
    assert info.monotone


def test_runs_statistic_and_forced_window():
    proc = Runs(n=4, m=2, p=0.5)
    xi = np.array([[1, 0, 1, 0]], dtype=np.int8)
    assert proc.statistic(xi)[0] == 0.0
    forced = np.array([[1, 1, 1, 0]], dtype=np.int8)  # window at index 1 set to ones
    assert proc.statistic(forced)[0] == 2.0


def test_runs_law_matches_enumeration():
    law = oracle.enumerate_law(Runs(n=4, m=2, p=0.5))
    expected = {0.0: 7 / 16, 1.0: 4 / 16, 2.0: 4 / 16, 4.0: 1 / 16}
    assert {a: p for a, p in zip(law.atoms, law.probs)} == pytest.approx(expected)


def test_runs_monotone_coupling():
    proc = Runs(n=10, m=2, p=0.3)
    y, ys = proc.sample_coupled(gen_for(32), 20_000)
    assert np.all(ys >= y)
    assert np.all(ys - y <= 3.0)


def test_runs_validation():
    with pytest.raises(ProcessConfigError):
        Runs(n=3, m=2, p=0.5)  # variance formula needs n >= 2m
    with pytest.raises(ProcessConfigError):
        Runs(n=4, m=2, p=0.0)
    with pytest.raises(ProcessConfigError):
        Runs(n=4, m=2, p=1.0)


# ---------------------------------------------------------------------------
# local extrema on the torus lattice
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", [5, 6, 7])
def test_extrema_dim1_params_match_enumeration(n):
    proc = Extrema(n=n, dim=1)
    info = proc.info()
    assert info.mu == pytest.approx(n / 3.0, abs=1e-12)
    assert info.sigma2 == pytest.approx(2.0 * n / 45.0, abs=1e-12)
    mo = pmf_moments(oracle.enumerate_law(proc))
    assert info.mu == pytest.approx(mo.mean, abs=1e-10)
    assert info.sigma2 == pytest.approx(mo.variance, abs=1e-10)


def test_extrema_c_grows_with_dimension():
    assert Extrema(n=6, dim=1).info().c == 5.0
    assert Extrema(n=6, dim=2).info().c == 13.0


def test_extrema_statistic_crafted_cycle():
    proc = Extrema(n=5, dim=1)
    vals = np.array([[0.1, 0.5, 0.3, 0.9, 0.7]])
    assert proc.statistic(vals)[0] == 2.0  # peaks at positions 1 and 3


def test_extrema_coupled_bound():
    proc = Extrema(n=6, dim=2)
    y, ys = proc.sample_coupled(gen_for(33), 5_000)
    assert np.all(np.abs(ys - y) <= 13.0)


def test_extrema_validation():
    with pytest.raises(ProcessConfigError):
        Extrema(n=4, dim=1)
    with pytest.raises(ProcessConfigError):
        Extrema(n=6, dim=0)


# ---------------------------------------------------------------------------
# urn occupancy
# ---------------------------------------------------------------------------


def test_urn_tilt_probabilities_exact():
    assert urn_pi_fractions(2, 2) == [1, 0]
    from fractions import Fraction

    assert urn_pi_fractions(5, 3) == [
        Fraction(1),
        Fraction(22, 65),
        Fraction(12, 65),
        Fraction(8, 65),
        Fraction(0),
    ]


@pytest.mark.parametrize("n,m", [(2, 2), (4, 3), (7, 2), (6, 5)])
def test_urn_pi_table_matches_fractions(n, m):
    proc = UrnUniform(n=n, m=m)
    exact = np.array([float(f) for f in urn_pi_fractions(n, m)])
    assert np.max(np.abs(proc.pi_table - exact)) < 1e-12
    # pi_0 = 1 guarantees an isolated ball always gains a neighbor
    assert proc.pi_table[0] == 1.0
    assert proc.pi_table[-1] == 0.0


def test_urn_params_and_law():
    info = UrnUniform(n=2, m=2).info()
    assert info.mu == pytest.approx(1.0)
    assert info.sigma2 == pytest.approx(1.0)
    assert info.c == 2.0
    law = oracle.enumerate_law(UrnUniform(n=2, m=2))
    assert {a: p for a, p in zip(law.atoms, law.probs)} == pytest.approx({0.0: 0.5, 2.0: 0.5})


def test_urn_two_ball_coupling_cases():
    # n=m=2: same-urn start has M_I=1 and pi_1=0, so nothing moves (y_s=y=2);
    # split start has M_I=0, pi_0=1, the move always happens and y_s=2
    proc = UrnUniform(n=2, m=2)
    y, ys = proc.sample_coupled(gen_for(34), 4_000)
    assert np.all(ys == 2.0)
    assert set(np.unique(y)) == {0.0, 2.0}


def test_urn_statistic_crafted():
    proc = UrnUniform(n=2, m=2)
    x = np.array([[0, 0], [0, 1]], dtype=np.int64)
    assert proc.statistic(x).tolist() == [2.0, 0.0]


def test_urn_validation():
    with pytest.raises(ProcessConfigError):
        UrnUniform(n=1, m=2)
    with pytest.raises(ProcessConfigError):
        UrnUniform(n=2, m=1)


# ---------------------------------------------------------------------------
# lightbulb switching
# ---------------------------------------------------------------------------


def test_lightbulb_small_params():
    info2 = Lightbulb(n=2).info()
    assert info2.mu == pytest.approx(1.0, abs=1e-12)
    assert info2.sigma2 == pytest.approx(0.0, abs=1e-12)
    info4 = Lightbulb(n=4).info()
    assert info4.mu == pytest.approx(2.0, abs=1e-12)
    assert info4.sigma2 == pytest.approx(1.0, abs=1e-12)
    assert info4.c == 2.0 and info4.monotone and info4.coupling_exact


def test_lightbulb_n2_degenerate_law():
    law = oracle.enumerate_law(Lightbulb(n=2))
    assert law.atoms.tolist() == [1.0]
    assert law.probs.tolist() == [1.0]


def test_lightbulb_even_coupling_steps():
    proc = Lightbulb(n=4)
    y, ys = proc.sample_coupled(gen_for(35), 20_000)
    diff = ys - y
    assert set(np.unique(diff)) <= {0.0, 2.0}


def test_lightbulb_odd_n_is_bounds_only():
    proc = Lightbulb(n=5)
    info = proc.info()
    assert info.approximate and not info.coupling_exact
    assert info.t_shift == pytest.approx(2.0 / math.sqrt(info.sigma2))
    with pytest.raises(ProcessCapabilityError):
        proc.sample_coupled(gen_for(1), 10)


def test_lightbulb_validation():
    with pytest.raises(ProcessConfigError):
        Lightbulb(n=1)


# ---------------------------------------------------------------------------
# isolated vertices
# ---------------------------------------------------------------------------


def test_graph_two_vertex_law_and_params():
    p = 0.3
    law = oracle.enumerate_law(GraphIso(n=2, p=p))
    assert {a: q for a, q in zip(law.atoms, law.probs)} == pytest.approx({0.0: p, 2.0: 1 - p})
    info = GraphIso(n=2, p=p).info()
    assert info.mu == pytest.approx(2.0 * (1 - p), abs=1e-12)
    assert info.sigma2 == pytest.approx(4.0 * p * (1 - p), abs=1e-12)
    assert info.c is None  # the jump d_1(V) + 1 is not uniformly bounded


def test_graph_two_vertex_coupling_cases():
    # edge present: y=0 and the pick repairs both vertices, y_s=2;
    # edge absent: V is isolated, nothing changes
    proc = GraphIso(n=2, p=0.5)
    y, ys = proc.sample_coupled(gen_for(36), 2_000)
    pairs = set(zip(y.tolist(), ys.tolist()))
    assert pairs == {(0.0, 2.0), (2.0, 2.0)}


def test_graph_monotone():
    proc = GraphIso(n=8, p=0.3)
    y, ys = proc.sample_coupled(gen_for(37), 20_000)
    assert np.all(ys >= y)


def test_graph_validation():
    with pytest.raises(ProcessConfigError):
        GraphIso(n=1, p=0.5)
    with pytest.raises(ProcessConfigError):
        GraphIso(n=3, p=0.0)


# ---------------------------------------------------------------------------
# coverage process
# ---------------------------------------------------------------------------


def test_coverage_dim1_sample_moments():
    from sizebias_lab.bounds import CoverageCtx, coverage_moments

    proc = Coverage(n=4, rho=0.5, d=1)
    mom = coverage_moments(CoverageCtx(n=4, rho=0.5, d=1))
    n_draws = 40_000
    v, s = proc.sample_vs(gen_for(38), n_draws)
    for sample, mean, var in ((v, mom.mu_v, mom.sigma2_v), (s, mom.mu_s, mom.sigma2_s)):
        se = math.sqrt(var / n_draws)
        assert abs(sample.mean() - mean) <= 4.0 * se


def test_coverage_statistic_selector():
    proc_v = Coverage(n=6, rho=0.5, d=1, statistic="volume")
    proc_y = Coverage(n=6, rho=0.5, d=1, statistic="nonisolated")
    v = proc_v.sample_y(gen_for(39), 500)
    y = proc_y.sample_y(gen_for(39), 500)
    assert np.all((0.0 <= v) & (v <= 6.0))
    assert np.all((0.0 <= y) & (y <= 6.0))
    assert np.all(y == np.round(y))


def test_coverage_guards():
    with pytest.raises(ProcessConfigError):
        Coverage(n=4, rho=2.5, d=1)  # balls cover the whole torus: phi >= n
    with pytest.raises(ProcessConfigError):
        Coverage(n=32, rho=0.5, d=4)
    with pytest.raises(ProcessConfigError):
        Coverage(n=32, rho=0.5, d=1, statistic="area")
    with pytest.raises(ProcessCapabilityError):
        Coverage(n=32, rho=0.5, d=1).sample_coupled(gen_for(1), 10)


# ---------------------------------------------------------------------------
# compound Poisson and plain Poisson
# ---------------------------------------------------------------------------


def test_poisson_coupling_adds_one():
    proc = Poisson(lam=4.0)
    y, ys = proc.sample_coupled(gen_for(40), 10_000)
    assert np.all(ys - y == 1.0)
    assert abs(y.mean() - 4.0) <= 4.0 * math.sqrt(4.0 / 10_000)


def test_cpoisson_point_mass_matches_poisson():
    # Z = delta_1 makes the compound construction the Poisson coupling
    proc = CompoundPoisson(lam=3.0, z=FinitePmf([1.0], [1.0]))
    info = proc.info()
    assert info.mu == pytest.approx(3.0)
    assert info.sigma2 == pytest.approx(3.0)
    y, ys = proc.sample_coupled(gen_for(41), 10_000)
    assert np.all(y == np.round(y))
    assert np.all(ys - y == 1.0)


def test_cpoisson_gamma_summand_rebias():
    # the added increment follows the rebiased summand law Gamma(alpha+1, beta)
    alpha, beta = 2.0, 1.5
    proc = CompoundPoisson(lam=2.0, z=GammaZ(alpha, beta))
    n_draws = 200_000
    y, ys = proc.sample_coupled(gen_for(42), n_draws)
    z_s = ys - y
    assert np.all(z_s >= 0.0)
    mean = (alpha + 1.0) * beta
    var = (alpha + 1.0) * beta ** 2
    assert abs(z_s.mean() - mean) <= 4.0 * math.sqrt(var / n_draws)
    # second moment: E (Z^s)^2 = (alpha+1)(alpha+2) beta^2
    m2 = (alpha + 1.0) * (alpha + 2.0) * beta ** 2
    var_m2 = (alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0) * (alpha + 4.0) * beta ** 4 - m2 ** 2
    assert abs((z_s ** 2).mean() - m2) <= 4.0 * math.sqrt(var_m2 / n_draws)


def test_cpoisson_validation():
    with pytest.raises(ProcessConfigError):
        CompoundPoisson(lam=0.0, z=GammaZ(1.0, 1.0))
    with pytest.raises(ProcessConfigError):
        CompoundPoisson(lam=1.0, z=FinitePmf([0.0], [1.0]))
    with pytest.raises(ProcessConfigError):
        GammaZ(0.0, 1.0)
    with pytest.raises(ProcessConfigError):
        Poisson(lam=-1.0)


# ---------------------------------------------------------------------------
# size-bias identity through the samplers
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "proc",
    [
        Runs(n=6, m=2, p=0.5),
        PermPattern.identity(6, 3),
        UrnUniform(n=3, m=2),
        Lightbulb(n=4),
        GraphIso(n=4, p=0.3),
        Extrema(n=5, dim=1),
    ],
    ids=lambda p: p.name,
)
def test_coupled_mean_is_ratio_of_moments(proc):
    # E Y^s = E[Y^2]/E[Y], with ground truth from exhaustive enumeration
    mo = pmf_moments(oracle.enumerate_law(proc))
    target = (mo.variance + mo.mean ** 2) / mo.mean
    n_draws = 30_000
    _, ys = proc.sample_coupled(gen_for(43), n_draws)
    se = ys.std() / math.sqrt(n_draws)
    assert abs(ys.mean() - target) <= 4.0 * max(se, 1e-12)


def test_coupled_sampler_is_pure():
    # same stream, same draws: replication must not depend on hidden state
    proc = Runs(n=8, m=2, p=0.4)
    y1, ys1 = proc.sample_coupled(gen_for(44), 2_000)
    y2, ys2 = proc.sample_coupled(gen_for(44), 2_000)
    assert np.array_equal(y1, y2) and np.array_equal(ys1, ys2)


# ---------------------------------------------------------------------------
# config codec
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "spec",
    [
        {"process": "runs", "n": 6, "m": 2, "p": 0.5},
        {"process": "perm", "n": 6, "m": 3},
        {"process": "perm", "n": 6, "tau": [1, 3, 2]},
        {"process": "extrema", "n": 5, "dim": 2},
        {"process": "urn", "n": 3, "m": 2},
        {"process": "lightbulb", "n": 4},
        {"process": "graph", "n": 4, "p": 0.25},
        {"process": "coverage", "n": 8, "rho": 0.5, "d": 1},
        {"process": "cpoisson", "lam": 2.0, "alpha": 1.0, "beta": 2.0},
        {"process": "cpoisson", "lam": 2.0, "z_atoms": [1.0, 2.0], "z_probs": [0.5, 0.5]},
        {"process": "poisson", "lam": 4.0},
    ],
)
def test_config_round_trip(spec):
    proc = process_from_dict(spec)
    again = process_from_dict(process_to_dict(proc))
    assert again == proc


def test_config_lambda_alias():
    assert process_from_dict({"process": "poisson", "lambda": 2.0}) == Poisson(lam=2.0)


def test_config_rejections():
    with pytest.raises(ProcessConfigError):
        process_from_dict({"process": "sparkle", "n": 3})
    with pytest.raises(ProcessConfigError):
        process_from_dict({"process": "runs", "n": 6, "m": 2, "p": 0.5, "q": 1})
    with pytest.raises(ProcessConfigError):
        process_from_dict({"process": "perm", "n": 6})
    with pytest.raises(ProcessConfigError):
        process_from_dict({"process": "cpoisson", "lam": 2.0})
    with pytest.raises(ProcessConfigError):
        process_from_dict("runs")
