import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from core.python.rcga_pipeline.eda_core import TRACE_FULL, make_rng, new_frequency_matrix, run
from core.python.rcga_pipeline.errors import InvalidParameterError, PreconditionError
from core.python.rcga_pipeline.fitness_core import CONSTANT, make_objective
from core.python.rcga_pipeline.instrumentation_core import decompose, replay_masses
from core.python.rcga_pipeline.theory_oracles import (
    SATISFIED,
    SATISFIED_VACUOUSLY,
    VIOLATED,
    adak_witt_bound,
    biased_window_bound,
    check_confined,
    chernoff_variant_bound,
    confined_matrix,
    conv_lhs,
    conv_rhs,
    drift_prediction,
    empirical_rest_variance,
    lower_bound_status,
    martingale_beta,
    martingale_bound,
    mcdiarmid_bound,
    mult_drift_tail,
    mult_drift_time,
    neutral_max_deviation,
    overall_retention_factor,
    phase_retention_factor,
    random_walk_contribution_bound,
    rcga_on_gom_bound,
    reinforced_bernoulli_finals,
    run_oracle,
    simulate_multiplicative_drift,
    simulate_reinforced_bernoulli,
    theorem_k,
    upper_bound_status,
    variance_bound,
    verify_biased_window,
    verify_convolution,
    verify_drift,
    verify_multiplicative_drift,
    verify_neutral_concentration,
    verify_random_walk_contribution,
    verify_reinforced_bernoulli,
    verify_variance,
)


def test_convolution_examples():
    assert conv_lhs([3.0], 1, 0) == 9.0
    assert conv_rhs(3.0, 1) == 4.5
    assert conv_lhs([1.0, 1.0], 2, 1) == 3.0
    assert conv_rhs(2.0, 2) == 1.0


def test_convolution_exact_path():
    q = [Fraction(1, 2), Fraction(1, 3)]
    assert conv_lhs(q, 2, 1) == Fraction(19, 36)
    assert conv_rhs(sum(q), 2) == Fraction(25, 144)
    assert conv_lhs([0.5, 1 / 3], 2, 1) == pytest.approx(19 / 36)


@pytest.mark.parametrize("q,m,rho", [([1.0, 2.0], 1, 0), ([1.0, -1.0], 2, 1), ([], 0, 1), ([1.0], 1, -1)])
def test_convolution_rejects_bad_tables(q, m, rho):
    with pytest.raises(InvalidParameterError):
        conv_lhs(q, m, rho)


def test_convolution_verifier_finds_no_counterexample():
    [report] = verify_convolution(instances=2000, exact_instances=20, seed=3)
    assert report.status == SATISFIED
    assert report.parameters["violations"] == 0
    assert report.parameters["exact_mismatches"] == 0
    assert report.empirical_value >= 1.0 - 1e-9


def test_variance_bound_values():
    assert variance_bound(101, 11, 0) == 10_000
    assert variance_bound(5, 4, 3) == 0
    with pytest.raises(InvalidParameterError):
        variance_bound(5, 4, 4)


def test_confined_matrix_layout():
    m = confined_matrix(3, 5, 10, 2)
    assert m.counts.tolist() == [[0, 0, 3, 3, 4]] * 3
    check_confined(m, 0, 2)
    with pytest.raises(InvalidParameterError):
        confined_matrix(3, 5, 10, 5)


def test_check_confined_ignores_the_examined_row():
    m = confined_matrix(3, 4, 8, 2)
    m.counts[1] = [2, 2, 2, 2]
    check_confined(m, 1, 2)
    with pytest.raises(PreconditionError):
        check_confined(m, 0, 2)
    with pytest.raises(PreconditionError):
        empirical_rest_variance(m, 0, 100, make_rng(0), j_star=2)


def test_uniform_rest_variance_matches_exact_value():
    m = new_frequency_matrix(11, 3, 3)
    variance = empirical_rest_variance(m, 4, 200_000, make_rng(21))
    assert variance == pytest.approx(10 * 8 / 12, rel=0.02)
    with pytest.raises(InvalidParameterError):
        empirical_rest_variance(m, 0, 1, make_rng(0))


def test_variance_verifier():
    reports = verify_variance(n=11, r=5, j_stars=[0, 2, 3], samples=200_000, seed=4)
    assert [report.oracle for report in reports] == ["variance", "variance-uniform-exact", "variance", "variance"]
    assert all(report.status == SATISFIED for report in reports)
    assert reports[0].bound_value == 160


def test_biased_window_bound():
    assert biased_window_bound(0, 10) == pytest.approx(9 / 1248)
    assert biased_window_bound(4, 10) == pytest.approx(36 / 1248)
    for delta, sigma in [(4, 1.4), (0, 0.25), (-1, 10)]:
        with pytest.raises(InvalidParameterError):
            biased_window_bound(delta, sigma)


def test_biased_window_verifier():
    reports = verify_biased_window(n=50, r=8, deltas=(0, 4), pairs=20_000, seed=8)
    assert len(reports) == 2
    assert all(report.status == SATISFIED for report in reports)
    assert all(report.parameters["window_preconditions"] for report in reports)
    assert reports[1].empirical_value >= reports[0].empirical_value


@pytest.mark.parametrize("events,samples,bound,expected", [
    (50, 100, 0.1, VIOLATED),
    (5, 100, 0.1, SATISFIED),
    (0, 100, 0.0, SATISFIED),
    (100, 100, 2.0, SATISFIED_VACUOUSLY),
])
def test_upper_bound_status(events, samples, bound, expected):
    assert upper_bound_status(events, samples, bound, 1e-3) == expected


@pytest.mark.parametrize("successes,samples,bound,expected", [
    (5, 100, 0.5, VIOLATED),
    (60, 100, 0.5, SATISFIED),
    (0, 100, 0.0, SATISFIED_VACUOUSLY),
])
def test_lower_bound_status(successes, samples, bound, expected):
    assert lower_bound_status(successes, samples, bound, 1e-3) == expected


def test_drift_prediction_at_uniform_r11():
    prediction = drift_prediction(101, 11, 0, 0.4, 7 / 11)
    assert prediction.value == pytest.approx(3.2623e-4, rel=1e-3)
    assert prediction.fallback == pytest.approx(3.1760e-4, rel=1e-3)
    assert prediction.dominates_fallback


@pytest.mark.parametrize("n,r,kappa,s", [(101, 9, 0, 0.5), (3, 11, 0, 0.5), (101, 11, 0, 0.0), (101, 11, 1, 0.5)])
def test_drift_prediction_preconditions(n, r, kappa, s):
    with pytest.raises(InvalidParameterError):
        drift_prediction(n, r, kappa, 0.4, s)


def test_drift_verifier_small_sample():
    reports = verify_drift(n=101, r=11, samples=50_000, seed=6)
    assert [report.oracle for report in reports] == ["drift-lower-suffix", "drift-upper-suffix",
                                                     "large-biased-probability"]
    assert all(report.status == SATISFIED for report in reports)
    assert reports[0].parameters["witnessed_c"] == pytest.approx(5 / 7)


def test_drift_verifier_rejects_unwitnessed_ratio():
    with pytest.raises(PreconditionError):
        verify_drift(n=101, r=11, c_drift=0.8, samples=10)


def test_martingale_bound_example():
    beta = martingale_beta(0.5, 0.5)
    assert beta == 0.25
    assert martingale_bound(0.5, 0.5, 400, 1000, beta) == pytest.approx(2 * math.exp(-5))
    assert martingale_beta(0.5, 0.9) == pytest.approx(0.45)
    assert martingale_bound(0.0, 0.5, 400, 1000, beta) == 2.0


def test_mcdiarmid_bound_example():
    assert mcdiarmid_bound(10, 20, 3) == pytest.approx(2 * math.exp(-5 / 3))
    assert mcdiarmid_bound(0, 0, 0) == 2.0
    with pytest.raises(InvalidParameterError):
        mcdiarmid_bound(-1, 1, 1)


def test_martingale_bound_is_weaker_than_mcdiarmid():
    # same deviation, variance sum t*beta and unit steps, all in count units
    alpha, p0, K, t = 0.5, 0.5, 400, 1000
    beta = martingale_beta(alpha, p0)
    assert mcdiarmid_bound(alpha * p0 * K, t * beta, 1.0) <= martingale_bound(alpha, p0, K, t, beta)


def test_neutral_concentration_verifier():
    [report] = verify_neutral_concentration(r=4, K=400, t=200, runs=2000, seed=1)
    assert report.status == SATISFIED
    assert report.empirical_value == 0.0


def test_zero_alpha_is_vacuous():
    [report] = verify_neutral_concentration(r=4, K=40, t=20, alpha=0.0, runs=50, seed=1)
    assert report.status == SATISFIED_VACUOUSLY
    assert report.empirical_value == 1.0


def test_neutral_simulator_agrees_with_full_runs():
    r, K, steps = 4, 20, 50
    simulated = neutral_max_deviation(r, K, steps, 2000, 2, make_rng(10))

    objective = make_objective(CONSTANT, 1, r)
    observed = []
    for seed in range(300):
        result = run(1, r, K, objective, steps, seed, trace_level=TRACE_FULL)
        masses = replay_masses(result, 0, 2)
        observed.append(max(abs(mu - masses[0]) for mu in masses) * K)
    observed = np.array([int(value) for value in observed])

    assert simulated.max() <= steps and observed.max() <= steps
    assert stats.ttest_ind(simulated, observed, equal_var=False).pvalue > 1e-3


def test_random_walk_contribution_bound():
    assert random_walk_contribution_bound(100, 1.0, 1.0) == pytest.approx(2 * 100 ** (-1 / 3857))
    with pytest.raises(InvalidParameterError):
        random_walk_contribution_bound(100, 0.0, 1.0)


def test_random_walk_contribution_reports_every_level():
    reports = verify_random_walk_contribution(n=10, r=4, runs=20, seed=3)
    assert [report.parameters["nu"] for report in reports] == [0, 1, 2, 3]
    K = reports[0].parameters["K"]
    assert K % 4 == 0 and K >= theorem_k(1.0, 10, 4)
    assert reports[0].parameters["t_stop"] == math.ceil(0.1 * K * math.sqrt(10) * math.log(10))
    # S_0 is the whole range, so its mass never moves
    assert reports[0].empirical_value == 0
    for report in reports:
        assert report.oracle == "random-walk-contribution" and report.samples == 20
        assert report.bound_value == pytest.approx(random_walk_contribution_bound(10, 1.0, 0.1))
        assert report.status == SATISFIED_VACUOUSLY
        assert 0 <= report.empirical_value <= 1


def test_random_walk_contribution_counts_filtered_deviations():
    reports = verify_random_walk_contribution(n=6, r=3, K=30, c_star=0.05, c_stop=1.0, runs=3, position=2, seed=11)
    t_stop = reports[0].parameters["t_stop"]
    objective = make_objective("g-onemax", 6, 3)
    expected = [0] * len(reports)
    for replica in range(3):
        result = run(6, 3, 30, objective, t_stop, 11 + replica, trace_level=TRACE_FULL)
        for nu, start in enumerate((0, 1, 2)):
            series = decompose(result, 2, start, 0, result.iterations_used)
            threshold = series.mu_start / 2
            if any(abs(mu - series.mu_start) >= threshold for mu in series.random_walk_change):
                expected[nu] += 1
    assert [report.empirical_value * 3 for report in reports] == pytest.approx(expected)


def test_random_walk_contribution_stays_small_for_large_k():
    reports = verify_random_walk_contribution(n=10, r=4, c_star=20.0, c_stop=0.1, runs=10, seed=5)
    assert all(report.empirical_value == 0 for report in reports)


def test_random_walk_contribution_preconditions():
    with pytest.raises(PreconditionError):
        verify_random_walk_contribution(n=10, r=4, K=8, runs=1)
    with pytest.raises(InvalidParameterError):
        verify_random_walk_contribution(n=10, r=2, runs=1)
    with pytest.raises(InvalidParameterError):
        verify_random_walk_contribution(n=10, r=4, position=10, runs=1)


def test_chernoff_variant_bound_example():
    assert chernoff_variant_bound(1000, 0.5, 0.5, 0.5) == pytest.approx(1000 * math.exp(-11.71875))
    with pytest.raises(InvalidParameterError):
        chernoff_variant_bound(1000, 0.5, 1.0, 0.5)
    with pytest.raises(InvalidParameterError):
        chernoff_variant_bound(1000, 0.5, 0.5, 1.0)


def test_reinforced_bernoulli_simulators():
    rng = make_rng(2)
    assert simulate_reinforced_bernoulli(0, 0.5, 10, 1, rng).tolist() == [0]
    # p = 1 with a full history of successes stays certain
    assert simulate_reinforced_bernoulli(5, 1.0, 10, 1, rng).tolist() == [0, 1, 2, 3, 4, 5]
    trajectory = simulate_reinforced_bernoulli(200, 0.3, 200, 1, rng)
    assert np.all(np.diff(trajectory) >= 0) and np.all(np.diff(trajectory) <= 1)
    assert np.all(reinforced_bernoulli_finals(50, 0.0, 1, 1, 100, rng) == 0)


def test_reinforced_bernoulli_verifier():
    [report] = verify_reinforced_bernoulli(t=1000, trajectories=2000, seed=3)
    assert report.status == SATISFIED
    assert report.bound_value == pytest.approx(8.13e-3, rel=1e-2)
    with pytest.raises(PreconditionError):
        verify_reinforced_bernoulli(t=100, rho=0, trajectories=10)


def test_multiplicative_drift_formulas():
    assert mult_drift_time(1.0, 1e-3, math.log(100), 0.01) == pytest.approx(100 * math.log(1e5))
    assert mult_drift_tail(0.02, math.log(100)) == pytest.approx(0.03)
    with pytest.raises(InvalidParameterError):
        mult_drift_time(1e-4, 1e-3, 1.0, 0.5)
    with pytest.raises(InvalidParameterError):
        mult_drift_time(1.0, 1e-3, 1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        mult_drift_tail(1.5, 1.0)


def test_multiplicative_drift_simulator():
    rng = make_rng(0)
    assert np.all(simulate_multiplicative_drift(1.0, 0.1, 0.5, 0.0, 10, 50, rng) == 4)
    # starting at x_min the first contraction already hits
    assert np.all(simulate_multiplicative_drift(0.1, 0.1, 0.5, 0.0, 10, 50, rng) == 1)
    with pytest.raises(InvalidParameterError):
        simulate_multiplicative_drift(1.0, 0.1, 0.6, 0.0, 10, 5, rng, self_loop=0.5)


@pytest.mark.parametrize("self_loop", [0.0, 0.5])
def test_multiplicative_drift_verifier(self_loop):
    [report] = verify_multiplicative_drift(trajectories=2000, self_loop=self_loop, seed=5)
    assert report.status == SATISFIED
    assert report.empirical_value <= 0.03


def test_runtime_comparators():
    assert adak_witt_bound(100, 10, 100) == pytest.approx(69077.55, rel=1e-6)
    assert rcga_on_gom_bound(100, 10, 100) == pytest.approx(10603.796, rel=1e-6)
    assert theorem_k(0.25, 100, 8) == pytest.approx(1834.07, rel=1e-4)
    with pytest.raises(InvalidParameterError):
        rcga_on_gom_bound(100, 1, 100)


def test_retention_factors():
    assert phase_retention_factor(6) == pytest.approx((5 / 6) ** 3)
    for kappa_star in range(1, 200):
        assert overall_retention_factor(kappa_star) >= math.exp(-3)
    with pytest.raises(InvalidParameterError):
        overall_retention_factor(0)


def test_run_oracle_dispatches_with_settings():
    [report] = run_oracle("convolution", {"instances": 200, "exact_instances": 5}, seed=9)
    assert report.oracle == "convolution" and report.samples == 200
    assert report.parameters_json().startswith("{")
    with pytest.raises(InvalidParameterError):
        run_oracle("no-such-bound")
