import math

import numpy as np
import pytest

from spatq.analytics import NetworkParameters, solve_busy_probability
from spatq.geometry import AssociationMap, PcpParams, PointPattern, Window
from spatq.simulator import (
    MetricsReport,
    _queue_departure_slots,
    _queue_reference_loop,
    classify_queue_stability,
    estimate_total_arrival_variance,
    run_coupled,
    run_delay_oracle,
    run_sir_static,
    simulate_network,
)
from spatq.traffic import ArrivalRateDistribution

PARAMS = NetworkParameters(lambda_b=1.0, lambda_u=5.0, theta=10.0, alpha=4.0)


def single_cell_instance(n_users: int, rate: float, seed: int = 0):
    w = Window(1.0, 1.0)
    rng = np.random.default_rng(seed)
    bss = PointPattern(np.array([[0.5, 0.5]]), w)
    users = PointPattern(rng.random((n_users, 2)), w)
    assoc = AssociationMap.from_serving(np.zeros(n_users, dtype=int), 1)
    rates = np.full(n_users, rate)
    return bss, users, assoc, rates


class TestQueueRecursion:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_matches_slot_loop(self, seed):
        rng = np.random.default_rng(seed)
        xi0, mu = rng.uniform(0.01, 0.3), rng.uniform(0.3, 0.9)
        arrivals = rng.random(50_000) < xi0
        service = rng.random(50_000) < mu
        ref_delays, _ = _queue_reference_loop(arrivals, service)
        arrival_slots = np.flatnonzero(arrivals)
        success_slots = np.flatnonzero(service)
        departures, served = _queue_departure_slots(arrival_slots, success_slots)
        delays = departures - arrival_slots[served] + 1
        assert np.array_equal(delays[: len(ref_delays)], ref_delays)
        # the loop only counts completed departures; the recursion agrees there
        assert len(delays) == len(ref_delays)

    def test_departures_keep_arrival_order(self):
        rng = np.random.default_rng(9)
        arrival_slots = np.flatnonzero(rng.random(20_000) < 0.1)
        success_slots = np.flatnonzero(rng.random(20_000) < 0.2)
        departures, served = _queue_departure_slots(arrival_slots, success_slots)
        assert np.all(np.diff(departures) > 0)
        assert np.all(departures >= arrival_slots[served])


class TestDelayOracle:
    def test_preconditions(self):
        with pytest.raises(ValueError):
            run_delay_oracle(5, 0.01, 0.0, 1_000_000, seed=1)
        with pytest.raises(ValueError):
            run_delay_oracle(5, 0.01, 0.3, 1_000_000, seed=1)  # mu > 1/n
        with pytest.raises(ValueError):
            run_delay_oracle(5, 0.01, 0.2, 50_000, seed=1)

    def test_immediate_service_single_slot_delay(self):
        result = run_delay_oracle(1, 0.001, 1.0, 1_000_000, seed=2)
        assert result.value == 1.0

    def test_light_load_matches_formula(self):
        result = run_delay_oracle(5, 0.05, 0.2, 1_000_000, seed=3)
        expected = (1 - 0.05) / (0.2 - 0.05)
        assert result.value == pytest.approx(expected, rel=0.02)

    def test_overload_reports_unstable(self):
        result = run_delay_oracle(20, 0.02, 0.004, 1_000_000, seed=4)
        assert result.unstable

    def test_deterministic_in_seed(self):
        a = run_delay_oracle(5, 0.05, 0.2, 1_000_000, seed=5)
        b = run_delay_oracle(5, 0.05, 0.2, 1_000_000, seed=5)
        assert a == b


class TestStaticSir:
    def test_activity_bounds_checked(self):
        with pytest.raises(ValueError):
            run_sir_static(PARAMS, q=1.2, samples=100_000, seed=1)
        with pytest.raises(ValueError):
            run_sir_static(PARAMS, q=0.5, samples=1000, seed=1)

    def test_idle_interferers_always_succeed(self):
        p, se = run_sir_static(PARAMS, q=0.0, samples=100_000, seed=1)
        assert p == 1.0
        assert se == pytest.approx(0.0, abs=1e-6)

    def test_matches_closed_form_at_moderate_activity(self):
        p, se = run_sir_static(PARAMS, q=0.5, samples=150_000, seed=2)
        assert p == pytest.approx(0.28705548550856125, abs=0.01)

    def test_scale_invariant_in_station_intensity(self):
        dense = NetworkParameters(lambda_b=2.0, lambda_u=5.0, theta=10.0, alpha=4.0)
        p1, _ = run_sir_static(PARAMS, q=0.5, samples=100_000, seed=7)
        p2, _ = run_sir_static(dense, q=0.5, samples=100_000, seed=7)
        assert p1 == p2


class TestSimulateNetwork:
    def test_zero_rates_stay_idle(self):
        bss, users, assoc, rates = single_cell_instance(4, 0.0)
        report = simulate_network(
            bss, users, assoc, rates, 10.0, 4.0, horizon=2000, warmup=100, seed=1
        )
        assert report.empirical_busy_prob == 0.0
        assert report.delay_samples == 0
        assert math.isnan(report.per_user_mean_delay)
        assert report.unstable_fraction == 0.0

    def test_isolated_user_served_in_one_slot(self):
        # one user, no interference: every packet departs the slot it reaches
        # the head, so at low load the mean delay is exactly one slot
        bss, users, assoc, rates = single_cell_instance(1, 0.02)
        report = simulate_network(
            bss, users, assoc, rates, 10.0, 4.0, horizon=30_000, warmup=0, seed=2,
            interference=False,
        )
        assert report.per_user_mean_delay == pytest.approx(1.0, abs=1e-9)
        assert report.empirical_success_prob == 1.0

    def test_conservation_and_fifo(self):
        report, trace = run_coupled(
            PARAMS,
            ArrivalRateDistribution.deterministic(0.01),
            horizon=3000,
            warmup=500,
            seed=11,
            mean_bss=36.0,
            detail=True,
        )
        assert np.array_equal(trace.arrivals, trace.departures + trace.final_queue)
        by_user: dict[int, list[tuple[int, int]]] = {}
        for user, arrival, departure in trace.departure_log:
            by_user.setdefault(user, []).append((arrival, departure))
        for entries in by_user.values():
            arrivals = [a for a, _ in entries]
            departures = [d for _, d in entries]
            assert arrivals == sorted(arrivals)
            assert departures == sorted(departures)
            assert all(d >= a for a, d in entries)

    def test_deterministic_given_seed(self):
        dist = ArrivalRateDistribution.exponential(0.004)
        a = run_coupled(PARAMS, dist, horizon=1500, warmup=300, seed=5, mean_bss=25.0)
        b = run_coupled(PARAMS, dist, horizon=1500, warmup=300, seed=5, mean_bss=25.0)
        assert a == b

    def test_busy_probability_tracks_fixed_point(self):
        report = run_coupled(
            PARAMS,
            ArrivalRateDistribution.deterministic(0.005),
            horizon=8000,
            warmup=1600,
            seed=9,
            mean_bss=64.0,
        )
        q_star = solve_busy_probability(5, 0.005, 10.0, 4.0)
        assert report.empirical_busy_prob == pytest.approx(q_star, rel=0.2)

    def test_reduces_to_independent_queues_without_interference(self):
        bss, users, assoc, rates = single_cell_instance(3, 0.08)
        report = simulate_network(
            bss, users, assoc, rates, 10.0, 4.0, horizon=200_000, warmup=0, seed=3,
            interference=False,
        )
        mu = 1.0 / 3.0
        expected = (1 - 0.08) / (mu - 0.08)
        assert report.per_user_mean_delay == pytest.approx(expected, rel=0.05)

    def test_active_only_scheduling_raises_utilization(self):
        # drawing only among backlogged users removes idle picks, so the
        # station transmits at least as often and drains queues faster
        dist = ArrivalRateDistribution.deterministic(0.01)
        base = run_coupled(
            PARAMS, dist, horizon=4000, warmup=800, seed=17, mean_bss=25.0
        )
        eager = run_coupled(
            PARAMS, dist, horizon=4000, warmup=800, seed=17, mean_bss=25.0,
            active_only=True,
        )
        assert eager.empirical_busy_prob >= base.empirical_busy_prob
        assert eager.per_user_mean_delay <= base.per_user_mean_delay

    def test_rates_validated(self):
        bss, users, assoc, rates = single_cell_instance(3, 0.5)
        with pytest.raises(ValueError):
            simulate_network(
                bss, users, assoc, rates * 3.0, 10.0, 4.0, 1000, 100, seed=1
            )

    def test_empty_users_rejected(self):
        w = Window(1.0, 1.0)
        bss = PointPattern(np.array([[0.5, 0.5]]), w)
        users = PointPattern(np.empty((0, 2)), w)
        assoc = AssociationMap.from_serving(np.empty(0, dtype=int), 1)
        with pytest.raises(ValueError):
            simulate_network(
                bss, users, assoc, np.empty(0), 10.0, 4.0, 1000, 100, seed=1
            )


class TestClassifyQueueStability:
    def test_flat_traces_are_stable(self):
        rng = np.random.default_rng(0)
        traces = rng.integers(0, 4, size=(5, 400))
        slots = np.linspace(0, 200_000, 400).astype(int)
        assert classify_queue_stability(traces, slots) == 0.0

    def test_drifting_queue_flagged(self):
        slots = np.linspace(0, 200_000, 400).astype(int)
        flat = np.random.default_rng(1).integers(0, 4, size=(4, 400))
        drifting = (0.01 * slots)[None, :]
        traces = np.vstack([flat, drifting])
        assert classify_queue_stability(traces, slots) == pytest.approx(0.2)

    def test_injected_oracle_instability_detected(self):
        # constructed overload: arrival rate far above service rate
        result = run_delay_oracle(10, 0.05, 0.01, 1_000_000, seed=6)
        assert result.unstable

    def test_short_horizon_rejected(self):
        with pytest.raises(ValueError):
            classify_queue_stability(np.zeros((2, 100)), np.arange(100))

    def test_unstable_fraction_grows_with_user_intensity(self):
        # heavier per-cell load pushes more queues past their service rate
        dist = ArrivalRateDistribution.exponential(0.01)
        fractions = []
        for lambda_u in (2.0, 12.0):
            params = NetworkParameters(
                lambda_b=1.0, lambda_u=lambda_u, theta=10.0, alpha=4.0
            )
            report = run_coupled(
                params, dist, horizon=6000, warmup=1000, seed=13, mean_bss=36.0
            )
            fractions.append(report.unstable_fraction)
        assert fractions[1] > fractions[0]
        assert fractions[1] > 0.05


class TestArrivalVarianceEstimator:
    def test_replication_floor(self):
        dist = ArrivalRateDistribution.deterministic(1.0)
        with pytest.raises(ValueError):
            estimate_total_arrival_variance(PARAMS, dist, 10, seed=1)

    def test_zero_rate_has_zero_variance(self):
        dist = ArrivalRateDistribution.deterministic(0.0)
        mean, var = estimate_total_arrival_variance(PARAMS, dist, 1000, seed=1, mean_bss=49.0)
        assert mean == 0.0
        assert var == 0.0

    def test_typical_cell_mean_is_unbiased(self):
        dist = ArrivalRateDistribution.deterministic(1.5)
        mean, _ = estimate_total_arrival_variance(PARAMS, dist, 2000, seed=2, mean_bss=49.0)
        assert mean == pytest.approx(1.5 * 5.0, rel=0.05)

    def test_clustering_increases_variance(self):
        dist = ArrivalRateDistribution.deterministic(1.5)
        pcp = PcpParams(lambda_p=1.0, lambda_c=5 / math.pi, r_c=1.0)
        clustered = NetworkParameters(
            lambda_b=1.0, lambda_u=5.0, theta=10.0, alpha=4.0, pcp=pcp
        )
        _, var_ppp = estimate_total_arrival_variance(PARAMS, dist, 2000, seed=3, mean_bss=49.0)
        _, var_pcp = estimate_total_arrival_variance(clustered, dist, 2000, seed=4, mean_bss=49.0)
        assert var_pcp > 1.5 * var_ppp


class TestMetricsReport:
    def test_serialization_round_trip(self):
        report = MetricsReport(
            empirical_busy_prob=0.125,
            empirical_success_prob=0.5,
            per_user_mean_delay=12.25,
            delay_samples=100,
            unstable_fraction=0.0,
            clamped_rate_fraction=0.0,
            seed=7,
            horizon=1000,
            warmup=100,
        )
        text = report.to_kv_text()
        parsed = dict(line.split("=") for line in text.strip().splitlines())
        assert float(parsed["empirical_busy_prob"]) == 0.125
        assert int(parsed["seed"]) == 7
        header = MetricsReport.csv_header().split(",")
        row = report.to_csv_row().split(",")
        assert len(header) == len(row)
        assert float(row[header.index("per_user_mean_delay")]) == 12.25
