"""Simulation engine tests.

The fast kernel is cross-validated draw for draw against the reference
object-model engine; statistical outputs are checked against the M/M/1
equivalence, the closed-form fountain mean/variance, and the analytic
bounds.
"""

import math

import numpy as np
import pytest

from kofn.analytic import (
    FountainParams,
    SystemParams,
    fj_bounds,
    fountain_mean_response,
    mm1_mean_response,
)
from kofn.orderstats import harmonic_sq
from kofn.rng import RngStream
from kofn.sim import (
    CANCEL_PREEMPT,
    CANCEL_QUEUED_ONLY,
    EventQueue,
    SimConfig,
    Task,
    TaskState,
    collect_summary,
    ecdf_at,
    run_forkjoin_reference,
    run_forkjoin_replication,
    simulate,
    simulate_forkjoin,
    simulate_fountain,
)
from kofn.sim.forkjoin import _forkjoin_events


class TestEventQueue:
    def test_orders_by_time(self):
        q = EventQueue()
        q.push(2.0, "late")
        q.push(0.5, "early")
        q.push(1.0, "mid")
        assert [q.pop()[1] for _ in range(3)] == ["early", "mid", "late"]

    def test_simultaneous_events_fifo(self):
        q = EventQueue()
        q.push(1.0, "first")
        q.push(1.0, "second")
        q.push(1.0, "third")
        assert [q.pop()[1] for _ in range(3)] == ["first", "second", "third"]

    def test_interleaved_stability(self):
        q = EventQueue()
        q.push(1.0, "a")
        q.push(0.5, "b")
        q.push(1.0, "c")
        assert q.pop() == (0.5, "b")
        q.push(1.0, "d")
        assert [q.pop()[1] for _ in range(3)] == ["a", "c", "d"]


class TestTaskStateMachine:
    def test_served_task_never_transitions(self):
        task = Task(job_id=0, node_id=0)
        task.transition(TaskState.IN_SERVICE)
        task.transition(TaskState.SERVED)
        with pytest.raises(RuntimeError):
            task.transition(TaskState.ABANDONED)

    def test_abandoned_task_never_transitions(self):
        task = Task(job_id=0, node_id=0)
        task.transition(TaskState.ABANDONED)
        with pytest.raises(RuntimeError):
            task.transition(TaskState.IN_SERVICE)


def _draws(params: SystemParams, jobs: int, seed: int = 11):
    stream = RngStream(seed, 0)
    arrivals = np.cumsum(stream.exponential(params.lam, jobs))
    svc_pool = stream.exponential(params.mu_prime, params.n * jobs)
    return arrivals, svc_pool


@pytest.mark.parametrize(
    "n,k", [(1, 1), (2, 1), (3, 2), (5, 5), (10, 4), (6, 3)]
)
@pytest.mark.parametrize("cancel", [CANCEL_PREEMPT, CANCEL_QUEUED_ONLY])
class TestEngineParity:
    def test_kernel_matches_reference_bit_for_bit(self, n, k, cancel):
        params = SystemParams(n=n, k=k, lam=1.0, mu=3.0)
        jobs = 2000
        arrivals, svc_pool = _draws(params, jobs)
        ref_responses, _, ref_used = run_forkjoin_reference(
            params, arrivals, svc_pool, cancel
        )
        responses = np.full(jobs, -1.0)
        done = np.zeros(jobs, np.int32)
        used, _, _, _, _ = _forkjoin_events(
            arrivals, svc_pool, n, k, cancel == CANCEL_PREEMPT, responses, done
        )
        assert used == ref_used
        assert np.array_equal(responses, ref_responses)


class TestCompiledEngine:
    def test_jit_and_pure_python_paths_agree(self):
        # same function body, compiled vs interpreted
        params = SystemParams(n=5, k=3, lam=1.0, mu=2.0)
        fast = run_forkjoin_replication(params, 3000, RngStream(23, 0), engine="fast")
        plain = run_forkjoin_replication(params, 3000, RngStream(23, 0), engine="python")
        assert np.array_equal(fast.responses, plain.responses)
        assert (fast.area, fast.end_time, fast.served, fast.aborted) == (
            plain.area, plain.end_time, plain.served, plain.aborted
        )

    def test_unknown_engine_rejected(self):
        params = SystemParams(n=2, k=1, lam=1.0, mu=2.0)
        with pytest.raises(ValueError):
            run_forkjoin_replication(params, 10, RngStream(1, 0), engine="warp")


class TestTaskConservation:
    def test_preempt_served_and_abandoned_counts(self):
        params = SystemParams(n=6, k=3, lam=1.0, mu=2.0)
        arrivals, svc_pool = _draws(params, 1500)
        _, jobs, _ = run_forkjoin_reference(params, arrivals, svc_pool, CANCEL_PREEMPT)
        for job in jobs:
            states = [t.state for t in job.tasks]
            assert len(states) == 6
            assert all(s in (TaskState.SERVED, TaskState.ABANDONED) for s in states)
            assert states.count(TaskState.SERVED) == 3
            assert states.count(TaskState.ABANDONED) == 3

    def test_queued_only_every_task_resolves(self):
        params = SystemParams(n=6, k=3, lam=1.0, mu=2.0)
        arrivals, svc_pool = _draws(params, 1500)
        _, jobs, _ = run_forkjoin_reference(
            params, arrivals, svc_pool, CANCEL_QUEUED_ONLY
        )
        for job in jobs:
            states = [t.state for t in job.tasks]
            assert all(s in (TaskState.SERVED, TaskState.ABANDONED) for s in states)
            # in-service tasks ride out their service instead of aborting
            assert states.count(TaskState.SERVED) >= 3

    def test_departures_causal(self):
        params = SystemParams(n=4, k=2, lam=1.0, mu=3.0)
        arrivals, svc_pool = _draws(params, 500)
        responses, jobs, _ = run_forkjoin_reference(params, arrivals, svc_pool)
        assert (responses > 0).all()
        for job in jobs:
            assert job.departure_time >= job.arrival_time
            assert job.tasks_done >= 2


def _forkjoin_summary(n, k, lam=1.0, mu=3.0, requests=200_000, seed=7):
    cfg = SimConfig(
        params=SystemParams(n=n, k=k, lam=lam, mu=mu),
        num_requests=requests,
        warmup=1000,
        seed=seed,
        replications=10,
    )
    return simulate_forkjoin(cfg)


class TestForkJoinStatistics:
    def test_single_queue_matches_mm1(self):
        summary = _forkjoin_summary(1, 1)
        expected = mm1_mean_response(1.0, 3.0)
        assert abs(summary.mean - expected) < 3 * summary.ci95_halfwidth

    def test_replicated_single_block_matches_pooled_mm1(self):
        summary = _forkjoin_summary(10, 1)
        expected = mm1_mean_response(1.0, 30.0)
        assert abs(summary.mean - expected) < 3 * summary.ci95_halfwidth

    @pytest.mark.parametrize("k", [2, 5, 10])
    def test_mean_between_bounds(self, k):
        summary = _forkjoin_summary(10, k)
        pair = fj_bounds(SystemParams(10, k, 1.0, 3.0))
        ci = summary.ci95_halfwidth
        assert pair.lower - ci <= summary.mean <= pair.upper + ci

    def test_deterministic_given_config(self):
        cfg = SimConfig(
            params=SystemParams(4, 2, 1.0, 3.0),
            num_requests=20_000,
            warmup=100,
            seed=42,
            replications=5,
        )
        assert simulate_forkjoin(cfg) == simulate_forkjoin(cfg)

    def test_seed_changes_output(self):
        cfg_a = SimConfig(
            params=SystemParams(4, 2, 1.0, 3.0),
            num_requests=20_000,
            warmup=100,
            seed=1,
            replications=5,
        )
        cfg_b = SimConfig(
            params=SystemParams(4, 2, 1.0, 3.0),
            num_requests=20_000,
            warmup=100,
            seed=2,
            replications=5,
        )
        assert simulate_forkjoin(cfg_a) != simulate_forkjoin(cfg_b)

    def test_littles_law(self):
        # time-average jobs in system equals lambda * mean response
        params = SystemParams(10, 5, 1.0, 3.0)
        stats = run_forkjoin_replication(params, 1_000_000, RngStream(5, 0))
        time_average = stats.area / stats.end_time
        lam_times_w = 1.0 * stats.responses.mean()
        assert abs(time_average - lam_times_w) / lam_times_w < 0.02

    def test_preempt_frees_capacity_vs_queued_only(self):
        # occupying nodes with doomed work can only slow the system down
        params = SystemParams(6, 2, 2.0, 1.5)
        base = dict(num_requests=200_000, warmup=1000, seed=13, replications=10)
        preempt = simulate_forkjoin(SimConfig(params=params, **base))
        held = simulate_forkjoin(
            SimConfig(params=params, cancel=CANCEL_QUEUED_ONLY, **base)
        )
        assert preempt.mean < held.mean

    def test_rejects_fountain_params(self):
        cfg = SimConfig(params=FountainParams(4, 2, 1.0, 1.0), num_requests=100, warmup=1)
        with pytest.raises(ValueError):
            simulate_forkjoin(cfg)


class TestFountainStatistics:
    def test_immediate_availability_is_deterministic(self):
        cfg = SimConfig(
            params=FountainParams(10, 10, 0.0, 5.0),
            num_requests=5000,
            warmup=10,
            seed=3,
            replications=5,
        )
        summary = simulate_fountain(cfg)
        assert summary.mean == 0.5
        assert summary.variance == 0.0
        assert summary.ci95_halfwidth == 0.0

    def test_mean_matches_closed_form(self):
        params = FountainParams(10, 5, 2.0, 5.0)
        cfg = SimConfig(
            params=params, num_requests=400_000, warmup=1000, seed=9, replications=10
        )
        summary = simulate_fountain(cfg)
        expected = fountain_mean_response(params)
        assert abs(summary.mean - expected) < 3 * summary.ci95_halfwidth

    def test_variance_matches_order_statistic(self):
        params = FountainParams(10, 5, 2.0, 5.0)
        cfg = SimConfig(
            params=params, num_requests=400_000, warmup=1000, seed=9, replications=10
        )
        summary = simulate_fountain(cfg)
        expected = 4.0 * (harmonic_sq(10) - harmonic_sq(5))
        # crude standard error of a sample variance: var * sqrt(2/m)
        stderr = expected * math.sqrt(2.0 / summary.sample_count)
        assert abs(summary.variance - expected) < 3 * stderr

    def test_argmin_shape_tracks_wait_scale(self):
        # the simulated mean-vs-k curves dip at an interior k once waiting
        # costs anything, and the dip moves toward smaller k as waiting
        # grows (k=n exactly at zero waiting)
        argmins = []
        for wait in (0.0, 2.0, 4.0, 6.0):
            means = []
            for k in range(1, 11):
                cfg = SimConfig(
                    params=FountainParams(10, k, wait, 5.0),
                    num_requests=200_000,
                    warmup=100,
                    seed=21,
                    replications=5,
                )
                means.append(simulate_fountain(cfg).mean)
            argmins.append(min(range(10), key=lambda i: means[i]) + 1)
        assert argmins[0] == 10
        assert all(a >= b for a, b in zip(argmins, argmins[1:]))
        assert argmins[-1] < 10

    def test_deterministic_given_config(self):
        cfg = SimConfig(
            params=FountainParams(8, 3, 1.0, 2.0),
            num_requests=50_000,
            warmup=100,
            seed=17,
            replications=5,
        )
        assert simulate_fountain(cfg) == simulate_fountain(cfg)

    def test_dispatch_picks_model(self):
        cfg = SimConfig(
            params=FountainParams(10, 10, 0.0, 5.0),
            num_requests=1000,
            warmup=10,
            seed=1,
            replications=2,
        )
        assert simulate(cfg).mean == 0.5


class TestCollectSummary:
    def test_constant_samples(self):
        summary = collect_summary([1.0, 1.0, 1.0, 1.0])
        assert summary.mean == 1.0
        assert summary.variance == 0.0
        assert summary.ci95_halfwidth == 0.0

    def test_two_samples_unbiased_variance(self):
        summary = collect_summary([0.0, 2.0])
        assert summary.mean == 1.0
        assert summary.variance == 2.0

    def test_rejects_single_sample(self):
        with pytest.raises(ValueError):
            collect_summary([1.0])

    def test_ecdf_of_exponential(self):
        draws = RngStream(31, 0).exponential(1.0, size=100_000)
        summary = collect_summary(draws)
        assert abs(ecdf_at(summary, 1.0) - (1.0 - math.exp(-1.0))) < 0.01

    def test_ecdf_shape_invariants(self):
        draws = RngStream(32, 0).exponential(2.0, size=10_000)
        summary = collect_summary(draws, ecdf_points=64)
        times = [p[0] for p in summary.ecdf]
        fracs = [p[1] for p in summary.ecdf]
        assert len(summary.ecdf) == 64
        assert times == sorted(times)
        assert fracs == sorted(fracs)
        assert fracs[-1] == 1.0

    def test_small_sample_keeps_every_point(self):
        summary = collect_summary([3.0, 1.0, 2.0], ecdf_points=512)
        assert summary.ecdf == ((1.0, 1 / 3), (2.0, 2 / 3), (3.0, 1.0))


class TestEcdfAt:
    def test_below_all_samples(self):
        summary = collect_summary([1.0, 2.0, 3.0])
        assert ecdf_at(summary, 0.5) == 0.0

    def test_above_all_samples(self):
        summary = collect_summary([1.0, 2.0, 3.0])
        assert ecdf_at(summary, 10.0) == 1.0

    def test_right_continuity_at_sample(self):
        summary = collect_summary([1.0, 2.0, 3.0])
        assert ecdf_at(summary, 2.0) == pytest.approx(2 / 3)

    def test_rejects_negative_time(self):
        summary = collect_summary([1.0, 2.0])
        with pytest.raises(ValueError):
            ecdf_at(summary, -0.1)

    def test_single_block_response_distribution(self):
        # the replicated single-block system's response is Exp(n*mu - lambda)
        summary = _forkjoin_summary(10, 1, requests=200_000)
        expected = 1.0 - math.exp(-29.0 * 0.4)
        assert ecdf_at(summary, 0.4) == pytest.approx(expected, abs=0.01)


class TestSimConfigValidation:
    def test_rejects_zero_replications(self):
        with pytest.raises(ValueError):
            SimConfig(
                params=SystemParams(2, 1, 1.0, 3.0), num_requests=100, replications=0
            )

    def test_rejects_warmup_at_least_per_replication(self):
        with pytest.raises(ValueError):
            SimConfig(
                params=SystemParams(2, 1, 1.0, 3.0),
                num_requests=1000,
                warmup=100,
                replications=10,
            )

    def test_rejects_unknown_cancel_policy(self):
        with pytest.raises(ValueError):
            SimConfig(
                params=SystemParams(2, 1, 1.0, 3.0),
                num_requests=100,
                warmup=1,
                cancel="drop-everything",
            )

    def test_rejects_non_param_payload(self):
        with pytest.raises(ValueError):
            SimConfig(params="not-params", num_requests=100, warmup=1)
