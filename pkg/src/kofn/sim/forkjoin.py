"""Event-driven simulation of the (n, k) fork-join disk array.

Poisson arrivals fork one task per disk queue (FCFS); each disk serves one
task at a time with Exp(mu') duration; a job departs when its k-th task
finishes, at which point its remaining tasks leave their queues. Under the
default "preempt" policy an in-service task is aborted immediately and the
disk moves on to its next queued task; "queued-only" lets in-service tasks
run out.

Two interchangeable engines share one draw-consumption discipline:

* a flat-array kernel (JIT-compiled via numba when available) used for
  production runs, exploiting the fact that all queues see arrivals in the
  same order, so each node's FCFS queue is just "the earliest arrived,
  not-departed job this node has not yet served";
* a reference engine built on the explicit Job/Task/EventQueue model,
  used by the tests for task-level invariants and cross-validation.

Feeding both the same arrival and service draws yields bit-identical
response samples.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..analytic import SystemParams
from ..rng import RngStream, derive_stream
from .config import CANCEL_PREEMPT, SimConfig
from .events import EventQueue, Job, Task, TaskState
from .summary import SimSummary, summarize_replications

__all__ = [
    "ReplicationStats",
    "run_forkjoin_replication",
    "run_forkjoin_reference",
    "simulate_forkjoin",
]


def _forkjoin_events(arrivals, svc_pool, n, k, preempt, responses, done_cnt):
    """Single-threaded event loop over one replication.

    Pending events are the next arrival plus at most one outstanding
    completion per node, so event selection is a scan over the n nodes
    (arrival wins exact-time ties). Returns draw/bookkeeping totals:
    (service_starts, jobs_in_system_integral, end_time, served, aborted).
    """
    num_jobs = arrivals.shape[0]
    node_job = np.full(n, -1, np.int64)        # job being served, -1 if idle
    node_done_t = np.full(n, np.inf, np.float64)
    node_ptr = np.zeros(n, np.int64)           # next job index to consider
    departed = np.zeros(num_jobs, np.bool_)
    svc_used = 0
    arr_idx = 0
    completed = 0
    last = 0.0
    area = 0.0
    in_sys = 0
    served = 0
    aborted = 0
    while completed < num_jobs:
        tc = np.inf
        cj = -1
        for j in range(n):
            if node_done_t[j] < tc:
                tc = node_done_t[j]
                cj = j
        if arr_idx < num_jobs and arrivals[arr_idx] <= tc:
            now = arrivals[arr_idx]
            area += in_sys * (now - last)
            last = now
            in_sys += 1
            i = arr_idx
            arr_idx += 1
            # Idle nodes have drained everything older, so they take the
            # new job; busy nodes see it later via their scan pointer.
            for j in range(n):
                if node_job[j] < 0:
                    node_job[j] = i
                    node_done_t[j] = now + svc_pool[svc_used]
                    svc_used += 1
                    node_ptr[j] = i + 1
        else:
            now = tc
            area += in_sys * (now - last)
            last = now
            i = node_job[cj]
            node_job[cj] = -1
            node_done_t[cj] = np.inf
            done_cnt[i] += 1
            served += 1
            if not departed[i] and done_cnt[i] == k:
                departed[i] = True
                completed += 1
                in_sys -= 1
                responses[i] = now - arrivals[i]
                if preempt:
                    for j in range(n):
                        if node_job[j] == i:
                            node_job[j] = -1
                            node_done_t[j] = np.inf
                            aborted += 1
            # Freed nodes pick their next pending task in node order.
            for j in range(n):
                if node_job[j] < 0:
                    p = node_ptr[j]
                    while p < arr_idx and departed[p]:
                        p += 1
                    if p < arr_idx:
                        node_job[j] = p
                        node_done_t[j] = now + svc_pool[svc_used]
                        svc_used += 1
                        node_ptr[j] = p + 1
                    else:
                        node_ptr[j] = p
    return svc_used, area, last, served, aborted


try:
    from numba import njit

    _forkjoin_events_fast = njit(cache=True, nogil=True)(_forkjoin_events)
except ImportError:  # pragma: no cover - numba is a declared dependency
    _forkjoin_events_fast = _forkjoin_events


@dataclass(frozen=True)
class ReplicationStats:
    """Raw per-replication output, before any warmup trimming."""

    responses: np.ndarray  # response time per job, in arrival order
    area: float            # integral of jobs-in-system over the run
    end_time: float        # time of the last departure
    served: int
    aborted: int
    service_starts: int


def run_forkjoin_replication(
    params: SystemParams,
    num_jobs: int,
    stream: RngStream,
    cancel: str = CANCEL_PREEMPT,
    engine: str = "fast",
) -> ReplicationStats:
    """One independent fork-join run of ``num_jobs`` requests."""
    if num_jobs < 1:
        raise ValueError(f"num_jobs must be >= 1, got {num_jobs}")
    gaps = stream.exponential(params.lam, num_jobs)
    arrivals = np.cumsum(gaps)
    # Each (job, node) task starts service at most once.
    svc_pool = stream.exponential(params.mu_prime, params.n * num_jobs)
    responses = np.full(num_jobs, -1.0)
    done_cnt = np.zeros(num_jobs, np.int32)
    preempt = cancel == CANCEL_PREEMPT
    if engine == "fast":
        run = _forkjoin_events_fast
    elif engine == "python":
        run = _forkjoin_events
    else:
        raise ValueError(f"unknown engine: {engine!r}")
    svc_used, area, end_time, served, aborted = run(
        arrivals, svc_pool, params.n, params.k, preempt, responses, done_cnt
    )
    return ReplicationStats(
        responses=responses,
        area=float(area),
        end_time=float(end_time),
        served=int(served),
        aborted=int(aborted),
        service_starts=int(svc_used),
    )


def simulate_forkjoin(cfg: SimConfig) -> SimSummary:
    """Pooled fork-join statistics over independent replications."""
    if cfg.model != "forkjoin":
        raise ValueError("simulate_forkjoin needs SystemParams")
    p = cfg.params
    per_rep = cfg.per_replication
    rep_samples = []
    for rep in range(cfg.replications):
        stream = RngStream(
            cfg.seed, derive_stream("forkjoin", p.n, p.k, p.lam, p.mu, rep)
        )
        stats = run_forkjoin_replication(p, per_rep, stream, cancel=cfg.cancel)
        rep_samples.append(stats.responses[cfg.warmup :])
    return summarize_replications(rep_samples, cfg.ecdf_points)


def run_forkjoin_reference(
    params: SystemParams,
    arrivals: np.ndarray,
    svc_pool: np.ndarray,
    cancel: str = CANCEL_PREEMPT,
) -> tuple[np.ndarray, list[Job], int]:
    """Object-model engine over explicit arrival/service draws.

    Mirrors the kernel's draw-consumption order exactly; returns the
    response array, the Job objects (with their Tasks) for invariant
    inspection, and the number of service draws consumed.
    """
    n, k = params.n, params.k
    preempt = cancel == CANCEL_PREEMPT
    num_jobs = len(arrivals)
    jobs = [Job(id=i, arrival_time=float(arrivals[i])) for i in range(num_jobs)]
    queues: list[deque[Task]] = [deque() for _ in range(n)]
    current: list[Task | None] = [None] * n
    generation = [0] * n  # bumped per service start; stale completions ignored
    calendar = EventQueue()
    svc_used = 0
    completed = 0

    def start_service(node: int, task: Task, now: float) -> None:
        nonlocal svc_used
        task.transition(TaskState.IN_SERVICE)
        current[node] = task
        generation[node] += 1
        done_t = now + float(svc_pool[svc_used])
        svc_used += 1
        calendar.push(done_t, ("complete", node, task, generation[node]))

    def refill(node: int, now: float) -> None:
        while queues[node]:
            task = queues[node].popleft()
            if task.state is TaskState.ABANDONED:
                continue
            start_service(node, task, now)
            return

    if num_jobs:
        calendar.push(float(arrivals[0]), ("arrival", 0))
    while completed < num_jobs:
        now, event = calendar.pop()
        if event[0] == "arrival":
            i = event[1]
            job = jobs[i]
            for j in range(n):
                task = Task(job_id=i, node_id=j)
                job.tasks.append(task)
                if current[j] is None:
                    start_service(j, task, now)
                else:
                    queues[j].append(task)
            if i + 1 < num_jobs:
                calendar.push(float(arrivals[i + 1]), ("arrival", i + 1))
        else:
            _, j, task, gen = event
            if gen != generation[j] or current[j] is not task:
                continue  # aborted service; completion no longer applies
            task.transition(TaskState.SERVED)
            current[j] = None
            job = jobs[task.job_id]
            job.tasks_done += 1
            if not job.departed and job.tasks_done == k:
                job.departure_time = now
                completed += 1
                for other in job.tasks:
                    if other.state is TaskState.QUEUED:
                        other.transition(TaskState.ABANDONED)
                    elif other.state is TaskState.IN_SERVICE and preempt:
                        other.transition(TaskState.ABANDONED)
                        current[other.node_id] = None
                        generation[other.node_id] += 1
            for jj in range(n):
                if current[jj] is None:
                    refill(jj, now)
    # Drain leftover completions (queued-only keeps serving after the last
    # departure) so every task reaches a terminal state. All remaining
    # queued tasks belong to departed jobs, so no new services start.
    while len(calendar):
        now, event = calendar.pop()
        if event[0] != "complete":
            continue
        _, j, task, gen = event
        if gen != generation[j] or current[j] is not task:
            continue
        task.transition(TaskState.SERVED)
        current[j] = None
        jobs[task.job_id].tasks_done += 1
        for jj in range(n):
            if current[jj] is None:
                refill(jj, now)
    responses = np.array(
        [job.departure_time - job.arrival_time for job in jobs], dtype=np.float64
    )
    return responses, jobs, svc_used
