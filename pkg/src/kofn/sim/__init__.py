"""Simulation engines for the fork-join and fountain access models."""

from __future__ import annotations

from .config import CANCEL_PREEMPT, CANCEL_QUEUED_ONLY, SimConfig
from .events import EventQueue, Job, Task, TaskState
from .forkjoin import (
    ReplicationStats,
    run_forkjoin_reference,
    run_forkjoin_replication,
    simulate_forkjoin,
)
from .fountain import run_fountain_replication, simulate_fountain
from .summary import (
    SimSummary,
    collect_summary,
    ecdf_at,
    summarize_replications,
)

__all__ = [
    "CANCEL_PREEMPT",
    "CANCEL_QUEUED_ONLY",
    "SimConfig",
    "EventQueue",
    "Job",
    "Task",
    "TaskState",
    "ReplicationStats",
    "run_forkjoin_reference",
    "run_forkjoin_replication",
    "simulate_forkjoin",
    "run_fountain_replication",
    "simulate_fountain",
    "SimSummary",
    "collect_summary",
    "ecdf_at",
    "summarize_replications",
    "simulate",
]


def simulate(cfg: SimConfig) -> SimSummary:
    """Run whichever model the config's params select."""
    if cfg.model == "forkjoin":
        return simulate_forkjoin(cfg)
    return simulate_fountain(cfg)
