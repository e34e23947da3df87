"""Simulation run configuration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..analytic import FountainParams, SystemParams
from .summary import DEFAULT_ECDF_POINTS

__all__ = ["SimConfig", "CANCEL_PREEMPT", "CANCEL_QUEUED_ONLY"]

# How a departing job's unfinished tasks are handled: "preempt" aborts
# in-service tasks immediately (the node moves on), "queued-only" removes
# waiting tasks but lets in-service ones run out.
CANCEL_PREEMPT = "preempt"
CANCEL_QUEUED_ONLY = "queued-only"


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one simulation experiment.

    ``num_requests`` is the total request budget; it is split evenly across
    ``replications`` independent runs, each of which discards its first
    ``warmup`` requests from the statistics.
    """

    params: Union[SystemParams, FountainParams]
    num_requests: int = 1_000_000
    warmup: int = 10_000
    seed: int = 1
    replications: int = 10
    cancel: str = CANCEL_PREEMPT
    ecdf_points: int = DEFAULT_ECDF_POINTS

    def __post_init__(self) -> None:
        if not isinstance(self.params, (SystemParams, FountainParams)):
            raise ValueError(f"unsupported params type: {type(self.params).__name__}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")
        if self.per_replication <= self.warmup:
            raise ValueError(
                f"per-replication request count {self.per_replication} "
                f"must exceed warmup {self.warmup}"
            )
        if self.cancel not in (CANCEL_PREEMPT, CANCEL_QUEUED_ONLY):
            raise ValueError(f"unknown cancel policy: {self.cancel!r}")
        if self.ecdf_points < 1:
            raise ValueError(f"ecdf_points must be >= 1, got {self.ecdf_points}")

    @property
    def model(self) -> str:
        return "forkjoin" if isinstance(self.params, SystemParams) else "fountain"

    @property
    def per_replication(self) -> int:
        return self.num_requests // self.replications
