"""Event calendar and fork-join bookkeeping objects.

The reference fork-join engine is built on these; the production kernel in
``forkjoin.py`` flattens the same state into arrays. Keeping the explicit
object model around gives the tests something to inspect task by task.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

__all__ = ["EventQueue", "Job", "Task", "TaskState"]


class EventQueue:
    """Time-ordered event calendar.

    Events dequeue in nondecreasing timestamp order; events with equal
    timestamps dequeue in insertion order (FIFO tie-break), which keeps the
    simulation loop total even under contrived ties.
    """

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, Any]] = []
        self._seq = itertools.count()

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, time: float, event: Any) -> None:
        heapq.heappush(self._heap, (time, next(self._seq), event))

    def pop(self) -> tuple[float, Any]:
        time, _, event = heapq.heappop(self._heap)
        return time, event

    def peek_time(self) -> float:
        return self._heap[0][0]


class TaskState(Enum):
    QUEUED = "queued"
    IN_SERVICE = "in-service"
    SERVED = "served"
    ABANDONED = "abandoned"


@dataclass
class Task:
    """One job's copy at one node; exactly one task per (job, node)."""

    job_id: int
    node_id: int
    state: TaskState = TaskState.QUEUED

    def transition(self, new_state: TaskState) -> None:
        # A finished task (served or abandoned) never transitions again.
        if self.state in (TaskState.SERVED, TaskState.ABANDONED):
            raise RuntimeError(
                f"task (job={self.job_id}, node={self.node_id}) already "
                f"{self.state.value}, cannot become {new_state.value}"
            )
        self.state = new_state


@dataclass
class Job:
    """A forked request; departs when tasks_done reaches k."""

    id: int
    arrival_time: float
    tasks_done: int = 0
    departure_time: Optional[float] = None
    tasks: list[Task] = field(default_factory=list)

    @property
    def departed(self) -> bool:
        return self.departure_time is not None
