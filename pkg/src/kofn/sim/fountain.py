"""Monte Carlo simulation of the (n, k) fountain retrieval system.

Requests do not interact: each one draws n independent exponential waiting
times, completes once the k-th server has responded, and then receives its
1/k-sized blocks in constant time delivery/k. The per-request response is
therefore the k-th order statistic of the waits plus delivery/k.
"""

from __future__ import annotations

import numpy as np

from ..analytic import FountainParams
from ..rng import RngStream, derive_stream
from .config import SimConfig
from .summary import SimSummary, summarize_replications

__all__ = ["run_fountain_replication", "simulate_fountain"]

_CHUNK = 65536  # requests drawn per batch; fixed so draw order is stable


def run_fountain_replication(
    params: FountainParams, num_requests: int, stream: RngStream
) -> np.ndarray:
    """Response-time samples for one replication, in request order."""
    if num_requests < 1:
        raise ValueError(f"num_requests must be >= 1, got {num_requests}")
    n, k = params.n, params.k
    delivery_part = params.delivery / k
    if params.wait_scale == 0.0:
        # Content is immediately available; response is pure delivery.
        return np.full(num_requests, delivery_part)
    rate = 1.0 / params.wait_scale
    out = np.empty(num_requests)
    pos = 0
    while pos < num_requests:
        m = min(_CHUNK, num_requests - pos)
        waits = stream.exponential(rate, size=(m, n))
        kth = np.partition(waits, k - 1, axis=1)[:, k - 1]
        out[pos : pos + m] = kth + delivery_part
        pos += m
    return out


def simulate_fountain(cfg: SimConfig) -> SimSummary:
    """Pooled fountain statistics over independent replications."""
    if cfg.model != "fountain":
        raise ValueError("simulate_fountain needs FountainParams")
    p = cfg.params
    per_rep = cfg.per_replication
    rep_samples = []
    for rep in range(cfg.replications):
        stream = RngStream(
            cfg.seed,
            derive_stream("fountain", p.n, p.k, p.wait_scale, p.delivery, rep),
        )
        samples = run_fountain_replication(p, per_rep, stream)
        rep_samples.append(samples[cfg.warmup :])
    return summarize_replications(rep_samples, cfg.ecdf_points)
