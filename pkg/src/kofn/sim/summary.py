"""Response-time sample statistics: mean, variance, CI, downsampled ECDF."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as _scipy_stats

__all__ = ["SimSummary", "collect_summary", "summarize_replications", "ecdf_at"]

DEFAULT_ECDF_POINTS = 512
_BATCH_COUNT = 30


@dataclass(frozen=True)
class SimSummary:
    """Pooled response-time statistics from one simulation run.

    ``ecdf`` is a quantile-downsampled step function: nondecreasing
    (time, cumulative fraction) pairs whose final fraction is 1.
    """

    sample_count: int
    mean: float
    variance: float
    ci95_halfwidth: float
    ecdf: tuple[tuple[float, float], ...]


def _t_halfwidth(values: np.ndarray) -> float:
    """95% halfwidth from Student-t over a small set of estimator values."""
    m = len(values)
    if m < 2:
        return math.nan
    spread = float(np.std(values, ddof=1))
    if spread == 0.0:
        return 0.0
    quantile = float(_scipy_stats.t.ppf(0.975, m - 1))
    return quantile * spread / math.sqrt(m)


def _downsample_ecdf(ordered: np.ndarray, points: int) -> tuple[tuple[float, float], ...]:
    m = ordered.size
    if m <= points:
        return tuple((float(ordered[i]), (i + 1) / m) for i in range(m))
    idx = np.ceil(np.arange(1, points + 1) * (m / points)).astype(np.int64) - 1
    return tuple((float(ordered[i]), (int(i) + 1) / m) for i in idx)


def summarize_replications(
    rep_samples: Sequence[np.ndarray], ecdf_points: int = DEFAULT_ECDF_POINTS
) -> SimSummary:
    """Pool per-replication sample arrays (in replication-id order).

    The confidence interval comes from replication means (Student-t) when
    there are at least 5 replications; otherwise from batch means over the
    pooled sequence, since within-run samples are correlated.
    """
    if ecdf_points < 1:
        raise ValueError(f"ecdf_points must be >= 1, got {ecdf_points}")
    arrays = [np.asarray(s, dtype=np.float64) for s in rep_samples]
    pooled = np.concatenate(arrays) if len(arrays) > 1 else arrays[0]
    m = pooled.size
    if m < 2:
        raise ValueError(f"need at least 2 samples, got {m}")
    mean = float(pooled.mean())
    variance = float(pooled.var(ddof=1))
    if len(arrays) >= 5:
        halfwidth = _t_halfwidth(np.array([a.mean() for a in arrays]))
    else:
        batches = np.array_split(pooled, min(_BATCH_COUNT, m))
        halfwidth = _t_halfwidth(np.array([b.mean() for b in batches]))
    ordered = np.sort(pooled)
    return SimSummary(
        sample_count=m,
        mean=mean,
        variance=variance,
        ci95_halfwidth=halfwidth,
        ecdf=_downsample_ecdf(ordered, ecdf_points),
    )


def collect_summary(samples, ecdf_points: int = DEFAULT_ECDF_POINTS) -> SimSummary:
    """Summarize a single ordered sample sequence (batch-means CI)."""
    return summarize_replications([np.asarray(samples, dtype=np.float64)], ecdf_points)


def ecdf_at(summary: SimSummary, t: float) -> float:
    """Step-function evaluation of the downsampled ECDF, right-continuous;
    0 below the first point."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    times = [pt[0] for pt in summary.ecdf]
    idx = bisect.bisect_right(times, t)
    if idx == 0:
        return 0.0
    return summary.ecdf[idx - 1][1]
