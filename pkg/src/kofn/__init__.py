"""kofn: download-latency analysis for (n, k) erasure-coded storage.

Closed-form response-time results and discrete-event / Monte Carlo
simulation for two content-access models (fork-join disk queues and
fountain-style retrieval), plus a concrete MDS codec so the
chunk/encode/store/recover pipeline is executable end to end.
"""

from __future__ import annotations

from .analytic import (
    BoundPair,
    FountainParams,
    GeneralServiceParams,
    InstabilityError,
    ServiceMoments,
    SplitMergeUnstableError,
    StageUnstableError,
    SystemParams,
    fj_bounds,
    fj_lower_bound,
    fj_upper_bound,
    fj_upper_bound_general,
    fountain_exact_argmin,
    fountain_mean_response,
    fountain_optimal_k,
    mm1_mean_response,
    pk_mean_response,
)
from .mds import CodeSpec, ContentFile, Shard, decode, encode
from .orderstats import (
    HarmonicTriple,
    OrderStatMoments,
    exp_orderstat_moments,
    harmonic,
    harmonic_rho,
    harmonic_sq,
    orderstat_pdf,
)
from .rng import RngStream, derive_stream, sample_exponential
from .sim import (
    SimConfig,
    SimSummary,
    collect_summary,
    ecdf_at,
    simulate,
    simulate_forkjoin,
    simulate_fountain,
)

__version__ = "0.1.0"

__all__ = [
    "BoundPair",
    "FountainParams",
    "GeneralServiceParams",
    "InstabilityError",
    "ServiceMoments",
    "SplitMergeUnstableError",
    "StageUnstableError",
    "SystemParams",
    "fj_bounds",
    "fj_lower_bound",
    "fj_upper_bound",
    "fj_upper_bound_general",
    "fountain_exact_argmin",
    "fountain_mean_response",
    "fountain_optimal_k",
    "mm1_mean_response",
    "pk_mean_response",
    "CodeSpec",
    "ContentFile",
    "Shard",
    "decode",
    "encode",
    "HarmonicTriple",
    "OrderStatMoments",
    "exp_orderstat_moments",
    "harmonic",
    "harmonic_rho",
    "harmonic_sq",
    "orderstat_pdf",
    "RngStream",
    "derive_stream",
    "sample_exponential",
    "SimConfig",
    "SimSummary",
    "collect_summary",
    "ecdf_at",
    "simulate",
    "simulate_forkjoin",
    "simulate_fountain",
    "__version__",
]
