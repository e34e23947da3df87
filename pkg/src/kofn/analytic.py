"""Closed-form mean response times for coded-storage access.

Two systems share the (n, k) structure: a fountain-style retrieval system
(n servers with independent availability delays, done when k respond) and a
fork-join queueing system (n FCFS disk queues, a job departs when any k of
its n tasks finish). The fountain mean is exact; the fork-join mean is
bracketed between a staged M/M/1 lower bound and a split-merge / M/G/1
(Pollaczek-Khinchin) upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .orderstats import harmonic, harmonic_rho, harmonic_sq

__all__ = [
    "FountainParams",
    "SystemParams",
    "ServiceMoments",
    "BoundPair",
    "GeneralServiceParams",
    "InstabilityError",
    "SplitMergeUnstableError",
    "StageUnstableError",
    "fountain_mean_response",
    "fountain_optimal_k",
    "fountain_exact_argmin",
    "fj_lower_bound",
    "fj_upper_bound",
    "fj_upper_bound_general",
    "fj_bounds",
    "pk_mean_response",
    "mm1_mean_response",
    "split_merge_service_moments",
]


class InstabilityError(ValueError):
    """A queueing formula was evaluated outside its stability region."""


class SplitMergeUnstableError(InstabilityError):
    """The split-merge upper bound does not exist (lambda * E[S] >= 1).

    The fork-join system itself may still be stable; the blocking variant
    used for the bound saturates earlier.
    """


class StageUnstableError(InstabilityError):
    """A lower-bound stage rate (n - j) * mu' does not exceed lambda."""


@dataclass(frozen=True)
class FountainParams:
    """Fountain retrieval tuple: n servers, k needed, per-server waiting
    scale (mean waiting time), and full-content delivery constant."""

    n: int
    k: int
    wait_scale: float  # seconds; mean waiting time per server
    delivery: float    # seconds; delivery time of the whole content

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"k must be in [1, n={self.n}], got {self.k}")
        if self.wait_scale < 0:
            raise ValueError(f"wait_scale must be >= 0, got {self.wait_scale}")
        if self.delivery < 0:
            raise ValueError(f"delivery must be >= 0, got {self.delivery}")


@dataclass(frozen=True)
class SystemParams:
    """Fork-join tuple (n disks, k needed, lambda, mu) plus derived rates.

    mu is the per-unit read rate; each disk holds 1/k of the content, so the
    per-task service rate is mu_prime = k * mu and the load factor is
    rho = lambda / mu_prime. Stability requires mu_prime > lambda.
    """

    n: int
    k: int
    lam: float  # Poisson arrival rate, 1/seconds
    mu: float   # per-unit read rate, units/second
    mu_prime: float = field(init=False)
    rho: float = field(init=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"k must be in [1, n={self.n}], got {self.k}")
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        object.__setattr__(self, "mu_prime", self.k * self.mu)
        object.__setattr__(self, "rho", self.lam / self.mu_prime)
        if not self.rho < 1:
            raise InstabilityError(
                f"unstable queue: rho = {self.rho:.6g} >= 1 "
                f"(lambda = {self.lam}, mu' = {self.mu_prime})"
            )


@dataclass(frozen=True)
class ServiceMoments:
    """First two moments of a service time S."""

    mean: float
    second_moment: float

    def __post_init__(self) -> None:
        if self.mean < 0 or self.second_moment < 0:
            raise ValueError("service moments must be nonnegative")
        if self.second_moment < self.mean * self.mean * (1 - 1e-12):
            raise ValueError("E[S^2] cannot be below E[S]^2")

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean * self.mean

    @classmethod
    def from_mean_variance(cls, mean: float, variance: float) -> "ServiceMoments":
        if variance < 0:
            raise ValueError(f"variance must be >= 0, got {variance}")
        return cls(mean=mean, second_moment=variance + mean * mean)


@dataclass(frozen=True)
class GeneralServiceParams:
    """Per-node service described only by mean, standard deviation, and the
    order-statistic variance constant c_nk (table-supplied by the caller)."""

    mean_service: float
    sigma: float
    c_nk: float

    def __post_init__(self) -> None:
        if not self.mean_service > 0:
            raise ValueError(f"mean_service must be > 0, got {self.mean_service}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not self.c_nk > 0:
            raise ValueError(f"c_nk must be > 0, got {self.c_nk}")


@dataclass(frozen=True)
class BoundPair:
    """Lower/upper mean-response-time bounds with validity flags.

    A flag is False when that bound's formula has no value for the given
    parameters (upper: split-merge saturated; lower: a stage rate at or
    below lambda); the corresponding value is then NaN.
    """

    lower: float
    upper: float
    lower_valid: bool
    upper_valid: bool


def fountain_mean_response(p: FountainParams) -> float:
    """Exact mean download time of the (n, k) fountain system.

    wait_scale * (H_n - H_{n-k}) + delivery / k: the k-th smallest of n
    exponential waits, plus the 1/k-sized block delivery.
    """
    return p.wait_scale * (harmonic(p.n) - harmonic(p.n - p.k)) + p.delivery / p.k


def fountain_optimal_k(n: int, wait_scale: float, delivery: float) -> int:
    """Near-optimal k from the closed-form root, clamped to [1, n].

    Minimizing wait_scale*log(n/(n-k)) + delivery/k (the log approximation
    of the harmonic difference) gives the root of k^2 + D*mu*k - D*mu*n
    with mu = 1/wait_scale. Boundary cases are exact: free waiting
    (wait_scale = 0) favors the finest split k = n; free delivery
    (delivery = 0) favors k = 1.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if wait_scale < 0:
        raise ValueError(f"wait_scale must be >= 0, got {wait_scale}")
    if delivery < 0:
        raise ValueError(f"delivery must be >= 0, got {delivery}")
    if wait_scale == 0.0:
        return n
    if delivery == 0.0:
        return 1
    d_mu = delivery / wait_scale
    root = (-d_mu + math.sqrt(d_mu * d_mu + 4.0 * n * d_mu)) / 2.0
    return max(1, min(n, math.ceil(root)))


def fountain_exact_argmin(n: int, wait_scale: float, delivery: float) -> int:
    """True minimizer of the fountain mean over k = 1..n by exhaustive
    evaluation; ties break toward smaller k."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    best_k, best_t = 1, math.inf
    for k in range(1, n + 1):
        t = fountain_mean_response(FountainParams(n, k, wait_scale, delivery))
        if t < best_t:
            best_k, best_t = k, t
    return best_k


def fj_lower_bound(p: SystemParams) -> float:
    """Staged lower bound on the fork-join mean response time.

    A job passes through k stages; in stage j its completion rate is at
    most (n - j) * mu', giving

        T >= sum_{j=0..k-1} 1/((n-j)*mu' - lambda)
          =  (1/mu') * [H_n - H_{n-k} + rho*(H_n(rho) - H_{n-k}(rho))]

    Requires every stage rate to exceed lambda, i.e. (n-k+1)*mu' > lambda.
    """
    if not (p.n - p.k + 1) * p.mu_prime > p.lam:
        raise StageUnstableError(
            f"stage rate (n-k+1)*mu' = {(p.n - p.k + 1) * p.mu_prime:.6g} "
            f"does not exceed lambda = {p.lam}"
        )
    rho = p.rho
    h_part = harmonic(p.n) - harmonic(p.n - p.k)
    r_part = harmonic_rho(p.n, rho) - harmonic_rho(p.n - p.k, rho)
    return (h_part + rho * r_part) / p.mu_prime


def split_merge_service_moments(p: SystemParams) -> ServiceMoments:
    """Service moments of the blocking (split-merge) variant: the k-th
    order statistic of n Exp(mu') draws."""
    mean = (harmonic(p.n) - harmonic(p.n - p.k)) / p.mu_prime
    variance = (harmonic_sq(p.n) - harmonic_sq(p.n - p.k)) / p.mu_prime**2
    return ServiceMoments.from_mean_variance(mean, variance)


def fj_upper_bound(p: SystemParams) -> float:
    """Split-merge upper bound on the fork-join mean response time.

    In the blocking variant all n disks stall until the job's k-th task
    finishes, which makes it an M/G/1 queue whose service time is the k-th
    order statistic; Pollaczek-Khinchin then gives the mean. Exists only
    while lambda * E[S] < 1.
    """
    s = split_merge_service_moments(p)
    if not p.lam * s.mean < 1.0:
        raise SplitMergeUnstableError(
            f"split-merge utilization lambda*E[S] = {p.lam * s.mean:.6g} >= 1; "
            "the upper bound does not exist (the fork-join system itself "
            "may still be stable)"
        )
    return pk_mean_response(p.lam, s)


def pk_mean_response(lam: float, s: ServiceMoments) -> float:
    """Pollaczek-Khinchin mean response time of an M/G/1 queue:
    E[S] + lambda*E[S^2] / (2*(1 - lambda*E[S]))."""
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    util = lam * s.mean
    if not util < 1.0:
        raise InstabilityError(f"lambda*E[S] = {util:.6g} >= 1, queue unstable")
    return s.mean + lam * s.second_moment / (2.0 * (1.0 - util))


def mm1_mean_response(lam: float, service_rate: float) -> float:
    """M/M/1 mean response time 1/(service_rate - lambda)."""
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    if not service_rate > lam:
        raise InstabilityError(
            f"service rate {service_rate:.6g} must exceed lambda {lam:.6g}"
        )
    return 1.0 / (service_rate - lam)


def fj_upper_bound_general(p: SystemParams, g: GeneralServiceParams) -> float:
    """Split-merge upper bound for a general per-node service time.

    Without a closed form for the k-th order statistic, its moments are
    bounded by

        E[S] <= mean_service + sigma * sqrt((k-1)/(n-k+1))
        V[S] <= c_nk * sigma^2

    and substituted into Pollaczek-Khinchin (which is increasing in both).
    """
    es_bound = g.mean_service + g.sigma * math.sqrt((p.k - 1) / (p.n - p.k + 1))
    vs_bound = g.c_nk * g.sigma * g.sigma
    return pk_mean_response(p.lam, ServiceMoments.from_mean_variance(es_bound, vs_bound))


def fj_bounds(p: SystemParams) -> BoundPair:
    """Both fork-join bounds, with invalid regimes flagged instead of raised."""
    try:
        lower = fj_lower_bound(p)
        lower_valid = True
    except StageUnstableError:
        lower, lower_valid = math.nan, False
    try:
        upper = fj_upper_bound(p)
        upper_valid = True
    except SplitMergeUnstableError:
        upper, upper_valid = math.nan, False
    return BoundPair(lower=lower, upper=upper, lower_valid=lower_valid, upper_valid=upper_valid)
