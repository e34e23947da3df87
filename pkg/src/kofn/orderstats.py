"""Harmonic numbers and exponential order statistics.

Everything here is exact summation, no log approximations:

    H_n        = sum_{j=1..n} 1/j
    H_n2       = sum_{j=1..n} 1/j^2
    H_n(rho)   = sum_{j=1..n} 1/(j*(j - rho))        for 0 <= rho < 1

For n i.i.d. Exp(rate) variables, the k-th smallest X_(k) has

    E[X_(k)] = (H_n - H_{n-k}) / rate
    V[X_(k)] = (H_n2 - H_{(n-k)2}) / rate^2
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

__all__ = [
    "HarmonicTriple",
    "OrderStatMoments",
    "harmonic",
    "harmonic_sq",
    "harmonic_rho",
    "harmonic_triple",
    "exp_orderstat_moments",
    "orderstat_pdf",
]

# Log-space binomial coefficients beyond this size; math.comb is exact below it
# and float conversion of huge integers would overflow.
_LOGSPACE_THRESHOLD = 50


class _CompensatedTable:
    """Growable prefix sums of f(j), accumulated with Neumaier compensation.

    Keeps the absolute error of every prefix near one ulp, so harmonic
    differences like H_n - H_{n-1} = 1/n hold to ~1e-16 even for n ~ 1e6.
    """

    def __init__(self, term):
        self._term = term
        self._sums = [0.0]  # _sums[j] = compensated sum_{i=1..j} term(i)
        self._total = 0.0   # raw running sum
        self._carry = 0.0   # Neumaier correction term
        self._lock = threading.Lock()

    def _grow(self, n: int) -> None:
        sums = self._sums
        total = self._total
        carry = self._carry
        for j in range(len(sums), n + 1):
            x = self._term(j)
            t = total + x
            if abs(total) >= abs(x):
                carry += (total - t) + x
            else:
                carry += (x - t) + total
            total = t
            sums.append(total + carry)
        self._total = total
        self._carry = carry

    def value(self, n: int) -> float:
        sums = self._sums
        if n >= len(sums):
            # growth is serialized; completed prefixes read lock-free
            with self._lock:
                if n >= len(sums):
                    self._grow(n)
        return sums[n]


_H_TABLE = _CompensatedTable(lambda j: 1.0 / j)
_H_SQ_TABLE = _CompensatedTable(lambda j: 1.0 / (j * j))


def harmonic(n: int) -> float:
    """H_n = sum_{j=1..n} 1/j, with H_0 = 0."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return _H_TABLE.value(n)


def harmonic_sq(n: int) -> float:
    """H_n2 = sum_{j=1..n} 1/j^2, with the empty sum at n = 0."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return _H_SQ_TABLE.value(n)


def harmonic_rho(n: int, rho: float) -> float:
    """sum_{j=1..n} 1/(j*(j - rho)); requires 0 <= rho < 1.

    At rho >= 1 the j = 1 denominator hits zero or flips sign, so the sum
    is rejected rather than returning a meaningless value.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must be in [0, 1), got {rho}")
    # Summed smallest term first for accuracy; not memoized since rho varies.
    return math.fsum(1.0 / (j * (j - rho)) for j in range(n, 0, -1))


@dataclass(frozen=True)
class HarmonicTriple:
    """H_n and H_n2 bundled with the n they belong to."""

    n: int
    h_n: float
    h_n_sq: float


def harmonic_triple(n: int) -> HarmonicTriple:
    return HarmonicTriple(n=n, h_n=harmonic(n), h_n_sq=harmonic_sq(n))


@dataclass(frozen=True)
class OrderStatMoments:
    """Mean and variance of the k-th smallest of n i.i.d. Exp(rate) draws."""

    n: int
    k: int
    rate: float
    mean: float
    variance: float


def _check_nk_rate(n: int, k: int, rate: float) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, n={n}], got {k}")
    if not rate > 0.0:
        raise ValueError(f"rate must be > 0, got {rate}")


def exp_orderstat_moments(n: int, k: int, rate: float) -> OrderStatMoments:
    """Moments of the k-th order statistic of n Exp(rate) variables."""
    _check_nk_rate(n, k, rate)
    mean = (harmonic(n) - harmonic(n - k)) / rate
    variance = (harmonic_sq(n) - harmonic_sq(n - k)) / (rate * rate)
    return OrderStatMoments(n=n, k=k, rate=rate, mean=mean, variance=variance)


def orderstat_pdf(x: float, n: int, k: int, rate: float) -> float:
    """Density of the k-th order statistic of n Exp(rate) variables.

    f_(k,n)(x) = n * C(n-1, k-1) * F(x)^(k-1) * (1-F(x))^(n-k) * f(x)
    with F(x) = 1 - exp(-rate*x).
    """
    _check_nk_rate(n, k, rate)
    if x < 0.0:
        raise ValueError(f"x must be >= 0, got {x}")
    sf = math.exp(-rate * x)  # survival 1 - F(x)
    cdf = -math.expm1(-rate * x)
    if sf == 0.0:
        return 0.0
    if k > 1 and cdf == 0.0:
        return 0.0
    dens = rate * sf
    if dens == 0.0:  # product underflow at extreme rate * x
        return 0.0
    if n <= _LOGSPACE_THRESHOLD:
        head = cdf ** (k - 1) if k > 1 else 1.0
        return n * math.comb(n - 1, k - 1) * head * sf ** (n - k) * dens
    log_choose = math.lgamma(n) - math.lgamma(k) - math.lgamma(n - k + 1)
    log_pdf = math.log(n) + log_choose - rate * x * (n - k) + math.log(dens)
    if k > 1:
        log_pdf += (k - 1) * math.log(cdf)
    return math.exp(log_pdf)
