"""Binomial tail p-values, cluster significance and the pruning threshold.

All functions are pure.  Tails are accumulated in log space so that the
association p-values stay finite for n in the tens of millions and keep full
relative precision far out in the upper tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import NamedTuple, Sequence

# Berry-Esseen constant used by the pruning bound.
BERRY_ESSEEN_C = 0.4748

_STD_NORMAL = NormalDist()
_NEG_INF = float("-inf")


@dataclass(frozen=True)
class SignificanceParams:
    alpha: float = 0.01
    size_support: float = 0.01
    freq_support: float = 0.001

    def __post_init__(self) -> None:
        for name in ("alpha", "size_support", "freq_support"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"probability must lie in [0, 1], got {p}")


_LN_SQRT_2PI = 0.5 * math.log(2 * math.pi)
_S0, _S1, _S2, _S3, _S4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188


def _stirlerr(n: float) -> float:
    """log(n!) - log(sqrt(2 pi n) (n/e)^n)."""
    if n <= 15.0:
        return math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - _LN_SQRT_2PI
    nn = n * n
    if n > 500:
        return (_S0 - _S1 / nn) / n
    if n > 80:
        return (_S0 - (_S1 - _S2 / nn) / nn) / n
    if n > 35:
        return (_S0 - (_S1 - (_S2 - _S3 / nn) / nn) / nn) / n
    return (_S0 - (_S1 - (_S2 - (_S3 - _S4 / nn) / nn) / nn) / nn) / n


def _bd0(x: float, mean: float) -> float:
    """x log(x/mean) + mean - x, evaluated without cancellation near x == mean."""
    if abs(x - mean) < 0.1 * (x + mean):
        v = (x - mean) / (x + mean)
        s = (x - mean) * v
        ej = 2 * x * v
        v2 = v * v
        for j in range(1, 1000):
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
        return s
    return x * math.log(x / mean) + mean - x


def log_binom_pmf(j: int, n: int, p: float) -> float:
    """log P[M = j], using Loader's saddle-point expansion for accuracy at large n."""
    if j < 0 or j > n:
        return _NEG_INF
    if p == 0.0:
        return 0.0 if j == 0 else _NEG_INF
    if p == 1.0:
        return 0.0 if j == n else _NEG_INF
    q = 1.0 - p
    if j == 0:
        return n * math.log1p(-p)
    if j == n:
        return n * math.log(p)
    lc = _stirlerr(n) - _stirlerr(j) - _stirlerr(n - j) - _bd0(j, n * p) - _bd0(n - j, n * q)
    lf = 2 * _LN_SQRT_2PI + math.log(j) + math.log1p(-j / n)
    return lc - 0.5 * lf


def _log_sum_from(start: int, stop: int, step: int, n: int, p: float) -> float:
    """log of sum_j pmf(j) walking from ``start`` towards ``stop`` (exclusive).

    Terms are built from the recurrence pmf(j+1)/pmf(j) = (n-j)/(j+1) * p/q,
    scaled by the first term so nothing over- or underflows.
    """
    log_first = log_binom_pmf(start, n, p)
    odds = p / (1.0 - p)
    total = 1.0
    term = 1.0
    j = start
    while j + step != stop:
        if step > 0:
            term *= (n - j) / (j + 1) * odds
        else:
            term *= j / (n - j + 1) / odds
        j += step
        total += term
        if term < total * 1e-17 and ((step > 0 and j >= (n + 1) * p) or (step < 0 and j <= (n + 1) * p)):
            break
    return log_first + math.log(total)


def log_binom_tail(k: int, n: int, p: float) -> float:
    """log P[M >= k] for M ~ Binomial(n, p)."""
    _check_p(p)
    if n < 0:
        raise ValueError("n must be non-negative")
    if k <= 0:
        return 0.0
    if k > n:
        return _NEG_INF
    if p == 0.0:
        return _NEG_INF
    if p == 1.0:
        return 0.0
    if k <= n * p:
        # lower tail sum_{j<k} is the short side; walk down from k-1
        log_lower = _log_sum_from(k - 1, -1, -1, n, p)
        lower = math.exp(log_lower)
        if lower < 0.5:
            return math.log1p(-lower)
        # 1 - lower would cancel; fall through to the direct upper sum
    return _log_sum_from(k, n + 1, 1, n, p)


def binom_tail(k: int, n: int, p: float) -> float:
    """P[M >= k] for M ~ Binomial(n, p); 1 for k <= 0 and 0 for k > n."""
    return math.exp(log_binom_tail(k, n, p))


def expected_edges(size1: int, size2: int, delta: float) -> float:
    return size1 * size2 * delta


def log_association_pvalue(size1: int, size2: int, strength: int, delta: float) -> float:
    n = size1 * size2
    if strength > n:
        raise ValueError(f"strength {strength} exceeds the {n} possible edges")
    return log_binom_tail(strength, n, delta)


def association_pvalue(size1: int, size2: int, strength: int, delta: float) -> float:
    """Probability of at least ``strength`` edges between groups of the given sizes."""
    return math.exp(log_association_pvalue(size1, size2, strength, delta))


def log_tail_product(ones: Sequence[int], size: int, marginals: Sequence[float]) -> float:
    """sum_i log P[X_i >= k_i], i.e. log(1 - Psi)."""
    if len(ones) != len(marginals):
        raise ValueError(f"{len(ones)} counts but {len(marginals)} marginals")
    total = 0.0
    for k, p in zip(ones, marginals):
        k = int(k)
        if not 0 <= k <= size:
            raise ValueError(f"count {k} outside [0, {size}]")
        total += log_binom_tail(k, size, float(p))
    return total


def psi_from_log(log_product: float) -> float:
    return -math.expm1(log_product)


def cluster_significance(ones: Sequence[int], size: int, marginals: Sequence[float]) -> float:
    """Psi = 1 - prod_i P[X_i >= k_i], X_i ~ Binomial(size, p_i)."""
    return psi_from_log(log_tail_product(ones, size, marginals))


class PruneThreshold(NamedTuple):
    value: float
    vacuous: bool


def prune_threshold(n: int, p: float, alpha: float) -> PruneThreshold:
    """Strength below which an association between groups with n potential edges cannot be significant.

    Normal approximation to the binomial tail, relaxed by the Berry-Esseen
    error bound C (p^2 + q^2) / sqrt(npq).  When the relaxed quantile level
    leaves (0, 1) no pruning is possible and the threshold is 0.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    q = 1.0 - p
    sd = math.sqrt(n * p * q)
    level = 1.0 - alpha - BERRY_ESSEEN_C * (p * p + q * q) / sd
    if not 0.0 < level < 1.0:
        return PruneThreshold(0.0, True)
    return PruneThreshold(_STD_NORMAL.inv_cdf(level) * sd + n * p, False)


def is_significant_association(pvalue: float, alpha: float) -> bool:
    return pvalue < alpha
