"""Exact quantiles and superquantiles of discrete equiprobable samples.

A sample is a vector ``u`` of ``n`` equally likely loss values.  The
p-superquantile (conditional value-at-risk at level ``p``) is the average of
the quantiles above level ``p``.  Three equivalent computations are provided:

* ``superquantile_integral`` -- integrate the empirical quantile function over
  the tail ``[p, 1]`` (the fast path, uses an O(n) order statistic),
* ``superquantile_dual`` -- maximize ``q @ u`` over the capped simplex, solved
  greedily as a fractional knapsack,
* ``superquantile_variational`` -- evaluate the exact-penalty form
  ``eta + sum(max(u - eta, 0)) / (n (1 - p))`` at ``eta`` equal to the
  p-quantile.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TailSplit",
    "as_sample",
    "check_tail",
    "tail_cap",
    "quantile",
    "tail_split",
    "superquantile",
    "superquantile_integral",
    "superquantile_dual",
    "superquantile_variational",
]


def as_sample(values) -> np.ndarray:
    """Validate and convert ``values`` to a 1-d float array of finite losses."""
    u = np.atleast_1d(np.asarray(values, dtype=float))
    if u.ndim != 1:
        raise ValueError(f"sample must be one-dimensional, got shape {u.shape}")
    if u.size == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(u)):
        raise ValueError("sample values must be finite")
    return u


def check_tail(p: float) -> float:
    """Validate a tail probability; p = 1 is rejected (the cap is undefined)."""
    p = float(p)
    if not 0.0 <= p < 1.0:
        raise ValueError(f"tail probability p must be in [0, 1), got {p}")
    return p


def tail_cap(n: int, p: float) -> float:
    """Per-coordinate bound 1/(n(1-p)) of the capped simplex."""
    return 1.0 / (n * (1.0 - p))


def quantile(values, p: float) -> float:
    """Smallest sample value whose empirical CDF weight reaches ``p``.

    Left-continuous inverse of the empirical CDF, i.e. the k-th order
    statistic with ``k = ceil(n p)`` (at least 1).  Selected by
    quickselect-style partitioning, not a full sort.
    """
    u = as_sample(values)
    p = check_tail(p)
    n = u.size
    k = max(math.ceil(n * p), 1)
    # fix the off-by-one that floating-point rounding of n*p can introduce,
    # so that (k-1)/n < p <= k/n holds in float arithmetic
    while k > 1 and (k - 1) / n >= p:
        k -= 1
    while k < n and k / n < p:
        k += 1
    return float(np.partition(u, k - 1)[k - 1])


@dataclass(frozen=True)
class TailSplit:
    """Partition of a sample around its p-quantile.

    ``above``/``equal`` index the values strictly above / tied with the
    quantile.  ``cdf_gap`` is the probability mass between ``p`` and the CDF
    evaluated at the quantile; it weights the tied values in the tail average
    and is zero whenever ``p`` falls exactly on a CDF step.
    """

    quantile: float
    above: np.ndarray
    equal: np.ndarray
    cdf_gap: float


def tail_split(values, p: float) -> TailSplit:
    """Split a sample at its p-quantile (ties compared exactly, bit-wise)."""
    u = as_sample(values)
    p = check_tail(p)
    n = u.size
    q = quantile(u, p)
    above = np.flatnonzero(u > q)
    equal = np.flatnonzero(u == q)
    gap = (n - above.size) / n - p
    return TailSplit(quantile=q, above=above, equal=equal, cdf_gap=gap)


def superquantile_integral(values, p: float) -> float:
    """Integral-form superquantile: average of the quantiles above level p."""
    u = as_sample(values)
    p = check_tail(p)
    n = u.size
    split = tail_split(u, p)
    tail_sum = float(u[split.above].sum()) / (n * (1.0 - p))
    return float(tail_sum + split.cdf_gap / (1.0 - p) * split.quantile)


superquantile = superquantile_integral


def superquantile_dual(values, p: float) -> tuple[float, np.ndarray]:
    """Dual-form superquantile: max of ``q @ u`` over the capped simplex.

    The maximizer is built by the fractional-knapsack greedy rule: walk the
    values in descending order (ties broken by ascending original index),
    hand each one the cap until less than a cap of probability budget is
    left, hand the remainder to the next value, zeros afterwards.

    Returns ``(value, q)`` with ``value == q @ u`` in the same arithmetic.
    """
    u = as_sample(values)
    p = check_tail(p)
    n = u.size
    cap = tail_cap(n, p)
    order = np.argsort(-u, kind="stable")
    budget_left = 1.0 - np.arange(n) * cap
    q = np.empty(n)
    q[order] = np.clip(budget_left, 0.0, cap)
    return float(q @ u), q


def superquantile_variational(values, p: float) -> tuple[float, float]:
    """Exact-penalty superquantile; the minimizing shift is the p-quantile.

    Returns ``(value, eta)`` where ``eta`` is the left end-point of the set
    of minimizers of ``eta + sum(max(u - eta, 0)) / (n (1 - p))``.
    """
    u = as_sample(values)
    p = check_tail(p)
    n = u.size
    eta = quantile(u, p)
    value = eta + float(np.maximum(u - eta, 0.0).sum()) / (n * (1.0 - p))
    return float(value), eta
