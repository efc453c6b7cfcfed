"""Smooth approximation of the superquantile by dual regularization.

The superquantile is the support function of the capped simplex
``{q : 0 <= q_i <= 1/(n(1-p)), sum(q) = 1}``.  Subtracting a strongly convex
divergence-to-uniform ``nu * D(q)`` from the dual objective turns the max into
a differentiable function of the sample whose gradient is the unique argmax.
Two divergences are supported:

* ``euclidean`` -- ``D(q) = ||q - uniform||^2 / 2``,
* ``kl``        -- ``D(q) = sum(q_i log(n q_i))`` (Kullback-Leibler to uniform).

For a separable divergence the dual of the regularized problem is a smooth
convex function of a single scalar shift, minimized here either in closed
form (after bracketing the root of its derivative between two of at most
``2n`` precomputed breakpoints) or by a bisection fallback.

The module also hosts the equivalence toolkit between this smoothing and the
classical smoothing of the positive part: ``smoothed_positive_part`` (one
scalar term of the variational form), ``conv_smoothed_positive_part``
(convolution of ``max(. , 0)`` with a mollifier density), and the two
conversion maps between densities and divergences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import expit, logsumexp, ndtr, ndtri, xlogy

from .core import as_sample, check_tail, tail_cap

__all__ = [
    "EUCLIDEAN",
    "KL",
    "SmoothingSpec",
    "DualSolution",
    "scalar_conjugate",
    "scalar_conjugate_grad",
    "dual_breakpoints",
    "dual_objective",
    "dual_derivative",
    "solve_dual_1d",
    "bisect_dual",
    "smoothed_superquantile",
    "divergence",
    "divergence_max",
    "smoothed_positive_part",
    "DensitySpec",
    "conv_smoothed_positive_part",
    "conv_smoothed_positive_part_quadrature",
    "divergence_from_density",
    "density_from_smoothing",
    "SmoothingDensity",
]

EUCLIDEAN = "euclidean"
KL = "kl"

_BISECT_TOL = 1e-12
_BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class SmoothingSpec:
    """Divergence kind plus smoothing strength ``nu`` (in loss units)."""

    kind: str
    nu: float

    def __post_init__(self):
        if self.kind not in (EUCLIDEAN, KL):
            raise ValueError(f"unknown smoothing kind {self.kind!r}, expected 'euclidean' or 'kl'")
        if not (math.isfinite(self.nu) and self.nu > 0.0):
            raise ValueError(f"smoothing parameter nu must be positive, got {self.nu}")


@dataclass(frozen=True)
class DualSolution:
    """Scalar dual minimizer, the optimal weights, and the smoothed value.

    ``weights[i]`` equals the conjugate derivative evaluated at
    ``u_i - threshold`` and is the unique maximizer of the regularized dual;
    ``value`` is the smoothed superquantile.
    """

    threshold: float
    weights: np.ndarray
    value: float


def _conjugate_raw(s: np.ndarray, kind: str, nu: float, n: int, p: float, cap: float) -> np.ndarray:
    if kind == EUCLIDEAN:
        t = np.clip(s / nu + 1.0 / n, 0.0, cap)
        return s * t - 0.5 * nu * (t - 1.0 / n) ** 2
    # KL: on the unsaturated branch the maximum value collapses to nu * t
    hi = nu * (1.0 - math.log1p(-p))
    t = np.exp(np.minimum(s, hi) / nu - 1.0) / n
    return np.where(s >= hi, cap * (s + nu * math.log1p(-p)), nu * t)


def _conjugate_grad_raw(s: np.ndarray, kind: str, nu: float, n: int, p: float, cap: float) -> np.ndarray:
    if kind == EUCLIDEAN:
        return np.clip(s / nu + 1.0 / n, 0.0, cap)
    hi = nu * (1.0 - math.log1p(-p))
    t = np.exp(np.minimum(s, hi) / nu - 1.0) / n
    return np.where(s >= hi, cap, np.minimum(t, cap))


def scalar_conjugate(s, spec: SmoothingSpec, n: int, p: float):
    """One coordinate's share of the smoothed dual objective.

    ``max_{0 <= t <= cap} (s t - nu d(t))`` with ``cap = 1/(n(1-p))``.  For
    very negative ``s`` the maximizer is ``t = 0`` and the value flattens at
    ``-nu d(0)`` (zero for ``kl``, ``-nu / (2 n^2)`` for ``euclidean``).
    """
    p = check_tail(p)
    s_arr = np.asarray(s, dtype=float)
    out = _conjugate_raw(s_arr, spec.kind, spec.nu, n, p, tail_cap(n, p))
    return out if s_arr.ndim else float(out)


def scalar_conjugate_grad(s, spec: SmoothingSpec, n: int, p: float):
    """Derivative of :func:`scalar_conjugate`: the optimal weight in [0, cap].

    Three branches: 0 below the lower threshold (``euclidean`` only, the KL
    branch is never exactly zero), ``cap`` above the saturation threshold,
    and the inverse divergence gradient in between.
    """
    p = check_tail(p)
    s_arr = np.asarray(s, dtype=float)
    out = _conjugate_grad_raw(s_arr, spec.kind, spec.nu, n, p, tail_cap(n, p))
    return out if s_arr.ndim else float(out)


def dual_breakpoints(values, spec: SmoothingSpec, p: float) -> np.ndarray:
    """Sorted shifts at which some weight enters or leaves its bound.

    Between two consecutive breakpoints the active branch of every weight is
    fixed, so the dual derivative is linear (``euclidean``) or has a closed
    log-sum-exp root (``kl``).  At most ``2n`` points; ``n`` for ``kl`` whose
    lower threshold sits at minus infinity.
    """
    u = as_sample(values)
    p = check_tail(p)
    nu = spec.nu
    n = u.size
    if spec.kind == EUCLIDEAN:
        pts = np.concatenate([u + nu / n, u - (nu / n) * (p / (1.0 - p))])
    else:
        pts = u + nu * (math.log1p(-p) - 1.0)
    return np.unique(pts)


def dual_objective(eta: float, values, spec: SmoothingSpec, p: float) -> float:
    """Dual function ``eta + sum_i scalar_conjugate(u_i - eta)``; convex in eta."""
    u = as_sample(values)
    p = check_tail(p)
    return float(eta + _conjugate_raw(u - eta, spec.kind, spec.nu, u.size, p, tail_cap(u.size, p)).sum())


def dual_derivative(eta: float, values, spec: SmoothingSpec, p: float) -> float:
    """Derivative of the dual function: ``1 - sum_i scalar_conjugate_grad(u_i - eta)``.

    Non-decreasing in ``eta``; tends to 1 at +inf and to ``-p/(1-p)`` at -inf.
    """
    u = as_sample(values)
    p = check_tail(p)
    return float(1.0 - _conjugate_grad_raw(u - eta, spec.kind, spec.nu, u.size, p, tail_cap(u.size, p)).sum())


def _slope(eta: float, u: np.ndarray, kind: str, nu: float, n: int, p: float, cap: float) -> float:
    return float(1.0 - _conjugate_grad_raw(u - eta, kind, nu, n, p, cap).sum())


def _slope_eps(p: float) -> float:
    """Absolute noise floor for the dual derivative.

    The derivative is one minus a sum of n terms bounded by the cap, so its
    rounding noise scales with ``n * cap = 1/(1-p)``.  At ``p = 0`` the exact
    asymptote is 0 and must be recognized through this floor.
    """
    return max(1e-12, 16.0 * np.finfo(float).eps / (1.0 - p))


def _kl_closed_form(u: np.ndarray, nu: float, n: int, p: float, cap: float,
                    saturated: np.ndarray) -> float | None:
    """Root of the KL dual derivative given the set of cap-saturated indices."""
    unsat = u[~saturated]
    free_mass = 1.0 - float(saturated.sum()) * cap
    if unsat.size == 0 or free_mass <= 0.0:
        return None
    return nu * (float(logsumexp(unsat / nu)) - 1.0 - math.log(n * free_mass))


def _bisect(u: np.ndarray, kind: str, nu: float, n: int, p: float, cap: float,
            lo: float, hi: float, tol: float = _BISECT_TOL,
            max_iter: int = _BISECT_MAX_ITER) -> float:
    """Bisection on the dual derivative, assuming slope(lo) <= 0 <= slope(hi)."""
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        s = _slope(mid, u, kind, nu, n, p, cap)
        if abs(s) <= tol or hi - lo <= 1e-15 * (1.0 + abs(lo) + abs(hi)):
            break
        if s < 0.0:
            lo = mid
        else:
            hi = mid
    return mid


def _bisect_extended(u: np.ndarray, kind: str, nu: float, n: int, p: float, cap: float,
                     lo: float, hi: float) -> float:
    """Grow the bracket exponentially until the slope changes sign, then bisect."""
    eps = _slope_eps(p)
    if _slope(lo, u, kind, nu, n, p, cap) > eps:
        span = max(hi - lo, nu, 1.0)
        for _ in range(60):
            lo -= span
            span *= 2.0
            if _slope(lo, u, kind, nu, n, p, cap) <= eps:
                break
    if _slope(hi, u, kind, nu, n, p, cap) < -eps:
        span = max(hi - lo, nu, 1.0)
        for _ in range(60):
            hi += span
            span *= 2.0
            if _slope(hi, u, kind, nu, n, p, cap) >= -eps:
                break
    return _bisect(u, kind, nu, n, p, cap, lo, hi)


def _curvature(eta: float, u: np.ndarray, kind: str, nu: float, n: int, p: float,
               cap: float) -> float:
    """Second derivative of the dual function (sum of the interior curvatures)."""
    s = u - eta
    if kind == EUCLIDEAN:
        t = s / nu + 1.0 / n
        return float(((t > 0.0) & (t < cap)).sum()) / nu
    hi = nu * (1.0 - math.log1p(-p))
    t = np.exp(np.minimum(s, hi) / nu - 1.0) / n
    return float(np.where(s >= hi, 0.0, t).sum()) / nu


def _solution_at(eta: float, u: np.ndarray, kind: str, nu: float, n: int, p: float,
                 cap: float) -> DualSolution:
    # Newton polish: closed-form roots carry rounding amplified by 1/nu,
    # and the weights must sum to one to high accuracy
    for _ in range(3):
        s = _slope(eta, u, kind, nu, n, p, cap)
        if abs(s) <= 1e-14:
            break
        c = _curvature(eta, u, kind, nu, n, p, cap)
        if not c > 0.0:
            break
        eta = eta - s / c
    weights = _conjugate_grad_raw(u - eta, kind, nu, n, p, cap)
    # the quantization of eta floors the achievable |sum - 1| at
    # curvature * ulp(eta); spread that residual over the interior
    # coordinates, which is how an infinitesimal eta shift would act
    resid = float(weights.sum()) - 1.0
    if resid != 0.0 and abs(resid) < 1e-8:
        interior = (weights > 0.0) & (weights < cap)
        k = int(interior.sum())
        if k:
            adjusted = weights[interior] - resid / k
            if adjusted.min() >= 0.0 and adjusted.max() <= cap:
                weights = weights.copy()
                weights[interior] = adjusted
    value = float(eta + _conjugate_raw(u - eta, kind, nu, n, p, cap).sum())
    return DualSolution(threshold=float(eta), weights=weights, value=value)


def solve_dual_1d(values, spec: SmoothingSpec, p: float) -> DualSolution:
    """Minimize the scalar dual of the smoothed superquantile.

    Strategy: locate the sign change of the dual derivative between two
    consecutive breakpoints, then finish in closed form (linear interpolation
    for ``euclidean`` whose derivative is piecewise linear, a log-sum-exp
    root for ``kl``).  If the derivative vanishes exactly at a breakpoint
    that breakpoint is returned.  Bisection covers any remaining case.
    """
    u = as_sample(values)
    p = check_tail(p)
    kind, nu = spec.kind, spec.nu
    n = u.size
    cap = tail_cap(n, p)
    bps = dual_breakpoints(u, spec, p)
    eps = _slope_eps(p)

    s_first = _slope(float(bps[0]), u, kind, nu, n, p, cap)
    s_last = _slope(float(bps[-1]), u, kind, nu, n, p, cap)

    if s_first > eps:
        # defensive: cannot happen for the two built-in kinds
        eta = _bisect_extended(u, kind, nu, n, p, cap, float(bps[0]) - 1.0, float(bps[0]))
    elif abs(s_last) <= eps:
        eta = float(bps[-1])
    elif s_last < 0.0:
        # the root lies beyond the last breakpoint; for KL nothing is
        # saturated out there and the closed form applies directly
        eta = None
        if kind == KL:
            eta = _kl_closed_form(u, nu, n, p, cap, np.zeros(n, dtype=bool))
        if eta is None:
            eta = _bisect_extended(u, kind, nu, n, p, cap, float(bps[-1]), float(bps[-1]) + 1.0)
    else:
        lo, hi = 0, len(bps) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _slope(float(bps[mid]), u, kind, nu, n, p, cap) <= eps:
                lo = mid
            else:
                hi = mid
        eta_lo, eta_hi = float(bps[lo]), float(bps[hi])
        s_lo = _slope(eta_lo, u, kind, nu, n, p, cap)
        if abs(s_lo) <= eps:
            eta = eta_lo
        elif kind == EUCLIDEAN:
            s_hi = _slope(eta_hi, u, kind, nu, n, p, cap)
            eta = eta_lo - s_lo * (eta_hi - eta_lo) / (s_hi - s_lo)
        else:
            per_point = u + nu * (math.log1p(-p) - 1.0)
            eta = _kl_closed_form(u, nu, n, p, cap, per_point > eta_lo)
            if eta is None:
                eta = _bisect(u, kind, nu, n, p, cap, eta_lo, eta_hi)
            else:
                eta = min(max(eta, eta_lo), eta_hi)
    return _solution_at(float(eta), u, kind, nu, n, p, cap)


def bisect_dual(values, spec: SmoothingSpec, p: float, tol: float = _BISECT_TOL,
                max_iter: int = _BISECT_MAX_ITER) -> DualSolution:
    """Solve the scalar dual by bisection only (reference path, no breakpoints)."""
    u = as_sample(values)
    p = check_tail(p)
    kind, nu = spec.kind, spec.nu
    n = u.size
    cap = tail_cap(n, p)
    lo = float(u.min()) - nu - 1.0
    hi = float(u.max()) + nu + 1.0
    eps = _slope_eps(p)
    if _slope(lo, u, kind, nu, n, p, cap) > eps:
        span = hi - lo
        for _ in range(60):
            lo -= span
            span *= 2.0
            if _slope(lo, u, kind, nu, n, p, cap) <= eps:
                break
    if _slope(hi, u, kind, nu, n, p, cap) < -eps:
        span = hi - lo
        for _ in range(60):
            hi += span
            span *= 2.0
            if _slope(hi, u, kind, nu, n, p, cap) >= -eps:
                break
    eta = _bisect(u, kind, nu, n, p, cap, lo, hi, tol=tol, max_iter=max_iter)
    return _solution_at(eta, u, kind, nu, n, p, cap)


def smoothed_superquantile(values, spec: SmoothingSpec, p: float) -> tuple[float, np.ndarray]:
    """Smoothed superquantile value and the maximizing weights.

    The weights are the unique maximizer of ``q @ u - nu D(q)`` over the
    capped simplex: they sum to one, respect the cap, and converge to the
    exact tail weights as ``nu -> 0`` and to the uniform distribution as
    ``nu -> inf``.
    """
    sol = solve_dual_1d(values, spec, p)
    return sol.value, sol.weights


def divergence(q, spec: SmoothingSpec, n: int) -> float:
    """Divergence D of a weight vector from the uniform distribution."""
    q_arr = np.asarray(q, dtype=float)
    if spec.kind == EUCLIDEAN:
        return float(0.5 * ((q_arr - 1.0 / n) ** 2).sum())
    return float(xlogy(q_arr, q_arr * n).sum())


def divergence_max(spec: SmoothingSpec, n: int, p: float) -> float:
    """Largest divergence over the capped simplex.

    Both divergences are symmetric and convex, so the maximum sits at the
    most concentrated vertex: greedily stack the cap on as few coordinates
    as possible and put the remainder on one more.
    """
    p = check_tail(p)
    cap = tail_cap(n, p)
    m = min(int(math.floor(1.0 / cap + 1e-12)), n)
    q = np.zeros(n)
    q[:m] = cap
    rem = 1.0 - m * cap
    if rem > 1e-12 and m < n:
        q[m] = rem
    return divergence(q, spec, n)


def smoothed_positive_part(x, spec: SmoothingSpec, n: int, p: float):
    """Smooth surrogate of ``max(x, 0)`` induced by the divergence.

    ``max_{0 <= t <= 1} (x t - nu * dt(t))`` where ``dt`` rescales the scalar
    divergence from ``[0, cap]`` to ``[0, 1]``.  Equals ``n (1-p)`` times
    :func:`scalar_conjugate`; evaluating the shifted sum of these terms and
    minimizing over the shift reproduces :func:`smoothed_superquantile`.
    """
    p = check_tail(p)
    nu = spec.nu
    c = n * (1.0 - p)
    x_arr = np.asarray(x, dtype=float)
    if spec.kind == EUCLIDEAN:
        t = np.clip((1.0 - p) + x_arr * c / nu, 0.0, 1.0)
        out = x_arr * t - nu * (t - (1.0 - p)) ** 2 / (2.0 * c)
    else:
        hi = nu * (1.0 - math.log1p(-p))
        t = np.minimum((1.0 - p) * np.exp(np.minimum(x_arr, hi) / nu - 1.0), 1.0)
        out = np.where(x_arr >= hi, x_arr + nu * math.log1p(-p), nu * t)
    return out if x_arr.ndim else float(out)


@dataclass(frozen=True)
class DensitySpec:
    """Mollifier density for convolution smoothing of the positive part.

    ``kind`` is one of ``"logistic"``, ``"uniform"`` (support ``[a, b]``) or
    ``"gaussian"`` (standard normal).
    """

    kind: str
    a: float = -1.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in ("logistic", "uniform", "gaussian"):
            raise ValueError(f"unknown density kind {self.kind!r}")
        if self.kind == "uniform" and not self.b > self.a:
            raise ValueError("uniform density needs a < b")

    def pdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        if self.kind == "logistic":
            e = np.exp(-np.abs(x_arr))
            out = e / (1.0 + e) ** 2
        elif self.kind == "gaussian":
            out = np.exp(-0.5 * x_arr**2) / math.sqrt(2.0 * math.pi)
        else:
            out = np.where((x_arr >= self.a) & (x_arr <= self.b), 1.0 / (self.b - self.a), 0.0)
        return out if x_arr.ndim else float(out)

    def cdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        if self.kind == "logistic":
            out = expit(x_arr)
        elif self.kind == "gaussian":
            out = ndtr(x_arr)
        else:
            out = np.clip((x_arr - self.a) / (self.b - self.a), 0.0, 1.0)
        return out if x_arr.ndim else float(out)

    def quantile_fn(self, t):
        t_arr = np.asarray(t, dtype=float)
        if self.kind == "logistic":
            out = np.log(t_arr) - np.log1p(-t_arr)
        elif self.kind == "gaussian":
            out = ndtri(t_arr)
        else:
            out = self.a + t_arr * (self.b - self.a)
        return out if t_arr.ndim else float(out)

    @property
    def mean(self) -> float:
        return 0.5 * (self.a + self.b) if self.kind == "uniform" else 0.0

    @property
    def scale(self) -> float:
        """Width used for truncating quadrature tails."""
        return self.b - self.a if self.kind == "uniform" else 1.0


def conv_smoothed_positive_part(x, density: DensitySpec, nu: float):
    """Convolution of ``max(. , 0)`` with the rescaled density (closed forms).

    Convex, smooth, and converges pointwise to ``max(x, 0)`` as ``nu -> 0``.
    The logistic density gives ``nu * softplus(x / nu)``.
    """
    if not nu > 0.0:
        raise ValueError("nu must be positive")
    x_arr = np.asarray(x, dtype=float)
    z = x_arr / nu
    if density.kind == "logistic":
        out = nu * np.logaddexp(0.0, z)
    elif density.kind == "gaussian":
        out = nu * (z * ndtr(z) + np.exp(-0.5 * z**2) / math.sqrt(2.0 * math.pi))
    else:
        a, b = density.a, density.b
        ramp = (np.clip(z, a, b) - a) ** 2 / (2.0 * (b - a))
        out = nu * np.where(z >= b, z - density.mean, ramp)
    return out if x_arr.ndim else float(out)


def conv_smoothed_positive_part_quadrature(x: float, density: DensitySpec, nu: float,
                                           tol: float = 1e-10) -> float:
    """Quadrature evaluation of the convolution smoothing (test oracle path)."""
    if not nu > 0.0:
        raise ValueError("nu must be positive")
    hi = x
    if density.kind == "uniform":
        # integrate over the exact support so quad never sees the jumps
        lo = density.a * nu
        hi = min(x, density.b * nu)
    else:
        lo = -40.0 * nu * density.scale
    if hi <= lo:
        return 0.0
    val, _ = quad(lambda s: (x - s) * density.pdf(s / nu) / nu, lo, hi,
                  epsabs=tol, limit=200)
    return float(val)


def divergence_from_density(density: DensitySpec):
    """Divergence on [0, 1] whose dual smoothing matches the convolution one.

    Returns ``dbar`` such that ``max_t (x t - dbar(t))`` over ``t in [0, 1]``
    reproduces the unit-strength convolution smoothing.  For the logistic
    density ``dbar`` is the negative binary entropy.  Endpoints are the
    limits: 0 at ``t = 0`` and the density mean at ``t = 1``.
    """

    def dbar(t):
        t_arr = np.asarray(t, dtype=float)
        if np.any((t_arr < 0.0) | (t_arr > 1.0)):
            raise ValueError("dbar is defined on [0, 1]")
        out = np.full(t_arr.shape, 0.0)
        interior = (t_arr > 0.0) & (t_arr < 1.0)
        if np.any(interior):
            qt = density.quantile_fn(t_arr[interior])
            out_interior = t_arr[interior] * qt - conv_smoothed_positive_part(qt, density, 1.0)
            out[interior] = out_interior
        out = np.where(t_arr == 1.0, density.mean, out)
        return out if t_arr.ndim else float(out)

    return dbar


@dataclass(frozen=True)
class SmoothingDensity:
    """Uniform density recovered as the curvature of the euclidean smoothing.

    ``tail_value`` is the limit of the smoothed positive part at minus
    infinity; adding it to the convolution of ``max(. , 0)`` with this
    density reproduces the smoothing exactly.
    ``max_reconstruction_error`` stores the verification residual computed by
    quadrature on a grid straddling the support.
    """

    height: float
    support: tuple[float, float]
    tail_value: float
    max_reconstruction_error: float

    def pdf(self, s):
        s_arr = np.asarray(s, dtype=float)
        lo, hi = self.support
        out = np.where((s_arr >= lo) & (s_arr <= hi), self.height, 0.0)
        return out if s_arr.ndim else float(out)


def density_from_smoothing(spec: SmoothingSpec, n: int, p: float,
                           grid_size: int = 41) -> SmoothingDensity:
    """Recover the mollifier density hidden in the euclidean smoothing.

    The euclidean smoothed positive part is piecewise quadratic, so its
    second derivative is a uniform density on the interval between the two
    slope changes.  The returned object carries the quadrature verification
    that convolving ``max(. , 0)`` with this density (plus the tail constant)
    rebuilds the smoothing.  The KL kind has unbounded curvature support and
    is rejected.
    """
    if spec.kind != EUCLIDEAN:
        raise ValueError("density reconstruction is implemented for the 'euclidean' kind only")
    p = check_tail(p)
    nu = spec.nu
    c = n * (1.0 - p)
    lo = -nu / n
    hi = nu * p / (n * (1.0 - p))
    height = c / nu
    tail_value = -nu * (1.0 - p) / (2.0 * n)

    width = max(hi - lo, nu)
    etas = np.linspace(lo - width, hi + width, grid_size)
    worst = 0.0
    for eta in etas:
        if eta <= lo:
            integral = 0.0
        else:
            integral, _ = quad(lambda s: (eta - s) * height, lo, min(eta, hi), epsabs=1e-10)
        rebuilt = tail_value + integral
        exact = smoothed_positive_part(eta, spec, n, p)
        worst = max(worst, abs(rebuilt - exact))
    return SmoothingDensity(height=height, support=(lo, hi), tail_value=tail_value,
                            max_reconstruction_error=worst)
