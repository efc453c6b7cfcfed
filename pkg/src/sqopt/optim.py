"""Limited-memory BFGS with a strong-Wolfe line search.

Smoothed tail-risk objectives are convex but nearly nonsmooth for small
smoothing strength; the strong Wolfe conditions keep the curvature pairs
usable in that regime, and a failed line search is reported as a result
status rather than raised (it is the expected failure mode when the
smoothing is too weak).  Given the same oracle, start point and
configuration, the run is deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .oracles import finite_difference_grad

__all__ = ["OptimConfig", "OptimResult", "minimize", "check_oracle"]

CONVERGED = "converged"
MAX_ITER = "max_iter"
LINE_SEARCH_FAILURE = "line_search_failure"


@dataclass(frozen=True)
class OptimConfig:
    memory: int = 10
    max_iter: int = 500
    grad_tol: float = 1e-6
    c1: float = 1e-4
    c2: float = 0.9
    initial_step: float = 1.0
    max_line_search: int = 60

    def __post_init__(self):
        if not 0.0 < self.c1 < self.c2 < 1.0:
            raise ValueError("line search constants must satisfy 0 < c1 < c2 < 1")
        if self.memory < 1:
            raise ValueError("memory must be >= 1")


@dataclass(frozen=True)
class OptimResult:
    w_star: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    status: str
    message: str = ""


def _finite(f: float, g: np.ndarray) -> bool:
    return np.isfinite(f) and bool(np.all(np.isfinite(g)))


def _zoom(oracle, w, d, f0, dphi0, a_lo, f_lo, a_hi, cfg):
    """Shrink [a_lo, a_hi] (endpoints need not be ordered) to a strong-Wolfe step."""
    for _ in range(cfg.max_line_search):
        a = 0.5 * (a_lo + a_hi)
        f, g = oracle(w + a * d)
        if not _finite(f, g):
            a_hi = a
            continue
        dphi = float(g @ d)
        if f > f0 + cfg.c1 * a * dphi0 or f >= f_lo:
            a_hi = a
        else:
            if abs(dphi) <= -cfg.c2 * dphi0:
                return a, f, g
            if dphi * (a_hi - a_lo) >= 0.0:
                a_hi = a_lo
            a_lo, f_lo = a, f
        if abs(a_hi - a_lo) <= 1e-16 * (1.0 + abs(a_lo)):
            break
    return None


def _strong_wolfe(oracle, w, d, f0, g0, cfg):
    """Line search enforcing sufficient decrease and the curvature condition."""
    dphi0 = float(g0 @ d)
    if dphi0 >= 0.0:
        return None
    a_prev, f_prev = 0.0, f0
    a = cfg.initial_step
    for i in range(cfg.max_line_search):
        f, g = oracle(w + a * d)
        if not _finite(f, g):
            # treat as an overshoot: search between the last good step and here
            return _zoom(oracle, w, d, f0, dphi0, a_prev, f_prev, a, cfg)
        dphi = float(g @ d)
        if f > f0 + cfg.c1 * a * dphi0 or (i > 0 and f >= f_prev):
            return _zoom(oracle, w, d, f0, dphi0, a_prev, f_prev, a, cfg)
        if abs(dphi) <= -cfg.c2 * dphi0:
            return a, f, g
        if dphi >= 0.0:
            return _zoom(oracle, w, d, f0, dphi0, a, f, a_prev, cfg)
        a_prev, f_prev = a, f
        a = 2.0 * a
    return None


def _two_loop(g, s_list, y_list, rho_list):
    q = g.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if s_list:
        s, y = s_list[-1], y_list[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return q


def minimize(oracle, w0, cfg: OptimConfig = OptimConfig()) -> OptimResult:
    """Minimize a smooth function given by an ``(value, gradient)`` oracle.

    Standard two-loop recursion with history ``cfg.memory``; curvature pairs
    with ``s @ y <= 1e-12 ||s|| ||y||`` are skipped.  Termination: sup-norm
    of the gradient below ``cfg.grad_tol`` (``converged``), iteration budget
    (``max_iter``), or an unusable line search (``line_search_failure``,
    including non-finite oracle output).
    """
    w = np.array(w0, dtype=float).copy()
    f, g = oracle(w)
    g = np.asarray(g, dtype=float)
    if not _finite(f, g):
        return OptimResult(w_star=w, value=float(f), grad_norm=float("nan"), iterations=0,
                           status=LINE_SEARCH_FAILURE, message="non-finite value or gradient at start")

    s_hist: deque = deque(maxlen=cfg.memory)
    y_hist: deque = deque(maxlen=cfg.memory)
    rho_hist: deque = deque(maxlen=cfg.memory)

    for it in range(cfg.max_iter):
        grad_norm = float(np.abs(g).max())
        if grad_norm <= cfg.grad_tol:
            return OptimResult(w_star=w, value=float(f), grad_norm=grad_norm,
                               iterations=it, status=CONVERGED)
        d = -_two_loop(g, list(s_hist), list(y_hist), list(rho_hist))
        if float(d @ g) >= 0.0:
            d = -g
            s_hist.clear()
            y_hist.clear()
            rho_hist.clear()
        step = _strong_wolfe(oracle, w, d, f, g, cfg)
        if step is None:
            return OptimResult(w_star=w, value=float(f), grad_norm=grad_norm,
                               iterations=it, status=LINE_SEARCH_FAILURE,
                               message="no step satisfying the strong Wolfe conditions")
        a, f_new, g_new = step
        g_new = np.asarray(g_new, dtype=float)
        s = a * d
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            s_hist.append(s)
            y_hist.append(y)
            rho_hist.append(1.0 / sy)
        w = w + s
        f, g = f_new, g_new

    return OptimResult(w_star=w, value=float(f), grad_norm=float(np.abs(g).max()),
                       iterations=cfg.max_iter, status=MAX_ITER)


def check_oracle(oracle, w, h: float = 1e-6) -> float:
    """Max deviation of the oracle gradient from central finite differences.

    Relative to ``max(1, ||g||_inf)``; useful on smooth oracles only (the
    exact tail-risk oracle is nonsmooth at ties and fails the check there by
    design).
    """
    w = np.asarray(w, dtype=float)
    _, g = oracle(w)
    g = np.asarray(g, dtype=float)
    fd = finite_difference_grad(lambda v: oracle(v)[0], w, h)
    return float(np.abs(g - fd).max() / max(1.0, float(np.abs(g).max())))
