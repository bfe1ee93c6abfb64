"""Deterministic limited-memory BFGS minimizer for smooth convex objectives.

Small, dependency-free driver used by the linear classifiers: two-loop
recursion with Armijo backtracking, curvature-pair skipping for stability,
and a relative gradient-infinity-norm stopping rule.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class OptimResult:
    x: np.ndarray
    value: float
    grad_inf_norm: float
    iterations: int
    converged: bool


def minimize_lbfgs(
    fun: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    max_iterations: int = 1000,
    tol: float = 1e-6,
    memory: int = 10,
) -> OptimResult:
    """Minimize ``fun`` (returning (value, gradient)) from ``x0``.

    Stops when ||grad||_inf <= tol * max(1, ||grad(x0)||_inf) or after
    ``max_iterations`` iterations, whichever comes first.
    """
    x = np.array(x0, dtype=np.float64)
    f, g = fun(x)
    g0_inf = float(np.max(np.abs(g))) if g.size else 0.0
    threshold = tol * max(1.0, g0_inf)

    s_hist: deque[np.ndarray] = deque(maxlen=memory)
    y_hist: deque[np.ndarray] = deque(maxlen=memory)
    rho_hist: deque[float] = deque(maxlen=memory)

    iterations = 0
    while iterations < max_iterations:
        g_inf = float(np.max(np.abs(g))) if g.size else 0.0
        if g_inf <= threshold:
            return OptimResult(x, f, g_inf, iterations, True)

        d = _two_loop_direction(g, s_hist, y_hist, rho_hist)
        gd = float(g @ d)
        if gd >= 0.0:  # stale curvature made d non-descent; restart
            s_hist.clear(), y_hist.clear(), rho_hist.clear()
            d = -g
            gd = float(g @ d)

        step = 1.0
        f_new, g_new, x_new = None, None, None
        for _ in range(60):
            x_try = x + step * d
            f_try, g_try = fun(x_try)
            if np.isfinite(f_try) and f_try <= f + 1e-4 * step * gd:
                f_new, g_new, x_new = f_try, g_try, x_try
                break
            step *= 0.5
        if f_new is None:  # line search failed: numerically at a minimum
            return OptimResult(x, f, g_inf, iterations, g_inf <= threshold)

        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-10 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            s_hist.append(s)
            y_hist.append(y)
            rho_hist.append(1.0 / sy)

        x, f, g = x_new, f_new, g_new
        iterations += 1

    g_inf = float(np.max(np.abs(g))) if g.size else 0.0
    return OptimResult(x, f, g_inf, iterations, g_inf <= threshold)


def _two_loop_direction(g, s_hist, y_hist, rho_hist) -> np.ndarray:
    q = -g.copy()
    if not s_hist:
        return q
    alphas = []
    for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    y_last = y_hist[-1]
    gamma = float(s_hist[-1] @ y_last) / float(y_last @ y_last)
    q *= gamma
    for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return q
