"""Quasi-Newton minimizer with Armijo backtracking.

Small and deterministic on purpose: the objectives here are cheap, smooth and
return +inf outside the admissible region, which the backtracking handles by
shrinking the step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    nit: int
    status: str
    trace: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.status in ("gtol", "xtol")


def bfgs(fun_grad: Callable, x0, *, gtol: float = 1e-8, xtol: float = 1e-10,
         maxiter: int = 500, grad_norm: Callable | None = None, c1: float = 1e-4,
         max_backtrack: int = 60, max_step: float = 1.0) -> OptimizeResult:
    """Minimize ``fun_grad(x) -> (f, g)`` by BFGS on the inverse Hessian.

    Stops when ``grad_norm(x, g) < gtol`` (default: infinity norm of g), when the
    accepted step is below ``xtol`` in every coordinate, or when the line search
    cannot find a decrease (status "linesearch").
    """
    norm = grad_norm or (lambda _x, g: float(np.max(np.abs(g))))
    x = np.array(x0, dtype=float)
    f, g = fun_grad(x)
    if not np.isfinite(f):
        return OptimizeResult(x, f, np.full_like(x, np.nan), 0, "infeasible start")
    k = x.size
    H = np.eye(k)
    trace = [float(f)]
    status = "maxiter"
    nit = 0
    for nit in range(1, maxiter + 1):
        if norm(x, g) < gtol:
            status = "gtol"
            nit -= 1
            break
        d = -H @ g
        slope = float(g @ d)
        if slope >= 0:
            H = np.eye(k)
            d = -g
            slope = float(g @ d)
        t = min(1.0, max_step / max(np.max(np.abs(d)), 1e-300))
        accepted = False
        for _ in range(max_backtrack):
            x_new = x + t * d
            f_new, g_new = fun_grad(x_new)
            if np.isfinite(f_new) and f_new <= f + c1 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            status = "linesearch"
            break
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if nit == 1:
                H = np.eye(k) * (sy / float(y @ y))
            rho = 1.0 / sy
            Hy = H @ y
            H = (H - rho * (np.outer(s, Hy) + np.outer(Hy, s))
                 + (rho * rho * float(y @ Hy) + rho) * np.outer(s, s))
        x, f, g = x_new, f_new, g_new
        trace.append(float(f))
        if np.max(np.abs(s)) < xtol:
            status = "xtol"
            break
    return OptimizeResult(x, float(f), g, nit, status, trace)
