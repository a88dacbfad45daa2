"""Integral-form Whittle objective built from sample autocovariances.

    s_n^W(theta) = c_n(0) xi_0(theta) + 2 sum_{j=1}^{n-1} c_n(j) xi_j(theta),
    c_n(j) = (1/n) sum_{t=1}^{n-j} x_t x_{t+j},
    xi_j(theta) = sum_{k>=0} alpha_k(theta) alpha_{k+j}(theta).

xi_j is the lag-j autocovariance of the "dual" process (1 - B)^delta phi(B) /
psi(B) eps with unit innovation variance. The workspace evaluates it exactly
from that representation by default; ``xi_coefficients`` keeps the truncated
direct sum with an explicit tail bound, and the two are checked against each
other in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from .css import Bounds, EstimationResult, _values, finish_result, fit_multistart
from .css import objective as css_objective
from .errors import ContractError, NumericalError
from .model import (ModelOrder, ParamVector, _require_valid, _roots_ok, ar_coefficients,
                    farima_acvf)

DIRECT_LIMIT = 4096
FD_STEP = 1e-6


def sample_autocovariances(x, method: str = "auto") -> np.ndarray:
    """Biased, non-mean-corrected c_n(0..n-1)."""
    x = _values(x)
    n = x.size
    if n < 1:
        raise ContractError("empty series")
    if method == "auto":
        method = "direct" if n <= DIRECT_LIMIT else "fft"
    if method == "direct":
        return np.correlate(x, x, mode="full")[n - 1:] / n
    if method == "fft":
        size = sp_fft.next_fast_len(2 * n)
        fx = np.fft.rfft(x, size)
        return np.fft.irfft(fx * np.conj(fx), size)[:n] / n
    raise ContractError(f"unknown method {method!r}")


def xi_exact(theta: ParamVector, maxlag: int) -> np.ndarray:
    """xi_0..xi_maxlag from the dual-process autocovariances (no truncation)."""
    _require_valid(theta)
    return farima_acvf(-theta.delta, theta.ar_poly, theta.ma_poly, maxlag)


def _tail_sq_estimate(alpha: np.ndarray) -> float:
    """Estimate sum_{k>J} alpha_k^2 by extrapolating the power-law decay of |alpha|."""
    J = alpha.size - 1
    a_end = abs(alpha[J])
    a_mid = abs(alpha[J // 2])
    if a_end == 0.0:
        return 0.0
    if a_mid <= a_end:
        return np.inf
    rate = np.log(a_mid / a_end) / np.log(J / (J // 2))
    if rate <= 0.5:
        return np.inf
    return a_end ** 2 * J / (2.0 * rate - 1.0)


def xi_coefficients(theta: ParamVector, maxlag: int, truncation: int | None = None,
                    tail_tol: float = 1e-8, max_truncation: int = 1 << 23) -> np.ndarray:
    """Truncated sums xi_j = sum_{k=0}^{J} alpha_k alpha_{k+j}, j = 0..maxlag.

    J starts at ``truncation`` (default 10 * max(maxlag, 1)) and doubles until
    the estimated omitted tail, bounded by sum_{k>J} alpha_k^2 via
    Cauchy-Schwarz, falls below ``tail_tol * xi_0``.
    """
    _require_valid(theta)
    J = int(truncation or 10 * max(maxlag, 1))
    while True:
        alpha = ar_coefficients(theta, J + maxlag)
        head = alpha[: J + 1]
        size = sp_fft.next_fast_len(J + 1 + 2 * maxlag + 1)
        fa = np.fft.rfft(alpha, size)
        fh = np.fft.rfft(head, size)
        xi = np.fft.irfft(np.conj(fh) * fa, size)[: maxlag + 1]
        tail = _tail_sq_estimate(head)
        if tail < tail_tol * xi[0]:
            return xi
        if 2 * J > max_truncation:
            raise NumericalError(
                f"xi tail {tail:.3g} above tolerance {tail_tol * xi[0]:.3g} at J={J}")
        J *= 2


@dataclass(frozen=True)
class WhittleWorkspace:
    c: np.ndarray
    xi_truncation: int = 0
    xi_tail_tol: float = 1e-8
    method: str = "exact"

    @property
    def n(self) -> int:
        return self.c.size


def build_workspace(x, method: str = "exact", xi_truncation: int | None = None,
                    xi_tail_tol: float = 1e-8) -> WhittleWorkspace:
    if method not in ("exact", "truncated"):
        raise ContractError(f"unknown xi method {method!r}")
    c = sample_autocovariances(x)
    return WhittleWorkspace(c, int(xi_truncation or 10 * c.size), xi_tail_tol, method)


def xi_for(theta: ParamVector, ws: WhittleWorkspace) -> np.ndarray:
    if ws.method == "exact":
        return xi_exact(theta, ws.n - 1)
    return xi_coefficients(theta, ws.n - 1, ws.xi_truncation, ws.xi_tail_tol)


def whittle_objective(theta: ParamVector, ws: WhittleWorkspace) -> float:
    xi = xi_for(theta, ws)
    return float(ws.c[0] * xi[0] + 2.0 * ws.c[1:] @ xi[1:])


def whittle_estimate(x, order: ModelOrder | None = None, bounds: Bounds | None = None,
                     starts=None, mean_correct: bool = False,
                     method: str = "exact") -> EstimationResult:
    """Minimize the Whittle objective with the same multi-start BFGS as CSS.

    The gradient is a central finite difference of the objective.
    """
    x = _values(x)
    if x.size < 20:
        raise ContractError(f"need at least 20 observations, got {x.size}")
    if mean_correct:
        x = x - x.mean()
    starts = [s for s in (starts or []) if s is not None]
    if order is None:
        order = starts[0].order if starts else ModelOrder()
    ws = build_workspace(x, method)
    margin = (bounds or Bounds()).root_margin

    def value(arr):
        th = ParamVector.from_array(arr, order)
        if not (0.0 < th.delta < 0.5) or not _roots_ok(th, margin):
            return np.inf
        return whittle_objective(th, ws)

    def fg(arr):
        f0 = value(arr)
        if not np.isfinite(f0):
            return np.inf, None
        g = np.empty(arr.size)
        for i in range(arr.size):
            h = FD_STEP * max(abs(arr[i]), 0.1)
            up, dn = arr.copy(), arr.copy()
            up[i] += h
            dn[i] -= h
            fu, fd = value(up), value(dn)
            if np.isfinite(fu) and np.isfinite(fd):
                g[i] = (fu - fd) / (2 * h)
            elif np.isfinite(fu):
                g[i] = (fu - f0) / h
            else:
                g[i] = (f0 - fd) / h
        return f0, g

    best, n_starts = fit_multistart(fg, order, x.size, bounds, starts, "whittle")
    return finish_result(best, n_starts, order, x.size, "whittle")


def objective_gap(x, theta_grid) -> float:
    """max over the grid of |s_n^W(theta) - s_n(theta)|."""
    x = _values(x)
    ws = build_workspace(x)
    gap = 0.0
    for th in theta_grid:
        gap = max(gap, abs(whittle_objective(th, ws) - css_objective(th, x)))
    return gap
