"""Conditional-sum-of-squares estimation.

Residuals are the AR(infinity) filter truncated at the start of the sample,

    e_t(theta) = sum_{j=0}^{t-1} alpha_j(theta) x_{t-j},

and the estimate minimizes s_n(theta) = mean(e_t^2). Because the filter starts
from zero presample values, e = (phi/psi)(B) applied to the truncated
fractional difference of x, and each column of h_t = d e_t / d theta is again a
cheap filter of either the fractional difference or of e itself.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .asymptotics import information_matrix, standard_errors
from .errors import ContractError, LongMemoryError
from .model import (DELTA_BOUNDS, ROOT_MARGIN, ModelOrder, ParamVector, _frac_weights,
                    _require_valid, _roots_ok, _shift, causal_convolve, log1m_coefficients)
from .optim import bfgs

logger = logging.getLogger(__name__)

GTOL = 1e-8
XTOL = 1e-10
MAXITER = 500
FOC_TOL = 1e-6
DEFAULT_DELTA_STARTS = (0.1, 0.25, 0.4)
MIN_N = 20


def _values(x) -> np.ndarray:
    values = getattr(x, "values", x)
    return np.asarray(values, dtype=float).ravel()


@dataclass(frozen=True)
class Bounds:
    """Admissible box: delta interval and the minimal polynomial root modulus 1 + margin."""

    delta: tuple = DELTA_BOUNDS
    root_margin: float = ROOT_MARGIN


@dataclass
class EstimationResult:
    theta_hat: ParamVector
    sigma2_hat: float
    objective: float
    gradient_norm: float
    omega_hat: np.ndarray
    std_errors: np.ndarray
    ci95: np.ndarray
    iterations: int
    converged: bool
    starts: int
    estimator: str = "css"
    n: int = 0
    hessian: np.ndarray | None = None
    hessian_pd: bool | None = None
    status: str = ""
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        th = self.theta_hat
        return {
            "estimator": self.estimator,
            "n": self.n,
            "theta_hat": {"delta": th.delta, "ar": list(th.ar), "ma": list(th.ma)},
            "parameter_names": th.names(),
            "sigma2_hat": self.sigma2_hat,
            "objective": self.objective,
            "gradient_norm": self.gradient_norm,
            "omega_hat": np.asarray(self.omega_hat).tolist(),
            "std_errors": np.asarray(self.std_errors).tolist(),
            "ci95": np.asarray(self.ci95).tolist(),
            "iterations": self.iterations,
            "converged": self.converged,
            "starts": self.starts,
            "hessian_pd": self.hessian_pd,
            "status": self.status,
        }


# --------------------------------------------------------------------------
# residual filter and derivatives


def _filter(theta: ParamVector, x: np.ndarray, with_scores: bool):
    n = x.size
    w = causal_convolve(x, _frac_weights(theta.delta, n - 1), n)
    e = signal.lfilter(theta.ar_poly, theta.ma_poly, w)
    if not with_scores:
        return e, None
    p, q = len(theta.ar), len(theta.ma)
    h = np.empty((n, 1 + p + q))
    h[:, 0] = causal_convolve(e, log1m_coefficients(n - 1), n)
    if p:
        base = signal.lfilter([1.0], theta.ma_poly, w)
        for i in range(1, p + 1):
            h[:, i] = -_shift(base, i)
    if q:
        base = signal.lfilter([1.0], theta.ma_poly, e)
        for i in range(1, q + 1):
            h[:, p + i] = -_shift(base, i)
    return e, h


def residuals(theta: ParamVector, x) -> np.ndarray:
    x = _values(x)
    if x.size < 1:
        raise ContractError("empty series")
    _require_valid(theta)
    return _filter(theta, x, False)[0]


def score_terms(theta: ParamVector, x) -> tuple:
    """Residuals e_t and the n x (p+q+1) matrix h_t = d e_t / d theta."""
    x = _values(x)
    _require_valid(theta)
    return _filter(theta, x, True)


def objective(theta: ParamVector, x) -> float:
    e = residuals(theta, x)
    return float(np.mean(e * e))


def gradient(theta: ParamVector, x) -> np.ndarray:
    """r_n(theta) = (2/n) sum_t h_t(theta) e_t(theta)."""
    e, h = score_terms(theta, x)
    return 2.0 / e.size * (h.T @ e)


def idealized_score(theta0: ParamVector, x, eps=None) -> np.ndarray:
    """(2/n) sum_t h_t(theta0) eps_t using the true innovations."""
    if eps is None:
        eps = getattr(x, "innovations", None)
    if eps is None:
        raise ContractError("idealized score needs the true innovation record")
    _, h = score_terms(theta0, x)
    eps = np.asarray(eps, dtype=float)[: h.shape[0]]
    if eps.size != h.shape[0]:
        raise ContractError("innovation record shorter than the series")
    return 2.0 / eps.size * (h.T @ eps)


def hessian(theta: ParamVector, x, rel_step: float = 1e-5) -> np.ndarray:
    """Symmetrized central differences of the analytic gradient."""
    x = _values(x)
    base = theta.as_array()
    k = base.size
    order = theta.order
    H = np.empty((k, k))
    for i in range(k):
        step = rel_step * max(abs(base[i]), 0.1)
        cols = []
        for sign in (1.0, -1.0):
            pt = base.copy()
            pt[i] += sign * step
            th = ParamVector.from_array(pt, order)
            try:
                cols.append(gradient(th, x))
            except LongMemoryError:
                cols.append(None)
        if cols[0] is not None and cols[1] is not None:
            H[:, i] = (cols[0] - cols[1]) / (2 * step)
        else:
            g0 = gradient(theta, x)
            H[:, i] = (cols[0] - g0) / step if cols[0] is not None else (g0 - cols[1]) / step
    return 0.5 * (H + H.T)


# --------------------------------------------------------------------------
# bounded multi-start minimization


class _Transform:
    """logit map of delta onto the real line; ARMA coordinates untouched."""

    def __init__(self, bounds: Bounds, order: ModelOrder):
        self.lo, self.hi = bounds.delta
        self.margin = bounds.root_margin
        self.order = order

    def to_theta(self, u) -> tuple:
        s = 0.5 * (1.0 + np.tanh(0.5 * u[0]))
        vals = np.array(u, dtype=float)
        vals[0] = self.lo + (self.hi - self.lo) * s
        return vals, (self.hi - self.lo) * s * (1.0 - s)

    def to_u(self, theta_arr) -> np.ndarray:
        u = np.array(theta_arr, dtype=float)
        r = (u[0] - self.lo) / (self.hi - self.lo)
        r = min(max(r, 1e-12), 1 - 1e-12)
        u[0] = np.log(r / (1.0 - r))
        return u

    def projected_norm(self, theta_arr, g_theta) -> float:
        g = np.array(g_theta, dtype=float)
        d = theta_arr[0]
        if (d - self.lo < 1e-6 and g[0] > 0) or (self.hi - d < 1e-6 and g[0] < 0):
            g[0] = 0.0
        return float(np.max(np.abs(g)))


def fit_multistart(fun_grad, order: ModelOrder, n: int, bounds: Bounds | None = None,
                   starts=None, estimator: str = "css") -> tuple:
    """Shared driver: run BFGS in the transformed space from each start.

    ``fun_grad(theta_array)`` returns (f, grad_theta) and may return (inf, None)
    outside the admissible region. Returns the best OptimizeResult (in theta
    coordinates), its projected gradient norm and the number of starts.
    """
    bounds = bounds or Bounds()
    tr = _Transform(bounds, order)
    start_list = default_starts(order)
    for s in starts or ():
        if s is not None and s not in start_list:
            start_list.append(s)

    def fg_u(u):
        th, jac = tr.to_theta(u)
        if not _roots_ok(ParamVector.from_array(th, order), tr.margin):
            return np.inf, None
        f, g = fun_grad(th)
        if not np.isfinite(f):
            return np.inf, None
        g = np.array(g, dtype=float)
        g[0] *= jac
        return f, g

    def norm_u(u, g_u):
        th, jac = tr.to_theta(u)
        g = np.array(g_u, dtype=float)
        if jac > 0:
            g[0] /= jac
        else:
            g[0] = 0.0
        if np.max(np.abs(g_u)) < 1e-14:
            return 0.0
        return tr.projected_norm(th, g)

    runs = []
    for start in start_list:
        res = bfgs(fg_u, tr.to_u(start.as_array()), gtol=GTOL, xtol=XTOL,
                   maxiter=MAXITER, grad_norm=norm_u)
        if not np.isfinite(res.fun):
            logger.debug("%s start %s infeasible", estimator, start)
            continue
        th, _ = tr.to_theta(res.x)
        res.theta = th
        res.pnorm = norm_u(res.x, res.grad)
        runs.append(res)
    if not runs:
        raise LongMemoryError("no feasible start")
    best_f = min(r.fun for r in runs)
    ties = [r for r in runs if r.fun <= best_f + 1e-12]
    best = min(ties, key=lambda r: tuple(r.theta))
    return best, len(start_list)


def default_starts(order: ModelOrder) -> list:
    zeros_p, zeros_q = (0.0,) * order.p, (0.0,) * order.q
    return [ParamVector(d, zeros_p, zeros_q) for d in DEFAULT_DELTA_STARTS]


def finish_result(best, n_starts: int, order: ModelOrder, n: int, estimator: str,
                  hessian_fn=None) -> EstimationResult:
    theta_hat = ParamVector.from_array(best.theta, order)
    k = order.dim
    try:
        omega = information_matrix(theta_hat).omega
        se, ci = standard_errors(omega, n, theta_hat)
    except (LongMemoryError, np.linalg.LinAlgError) as exc:
        logger.warning("standard errors unavailable at %s: %s", theta_hat, exc)
        omega = np.full((k, k), np.nan)
        se, ci = np.full(k, np.nan), np.full((k, 2), np.nan)
    H, pd = None, None
    if hessian_fn is not None:
        try:
            H = hessian_fn(theta_hat)
            pd = bool(np.linalg.eigvalsh(H)[0] > 0)
        except LongMemoryError as exc:
            logger.warning("hessian unavailable: %s", exc)
    converged = bool(best.pnorm < FOC_TOL)
    return EstimationResult(
        theta_hat=theta_hat, sigma2_hat=float(best.fun), objective=float(best.fun),
        gradient_norm=float(best.pnorm), omega_hat=omega, std_errors=se, ci95=ci,
        iterations=int(best.nit), converged=converged, starts=n_starts,
        estimator=estimator, n=n, hessian=H, hessian_pd=pd, status=best.status,
        trace=list(best.trace))


def minimize(x, order: ModelOrder | None = None, bounds: Bounds | None = None,
             starts=None, mean_correct: bool = False, compute_hessian: bool = True
             ) -> EstimationResult:
    """CSS estimate over the admissible region, best of several BFGS starts.

    Starts are delta in {0.1, 0.25, 0.4} with ARMA coordinates at zero, plus
    any user-supplied ParamVectors. ``order`` defaults to the order of the first
    user start, else FARIMA(0, delta, 0).
    """
    x = _values(x)
    if x.size < MIN_N:
        raise ContractError(f"need at least {MIN_N} observations, got {x.size}")
    if mean_correct:
        x = x - x.mean()
    starts = [s for s in (starts or []) if s is not None]
    if order is None:
        order = starts[0].order if starts else ModelOrder()
    n = x.size

    def fg(th_arr):
        theta = ParamVector.from_array(th_arr, order)
        e, h = _filter(theta, x, True)
        return float(np.mean(e * e)), 2.0 / n * (h.T @ e)

    best, n_starts = fit_multistart(fg, order, n, bounds, starts, "css")
    hfn = (lambda th: hessian(th, x)) if compute_hessian else None
    return finish_result(best, n_starts, order, n, "css", hfn)
