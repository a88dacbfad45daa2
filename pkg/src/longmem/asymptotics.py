"""Limiting covariance of the CSS estimate.

sqrt(n) (theta_hat - theta0) is asymptotically normal with covariance
Omega^{-1}, where

    Omega = (1 / 4 pi) int_{-pi}^{pi} g(l) g(l)' dl = (1 / 2 pi) int_0^pi g g' dl,
    g(l; theta) = 2 d/dtheta log |alpha(e^{il}; theta)| = -d/dtheta log f(l; theta).

The delta entry of g is log |1 - e^{il}|^2. For FARIMA(0, delta, 0) Omega is
the scalar pi^2 / 6 whatever delta is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ModelError, NumericalError
from .model import ParamVector, _gauss_legendre, _require_valid

Z95 = 1.959964


@dataclass(frozen=True)
class InformationMatrix:
    omega: np.ndarray
    quad_nodes: int
    quad_error_estimate: float

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.omega)


def score_vector_integrand(theta: ParamVector, lam) -> np.ndarray:
    """g(lambda; theta) as an array of shape lam.shape + (p+q+1,)."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam == 0.0):
        raise ContractError("integrand is singular at lambda = 0")
    z = np.exp(1j * lam)
    p, q = len(theta.ar), len(theta.ma)
    out = np.empty(lam.shape + (1 + p + q,))
    # |1 - e^{il}| = 2 |sin(l / 2)|, accurate for small l
    out[..., 0] = 2.0 * np.log(2.0 * np.abs(np.sin(0.5 * lam)))
    if p:
        phi = np.polynomial.polynomial.polyval(z, theta.ar_poly)
        for i in range(1, p + 1):
            out[..., i] = -2.0 * np.real(z ** i / phi)
    if q:
        psi = np.polynomial.polynomial.polyval(z, theta.ma_poly)
        for i in range(1, q + 1):
            out[..., p + i] = -2.0 * np.real(z ** i / psi)
    return out


def _omega_quadrature(theta: ParamVector, nodes: int, split: float = 0.1,
                      u_min: float = -40.0, panels: int = 8) -> np.ndarray:
    x, w = _gauss_legendre(nodes)
    # (0, split]: lambda = e^u flattens the log^2 growth at the origin
    u_max = np.log(split)
    u = 0.5 * (u_max - u_min) * x + 0.5 * (u_max + u_min)
    lam = np.exp(u)
    g = score_vector_integrand(theta, lam)
    wt = 0.5 * (u_max - u_min) * w * lam
    total = (g * wt[:, None]).T @ g

    xp, wp = _gauss_legendre(max(nodes // panels, 8))
    edges = np.linspace(split, np.pi, panels + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        lam = 0.5 * (hi - lo) * xp + 0.5 * (hi + lo)
        g = score_vector_integrand(theta, lam)
        wt = 0.5 * (hi - lo) * wp
        total += (g * wt[:, None]).T @ g
    return total / (2.0 * np.pi)


def information_matrix(theta: ParamVector, nodes: int = 512,
                       tol: float = 1e-6) -> InformationMatrix:
    _require_valid(theta)
    omega = _omega_quadrature(theta, nodes)
    coarse = _omega_quadrature(theta, nodes // 2)
    err = float(np.max(np.abs(omega - coarse)))
    if not np.all(np.isfinite(omega)) or err > tol:
        raise NumericalError(f"information matrix quadrature unresolved (change {err:.3g})")
    omega = 0.5 * (omega + omega.T)
    eig = np.linalg.eigvalsh(omega)
    eig_min = float(eig[0])
    if eig_min <= 1e-12 * float(eig[-1]):
        raise ModelError(f"information matrix not positive definite (min eigenvalue {eig_min:.3g})")
    return InformationMatrix(omega, nodes, err)


def standard_errors(omega, n: int, theta_hat=None):
    """Asymptotic standard errors sqrt(diag(Omega^{-1}) / n) and 95% intervals.

    Returns ``(se, ci)``; ``ci`` has shape (k, 2) when ``theta_hat`` is given,
    otherwise it is None.
    """
    if isinstance(omega, InformationMatrix):
        omega = omega.omega
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    if n < 1:
        raise ContractError("n must be >= 1")
    cov = np.linalg.inv(omega)
    se = np.sqrt(np.diag(cov) / n)
    if theta_hat is None:
        return se, None
    center = theta_hat.as_array() if isinstance(theta_hat, ParamVector) else np.asarray(theta_hat)
    ci = np.column_stack((center - Z95 * se, center + Z95 * se))
    return se, ci
