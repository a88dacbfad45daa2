"""FARIMA(p, delta, q) model algebra.

The model is written in Box-Jenkins form

    phi(B) (1 - B)^delta x_t = psi(B) eps_t,
    phi(s) = 1 - phi_1 s - ... - phi_p s^p,
    psi(s) = 1 + psi_1 s + ... + psi_q s^q,

so that the AR(infinity) transfer function is
alpha(s; theta) = (1 - s)^delta phi(s) / psi(s) with theta = (delta, phi, psi).
The spectral density carries the 1/(2 pi) factor, so that its integral over
(-pi, pi] is the variance of x_t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import signal, special

from .errors import ContractError, NumericalError, ValidationError

DELTA_BOUNDS = (0.001, 0.499)
ROOT_MARGIN = 0.01
COMMON_ROOT_TOL = 1e-6


@dataclass(frozen=True)
class ModelOrder:
    p: int = 0
    q: int = 0

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ContractError(f"orders must be nonnegative, got p={self.p}, q={self.q}")

    @property
    def dim(self) -> int:
        return self.p + self.q + 1


@dataclass(frozen=True)
class ParamVector:
    """Parameter vector theta = (delta, phi_1..phi_p, psi_1..psi_q)."""

    delta: float
    ar: tuple = ()
    ma: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "ar", tuple(float(v) for v in np.atleast_1d(self.ar)))
        object.__setattr__(self, "ma", tuple(float(v) for v in np.atleast_1d(self.ma)))

    @property
    def order(self) -> ModelOrder:
        return ModelOrder(len(self.ar), len(self.ma))

    @property
    def dim(self) -> int:
        return 1 + len(self.ar) + len(self.ma)

    def as_array(self) -> np.ndarray:
        return np.array((self.delta, *self.ar, *self.ma), dtype=float)

    @classmethod
    def from_array(cls, values, order: ModelOrder) -> "ParamVector":
        values = np.asarray(values, dtype=float)
        if values.shape != (order.dim,):
            raise ContractError(f"expected {order.dim} parameters, got shape {values.shape}")
        p = order.p
        return cls(values[0], tuple(values[1:1 + p]), tuple(values[1 + p:]))

    @property
    def ar_poly(self) -> np.ndarray:
        """Coefficients of phi(s) in ascending powers."""
        return np.concatenate(([1.0], -np.asarray(self.ar, dtype=float)))

    @property
    def ma_poly(self) -> np.ndarray:
        """Coefficients of psi(s) in ascending powers."""
        return np.concatenate(([1.0], np.asarray(self.ma, dtype=float)))

    def names(self) -> list:
        return (["delta"] + [f"ar{i + 1}" for i in range(len(self.ar))]
                + [f"ma{i + 1}" for i in range(len(self.ma))])


@dataclass(frozen=True)
class ModelSpec:
    theta: ParamVector
    sigma2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def order(self) -> ModelOrder:
        return self.theta.order


@dataclass(frozen=True)
class CoefficientTable:
    """Truncated alpha, beta and zeta = d alpha / d theta expansions."""

    alpha: np.ndarray
    beta: np.ndarray
    zeta: np.ndarray
    truncation: int = field(default=0)


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            flag = "ok  " if c.passed else "FAIL"
            lines.append(f"[{flag}] {c.name}: {c.detail}")
        return "\n".join(lines)


def _poly_roots(poly_ascending) -> np.ndarray:
    poly = np.asarray(poly_ascending, dtype=float)
    # negligible top coefficients only contribute roots far outside the unit circle
    keep = np.nonzero(np.abs(poly) > 1e-12 * np.max(np.abs(poly)))[0]
    poly = poly[: keep[-1] + 1]
    if poly.size <= 1:
        return np.empty(0, dtype=complex)
    return np.roots(poly[::-1])


def _roots_ok(theta: ParamVector, margin: float = ROOT_MARGIN) -> bool:
    for poly in (theta.ar_poly, theta.ma_poly):
        roots = _poly_roots(poly)
        if roots.size and np.min(np.abs(roots)) < 1.0 + margin:
            return False
    return True


def validate(spec, margin: float = ROOT_MARGIN) -> ValidationReport:
    """Check the admissibility conditions of a model.

    Accepts a ModelSpec or a bare ParamVector (then the variance check is skipped).
    Never raises; failures are carried in the returned report.
    """
    if isinstance(spec, ParamVector):
        theta, sigma2 = spec, None
    else:
        theta, sigma2 = spec.theta, spec.sigma2
    checks = []
    d = theta.delta
    checks.append(Check(
        "memory-parameter range 0 < delta < 1/2", bool(0.0 < d < 0.5), f"delta={d:g}"))
    for label, poly in (("AR", theta.ar_poly), ("MA", theta.ma_poly)):
        roots = _poly_roots(poly)
        if roots.size == 0:
            checks.append(Check(f"{label} root margin", True, "no roots"))
            continue
        rmin = float(np.min(np.abs(roots)))
        checks.append(Check(
            f"{label} root margin", rmin >= 1.0 + margin,
            f"smallest root modulus {rmin:.6g}, required >= {1.0 + margin:g}"))
    ar_roots, ma_roots = _poly_roots(theta.ar_poly), _poly_roots(theta.ma_poly)
    if ar_roots.size and ma_roots.size:
        gap = float(np.min(np.abs(ar_roots[:, None] - ma_roots[None, :])))
        checks.append(Check(
            "no common AR/MA root (identifiability)", gap > COMMON_ROOT_TOL,
            f"closest AR/MA root pair distance {gap:.3g}"))
    else:
        checks.append(Check("no common AR/MA root (identifiability)", True, "one side empty"))
    if 0.0 < d < 0.5 and _roots_ok(theta, 0.0):
        alpha = ar_coefficients(theta, 4096, check=False)
        head, tail = np.sum(np.abs(alpha[:2049])), np.sum(np.abs(alpha[2049:]))
        checks.append(Check(
            "summable AR coefficients", bool(np.isfinite(head) and tail < head),
            f"sum |alpha_j| up to 2048: {head:.6g}, next 2048 lags: {tail:.3g}"))
    else:
        checks.append(Check("summable AR coefficients", False, "not evaluated"))
    if sigma2 is not None:
        checks.append(Check("innovation variance", sigma2 > 0, f"sigma2={sigma2:g}"))
    return ValidationReport(tuple(checks))


def _require_valid(theta: ParamVector, margin: float = ROOT_MARGIN):
    if not 0.0 < theta.delta < 0.5:
        raise ValidationError(f"delta={theta.delta} outside (0, 1/2)")
    if not _roots_ok(theta, margin):
        raise ValidationError(
            f"AR/MA polynomial root inside the margin |s| >= {1 + margin:g}: {theta}")


# --------------------------------------------------------------------------
# series expansions


def _frac_weights(d: float, J: int) -> np.ndarray:
    """Power-series coefficients of (1 - s)^d for any real d."""
    k = np.arange(1, J + 1, dtype=float)
    out = np.empty(J + 1)
    out[0] = 1.0
    out[1:] = np.cumprod((k - 1.0 - d) / k)
    return out


def causal_convolve(a: np.ndarray, b: np.ndarray, length: int) -> np.ndarray:
    """First `length` terms of the Cauchy product of a and b."""
    a = np.asarray(a, dtype=float)[:length]
    b = np.asarray(b, dtype=float)[:length]
    if a.size == 0 or b.size == 0:
        return np.zeros(length)
    if min(a.size, b.size) <= 64 or a.size * b.size <= 1 << 20:
        out = np.convolve(a, b)[:length]
    else:
        out = signal.fftconvolve(a, b)[:length]
    if out.size < length:
        out = np.concatenate((out, np.zeros(length - out.size)))
    return out


def fractional_coefficients(delta: float, J: int) -> np.ndarray:
    """Coefficients pi_0..pi_J of (1 - s)^delta.

    Uses pi_j = pi_{j-1} (j - 1 - delta) / j, which equals
    Gamma(j - delta) / (Gamma(j + 1) Gamma(-delta)).
    """
    if not 0.0 < delta < 0.5:
        raise ValidationError(f"delta={delta} outside (0, 1/2)")
    if J < 1:
        raise ContractError("J must be >= 1")
    return _frac_weights(delta, int(J))


def arma_star_expansion(theta: ParamVector, J: int) -> np.ndarray:
    """Coefficients of phi(s) / psi(s) up to s^J."""
    if not _roots_ok(theta):
        raise ValidationError(f"AR/MA root inside the admissible margin: {theta}")
    impulse = np.zeros(J + 1)
    impulse[0] = 1.0
    return signal.lfilter(theta.ar_poly, theta.ma_poly, impulse)


def ar_coefficients(theta: ParamVector, J: int, check: bool = True) -> np.ndarray:
    """alpha_0..alpha_J of alpha(s) = (1 - s)^delta phi(s) / psi(s)."""
    if check:
        _require_valid(theta)
    # filtering the fractional weights by phi/psi is the truncated Cauchy product
    return signal.lfilter(theta.ar_poly, theta.ma_poly, _frac_weights(theta.delta, J))


def ma_coefficients(alpha) -> np.ndarray:
    """Series inverse beta of alpha: beta_0 = 1, beta_j = -sum_{k=1}^j alpha_k beta_{j-k}."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.size == 0 or alpha[0] != 1.0:
        raise ContractError("alpha[0] must equal 1")
    J = alpha.size - 1
    beta = np.zeros(J + 1)
    beta[0] = 1.0
    for j in range(1, J + 1):
        # alpha[1:j+1] against beta[j-1], ..., beta[0]
        beta[j] = -np.dot(alpha[1:j + 1], beta[j - 1::-1])
    return beta


def ma_weights(theta: ParamVector, J: int) -> np.ndarray:
    """beta_0..beta_J computed from the structure (1 - s)^-delta psi(s) / phi(s)."""
    return signal.lfilter(theta.ma_poly, theta.ar_poly, _frac_weights(-theta.delta, J))


@lru_cache(maxsize=32)
def log1m_coefficients(J: int) -> np.ndarray:
    """Coefficients of log(1 - s) = -sum_{k>=1} s^k / k."""
    out = np.zeros(J + 1)
    out[1:] = -1.0 / np.arange(1, J + 1)
    out.flags.writeable = False
    return out


def _shift(y: np.ndarray, i: int) -> np.ndarray:
    out = np.zeros_like(y)
    if i < y.shape[0]:
        out[i:] = y[:y.shape[0] - i]
    return out


def zeta_coefficients(theta: ParamVector, J: int) -> np.ndarray:
    """Matrix (J+1) x (p+q+1) of d alpha_j / d theta.

    delta column: alpha(s) log(1 - s); AR column i: -s^i (1 - s)^delta / psi(s);
    MA column i: -s^i (1 - s)^delta phi(s) / psi(s)^2.
    """
    _require_valid(theta)
    p, q = len(theta.ar), len(theta.ma)
    frac = _frac_weights(theta.delta, J)
    alpha = signal.lfilter(theta.ar_poly, theta.ma_poly, frac)
    out = np.empty((J + 1, 1 + p + q))
    out[:, 0] = causal_convolve(alpha, log1m_coefficients(J), J + 1)
    if p:
        base = signal.lfilter([1.0], theta.ma_poly, frac)
        for i in range(1, p + 1):
            out[:, i] = -_shift(base, i)
    if q:
        base = signal.lfilter([1.0], theta.ma_poly, alpha)
        for i in range(1, q + 1):
            out[:, p + i] = -_shift(base, i)
    return out


def coefficient_table(theta: ParamVector, J: int) -> CoefficientTable:
    alpha = ar_coefficients(theta, J)
    beta = ma_weights(theta, J)
    return CoefficientTable(alpha, beta, zeta_coefficients(theta, J), J)


# --------------------------------------------------------------------------
# spectrum and autocovariances


def spectral_density(spec: ModelSpec, lam):
    """f(lambda) = sigma2/(2 pi) |1 - e^{i lambda}|^{-2 delta} |psi|^2 / |phi|^2."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr == 0.0):
        raise ContractError("spectral density has a pole at lambda = 0")
    th = spec.theta
    z = np.exp(1j * lam_arr)
    num = np.abs(np.polynomial.polynomial.polyval(z, th.ma_poly)) ** 2
    den = np.abs(np.polynomial.polynomial.polyval(z, th.ar_poly)) ** 2
    f = spec.sigma2 / (2 * np.pi) * np.abs(1.0 - z) ** (-2 * th.delta) * num / den
    return float(f) if np.ndim(lam) == 0 else f


def _fractional_acvf(d: float, maxlag: int) -> np.ndarray:
    """Autocovariances of (1 - B)^{-d} eps with unit innovation variance, |d| < 1/2."""
    g = np.empty(maxlag + 1)
    g[0] = math.exp(special.gammaln(1 - 2 * d) - 2 * special.gammaln(1 - d))
    if maxlag:
        h = np.arange(1, maxlag + 1, dtype=float)
        g[1:] = g[0] * np.cumprod((h - 1 + d) / (h - d))
    return g


def _impulse_response(num, den, tol=1e-17, max_len=1 << 17) -> np.ndarray:
    num = np.trim_zeros(np.asarray(num, dtype=float), "b")
    den = np.trim_zeros(np.asarray(den, dtype=float), "b")
    if num.size <= 1 and den.size <= 1:
        return np.array([num[0] / den[0]])
    M = 256
    while True:
        impulse = np.zeros(M)
        impulse[0] = 1.0
        w = signal.lfilter(num, den, impulse)
        scale = np.max(np.abs(w))
        if np.max(np.abs(w[M // 2:])) <= tol * scale:
            nz = np.nonzero(np.abs(w) > tol * scale * 1e-3)[0]
            return w[: nz[-1] + 1]
        if M >= max_len:
            raise NumericalError(f"ARMA impulse response not decayed after {M} lags")
        M *= 2


def farima_acvf(d: float, num, den, maxlag: int, sigma2: float = 1.0) -> np.ndarray:
    """Autocovariances of (1 - B)^{-d} num(B)/den(B) eps for -1/2 < d < 1/2.

    Combines the closed-form fractional autocovariances with the two-sided
    autocovariance of the (exponentially decaying) ARMA impulse response.
    """
    if not -0.5 < d < 0.5:
        raise ContractError(f"d={d} outside (-1/2, 1/2)")
    w = _impulse_response(num, den)
    M = w.size
    if M == 1:
        return sigma2 * w[0] ** 2 * _fractional_acvf(d, maxlag)
    g = np.correlate(w, w, mode="full") if M <= 4096 else signal.fftconvolve(w, w[::-1])
    # g holds lags -(M-1)..(M-1); fractional part needed on lags -(M-1)..maxlag+M-1
    frac = _fractional_acvf(d, maxlag + M - 1)
    two_sided = np.concatenate((frac[M - 1:0:-1], frac))
    conv = signal.fftconvolve(g, two_sided) if M > 64 else np.convolve(g, two_sided)
    return sigma2 * conv[2 * (M - 1): 2 * (M - 1) + maxlag + 1]


def autocovariance(spec: ModelSpec, maxlag: int, method: str = "exact") -> np.ndarray:
    """gamma(0..maxlag) of the FARIMA process.

    method="exact" convolves the closed-form fractional autocovariances with the
    ARMA autocovariance sequence; method="quadrature" integrates
    2 int_0^pi f(lambda) cos(j lambda) d lambda numerically and is intended as a
    cross-check at moderate lags.
    """
    _require_valid(spec.theta)
    th = spec.theta
    if method == "exact":
        return farima_acvf(th.delta, th.ma_poly, th.ar_poly, maxlag, spec.sigma2)
    if method == "quadrature":
        return autocovariance_quadrature(spec, maxlag)
    raise ContractError(f"unknown method {method!r}")


@lru_cache(maxsize=8)
def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def autocovariance_quadrature(spec: ModelSpec, maxlag: int, nodes: int = 256,
                              split: float = 0.1) -> np.ndarray:
    """Quadrature route to gamma(j) = 2 int_0^pi f(l) cos(j l) dl.

    On (0, split] the substitution l = split * t^{1/(1 - 2 delta)} absorbs the
    l^{-2 delta} pole so the transformed integrand is smooth in t; [split, pi] is
    covered by Gauss-Legendre panels whose count grows with maxlag.
    """
    th = spec.theta
    d = th.delta
    x, w = _gauss_legendre(nodes)
    lags = np.arange(maxlag + 1)[:, None]

    a = 1.0 / (1.0 - 2.0 * d)
    t = 0.5 * (x + 1.0)
    lam = split * t ** a
    # t^(a-1) from the Jacobian cancels the t^(-2 d a) of the pole exactly
    jac = split * a * t ** (a - 1.0)
    vals = spectral_density(spec, lam) * jac
    low = 2.0 * (np.cos(lags * lam) * vals) @ (0.5 * w)
    if not np.all(np.isfinite(low)):
        raise NumericalError("non-finite quadrature near the pole")

    panels = max(1, int(math.ceil(maxlag / 8.0)))
    edges = np.linspace(split, np.pi, panels + 1)
    high = np.zeros(maxlag + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        lam = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        vals = spectral_density(spec, lam) * (0.5 * (hi - lo)) * w
        high += 2.0 * np.cos(lags * lam) @ vals
    return low + high
