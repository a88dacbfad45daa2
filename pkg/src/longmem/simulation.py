"""Sample-path generation for FARIMA models.

Two generators:

* exact Gaussian paths by the Durbin-Levinson recursion on the exact
  autocovariances (the default for Gaussian studies);
* truncated MA(infinity) paths x_t = sum_{j<=J} beta_j eps_{t-j} for any
  innovation law, keeping the true innovations and a presample stretch of x.

Seeds: every generator accepts an int, a ``numpy.random.SeedSequence`` or a
``Generator``. Per-replication streams come from :func:`replication_seed`,
which hashes ``(master_seed, *keys)`` through ``SeedSequence`` (spawn keys), so
streams are independent of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg, signal

from .errors import ContractError, NumericalError, ValidationError
from .model import ModelSpec, autocovariance, ma_weights, validate


@dataclass(frozen=True)
class InnovationLaw:
    kind: str = "gaussian"
    df: float | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform", "student-t"):
            raise ContractError(f"unknown innovation law {self.kind!r}")
        if self.kind == "student-t" and (self.df is None or self.df <= 4):
            raise ContractError("student-t innovations need df > 4 (finite fourth moment)")


@dataclass
class TimeSeries:
    values: np.ndarray
    truth: ModelSpec | None = None
    innovations: np.ndarray | None = None
    presample: np.ndarray | None = None
    presample_innovations: np.ndarray | None = None
    method: str = "observed"
    approximate_innovations: bool = False
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)

    def head(self, n: int) -> "TimeSeries":
        """First n observations; presample is kept since it precedes them."""
        return TimeSeries(
            self.values[:n], self.truth,
            None if self.innovations is None else self.innovations[:n],
            self.presample, self.presample_innovations, self.method,
            self.approximate_innovations, dict(self.meta))


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def replication_seed(master_seed: int, *keys: int) -> np.random.SeedSequence:
    """Independent stream for (master_seed, keys...), e.g. keys = (n, replication)."""
    return np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))


def draw_innovations(law: InnovationLaw, count: int, sigma2: float = 1.0, seed=None) -> np.ndarray:
    """i.i.d. draws with mean 0 and variance sigma2."""
    rng = make_rng(seed)
    sigma = np.sqrt(sigma2)
    if law.kind == "gaussian":
        return sigma * rng.standard_normal(count)
    if law.kind == "uniform":
        half = 0.5 * np.sqrt(12.0 * sigma2)
        return rng.uniform(-half, half, count)
    df = float(law.df)
    return sigma * np.sqrt((df - 2.0) / df) * rng.standard_t(df, count)


def _check_spec(spec: ModelSpec):
    report = validate(spec)
    if not report.ok:
        raise ValidationError("invalid model:\n" + str(report), report)


def durbin_levinson(gamma: np.ndarray):
    """Yield (t, phi_t, v_t): prediction coefficients of x_t on x_{t-1}, ..., x_0
    and the prediction variance, for t = 0 .. len(gamma) - 1."""
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.size
    v = gamma[0]
    if v <= 0:
        raise NumericalError("nonpositive variance in Durbin-Levinson")
    phi = np.zeros(0)
    yield 0, phi, v
    for t in range(1, n):
        kappa = (gamma[t] - phi @ gamma[t - 1:0:-1]) / v if t > 1 else gamma[1] / v
        if not abs(kappa) < 1.0:
            raise NumericalError(f"Durbin-Levinson breakdown at lag {t} (reflection {kappa:.6g})")
        phi = np.concatenate((phi - kappa * phi[::-1], [kappa]))
        v = v * (1.0 - kappa * kappa)
        if v <= 0:
            raise NumericalError(f"Durbin-Levinson breakdown at lag {t}")
        yield t, phi, v


_DENSE_LIMIT = 4096


@lru_cache(maxsize=4)
def _dl_factor(spec: ModelSpec, n: int):
    """Unit lower-triangular A with A x = prediction errors, plus their variances."""
    gamma = autocovariance(spec, n - 1)
    A = np.eye(n)
    var = np.empty(n)
    for t, phi, v in durbin_levinson(gamma):
        A[t, :t] = -phi[::-1]
        var[t] = v
    A.flags.writeable = False
    var.flags.writeable = False
    return A, var


def simulate_exact_gaussian(spec: ModelSpec, n: int, seed=None) -> TimeSeries:
    """Gaussian path with the exact FARIMA autocovariances.

    The recorded innovations are the one-step prediction errors rescaled to
    variance sigma2; they approach the model innovations only as t grows.
    """
    _check_spec(spec)
    if n < 1:
        raise ContractError("n must be >= 1")
    z = make_rng(seed).standard_normal(n)
    if n <= _DENSE_LIMIT:
        A, var = _dl_factor(spec, n)
        x = linalg.solve_triangular(A, np.sqrt(var) * z, lower=True, unit_diagonal=True)
    else:
        gamma = autocovariance(spec, n - 1)
        x = np.empty(n)
        for t, phi, v in durbin_levinson(gamma):
            x[t] = phi @ x[t - 1::-1] + np.sqrt(v) * z[t] if t else np.sqrt(v) * z[t]
    return TimeSeries(x, truth=spec, innovations=np.sqrt(spec.sigma2) * z,
                      method="exact-gaussian", approximate_innovations=True)


def omitted_tail_sd(spec: ModelSpec, j_beta: int) -> float:
    """Approximate sd of sum_{j > J} beta_j eps_{t-j}, by power-law extrapolation."""
    beta = ma_weights(spec.theta, j_beta)
    d = spec.theta.delta
    tail = beta[-1] ** 2 * j_beta / max(1.0 - 2.0 * d, 1e-12)
    return float(np.sqrt(spec.sigma2 * tail))


def simulate_truncated_ma(spec: ModelSpec, n: int, m_pre: int | None = None,
                          law: InnovationLaw = InnovationLaw(), seed=None,
                          j_beta: int | None = None) -> TimeSeries:
    """x_t = sum_{j=0}^{J} beta_j eps_{t-j} for t = 1 - m_pre .. n.

    Defaults: m_pre = 10 n, J = 100 n. The innovation record for t = 1..n and
    the presample x values for t = 1 - m_pre .. 0 are stored.
    """
    _check_spec(spec)
    m_pre = 10 * n if m_pre is None else int(m_pre)
    j_beta = 100 * n if j_beta is None else int(j_beta)
    if m_pre < 10 * n:
        raise ContractError("presample must be at least 10 n")
    beta = ma_weights(spec.theta, j_beta)
    eps = draw_innovations(law, j_beta + m_pre + n, spec.sigma2, seed)
    x_ext = signal.fftconvolve(eps, beta, mode="valid")
    return TimeSeries(
        x_ext[m_pre:], truth=spec, innovations=eps[-n:],
        presample=x_ext[:m_pre], presample_innovations=eps[j_beta:j_beta + m_pre],
        method="truncated-ma",
        meta={"m_pre": m_pre, "j_beta": j_beta, "law": law.kind,
              "omitted_tail_sd": omitted_tail_sd(spec, j_beta)})


def write_csv(path, values, header: str = "x"):
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for v in np.asarray(values, dtype=float):
            fh.write(repr(float(v)) + "\n")


def read_csv(path) -> np.ndarray:
    """Read a one-column CSV with header line; raises ContractError when malformed."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh.read().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ContractError(f"{path}: empty file")
    body = lines[1:] if not _is_number(lines[0]) else lines
    try:
        values = np.array([float(v) for v in body], dtype=float)
    except ValueError as exc:
        raise ContractError(f"{path}: {exc}") from None
    if values.size == 0 or not np.all(np.isfinite(values)):
        raise ContractError(f"{path}: no finite data rows")
    return values


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True
