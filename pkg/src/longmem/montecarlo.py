"""Monte Carlo experiments for the CSS estimator.

Every replication draws its own stream from ``replication_seed(master_seed, n, r)``
so a report is a pure function of its configuration, whether replications run
serially or in worker processes.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import signal, stats

from .asymptotics import information_matrix, standard_errors
from .css import _filter, minimize
from .errors import ContractError, LongMemoryError
from .model import ModelSpec, ParamVector
from .simulation import (InnovationLaw, TimeSeries, replication_seed, simulate_exact_gaussian,
                         simulate_truncated_ma)
from .whittle import objective_gap, whittle_estimate

logger = logging.getLogger(__name__)

ESTIMATORS = ("css", "whittle")
DIAGNOSTICS = ("truncation", "score_replacement", "objective_gap", "consistency_path")
LOW_CONFIDENCE_R = 30


@dataclass(frozen=True)
class MonteCarloConfig:
    spec0: ModelSpec
    n_grid: tuple = (1024,)
    replications: int = 100
    law: InnovationLaw = InnovationLaw()
    estimators: tuple = ("css",)
    master_seed: int = 0
    diagnostics: tuple = ()
    simulator: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "diagnostics", tuple(self.diagnostics))
        if self.replications < 1:
            raise ContractError("replications must be >= 1")
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ContractError("n_grid must be non-empty and strictly increasing")
        if min(self.n_grid) < 20:
            raise ContractError("sample sizes must be >= 20")
        bad = set(self.estimators) - set(ESTIMATORS) or set(self.diagnostics) - set(DIAGNOSTICS)
        if bad or not self.estimators:
            raise ContractError(f"unknown estimators/diagnostics: {sorted(bad)}")
        if self.simulator not in ("auto", "exact-gaussian", "truncated-ma"):
            raise ContractError(f"unknown simulator {self.simulator!r}")

    @property
    def resolved_simulator(self) -> str:
        if self.simulator != "auto":
            return self.simulator
        return "exact-gaussian" if self.law.kind == "gaussian" else "truncated-ma"


@dataclass
class MonteCarloReport:
    config: dict
    records: list
    aggregates: dict
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"config": self.config, "records": self.records,
                "aggregates": self.aggregates, "diagnostics": self.diagnostics}

    def summary_table(self) -> str:
        lines = [f"{'estimator':<9} {'n':>6} {'R_ok':>5} {'fail':>5} {'bias':>10} "
                 f"{'var/ref':>8} {'cover':>6} {'KS p':>7}"]
        for est, rows in self.aggregates.items():
            for row in rows:
                ratio = row["variance_ratio"][0] if row["variance_ratio"] else float("nan")
                cover = row["coverage"][0] if row["coverage"] else float("nan")
                lines.append(
                    f"{est:<9} {row['n']:>6} {row['replications_used']:>5} "
                    f"{row['nonconverged']:>5} {row['mean_bias'][0]:>10.5f} {ratio:>8.4f} "
                    f"{cover:>6.3f} {row['ks_pvalue']:>7.4f}"
                    + ("  (low confidence)" if row["low_confidence"] else ""))
        return "\n".join(lines)


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("LONGMEM_THREADS")
    return max(1, int(env)) if env else 1


def simulate(spec: ModelSpec, n: int, seed, method: str, law: InnovationLaw) -> TimeSeries:
    if method == "exact-gaussian":
        return simulate_exact_gaussian(spec, n, seed)
    return simulate_truncated_ma(spec, n, law=law, seed=seed)


def _estimate(name: str, x, order, start):
    if name == "css":
        return minimize(x, order=order, starts=[start], compute_hessian=False)
    return whittle_estimate(x, order=order, starts=[start])


def _run_task(args) -> list:
    config, n, r = args
    spec = config.spec0
    out = []
    try:
        ts = simulate(spec, n, replication_seed(config.master_seed, n, r),
                      config.resolved_simulator, config.law)
    except LongMemoryError as exc:
        logger.warning("simulation failed n=%d r=%d: %s", n, r, exc)
        return [_failed(name, n, r, spec, str(exc)) for name in config.estimators]
    for name in config.estimators:
        try:
            res = _estimate(name, ts.values, spec.order, spec.theta)
        except LongMemoryError as exc:
            logger.warning("%s failed n=%d r=%d: %s", name, n, r, exc)
            out.append(_failed(name, n, r, spec, str(exc)))
            continue
        out.append({
            "estimator": name, "n": n, "replication": r,
            "theta_hat": res.theta_hat.as_array().tolist(),
            "sigma2_hat": res.sigma2_hat, "converged": res.converged,
            "gradient_norm": res.gradient_norm,
            "std_errors": np.asarray(res.std_errors).tolist(),
            "ci95": np.asarray(res.ci95).tolist(), "status": res.status,
        })
    return out


def _failed(name, n, r, spec, message):
    k = spec.theta.dim
    return {"estimator": name, "n": n, "replication": r, "theta_hat": [float("nan")] * k,
            "sigma2_hat": float("nan"), "converged": False, "gradient_norm": float("nan"),
            "std_errors": [float("nan")] * k, "ci95": [[float("nan")] * 2] * k,
            "status": "error: " + message}


def _map(fn, tasks, workers: int) -> list:
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def aggregate(records: list, spec0: ModelSpec, n: int) -> dict:
    """Distributional summaries over converged replications at one sample size."""
    theta0 = spec0.theta.as_array()
    k = theta0.size
    ok = [r for r in records if r["converged"]]
    est = np.array([r["theta_hat"] for r in ok]).reshape(-1, k)
    omega = information_matrix(spec0.theta).omega
    ref = np.linalg.inv(omega)
    se0, _ = standard_errors(omega, n)
    row = {
        "n": n,
        "replications": len(records),
        "replications_used": len(ok),
        "nonconverged": len(records) - len(ok),
        "nonconverged_fraction": (len(records) - len(ok)) / max(len(records), 1),
        "low_confidence": len(ok) < LOW_CONFIDENCE_R,
        "omega_inv_reference": ref.tolist(),
    }
    if len(ok) == 0:
        row.update(mean_bias=[float("nan")] * k, empirical_covariance=None,
                   variance_ratio=[], coverage=[], ks_statistic=float("nan"),
                   ks_pvalue=float("nan"))
        return row
    dev = np.sqrt(n) * (est - theta0)
    cov = np.atleast_2d(np.cov(dev, rowvar=False, ddof=1)) if len(ok) > 1 else np.zeros((k, k))
    ci = np.array([r["ci95"] for r in ok]).reshape(-1, k, 2)
    covered = (ci[:, :, 0] <= theta0) & (theta0 <= ci[:, :, 1])
    z = (est[:, 0] - theta0[0]) / se0[0]
    ks = stats.kstest(z, "norm", method="asymp") if len(ok) > 1 else None
    row.update(
        mean_bias=(est.mean(axis=0) - theta0).tolist(),
        empirical_covariance=cov.tolist(),
        variance_ratio=(np.diag(cov) / np.diag(ref)).tolist(),
        coverage=covered.mean(axis=0).tolist(),
        ks_statistic=float(ks.statistic) if ks else float("nan"),
        ks_pvalue=float(ks.pvalue) if ks else float("nan"),
    )
    return row


def run_experiment(config: MonteCarloConfig, workers: int | None = None) -> MonteCarloReport:
    """Simulate, estimate and summarize every (n, replication) of the design."""
    workers = worker_count(workers)
    tasks = [(config, n, r) for n in config.n_grid for r in range(config.replications)]
    records = [rec for chunk in _map(_run_task, tasks, workers) for rec in chunk]
    aggregates = {}
    for name in config.estimators:
        aggregates[name] = [
            aggregate([r for r in records if r["estimator"] == name and r["n"] == n],
                      config.spec0, n)
            for n in config.n_grid]
    diagnostics = {}
    R, seed = config.replications, config.master_seed
    if "truncation" in config.diagnostics:
        diagnostics["truncation"] = asdict(truncation_diagnostic(
            config.spec0, max(config.n_grid), R, seed, config.law))
    if "score_replacement" in config.diagnostics:
        diagnostics["score_replacement"] = asdict(score_replacement_diagnostic(
            config.spec0, config.n_grid, R, seed, config.law))
    if "objective_gap" in config.diagnostics:
        diagnostics["objective_gap"] = asdict(objective_gap_diagnostic(
            config.spec0, config.n_grid, R, seed))
    if "consistency_path" in config.diagnostics:
        diagnostics["consistency_path"] = asdict(consistency_path(
            config.spec0, config.n_grid, R, seed))
    return MonteCarloReport(config_to_dict(config), records, aggregates, diagnostics)


def config_to_dict(config: MonteCarloConfig) -> dict:
    th = config.spec0.theta
    return {
        "theta0": {"delta": th.delta, "ar": list(th.ar), "ma": list(th.ma)},
        "sigma2": config.spec0.sigma2, "n_grid": list(config.n_grid),
        "replications": config.replications,
        "law": {"kind": config.law.kind, "df": config.law.df},
        "estimators": list(config.estimators), "master_seed": config.master_seed,
        "diagnostics": list(config.diagnostics), "simulator": config.resolved_simulator,
    }


# --------------------------------------------------------------------------
# diagnostics


def _loglog_slope(t, y) -> float:
    return float(np.polyfit(np.log(t), np.log(y), 1)[0])


@dataclass
class TruncationCurve:
    t: list
    mse: list
    slope: float
    boundedness_ratio: float
    replications: int


def truncation_diagnostic(spec0: ModelSpec, n: int, R: int, seed: int = 0,
                          law: InnovationLaw = InnovationLaw()) -> TruncationCurve:
    """Mean of (e_t(theta0) - eps_t)^2 over R truncated-MA paths on t = 16, 32, ..., n.

    ``slope`` is the least-squares slope of log MSE on log t and
    ``boundedness_ratio`` is max_t t MSE(t) divided by its value at t = 16.
    """
    grid = 2 ** np.arange(4, int(np.log2(n)) + 1)
    grid = grid[grid <= n]
    acc = np.zeros(n)
    for r in range(R):
        ts = simulate_truncated_ma(spec0, n, law=law, seed=replication_seed(seed, n, r))
        if ts.innovations is None:
            raise ContractError("truncation diagnostic needs the innovation record")
        e, _ = _filter(spec0.theta, ts.values, False)
        acc += (e - ts.innovations) ** 2
    mse = acc[grid - 1] / R
    tm = grid * mse
    if np.all(mse > 0):
        slope = _loglog_slope(grid, mse)
        ratio = float(np.max(tm) / tm[0])
    else:
        slope, ratio = float("nan"), float("nan")
    return TruncationCurve(grid.tolist(), mse.tolist(), slope, ratio, R)


def score_gap_components(theta0: ParamVector, ts: TimeSeries) -> dict:
    """sqrt(n) ||r_n - r_n*|| and the r1, r2, r3 pieces for one path.

    rho_t, which needs the infinite past, is approximated by running the score
    filter over the retained presample followed by the sample.
    """
    if ts.innovations is None or ts.presample is None:
        raise ContractError("score diagnostics need innovations and presample")
    x = np.asarray(ts.values)
    n = x.size
    eps = ts.innovations
    e, h = _filter(theta0, x, True)
    _, h_ext = _filter(theta0, np.concatenate((ts.presample, x)), True)
    rho = h_ext[-n:]
    d = e - eps
    gap = 2.0 / n * (h.T @ d)
    r1 = 2.0 / n * ((h - rho).T @ eps)
    r2 = 2.0 / n * (rho.T @ d)
    r3 = 2.0 / n * ((h - rho).T @ d)
    return {"scaled_gap": float(np.sqrt(n) * np.linalg.norm(gap)),
            "r1": float(np.linalg.norm(r1)), "r2": float(np.linalg.norm(r2)),
            "r3": float(np.linalg.norm(r3))}


@dataclass
class ScoreReplacementCurve:
    n: list
    median_scaled_gap: list
    median_r1: list
    median_r2: list
    median_r3: list
    presample_budget: list
    replications: int


def score_replacement_diagnostic(spec0: ModelSpec, n_grid, R: int, seed: int = 0,
                                 law: InnovationLaw = InnovationLaw()) -> ScoreReplacementCurve:
    """Median over R paths of sqrt(n) ||r_n(theta0) - r_n*(theta0)|| for each n."""
    cols = {k: [] for k in ("scaled_gap", "r1", "r2", "r3")}
    budgets = []
    for n in n_grid:
        vals = {k: [] for k in cols}
        for r in range(R):
            ts = simulate_truncated_ma(spec0, n, law=law, seed=replication_seed(seed, n, r))
            comp = score_gap_components(spec0.theta, ts)
            for k in vals:
                vals[k].append(comp[k])
        for k in cols:
            cols[k].append(float(np.median(vals[k])))
        budgets.append(int(ts.meta["m_pre"]))
    return ScoreReplacementCurve(list(map(int, n_grid)), cols["scaled_gap"], cols["r1"],
                                 cols["r2"], cols["r3"], budgets, R)


def default_theta_grid() -> list:
    """27-point FARIMA(1, delta, 1) grid used for the objective-gap check."""
    return [ParamVector(d, (a,), (m,))
            for d in (0.1, 0.25, 0.4) for a in (-0.5, 0.0, 0.5) for m in (-0.3, 0.0, 0.3)]


@dataclass
class ObjectiveGapCurve:
    n: list
    median_gap: list
    gaps: list


def objective_gap_diagnostic(spec0: ModelSpec, n_grid, seeds: int, seed: int = 0,
                             theta_grid=None) -> ObjectiveGapCurve:
    """Median over seeds of max_grid |s_n^W - s_n| on nested prefixes of one path per seed."""
    grid = theta_grid or default_theta_grid()
    N = max(n_grid)
    gaps = np.empty((seeds, len(n_grid)))
    for s in range(seeds):
        x = simulate_exact_gaussian(spec0, N, replication_seed(seed, N, s)).values
        for j, n in enumerate(n_grid):
            gaps[s, j] = objective_gap(x[:n], grid)
    return ObjectiveGapCurve(list(map(int, n_grid)), np.median(gaps, axis=0).tolist(),
                             gaps.tolist())


@dataclass
class ConsistencyTable:
    n: list
    errors: list
    median_error: list


def consistency_path(spec0: ModelSpec, n_grid, seeds: int, seed: int = 0,
                     estimator: str = "css") -> ConsistencyTable:
    """|delta_hat_n - delta0| on nested prefixes of one exact Gaussian path per seed."""
    N = max(n_grid)
    errs = np.empty((seeds, len(n_grid)))
    for s in range(seeds):
        x = simulate_exact_gaussian(spec0, N, replication_seed(seed, N, s)).values
        for j, n in enumerate(n_grid):
            res = _estimate(estimator, x[:n], spec0.order, spec0.theta)
            errs[s, j] = abs(res.theta_hat.delta - spec0.theta.delta)
    return ConsistencyTable(list(map(int, n_grid)), errs.tolist(),
                            np.median(errs, axis=0).tolist())


def truncation_mse_theory(theta: ParamVector, t_grid, sigma2: float = 1.0,
                          horizon: int = 1 << 19, ma_truncation: int | None = None) -> np.ndarray:
    """Exact E(e_t - eps_t)^2 = sigma2 sum_{s>=t} c_s^2, c_s = sum_{i<t} alpha_i beta_{s-i}.

    With ``ma_truncation`` = J the MA weights stop at lag J, which is the law of
    the truncated-MA simulator, and the sum is exact. Otherwise the sum over s
    is cut at ``horizon`` and the remaining tail is added by power-law
    extrapolation (c_s decays like s^{delta - 1}).
    """
    from .model import ar_coefficients, ma_weights

    alpha = ar_coefficients(theta, max(t_grid))
    beta = ma_weights(theta, ma_truncation if ma_truncation else horizon)
    out = []
    for t in t_grid:
        c = signal.fftconvolve(alpha[:t], beta)[t:]
        if ma_truncation:
            out.append(sigma2 * np.sum(c * c))
            continue
        c = c[: horizon - t]
        expo = 2.0 * (1.0 - theta.delta)
        tail = c[-1] ** 2 * horizon / (expo - 1.0)
        out.append(sigma2 * (np.sum(c * c) + tail))
    return np.array(out)
