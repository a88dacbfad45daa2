import json

import numpy as np
import pytest

from longmem import (ContractError, InnovationLaw, ModelSpec, MonteCarloConfig, ParamVector,
                     consistency_path, run_experiment, score_replacement_diagnostic,
                     simulate_exact_gaussian, truncation_diagnostic)
from longmem.config import dumps
from longmem.montecarlo import (aggregate, default_theta_grid, objective_gap_diagnostic,
                                score_gap_components, truncation_mse_theory)

FRAC03 = ModelSpec(ParamVector(0.3))
WHITE = ModelSpec(ParamVector(1e-12))


def small_config(**kw):
    base = dict(spec0=FRAC03, n_grid=(128, 256), replications=4, master_seed=99)
    base.update(kw)
    return MonteCarloConfig(**base)


# ---------------------------------------------------------------- config


@pytest.mark.parametrize("kw", [dict(replications=0), dict(n_grid=(256, 128)),
                                dict(n_grid=(128, 128)), dict(estimators=("mle",)),
                                dict(diagnostics=("bogus",)), dict(simulator="circulant")])
def test_config_validation(kw):
    with pytest.raises(ContractError):
        small_config(**kw)


def test_simulator_resolution():
    assert small_config().resolved_simulator == "exact-gaussian"
    assert small_config(law=InnovationLaw("uniform")).resolved_simulator == "truncated-ma"


# ---------------------------------------------------------------- run_experiment


def test_single_replication_bookkeeping():
    rep = run_experiment(MonteCarloConfig(FRAC03, (2048,), 1, master_seed=3))
    assert len(rep.records) == 1
    rec = rep.records[0]
    assert rec["n"] == 2048 and rec["replication"] == 0 and rec["estimator"] == "css"
    agg = rep.aggregates["css"][0]
    assert agg["replications"] == 1 and agg["low_confidence"]


def test_report_is_pure_function_of_config():
    cfg = small_config(estimators=("css", "whittle"))
    a = dumps(run_experiment(cfg).to_dict())
    b = dumps(run_experiment(cfg).to_dict())
    assert a == b
    doc = json.loads(a)
    assert set(doc) == {"config", "records", "aggregates", "diagnostics"}
    assert len(doc["records"]) == 2 * 2 * 4


def test_parallel_and_serial_reports_match():
    cfg = small_config()
    serial = dumps(run_experiment(cfg, workers=1).to_dict())
    parallel = dumps(run_experiment(cfg, workers=2).to_dict())
    assert serial == parallel


def test_worker_count_reads_environment(monkeypatch):
    from longmem.montecarlo import worker_count

    monkeypatch.setenv("LONGMEM_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(1) == 1
    monkeypatch.delenv("LONGMEM_THREADS")
    assert worker_count() == 1


def test_records_reproducible_individually():
    cfg = small_config(replications=3)
    full = run_experiment(cfg).records
    alone = run_experiment(small_config(replications=2)).records
    # replication r of size n draws the same stream whatever R is
    pick = [r for r in full if r["replication"] < 2]
    assert [r["theta_hat"] for r in pick] == [r["theta_hat"] for r in alone]


def test_summary_table_lists_each_size():
    text = run_experiment(small_config(replications=2)).summary_table()
    assert "128" in text and "256" in text


# ---------------------------------------------------------------- aggregate


def _rec(delta, converged=True, half=0.05):
    return {"estimator": "css", "n": 100, "replication": 0, "theta_hat": [delta],
            "converged": converged, "ci95": [[delta - half, delta + half]]}


def test_aggregate_statistics_by_hand():
    recs = [_rec(0.28), _rec(0.36), _rec(0.31), _rec(0.9, converged=False)]
    row = aggregate(recs, FRAC03, 100)
    assert row["replications_used"] == 3 and row["nonconverged"] == 1
    assert row["mean_bias"][0] == pytest.approx((0.28 + 0.36 + 0.31) / 3 - 0.3)
    assert row["coverage"][0] == pytest.approx(2 / 3)
    dev = np.sqrt(100) * (np.array([0.28, 0.36, 0.31]) - 0.3)
    assert row["empirical_covariance"][0][0] == pytest.approx(dev.var(ddof=1))
    assert row["variance_ratio"][0] == pytest.approx(dev.var(ddof=1) * np.pi ** 2 / 6)
    assert 0.0 <= row["coverage"][0] <= 1.0


def test_aggregate_with_no_converged_replications():
    row = aggregate([_rec(0.3, converged=False)], FRAC03, 100)
    assert row["replications_used"] == 0 and np.isnan(row["ks_pvalue"])


# ---------------------------------------------------------------- diagnostics


def test_truncation_curve_vanishes_for_white_noise():
    curve = truncation_diagnostic(WHITE, 256, 5, seed=1)
    assert curve.t == [16, 32, 64, 128, 256]
    assert max(curve.mse) < 1e-5


def test_truncation_curve_matches_exact_mse():
    spec = ModelSpec(ParamVector(0.4))
    curve = truncation_diagnostic(spec, 256, 300, seed=4)
    # the simulator's MA weights stop at 100 n; the exact MSE of that process is the oracle
    theory = truncation_mse_theory(spec.theta, curve.t, ma_truncation=100 * 256)
    # mean of R squared Gaussians: relative sd sqrt(2 / R) ~ 8%
    np.testing.assert_allclose(curve.mse, theory, rtol=0.25)


def test_score_gap_vanishes_for_white_noise():
    curve = score_replacement_diagnostic(WHITE, (64, 128), 5, seed=2)
    assert max(curve.median_scaled_gap) < 1e-5
    assert curve.presample_budget == [640, 1280]


def test_score_gap_needs_presample_and_innovations():
    ts = simulate_exact_gaussian(FRAC03, 64, seed=1)
    with pytest.raises(ContractError):
        score_gap_components(FRAC03.theta, ts)


def test_r1_component_scales_like_log_n_over_n():
    curve = score_replacement_diagnostic(FRAC03, (128, 256, 512, 1024), 100, seed=12)
    n = np.array(curve.n, dtype=float)
    scaled = np.array(curve.median_r1) * n / np.log(n)
    assert np.all(scaled / scaled[0] < 3) and np.all(scaled / scaled[0] > 1 / 3)


def test_objective_gap_diagnostic_shapes():
    grid = default_theta_grid()
    assert len(grid) == 27
    curve = objective_gap_diagnostic(FRAC03, (64, 256), 3, seed=1, theta_grid=grid[:4])
    assert len(curve.gaps) == 3 and len(curve.median_gap) == 2


def test_consistency_path_is_deterministic():
    a = consistency_path(FRAC03, (128, 512), 3, seed=6)
    b = consistency_path(FRAC03, (128, 512), 3, seed=6)
    assert a == b
    assert len(a.errors) == 3 and len(a.errors[0]) == 2


def test_consistency_path_white_noise_truth():
    table = consistency_path(WHITE, (256, 2048), 50, seed=8)
    # about half the estimates sit at the 0.001 clamp, which pins the median; the mean
    # of the clamped half-normal still scales like 1/sqrt(n) (expected ratio ~0.35)
    mean = np.mean(table.errors, axis=0)
    assert mean[1] < 0.7 * mean[0]
