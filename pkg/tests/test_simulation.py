import numpy as np
import pytest
from scipy import special, stats

from longmem import (ContractError, InnovationLaw, ModelSpec, NumericalError, ParamVector,
                     ValidationError, autocovariance, draw_innovations, minimize,
                     simulate_exact_gaussian, simulate_truncated_ma)
from longmem.css import _filter
from longmem.montecarlo import truncation_mse_theory
from longmem.simulation import durbin_levinson, read_csv, replication_seed, write_csv

FRAC03 = ModelSpec(ParamVector(0.3))
GAMMA0_03 = special.gamma(0.4) / special.gamma(0.7) ** 2


# ---------------------------------------------------------------- innovations


def test_uniform_fourth_moment():
    e = draw_innovations(InnovationLaw("uniform"), 10 ** 6, 1.0, seed=1)
    assert np.mean(e ** 4) == pytest.approx(9 / 5, rel=0.02)
    assert np.max(np.abs(e)) <= np.sqrt(3.0)


def test_gaussian_variance():
    e = draw_innovations(InnovationLaw(), 10 ** 6, 2.5, seed=2)
    assert np.var(e) == pytest.approx(2.5, rel=0.005)


def test_student_t_variance_after_scaling():
    e = draw_innovations(InnovationLaw("student-t", 6.0), 10 ** 6, 1.0, seed=3)
    assert np.var(e) == pytest.approx(1.0, rel=0.02)


@pytest.mark.parametrize("df", [None, 4.0, 3.0])
def test_student_t_needs_finite_fourth_moment(df):
    with pytest.raises(ContractError):
        InnovationLaw("student-t", df)


def test_unknown_law_is_rejected():
    with pytest.raises(ContractError):
        InnovationLaw("cauchy")


def test_replication_streams_are_distinct_and_stable():
    a = draw_innovations(InnovationLaw(), 5, seed=replication_seed(7, 1024, 0))
    b = draw_innovations(InnovationLaw(), 5, seed=replication_seed(7, 1024, 1))
    c = draw_innovations(InnovationLaw(), 5, seed=replication_seed(7, 1024, 0))
    assert not np.allclose(a, b)
    np.testing.assert_array_equal(a, c)


# ---------------------------------------------------------------- exact Gaussian


def test_exact_gaussian_is_deterministic():
    a = simulate_exact_gaussian(FRAC03, 500, seed=11)
    b = simulate_exact_gaussian(FRAC03, 500, seed=11)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.method == "exact-gaussian" and a.approximate_innovations
    assert a.presample is None


def test_dense_and_sequential_paths_agree():
    from longmem import simulation

    dense = simulate_exact_gaussian(FRAC03, 300, seed=5).values
    limit = simulation._DENSE_LIMIT
    try:
        simulation._DENSE_LIMIT = 10
        seq = simulate_exact_gaussian(FRAC03, 300, seed=5).values
    finally:
        simulation._DENSE_LIMIT = limit
    np.testing.assert_allclose(seq, dense, atol=1e-10)


def test_exact_gaussian_covariance_fidelity():
    spec = ModelSpec(ParamVector(0.3, (0.4,)), 1.5)
    n, R = 2048, 200
    gamma = autocovariance(spec, 5)
    acv = np.empty((R, 6))
    for r in range(R):
        x = simulate_exact_gaussian(spec, n, seed=replication_seed(3, n, r)).values
        acv[r] = [np.dot(x[: n - j], x[j:]) / (n - j) for j in range(6)]
    mc_se = acv.std(axis=0, ddof=1) / np.sqrt(R)
    assert np.all(np.abs(acv.mean(axis=0) - gamma) < 3 * mc_se)


def test_durbin_levinson_breakdown_is_reported():
    with pytest.raises(NumericalError):
        list(durbin_levinson(np.array([1.0, 1.5, 0.2])))


def test_invalid_model_is_rejected():
    with pytest.raises(ValidationError):
        simulate_exact_gaussian(ModelSpec(ParamVector(0.6)), 10, seed=0)


@pytest.mark.slow
def test_exact_gaussian_large_sample_moments():
    white = simulate_exact_gaussian(ModelSpec(ParamVector(1e-12)), 10 ** 5, seed=21).values
    assert np.var(white) == pytest.approx(1.0, abs=0.02)
    x = simulate_exact_gaussian(FRAC03, 10 ** 5, seed=22).values
    rho1 = np.dot(x[:-1], x[1:]) / np.dot(x, x)
    assert rho1 == pytest.approx(0.3 / 0.7, abs=0.02)


# ---------------------------------------------------------------- truncated MA


def test_truncated_ma_white_noise_returns_innovations():
    ts = simulate_truncated_ma(ModelSpec(ParamVector(1e-12)), 200, seed=4)
    np.testing.assert_allclose(ts.values, ts.innovations, atol=1e-9)


def test_truncated_ma_record_layout():
    n = 128
    ts = simulate_truncated_ma(FRAC03, n, seed=5)
    assert ts.values.size == n and ts.innovations.size == n
    assert ts.presample.size == 10 * n == ts.meta["m_pre"]
    assert ts.meta["j_beta"] == 100 * n
    assert ts.method == "truncated-ma" and not ts.approximate_innovations


def test_truncated_ma_is_deterministic():
    a = simulate_truncated_ma(FRAC03, 256, law=InnovationLaw("uniform"), seed=9)
    b = simulate_truncated_ma(FRAC03, 256, law=InnovationLaw("uniform"), seed=9)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.presample, b.presample)


def test_truncated_ma_presample_guard():
    with pytest.raises(ContractError):
        simulate_truncated_ma(FRAC03, 100, m_pre=500, seed=1)


def test_truncated_ma_variance_matches_closed_form():
    n = 4096
    second = [np.mean(simulate_truncated_ma(FRAC03, n, seed=(41, s)).values ** 2)
              for s in range(20)]
    assert np.median(second) == pytest.approx(GAMMA0_03, rel=0.03)


def test_innovation_record_law_of_large_numbers():
    n = 20000
    eps = simulate_truncated_ma(ModelSpec(ParamVector(0.2), 2.0), n, seed=8).innovations
    assert abs(eps.mean()) < 5 / np.sqrt(n)
    assert abs(eps.var() - 2.0) < 5 / np.sqrt(n) * 2.0


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_truncated_ma_inverts_back_to_innovations(seed):
    # filtering presample + sample with alpha leaves exactly the truncation error at
    # horizon m_pre + t, whose sd is known in closed form
    n = 1024
    th = ParamVector(0.3)
    ts = simulate_truncated_ma(ModelSpec(th), n, seed=seed)
    e, _ = _filter(th, np.concatenate((ts.presample, ts.values)), False)
    err = e[-n:] - ts.innovations
    sd = np.sqrt(truncation_mse_theory(th, [ts.meta["m_pre"] + n // 2]))[0]
    assert sd < 0.005
    assert np.max(np.abs(err[n // 2:])) < 5 * sd


@pytest.mark.slow
def test_simulators_give_indistinguishable_estimates():
    n, R = 1024, 300
    a, b = [], []
    for r in range(R):
        x = simulate_exact_gaussian(FRAC03, n, seed=replication_seed(17, n, r)).values
        y = simulate_truncated_ma(FRAC03, n, seed=replication_seed(18, n, r)).values
        a.append(minimize(x, compute_hessian=False).theta_hat.delta)
        b.append(minimize(y, compute_hessian=False).theta_hat.delta)
    assert stats.ks_2samp(a, b).pvalue > 0.01


# ---------------------------------------------------------------- CSV


def test_csv_round_trip_is_exact(tmp_path):
    x = simulate_exact_gaussian(FRAC03, 50, seed=1).values
    path = tmp_path / "x.csv"
    write_csv(path, x)
    text = path.read_text()
    assert text.startswith("x\n") and text.endswith("\n") and "\r" not in text
    np.testing.assert_array_equal(read_csv(path), x)


@pytest.mark.parametrize("content", ["", "x\n", "x\n1.0\nabc\n", "x\n1.0\nnan\n"])
def test_malformed_csv_is_rejected(tmp_path, content):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(ContractError):
        read_csv(path)
