import numpy as np
import pytest
from scipy import integrate, special

from longmem import (ModelSpec, ParamVector, minimize, objective, objective_gap,
                     sample_autocovariances, simulate_exact_gaussian, whittle_estimate,
                     whittle_objective)
from longmem.errors import ContractError, NumericalError
from longmem.whittle import build_workspace, xi_coefficients, xi_exact


def path(n, seed, delta=0.3):
    return simulate_exact_gaussian(ModelSpec(ParamVector(delta)), n, seed).values


def test_sample_autocovariances_hand_values():
    np.testing.assert_allclose(sample_autocovariances([1.0, 1.0, 1.0]), [1, 2 / 3, 1 / 3])
    np.testing.assert_array_equal(sample_autocovariances(np.zeros(5)), 0.0)


@pytest.mark.parametrize("n", [1024, 5000])
def test_direct_and_fft_autocovariances_agree(n):
    x = path(n, 3)
    direct = sample_autocovariances(x, "direct")
    fft = sample_autocovariances(x, "fft")
    np.testing.assert_allclose(fft, direct, atol=1e-10)
    # defining sum, no mean correction
    j = 17
    assert direct[j] == pytest.approx(np.dot(x[:-j], x[j:]) / n, abs=1e-12)


def test_xi_white_noise():
    np.testing.assert_allclose(xi_exact(ParamVector(1e-12), 4), [1, 0, 0, 0, 0], atol=1e-10)


def test_xi0_parseval_quadrature():
    d = 0.3
    integrand = lambda lam: abs(1 - np.exp(1j * lam)) ** (2 * d)  # noqa: E731
    val, _ = integrate.quad(integrand, 0, np.pi, epsabs=1e-13, epsrel=1e-12)
    xi0 = xi_exact(ParamVector(d), 0)[0]
    assert xi0 == pytest.approx(val / np.pi, abs=1e-6)
    assert xi0 == pytest.approx(special.gamma(1 + 2 * d) / special.gamma(1 + d) ** 2, rel=1e-12)


def test_xi0_dominates_other_lags():
    xi = xi_exact(ParamVector(0.3), 100)
    assert np.all(xi[0] > np.abs(xi[1:]))


@pytest.mark.parametrize("th", [ParamVector(0.3), ParamVector(0.1, (0.5,), (-0.3,))])
def test_truncated_xi_within_tail_tolerance_of_exact(th):
    exact = xi_exact(th, 200)
    trunc = xi_coefficients(th, 200, tail_tol=1e-8)
    # |sum_{k>J} alpha_k alpha_{k+j}| <= sum_{k>J} alpha_k^2, which is held below tol * xi_0
    assert np.max(np.abs(trunc - exact)) < 1e-8 * exact[0]


def test_xi_doubling_truncation_changes_less_than_tolerance():
    th = ParamVector(0.4)
    tol = 1e-6
    a = xi_coefficients(th, 50, truncation=1 << 12, tail_tol=tol)
    b = xi_coefficients(th, 50, truncation=1 << 13, tail_tol=tol)
    assert np.max(np.abs(a - b)) < tol * a[0]


def test_xi_unreachable_tolerance_is_an_error():
    with pytest.raises(NumericalError):
        xi_coefficients(ParamVector(0.05), 10, tail_tol=1e-15, max_truncation=1 << 12)


def test_whittle_objective_reduces_to_c0():
    x = path(300, 4)
    ws = build_workspace(x)
    assert whittle_objective(ParamVector(1e-12), ws) == pytest.approx(np.mean(x * x), rel=1e-9)
    assert whittle_objective(ParamVector(0.3), build_workspace(np.zeros(50))) == 0.0


def test_whittle_and_css_objectives_close_at_truth():
    th = ParamVector(0.3)
    gaps = []
    for n in (256, 2048):
        x = path(n, 77)
        gaps.append(abs(whittle_objective(th, build_workspace(x)) - objective(th, x)))
    assert gaps[1] < gaps[0]


def test_whittle_estimate_band_and_agreement():
    x = path(2048, 2024)
    w = whittle_estimate(x)
    c = minimize(x, compute_hessian=False)
    assert w.converged
    assert w.estimator == "whittle"
    assert abs(w.theta_hat.delta - 0.3) < 0.06
    assert abs(w.theta_hat.delta - c.theta_hat.delta) < 2 * np.sqrt(6 / np.pi ** 2 / 2048)


def test_whittle_estimate_scale_invariance():
    x = path(512, 5)
    a = whittle_estimate(x)
    b = whittle_estimate(4.0 * x)
    assert b.theta_hat.delta == pytest.approx(a.theta_hat.delta, abs=1e-6)


def test_objective_gap_examples():
    grid = [ParamVector(0.3), ParamVector(0.1, (0.5,), (0.3,))]
    assert objective_gap(np.zeros(40), grid) == 0.0
    x = path(4096, 13)
    small = objective_gap(x[:256], grid)
    large = objective_gap(x[:2048], grid)
    assert large < small
    gamma0 = special.gamma(0.4) / special.gamma(0.7) ** 2
    assert objective_gap(x, [ParamVector(0.3)]) < 0.05 * gamma0


def test_truncated_xi_path_gives_the_same_estimate():
    x = path(256, 6)
    exact = whittle_estimate(x)
    trunc = whittle_estimate(x, method="truncated")
    assert trunc.theta_hat.delta == pytest.approx(exact.theta_hat.delta, abs=1e-5)


def test_unknown_xi_method_is_rejected():
    with pytest.raises(ContractError):
        build_workspace(np.ones(30), method="circulant")
