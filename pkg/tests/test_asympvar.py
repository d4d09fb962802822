import math

import numpy as np
import pytest

from waverobe.arfima import ArfimaConfig, generate
from waverobe.asympvar import (RESIDUAL_TOLS, are_analytic, attach_ci, cl_closed_form, cov_u,
                               cov_v, d_infinity, k_integral, k_integral_report, lambda_grid,
                               mc_variance, memory_domain, plugin_memory, psi_hat,
                               rate_condition_value, rate_condition_warning, z_quantile)
from waverobe.errors import DomainError, InputError
from waverobe.estimator import default_weights, estimate_d
from waverobe.robust import ALL_KINDS, efficiency_bound, if_second_moment
from waverobe.wavelet import daubechies_spec, decompose

DB2 = daubechies_spec(2)
W5 = default_weights(5).w


# --- psi_hat ---------------------------------------------------------------

def test_psi_hat_vanishes_at_origin():
    for M in (1, 2, 4):
        assert psi_hat(0.0, daubechies_spec(M)) == 0


def test_psi_hat_matches_transform_of_sampled_wavelet():
    pywt = pytest.importorskip("pywt")
    _, psi, t = pywt.Wavelet("db2").wavefun(level=16)
    xi = np.array([0.5, 1.0, 2.0, math.pi, 5.0, 10.0, 30.0])
    dt = t[1] - t[0]
    ref = np.array([np.trapezoid(psi * np.exp(-1j * x * t), dx=dt) for x in xi])
    # |.| is blind to the time shift and reversal conventions of the sampler
    np.testing.assert_allclose(np.abs(psi_hat(xi, DB2)), np.abs(ref), atol=1e-10)


@pytest.mark.parametrize("M", [2, 4])
def test_psi_hat_parseval(M):
    spec = daubechies_spec(M)
    top = 2 ** 10 * math.pi
    nodes, weights = np.polynomial.legendre.leggauss(32)
    edges = np.linspace(0.0, top, 4097)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        x = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        total += 0.5 * (b - a) * np.dot(weights, np.abs(psi_hat(x, spec)) ** 2)
    assert abs(2 * total / (2 * math.pi) - 1) < 1e-4


@pytest.mark.parametrize("M", [2, 3, 5])
def test_psi_hat_small_frequency_order(M):
    spec = daubechies_spec(M)
    ratio = abs(psi_hat(1e-3, spec)) / abs(psi_hat(2e-3, spec))
    assert ratio == pytest.approx(2.0 ** -M, rel=1e-2)


def test_psi_hat_decay_db2():
    xi = np.geomspace(1.0, 1e4, 2000)
    scaled = np.abs(psi_hat(xi, DB2)) * (1 + xi)
    low, high = scaled[xi < 1e3].max(), scaled[xi >= 1e3].max()
    assert np.isfinite(high) and high <= low


def test_psi_hat_rejects_non_finite():
    with pytest.raises(InputError):
        psi_hat(np.inf, DB2)


# --- K(d) ------------------------------------------------------------------

def test_k_at_zero_is_two_pi():
    assert k_integral(0.0, DB2) == pytest.approx(2 * math.pi, abs=1e-3)


def test_k_self_convergence():
    a = k_integral(0.2, DB2, resolution=2)
    b = k_integral(0.2, DB2, resolution=4)
    assert a > 0 and abs(a - b) < 1e-4 * a


def test_k_frozen_values():
    # frozen from the resolution-doubling run above
    assert k_integral(0.2, DB2) == pytest.approx(3.35290864, rel=1e-7)
    assert k_integral(1.2, DB2) == pytest.approx(0.234037064, rel=1e-7)


def test_k_continuity():
    a, b = k_integral(0.2, DB2), k_integral(0.2 + 1e-4, DB2)
    assert abs(a - b) < 1e-2 * a


def test_k_report():
    rep = k_integral_report(0.2, DB2)
    assert rep.value == k_integral(0.2, DB2)
    assert rep.residual < 1e-6 and rep.segments > 0


@pytest.mark.parametrize("d", [2.6, 5.0, -3.0])
def test_k_domain(d):
    with pytest.raises(DomainError):
        k_integral(d, DB2)
    lo, hi = memory_domain(DB2)
    assert hi == 2.5 and lo < 0


# --- D_infinity --------------------------------------------------------------

def test_lambda_grid():
    g = lambda_grid(8)
    np.testing.assert_allclose(g, -math.pi + (np.arange(8) + 0.5) * math.pi / 4)


@pytest.mark.parametrize("u", range(4))
def test_d_infinity_bounded(u):
    t = d_infinity(u, 0.2, DB2)
    assert t.values.shape == (2048, 2 ** u)
    assert np.isfinite(t.max_modulus()) and t.max_modulus() < 10


def test_d_infinity_white_noise_real_non_negative():
    t = d_infinity(0, 0.0, DB2)
    assert np.max(np.abs(t.values.imag)) < 1e-14
    assert np.min(t.values.real) >= 0


@pytest.mark.parametrize("u", range(4))
def test_d_infinity_periodic(u):
    v = d_infinity(u, 0.2, DB2).values
    step = np.max(np.abs(np.diff(v, axis=0)))
    wrap = np.max(np.abs(v[0] - v[-1]))
    assert wrap <= 2 * step


@pytest.mark.parametrize("d,l_max", [(1.2, 64), (0.2, 256)])
def test_d_infinity_tail(d, l_max):
    assert d_infinity(0, d, DB2, l_max=l_max).tail < 1e-6


def test_d_infinity_validation():
    with pytest.raises(InputError):
        d_infinity(0, 0.2, DB2, l_max=5)
    with pytest.raises(InputError):
        d_infinity(0, 0.2, DB2, grid=15)
    with pytest.raises(DomainError):
        d_infinity(0, 3.0, DB2)


def test_fourier_coefficients_real_and_k_normalized():
    t = d_infinity(0, 0.2, DB2)
    a = t.fourier(16)
    assert a.shape == (33, 1)
    np.testing.assert_allclose(a[::-1], a, atol=1e-12)
    assert a[16, 0] == pytest.approx(k_integral(0.2, DB2), rel=1e-4)


# --- covariance matrices -------------------------------------------------------

@pytest.mark.parametrize("d", [0.0, 0.2, 1.2])
@pytest.mark.parametrize("kind", ["CL", "MAD", "CR"])
def test_cov_v_symmetric_psd_positive(d, kind):
    V = cov_v(d, 5, kind)
    assert np.max(np.abs(V.entries - V.entries.T)) < 1e-10
    assert np.linalg.eigvalsh(V.entries).min() > -1e-8
    assert V.quad(W5) > 0
    assert V.flavor == "V" and V.p_max == 20


@pytest.mark.parametrize("kind", ["MAD", "CR"])
@pytest.mark.parametrize("d", [0.0, 0.2, 1.2])
def test_p_series_residual(kind, d):
    assert cov_v(d, 5, kind).residuals["p_series"] < RESIDUAL_TOLS["p_series"]


@pytest.mark.parametrize("d", [0.0, 0.2, 1.2])
def test_cl_generic_sum_bit_identical(d):
    a = cov_v(d, 5, "CL", p_max=20).entries
    b = cov_v(d, 5, "CL", p_max=2).entries
    assert np.array_equal(a, b)


@pytest.mark.parametrize("kind", ["CL", "MAD", "CR"])
def test_white_noise_v_is_diagonal(kind):
    # orthonormal DWT of white noise: i.i.d. coefficients within and across scales
    V = cov_v(0.0, 5, kind).entries
    expected = np.diag(4 * 2.0 ** np.arange(6) * if_second_moment(kind))
    np.testing.assert_allclose(V, expected, atol=1e-6 * expected.max())


@pytest.mark.parametrize("d", [0.0, 0.2, 1.2])
def test_cl_matches_closed_form(d):
    U = cov_u(d, 5, "CL").entries
    C = cl_closed_form(d, 5)
    assert np.max(np.abs(U - C) / np.abs(C).max()) < 1e-4


def test_fstar_scaling():
    a = cov_u(0.2, 5, "CR", fstar0=1.0).entries
    b = cov_u(0.2, 5, "CR", fstar0=2.0).entries
    np.testing.assert_allclose(b, 4 * a, rtol=1e-14)


@pytest.mark.parametrize("d", [0.0, 0.2, 1.2])
@pytest.mark.parametrize("kind", ["MAD", "CR"])
def test_diagonal_efficiency_bound(d, kind):
    cl = np.diag(cov_u(d, 5, "CL").entries)
    other = np.diag(cov_u(d, 5, kind).entries)
    assert np.all(cl / other >= efficiency_bound(kind) - 1e-3)


def test_analytic_are_at_zero_equals_bound():
    for kind in ("MAD", "CR"):
        assert are_analytic(0.0, 5, kind) == pytest.approx(efficiency_bound(kind), rel=1e-6)


@pytest.mark.parametrize("kind,target", [("CR", 0.70), ("MAD", 0.43)])
def test_analytic_are_example(kind, target):
    assert abs(are_analytic(0.2, 5, kind) - target) <= 0.08


def test_truncation_residuals_reported():
    V = cov_v(0.2, 5, "CR")
    assert set(V.residuals) == {"p_series", "tau_series", "l_series"}
    assert V.residuals["tau_series"] < RESIDUAL_TOLS["tau_series"]
    assert V.residuals["l_series"] < RESIDUAL_TOLS["l_series"]
    assert V.warnings == ()


def test_cov_validation():
    with pytest.raises(InputError):
        cov_v(0.2, 5, "CL", p_max=1)
    with pytest.raises(InputError):
        cov_v(0.2, 0, "CL")


# --- diagnostics and CI ----------------------------------------------------------

def test_rate_condition():
    assert rate_condition_value(4096, 3, 1.0) == pytest.approx(8.0)
    assert rate_condition_warning(4096, 3) is not None
    assert rate_condition_warning(4096, 5) is None


def test_z_quantile():
    assert z_quantile(0.95) == pytest.approx(1.959963985, abs=1e-9)
    with pytest.raises(InputError):
        z_quantile(1.0)


@pytest.mark.parametrize("d,expected", [(0.2, 0.2), (0.5, 0.499), (1.4995, 1.499),
                                        (-0.5, -0.501), (1.5003, 1.501)])
def test_plugin_memory(d, expected):
    assert plugin_memory(d) == pytest.approx(expected, abs=1e-12)


def test_attach_ci_analytic():
    x = generate(ArfimaConfig(0.2, 4096, seed=12)).values
    pyr = decompose(x, DB2)
    est = estimate_d(pyr, 3, 5, "CL")
    out = attach_ci(est, pyr, method="analytic")
    var = cov_v(plugin_memory(est.d_hat), 5, "CL", DB2).quad(W5)
    assert out.se == pytest.approx(math.sqrt(var / (4096 / 8)), rel=1e-12)
    assert out.ci[0] < est.d_hat < out.ci[1]
    assert out.ci_method == "analytic"
    with pytest.raises(InputError):
        attach_ci(est, pyr, method="bootstrap")


def test_mc_variance_needs_reps():
    with pytest.raises(InputError):
        mc_variance(0.2, 4096, 3, 5, "CL", reps=10)


def test_mc_variance_seed_stability():
    a = mc_variance(0.0, 4096, 3, 5, "CL", reps=500, seed=1)
    b = mc_variance(0.0, 4096, 3, 5, "CL", reps=500, seed=2)
    assert a > 0 and math.isfinite(a)
    assert abs(a / b - 1) < 0.20


def test_mc_variance_ratio_cr_at_02():
    cl = mc_variance(0.2, 4096, 3, 5, "CL", reps=500, seed=2012)
    cr = mc_variance(0.2, 4096, 3, 5, "CR", reps=500, seed=2012)
    assert abs(cl / cr - 0.70) <= 0.08


def test_mc_variance_ratio_mad_at_12():
    cl = mc_variance(1.2, 4096, 3, 5, "CL", reps=500, seed=2012)
    mad = mc_variance(1.2, 4096, 3, 5, "MAD", reps=500, seed=2012)
    assert abs(cl / mad - 0.45) <= 0.08
