import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import exp1

from wssuscap.mi_kernel import (MIError, coherent_kernel, e_log_awgn, mi_cm_coherent,
                                mi_cm_for_bounds, mi_cm_taylor)

# 10^7-sample Monte-Carlo run, Philox seed 20261016
MC_RHO1 = 0.570528739608694
MC_RHO1_SE = 0.0003500697204305577


def test_zero_snr():
    assert mi_cm_coherent(0.0).value == 0.0
    assert mi_cm_coherent(0.0, "quadrature").value == 0.0
    assert mi_cm_taylor(0.0) == 0.0
    assert e_log_awgn(0.0) == 0.0


def test_bad_arguments():
    with pytest.raises(MIError):
        mi_cm_coherent(-1.0)
    with pytest.raises(MIError):
        mi_cm_coherent(1.0, n_samples=999)
    with pytest.raises(MIError):
        mi_cm_coherent(1.0, method="bogus")


def test_small_snr_expansion():
    rho = 1e-3
    q = mi_cm_coherent(rho, "quadrature").value
    assert abs(q - (rho - rho * rho)) < 1e-5
    mc = mi_cm_coherent(rho, seed=3)
    assert mc.stderr < 1e-5
    assert abs(mc.value - (rho - rho * rho)) < max(1e-5, 3 * mc.stderr)


def test_rho_one_against_frozen_oracle():
    q = mi_cm_coherent(1.0, "quadrature").value
    assert abs(q - MC_RHO1) < 3 * MC_RHO1_SE
    mc = mi_cm_coherent(1.0, seed=0)
    assert abs(mc.value - MC_RHO1) < 3 * np.hypot(mc.stderr, MC_RHO1_SE)


def test_seed_determinism():
    a = mi_cm_coherent(0.7, seed=42, n_samples=20_000)
    b = mi_cm_coherent(0.7, seed=42, n_samples=20_000)
    assert a == b


def test_taylor_surrogate():
    assert mi_cm_taylor(1e-2) == pytest.approx(0.0099)
    assert mi_cm_taylor(0.5) == pytest.approx(0.25)
    # far outside the surrogate's range it is materially wrong
    mc = mi_cm_coherent(0.5, seed=8)
    assert mc.value - 0.25 > 50 * mc.stderr


@pytest.mark.parametrize("rho,limit", [(1e-2, 0.2), (1e-3, 0.05), (1e-4, 0.01)])
def test_taylor_ratio_monte_carlo(rho, limit):
    mc = mi_cm_coherent(rho, seed=2, n_samples=4 * 10**6)
    assert abs(mc.value - (rho - rho * rho)) / rho**2 < limit


@pytest.mark.parametrize("rho,limit", [(1e-2, 0.2), (1e-3, 0.05), (1e-4, 0.01)])
def test_taylor_ratio_quadrature(rho, limit):
    q = mi_cm_coherent(rho, "quadrature").value
    assert abs(q - (rho - rho * rho)) / rho**2 < limit


def test_quadrature_agrees_with_monte_carlo_over_range():
    for rho in np.logspace(-3, 2, 6):
        q = mi_cm_coherent(rho, "quadrature").value
        mc = mi_cm_coherent(rho, seed=int(rho * 1000), n_samples=200_000)
        assert abs(q - mc.value) < 4 * mc.stderr


def test_kernel_against_direct_quadrature():
    # J(s) = 2 s - E log I0(2 sqrt(s) |sqrt(s) + w|), |sqrt(s) + w| Rician
    from scipy.special import i0e
    for s in (0.05, 1.0, 7.0):
        def dens(r):
            return 2 * r * np.exp(-(r - np.sqrt(s)) ** 2) * i0e(2 * r * np.sqrt(s))
        logi0 = lambda z: np.log(i0e(z)) + z
        ref, _ = quad(lambda r: dens(r) * logi0(2 * np.sqrt(s) * r), 0, np.sqrt(s) + 12,
                      epsabs=1e-13, epsrel=1e-12, limit=200)
        assert coherent_kernel(s)[0] == pytest.approx(2 * s - ref, abs=1e-9)


def test_for_bounds_switch():
    v, how = mi_cm_for_bounds(5e-5)
    assert how == "taylor" and v == mi_cm_taylor(5e-5)
    v, how = mi_cm_for_bounds(2e-4)
    # next term of the expansion is about 2 rho^3
    assert how == "quadrature" and abs(v - (2e-4 - 4e-8)) < 4 * (2e-4) ** 3


def test_e_log_awgn_values():
    assert e_log_awgn(1.0) == pytest.approx(np.e * exp1(1.0), rel=1e-14)
    assert e_log_awgn(1.0) == pytest.approx(0.596347, abs=1e-6)
    rng = np.random.Generator(np.random.Philox(9))
    g = rng.exponential(size=10**6)
    samples = np.log1p(3.0 * g)
    assert abs(e_log_awgn(3.0) - samples.mean()) < 3 * samples.std() / 1e3


def test_e_log_awgn_high_snr():
    euler = np.euler_gamma
    assert abs(e_log_awgn(1e7) - (np.log(1e7) - euler)) < 1e-5
    # next order: (log rho - gamma + 1) / rho
    rho = 1e6
    refined = np.log(rho) - euler + (np.log(rho) - euler + 1) / rho
    assert abs(e_log_awgn(rho) - refined) < 1e-9
    # branch switch at rho = 1/50 is continuous
    assert e_log_awgn(1 / 50 * (1 - 1e-12)) == pytest.approx(e_log_awgn(1 / 50), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-4, 10.0))
def test_data_processing_sandwich(rho):
    i = mi_cm_coherent(rho, "quadrature").value
    assert 0 <= i <= e_log_awgn(rho)


def test_monotone_and_concave():
    rho = np.logspace(-4, 2, 40)
    mi = np.array([mi_cm_coherent(r, "quadrature").value for r in rho])
    ea = np.array([e_log_awgn(r) for r in rho])
    assert np.all(np.diff(mi) > 0) and np.all(np.diff(ea) > 0)
    lin = np.linspace(0.1, 20, 50)
    ev = np.array([e_log_awgn(r) for r in lin])
    assert np.all(np.diff(ev, 2) < 0)
