import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.linalg import toeplitz

from wssuscap import spectral
from wssuscap.scattering import (Brick, CorrelationSeq, GridParams, Profile, make_scattering,
                                 Separable)
from wssuscap.spectral import (HermitianToeplitz, SpectralError, circulant_diagonals,
                               fejer_circulant_diagonals, logdet_capacity, mmse_logdet_lb_check,
                               noncausal_mmse, spectrum_from_seq, szego_check, two_level_limit,
                               two_level_logdet)
from wssuscap.validate import random_psd_sequence


def direct_circulant(r, F):
    """O(F^2) evaluation of c_i straight from the defining sum."""
    m = np.arange(F)
    return np.array([np.real((2 / F) * np.sum((F - m) * r * np.exp(-2j * np.pi * i * m / F)))
                     - 1 for i in range(F)])


def test_toeplitz_matrix_layout():
    t = np.array([2.0, 1 + 1j, 0.5j])
    M = HermitianToeplitz(t, 3).matrix()
    # entry (i, j) = t_{i-j}, t_{-k} = conj(t_k)
    assert np.allclose(M, toeplitz(t, np.conj(t)))
    assert M[2, 0] == t[2] and M[0, 2] == np.conj(t[2])


def test_logdet_examples():
    assert logdet_capacity(HermitianToeplitz([1.0], 4), 1.0) == pytest.approx(4 * np.log(2))
    assert logdet_capacity(HermitianToeplitz([1.0, 0.5], 3), 0.0) == 0.0
    assert logdet_capacity(HermitianToeplitz([1.0, 0.5], 2), 1.0) == pytest.approx(np.log(3.75))


def test_logdet_rejects_non_psd():
    with pytest.raises(SpectralError):
        logdet_capacity(HermitianToeplitz([1.0, 2.0], 2), 1.0)


def test_circulant_examples():
    assert np.allclose(circulant_diagonals([1.0], 7).values, 1.0)
    c = circulant_diagonals([1.0, 0.5], 2).values
    assert c == pytest.approx([1.5, 0.5])
    with pytest.raises(SpectralError):
        circulant_diagonals([0.9, 0.1], 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 40))
def test_circulant_fft_matches_direct_sum(seed, F):
    r = random_psd_sequence(np.random.default_rng(seed), F)
    c = circulant_diagonals(r, F).values
    assert np.allclose(c, direct_circulant(r, F), atol=1e-12)
    assert abs(c.sum() - F) < 1e-10 * F


def _brick_freq_profile(K, F, tau0):
    sf = make_scattering(Brick(), 5.0, tau0)
    return sf.delay.fourier(np.arange(K) * F), sf.delay


@pytest.mark.parametrize("K", [4096, 20000])
def test_fejer_diagonals_match_dft(K):
    F, tau0 = 3.53e3, 0.5e-6
    r, prof = _brick_freq_profile(K, F, tau0)
    c_dft = circulant_diagonals(r, K).values
    edges, vals = prof.steps()
    M = 1500
    c = fejer_circulant_diagonals(-edges[::-1] * F, vals[::-1] / F, K, M)
    i = np.arange(-M, M + 1) % K
    assert np.max(np.abs(c - c_dft[i])) < 1e-9 * np.max(c_dft)


def test_szego_examples():
    assert szego_check([1.0], 1.5, 9) == pytest.approx((np.log(2.5), np.log(2.5)), abs=1e-10)
    assert szego_check([1.0, 0.3], 0.0, 5) == (0.0, 0.0)
    seq = 0.5 ** np.arange(200)
    # closed-form spectrum of the geometric sequence: (1 - a^2) / |1 - a e^{-j2pi t}|^2
    a = 0.5
    S = lambda t: (1 - a * a) / (1 - 2 * a * np.cos(2 * np.pi * t) + a * a)
    ref, _ = quad(lambda t: np.log1p(S(t)), -0.5, 0.5, epsabs=1e-14, epsrel=1e-13)
    gaps = []
    for N in (8, 16, 32, 64):
        fin, lim = szego_check(seq, 1.0, N)
        assert lim == pytest.approx(ref, abs=1e-10)
        gaps.append(fin - lim)
    assert all(g > 0 for g in gaps)
    # the gap is O(1/N): each doubling roughly halves it
    for g0, g1 in zip(gaps, gaps[1:]):
        assert 0.4 < g1 / g0 < 0.6


def test_binary_infimum_two_point_enumeration():
    inf, lb = mmse_logdet_lb_check([1.0, 0.5], 1.0, 2)
    assert inf == pytest.approx(min(np.log(2), 0.5 * np.log(3.75)))
    ref, _ = quad(lambda t: np.log1p(1 + np.cos(2 * np.pi * t)), -0.5, 0.5, epsabs=1e-14)
    assert lb == pytest.approx(ref, abs=1e-10)
    assert inf >= lb - 1e-9
    inf, lb = mmse_logdet_lb_check([1.0], 3.0, 6)
    assert inf == pytest.approx(np.log(4)) and lb == pytest.approx(np.log(4))
    with pytest.raises(SpectralError):
        mmse_logdet_lb_check([1.0], 1.0, 15)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.sampled_from([0.5, 1.0, 4.0]))
def test_binary_infimum_random_sequences(seed, length, rho):
    seq = random_psd_sequence(np.random.default_rng(seed), length)
    inf, lb = mmse_logdet_lb_check(seq, rho, 8, check=False)
    assert inf >= lb - 1e-9


def test_all_ones_value_decreases():
    seq = random_psd_sequence(np.random.default_rng(11), 4)
    vals = [szego_check(seq, 1.0, N)[0] for N in range(2, 65, 2)]
    lim = szego_check(seq, 1.0, 2)[1]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[-1] >= lim


def test_noncausal_mmse_examples():
    assert noncausal_mmse([1.0, 0.3], 0.0) == pytest.approx(1.0)
    assert noncausal_mmse(lambda t: np.ones_like(t), 1.0) == pytest.approx(0.5)
    S = lambda t: 1 + np.cos(2 * np.pi * t)
    ref, _ = quad(lambda t: S(t) / (1 + S(t)), -0.5, 0.5, epsabs=1e-14)
    assert noncausal_mmse(S, 1.0) == pytest.approx(ref, abs=1e-12)
    with pytest.raises(SpectralError):
        noncausal_mmse(S, -1.0)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 5.0))
def test_mi_mmse_identity(seed, rho):
    S = spectrum_from_seq(random_psd_sequence(np.random.default_rng(seed), 4))
    lhs, _ = quad(lambda g: noncausal_mmse(S, g), 0, rho, epsabs=1e-13, epsrel=1e-12)
    assert abs(lhs - spectral.spectral_log_integral(S, rho)) < 1e-8


def test_two_level_white():
    white = lambda n, m: ((np.asarray(n) == 0) & (np.asarray(m) == 0)).astype(float)
    for K in (1, 3, 5):
        assert two_level_logdet(white, K, 4, 0.7) == pytest.approx(4 * np.log1p(0.7))
    assert two_level_limit(white, 4, 0.7) == pytest.approx(4 * np.log1p(0.7), abs=1e-9)
    assert two_level_logdet(white, 3, 3, 0.0) == 0.0
    assert two_level_limit(white, 3, 0.0) == 0.0
    with pytest.raises(SpectralError):
        two_level_logdet(white, 100, 41, 1.0)


def test_two_level_matrix_entries():
    r = lambda n, m: np.exp(-0.3 * np.abs(n) - 0.2 * np.abs(m) + 0.1j * n)
    R = spectral.two_level_matrix(r, 3, 2)
    # index (i, p) -> i * F + p
    assert R[1 * 2 + 0, 0 * 2 + 1] == pytest.approx(r(1, -1))
    assert np.allclose(R, R.conj().T)


@pytest.mark.parametrize("grid", [GridParams(0.08, 3.53e5), GridParams(0.02, 2e5)])
def test_two_level_converges_for_brick(grid):
    sf = make_scattering(Brick(), 5.0, 0.5e-6)
    corr = CorrelationSeq(sf, grid)
    lim = two_level_limit(corr, 4, 1.0)
    vals = [two_level_logdet(corr, K, 4, 1.0) for K in (4, 8, 16, 32, 64)]
    gaps = np.array(vals) - lim
    assert np.all(gaps >= -1e-9)
    assert np.all(np.diff(gaps) < 0)
    # sinc tails make the gap O(log K / K)
    assert gaps[-1] < gaps[0] / 4


def test_two_level_limit_generic_matches_closed_form():
    sf = make_scattering(Separable(Profile.triangular(), Profile.flat()), 5.0, 0.5e-6)
    grid = GridParams(0.08, 3.53e5)
    corr = CorrelationSeq(sf, grid)
    closed = two_level_limit(corr, 4, 2.0)
    errs = [abs(two_level_limit(lambda n, m: corr(n, m), 4, 2.0, n_max=nm) / closed - 1)
            for nm in (250, 2000)]
    assert errs[1] < 1e-3 and errs[1] < errs[0] / 4


def test_two_level_limit_table_route():
    rng = np.random.default_rng(5)
    from wssuscap.scattering import Tabulated
    sf = make_scattering(Tabulated(rng.random((4, 3))), 5.0, 0.5e-6)
    grid = GridParams(0.08, 3.53e5)
    corr = CorrelationSeq(sf, grid)
    closed = two_level_limit(corr, 3, 1.0)
    generic = two_level_limit(lambda n, m: corr(n, m), 3, 1.0, n_max=2000)
    assert generic == pytest.approx(closed, rel=3e-3)
