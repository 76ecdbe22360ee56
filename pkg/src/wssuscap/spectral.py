"""Hermitian Toeplitz and circulant tools for stationary correlation sequences.

Conventions: a one-sided sequence t_0..t_{L-1} defines t_{-k} = conj(t_k) and
the spectrum S(theta) = sum_k t_k exp(-j 2 pi k theta) on [-1/2, 1/2].
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.linalg import toeplitz
from scipy.signal import fftconvolve

from .quadrature import gl_rule, integrate
from .scattering import CorrelationSeq

PSD_TOL = 1e-10


class SpectralError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class HermitianToeplitz:
    seq: np.ndarray
    N: int

    def __post_init__(self):
        seq = np.asarray(self.seq, dtype=complex).ravel()
        if seq.size == 0:
            raise SpectralError("empty generating sequence")
        if abs(seq[0].imag) > 1e-12 * max(1.0, abs(seq[0].real)):
            raise SpectralError("t_0 must be real")
        object.__setattr__(self, "seq", seq)

    def matrix(self):
        col = np.zeros(self.N, dtype=complex)
        k = min(self.N, self.seq.size)
        col[:k] = self.seq[:k]
        col[0] = col[0].real
        return toeplitz(col, col.conj())


def _psd_eigvals(mat):
    lam = np.linalg.eigvalsh(mat)
    top = np.max(np.abs(lam), axis=-1, keepdims=True) if lam.size else 0.0
    if np.any(lam < -PSD_TOL * np.maximum(top, 1e-300)):
        raise SpectralError(f"matrix is not PSD: min eigenvalue {lam.min():.3g}")
    return np.clip(lam, 0.0, None)


def logdet_psd(mat, rho):
    """sum_i log(1 + rho * lambda_i) for a Hermitian PSD matrix (batched)."""
    if rho == 0:
        return np.zeros(np.shape(mat)[:-2])
    return np.sum(np.log1p(rho * _psd_eigvals(mat)), axis=-1)


def logdet_capacity(toep, rho):
    if rho < 0:
        raise SpectralError("rho must be nonnegative")
    return float(logdet_psd(toep.matrix(), rho))


# --------------------------------------------------------------- circulant

@dataclass(frozen=True, eq=False)
class CirculantDiagonal:
    values: np.ndarray

    def logsum(self, a):
        """sum_i log(1 + a * c_i)."""
        return float(np.sum(np.log1p(a * self.values)))


def circulant_diagonals(freq_corr, F):
    """Diagonal of the circulant approximation to an F x F Toeplitz matrix.

    c_i = Re{(2/F) sum_{m<F} (F - m) r_m exp(-j 2 pi i m / F)} - r_0, via one
    DFT of the weighted sequence. ``freq_corr`` holds r_0..r_{F-1}.
    """
    r = np.asarray(freq_corr, dtype=complex).ravel()
    if r.size < F:
        r = np.concatenate([r, np.zeros(F - r.size)])
    r = r[:F]
    if abs(r[0] - 1.0) > 1e-9:
        raise SpectralError("frequency correlation must satisfy r_0 = 1")
    weights = (F - np.arange(F)) * r
    c = (2.0 / F) * np.fft.fft(weights).real - r[0].real
    return CirculantDiagonal(c)


def _fejer_density(y, K):
    """(1/K^2) sin^2(pi y) / sin^2(pi y / K): the Fejer kernel in bin units."""
    s = np.sin(np.pi * y / K)
    small = np.abs(s) < 1e-300
    safe = np.where(small, 1.0, s)
    val = (np.sin(np.pi * y) / safe) ** 2 / K**2
    return np.where(small, 1.0, val)


def fejer_cumulative(K, delta, kmin, kmax):
    """Phi(k + delta) = int_0^{k+delta} f for k = kmin..kmax, f the Fejer density.

    The density is a trigonometric polynomial with frequencies below one cycle
    per bin, so a 16-point Gauss-Legendre rule per unit interval is exact to
    rounding.
    """
    x, w = gl_rule(16)
    head = 0.5 * delta * np.sum(w * _fejer_density(0.5 * delta * (x + 1.0), K))
    unit = np.empty(kmax - kmin)
    chunk = 1 << 18
    for start in range(kmin, kmax, chunk):
        ls = np.arange(start, min(start + chunk, kmax), dtype=float)
        nodes = ls[:, None] + delta + 0.5 * (x + 1.0)
        unit[start - kmin:start - kmin + ls.size] = 0.5 * (_fejer_density(nodes, K) @ w)
    out = np.empty(kmax - kmin + 1)
    zero = -kmin
    # unit[j] integrates over [kmin + j + delta, kmin + j + 1 + delta]
    out[zero] = head
    if kmax > 0:
        out[zero + 1:] = head + np.cumsum(unit[zero:])
    if kmin < 0:
        out[:zero] = head - np.cumsum(unit[:zero][::-1])[::-1]
    return out


def fejer_circulant_diagonals(edges, values, K, half_range):
    """Circulant diagonals c_i for |i| <= half_range from a step spectrum.

    The frequency-direction spectrum is piecewise constant: ``values[k]`` on
    [edges[k], edges[k+1]] in cycles per slot, zero elsewhere. Each c_i is
    the Fejer-smoothed spectrum at i/K, written as a sum over jumps of the
    cumulative kernel. Cost is linear in K * support, never in K.
    """
    edges = np.asarray(edges, dtype=float)
    values = np.asarray(values, dtype=float)
    jumps = np.diff(np.concatenate([[0.0], values, [0.0]]))
    pos = K * edges                     # jump locations in bin units
    base = np.floor(pos)
    frac = pos - base
    idx = np.arange(-half_range, half_range + 1)
    out = np.zeros(idx.size)
    # Group jumps sharing a fractional offset; each group needs one table.
    keys = np.round(frac * 2**20).astype(np.int64)
    for key in np.unique(keys):
        sel = keys == key
        d = frac[sel][0]
        # y = i - pos = (i - base) - d; with delta = 1 - d on the shifted grid
        kb = base[sel].astype(np.int64)
        if d == 0.0:
            delta, shift = 0.0, 0
        else:
            delta, shift = 1.0 - d, -1
        lo = int(-half_range - kb.max() + shift)
        hi = int(half_range - kb.min() + shift)
        lo, hi = min(lo, 0), max(hi, 0)
        table = fejer_cumulative(K, delta, lo, hi)
        J = jumps[sel]
        if sel.sum() <= 64:
            for kk, jj in zip(kb, J):
                out += jj * table[idx - kk + shift - lo]
        else:
            span = int(kb.max() - kb.min())
            comb = np.zeros(span + 1)
            np.add.at(comb, kb - kb.min(), J)
            conv = fftconvolve(table, comb)
            # out[i] = sum_k comb[k - kbmin] * table[i - k + shift - lo]
            out += conv[idx - kb.min() + shift - lo]
    return out


# -------------------------------------------------------------- 1D Szego

def spectrum_from_seq(seq):
    """Return S(theta) for a one-sided correlation sequence."""
    t = np.asarray(seq, dtype=complex).ravel()
    k = np.arange(1, t.size)

    def S(theta):
        theta = np.asarray(theta, dtype=float)
        ph = np.exp(-2j * np.pi * theta[..., None] * k)
        return t[0].real + 2.0 * np.real(ph @ t[1:])

    return S


def spectral_log_integral(S, rho):
    """int_{-1/2}^{1/2} log(1 + rho S(theta)) dtheta."""
    if rho == 0:
        return 0.0
    return float(integrate(lambda th: np.log1p(rho * np.maximum(S(th), 0.0)), -0.5, 0.5,
                           breakpoints=(0.0,)))


def szego_check(seq, rho, N):
    """Return ((1/N) logdet(I + rho R_N), int log(1 + rho S))."""
    finite = logdet_capacity(HermitianToeplitz(seq, N), rho) / N
    return finite, spectral_log_integral(spectrum_from_seq(seq), rho)


def noncausal_mmse(S, gamma):
    """int S / (1 + gamma S) dtheta; ``S`` is a callable or a correlation sequence."""
    if gamma < 0:
        raise SpectralError("gamma must be nonnegative")
    if not callable(S):
        S = spectrum_from_seq(S)
    return float(integrate(lambda th: S(th) / (1.0 + gamma * S(th)), -0.5, 0.5,
                           breakpoints=(0.0,)))


def mmse_logdet_lb_check(seq, rho, N, check=True):
    """Exhaustive min over binary x != 0 of logdet(I + rho (x x^H) o R) / |x|^2.

    For binary x the Hadamard product keeps the principal submatrix on the
    support of x, so the ratio is logdet(I + rho R_S) / |S|. Returns
    (brute-force infimum, spectral integral).
    """
    if N > 14:
        raise SpectralError("exhaustive search limited to N <= 14")
    R = HermitianToeplitz(seq, N).matrix()
    best = np.inf
    for size in range(1, N + 1):
        subsets = np.array(list(combinations(range(N), size)))
        sub = R[subsets[:, :, None], subsets[:, None, :]]
        vals = logdet_psd(sub, rho) / size
        best = min(best, float(vals.min()))
    lb = spectral_log_integral(spectrum_from_seq(seq), rho)
    if check and best < lb - 1e-9:
        raise SpectralError(f"logdet infimum {best:.12g} below spectral bound {lb:.12g}")
    return best, lb


# -------------------------------------------------------- two-level forms

def two_level_matrix(corr, K, F):
    """KF x KF covariance with entry ((i,p),(j,q)) = r[i - j, p - q]."""
    n = np.arange(-(K - 1), K)
    m = np.arange(-(F - 1), F)
    table = np.asarray(corr(n[:, None], m[None, :]), dtype=complex)
    i = np.repeat(np.arange(K), F)
    p = np.tile(np.arange(F), K)
    return table[(i[:, None] - i[None, :]) + K - 1, (p[:, None] - p[None, :]) + F - 1]


def two_level_logdet(corr, K, F, rho):
    """(1/K) logdet(I_{KF} + rho R) for the two-level Toeplitz covariance."""
    if K * F > 4096:
        raise SpectralError(f"K*F = {K * F} exceeds the exact-path limit 4096")
    if rho == 0:
        return 0.0
    return float(logdet_psd(two_level_matrix(corr, K, F), rho)) / K


def two_level_limit(corr, F, rho, n_max=256):
    """int_{-1/2}^{1/2} logdet(I_F + rho C(theta)) dtheta.

    C(theta) is the F x F Toeplitz matrix of c_m(theta) = sum_n r[n, m]
    exp(-j 2 pi n theta). For a ``CorrelationSeq`` the Doppler sum is done in
    closed form through the scattering function; a plain callable is
    summed over |n| <= n_max with Fejer weights 1 - |n|/(n_max + 1), which
    keeps every C(theta) positive semidefinite (a sharp cutoff does not).
    """
    if rho == 0:
        return 0.0
    if F > 512:
        raise SpectralError("exact two-level limit limited to F <= 512")
    if isinstance(corr, CorrelationSeq):
        return _two_level_limit_sf(corr, F, rho)
    n = np.arange(-n_max, n_max + 1)
    m = np.arange(-(F - 1), F)
    table = np.asarray(corr(n[:, None], m[None, :]), dtype=complex)
    table *= (1.0 - np.abs(n) / (n_max + 1.0))[:, None]
    p = np.arange(F)
    lag = p[:, None] - p[None, :] + F - 1

    def g(theta):
        cm = np.exp(-2j * np.pi * theta[:, None] * n[None, :]) @ table
        return logdet_psd(cm[:, lag], rho)

    return float(integrate(g, -0.5, 0.5, breakpoints=(0.0,)))


def _two_level_limit_sf(corr, F, rho):
    sf, T = corr.sf, corr.grid.T
    m = np.arange(F)
    if sf.separable:
        lam = _psd_eigvals(HermitianToeplitz(sf.delay.fourier(m * corr.grid.F), F).matrix())
        dop = sf.doppler
        if dop.is_flat:
            return float(T * 2 * sf.nu_max * np.sum(np.log1p(rho * lam / (2 * sf.nu_max * T))))

        def g(nu):
            return np.sum(np.log1p(rho * dop(nu)[:, None] * lam[None, :] / T), axis=-1)

        return float(T * integrate(g, -sf.nu_max, sf.nu_max, dop.breakpoints()))
    R = sf.table.shape[0]
    hn = 2 * sf.nu_max / R
    centers = -sf.nu_max + hn * (np.arange(R) + 0.5)
    d = corr.delay_transform(centers, m)          # (R, F)
    lag = m[:, None] - m[None, :]
    mats = np.where(lag[None] >= 0, d[:, np.abs(lag)], np.conj(d[:, np.abs(lag)]))
    return float(T * hn * np.sum(logdet_psd(mats, rho / T)))
