"""Monte-Carlo synthesis of the lattice-sampled channel h[n, m].

Realizations are drawn by spectral sampling: i.i.d. CN(0, 1) amplitudes on a
set of spectral nodes, weighted by the square root of the spectral mass at
each node, then summed back to the (n, m) lattice. For a scattering function
the nodes are Gauss-Legendre points over the compact support of c(theta, phi)
and the weights are w_i c_i >= 0, so the realized covariance is a quadrature
of the exact r[n, m] and never needs clipping. With at least four nodes per
output lag in each direction the quadrature is exact to rounding.

A plain correlation callable (no scattering function) is synthesized by
circulant embedding on a lattice oversampled four times; negative embedding
eigenvalues are clipped and their mass reported.
"""

from dataclasses import dataclass

import numpy as np

from .quadrature import gl_rule
from .scattering import GridParams

OVERSAMPLE = 4


class SimulationError(ValueError):
    pass


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    h: np.ndarray
    seed: int
    index: int
    grid: GridParams = None
    label: str = ""

    @property
    def shape(self):
        return self.h.shape


@dataclass(frozen=True, eq=False)
class EmbeddingSpectrum:
    weights: np.ndarray       # sqrt of the clipped embedding spectrum, (NK, NF)
    clipped_mass: float       # negative spectral mass removed by clipping


def embedding_spectrum(corr, K, F_slots, oversample=OVERSAMPLE):
    """Nonnegative spectrum on an (oversample K) x (oversample F_slots) lattice."""
    NK, NF = oversample * K, oversample * F_slots
    n = np.fft.fftfreq(NK, 1.0 / NK).astype(int)
    m = np.fft.fftfreq(NF, 1.0 / NF).astype(int)
    r = np.asarray(corr(n[:, None], m[None, :]), dtype=complex)
    # h[n, m] = sum_kl z_kl w_kl exp(j 2 pi (n k / NK - m l / NF)), so the
    # lattice spectrum is sum_nm r[n, m] exp(-j 2 pi (n k / NK - m l / NF))
    lam = np.fft.fft(np.fft.ifft(r, axis=1) * NF, axis=0).real / (NK * NF)
    neg = float(-lam[lam < 0].sum())
    lam = np.clip(lam, 0.0, None)
    return EmbeddingSpectrum(np.sqrt(lam), neg)


def spectral_nodes(sf, grid, K, F_slots, oversample=OVERSAMPLE):
    """Gauss-Legendre nodes (nu_i, tau_j) and amplitudes sqrt(w_i w_j C_H)."""
    def axis(edges, lags):
        want = oversample * lags + 16
        width = edges[-1] - edges[0]
        nodes, weights = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            q = max(8, int(np.ceil(want * (b - a) / width)))
            x, w = gl_rule(q)
            nodes.append(0.5 * (a + b) + 0.5 * (b - a) * x)
            weights.append(0.5 * (b - a) * w)
        return np.concatenate(nodes), np.concatenate(weights)

    ne, te = sf.edges()
    nu, wn = axis(ne, K)
    tau, wt = axis(te, F_slots)
    amp = np.sqrt(np.outer(wn, wt) * sf(nu[:, None], tau[None, :]))
    return nu, tau, amp


def generate(sf, grid, K, F_slots, count, seed, corr=None, oversample=OVERSAMPLE,
             batch=512):
    """Draw ``count`` realizations of the K x F_slots channel matrix.

    ``corr`` replaces the scattering function by a correlation callable
    (synthetic targets such as a white process). Realization i depends only
    on (seed, i), so results are reproducible and can be split across workers.
    """
    if count < 1:
        raise SimulationError("count must be at least 1")
    if oversample < 4:
        raise SimulationError("oversampling factor must be at least 4")
    if corr is not None:
        spec = embedding_spectrum(corr, K, F_slots, oversample)
        NK, NF = spec.weights.shape
        amp = spec.weights
        ex_n = np.exp(2j * np.pi * np.outer(np.arange(K), np.arange(NK)) / NK)
        ex_m = np.exp(-2j * np.pi * np.outer(np.arange(NF), np.arange(F_slots)) / NF)
        label = "correlation"
    elif sf is None:
        raise SimulationError("need a scattering function or a correlation")
    else:
        grid.check(sf, require_tf=False)
        nu, tau, amp = spectral_nodes(sf, grid, K, F_slots, oversample)
        ex_n = np.exp(2j * np.pi * np.outer(np.arange(K), nu) * grid.T)
        ex_m = np.exp(-2j * np.pi * np.outer(tau, np.arange(F_slots)) * grid.F)
        label = type(sf.shape).__name__
    Q1, Q2 = amp.shape
    out = []
    for start in range(0, count, batch):
        n = min(batch, count - start)
        z = np.empty((n, Q1, Q2), dtype=complex)
        for j in range(n):
            rng = make_rng(_subseed(seed, start + j))
            z[j] = (rng.standard_normal((Q1, Q2)) + 1j * rng.standard_normal((Q1, Q2))) / np.sqrt(2)
        h = ex_n @ (z * amp) @ ex_m
        out.extend(ChannelRealization(h[j].copy(), seed, start + j, grid, label)
                   for j in range(n))
    return out


def _subseed(seed, index):
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0])


def stack(realizations):
    return np.stack([r.h for r in realizations])


def empirical_correlation(realizations, n, m):
    """Sample r[n, m] with its standard error across realizations."""
    H = stack(realizations) if not isinstance(realizations, np.ndarray) else realizations
    _, K, F = H.shape
    if abs(n) >= K or abs(m) >= F:
        raise SimulationError(f"lag ({n}, {m}) outside a {K}x{F} realization")
    a = H[:, max(n, 0):K + min(n, 0), max(m, 0):F + min(m, 0)]
    b = H[:, max(-n, 0):K + min(-n, 0), max(-m, 0):F + min(-m, 0)]
    per = np.mean(a * np.conj(b), axis=(1, 2))
    value = per.mean()
    if per.size > 1:
        se = np.sqrt((np.var(per.real, ddof=1) + np.var(per.imag, ddof=1)) / per.size)
    else:
        se = np.nan
    return complex(value), float(se)


def simulate_io(x, realization, noise_seed):
    """y = x o h + w with w i.i.d. CN(0, 1)."""
    h = realization.h if isinstance(realization, ChannelRealization) else np.asarray(realization)
    x = np.asarray(x)
    if x.shape != h.shape:
        raise SimulationError(f"input shape {x.shape} does not match channel {h.shape}")
    rng = make_rng(noise_seed)
    w = (rng.standard_normal(h.shape) + 1j * rng.standard_normal(h.shape)) / np.sqrt(2)
    return x * h + w


def write_realization(path, realization, nu_max, tau_max):
    h = realization.h
    K, F = h.shape
    with open(path, "w") as fh:
        fh.write(f"# seed={realization.seed} index={realization.index}\n")
        fh.write(f"nu_max={nu_max!r} tau_max={tau_max!r} rows={K} cols={F}\n")
        for row in h:
            fh.write(" ".join(f"{v.real:.17g},{v.imag:.17g}" for v in row) + "\n")


def read_realization(path):
    with open(path) as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    rows = [[complex(*map(float, tok.split(","))) for tok in ln.split()] for ln in lines[1:]]
    return np.array(rows)
