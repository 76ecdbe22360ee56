"""Self-check suites run by ``wssuscap validate``.

Each check returns (ok, detail). The circulant routine is injectable so the
suite can be shown to catch a corrupted implementation.
"""

import time

import numpy as np

from . import bounds, channel_sim, mi_kernel, pulse_design, scattering, spectral
from .quadrature import integrate2d
from .scattering import Brick, DopplerFlat, GridParams, PowerSpec, Profile, Tabulated


def _brick_toy():
    sf = scattering.make_scattering(Brick(), 5.0, 0.5e-6)
    return sf, GridParams(0.35e-3, 3.53e3)


def check_normalization():
    rng = np.random.default_rng(1)
    shapes = [Brick(), DopplerFlat(Profile.triangular()), Tabulated(rng.random((4, 7)))]
    worst = 0.0
    grid = GridParams(1e-3, 1e4)
    for sh in shapes:
        sf = scattering.make_scattering(sh, 50.0, 2e-6)
        worst = max(worst, abs(scattering.volume(sf) - 1.0))
        r = scattering.CorrelationSeq(sf, grid)
        worst = max(worst, abs(r(0, 0) - 1.0), abs(r(-2, -3) - np.conj(r(2, 3))))
    return worst < 1e-9, f"max deviation {worst:.3g}"


def check_peakiness():
    rng = np.random.default_rng(2)
    ok = True
    for _ in range(5):
        sf = scattering.make_scattering(Tabulated(rng.random((3, 5))), 10.0, 1e-5)
        ok &= scattering.peakiness(sf) >= 1 / sf.spread * (1 - 1e-12)
    sf, _ = _brick_toy()
    eq = abs(scattering.peakiness(sf) * sf.spread - 1.0)
    return bool(ok and eq < 1e-12), f"brick equality error {eq:.3g}"


def check_psd_volume():
    sf, grid = _brick_toy()
    c = scattering.psd2d(sf, grid)
    a, b = c.support()
    vol = float(integrate2d(lambda X, Y: c(X, Y), [-a, a], [-b, b]))
    return abs(vol - 1) < 1e-9, f"volume {vol:.15g}"


def check_circulant_sandwich(circulant=spectral.circulant_diagonals):
    sf, grid = _brick_toy()
    power = PowerSpec(2.42e7)
    worst = np.inf
    for K in (4, 8, 16):
        B = K * grid.F
        lower = bounds.lower_penalty(B, 1.0, power, sf)
        exact = bounds.exact_penalty(B, 1.0, power, sf, grid)
        r0 = sf.delay.fourier(np.arange(K) * grid.F)
        c = circulant(r0, K).values
        if abs(np.sum(c) - K) > 1e-9 * K:
            return False, f"diagonal sum {np.sum(c):.6g} != {K}"
        a = power.P * grid.F / (2 * sf.nu_max * B)
        with np.errstate(invalid="ignore"):
            upper = 2 * sf.nu_max * np.sum(np.log1p(a * c))
        if not np.isfinite(upper):
            return False, f"non-finite circulant penalty at {K} slots"
        slack = min(exact - lower, upper - exact) / exact
        worst = min(worst, slack)
    return bool(worst >= -1e-9), f"min relative slack {worst:.3g}"


def check_szego():
    seq = 0.5 ** np.arange(200)
    vals = [spectral.szego_check(seq, 1.0, N) for N in (8, 16, 32, 64)]
    fin = [v[0] for v in vals]
    lim = vals[0][1]
    ok = all(a > b > lim for a, b in zip(fin, fin[1:]))
    white = spectral.szego_check([1.0], 2.0, 5)
    ok &= abs(white[0] - np.log(3)) < 1e-12 and abs(white[1] - np.log(3)) < 1e-9
    return bool(ok), f"gap at N=64 {fin[-1] - lim:.3g}"


def random_psd_sequence(rng, length):
    """Normalized correlation of a random moving-average process."""
    a = rng.standard_normal(length) + 1j * rng.standard_normal(length)
    r = np.array([np.sum(a[k:] * np.conj(a[:length - k])) for k in range(length)])
    return r / r[0].real


def check_binary_infimum():
    rng = np.random.default_rng(3)
    worst = np.inf
    for _ in range(5):
        seq = random_psd_sequence(rng, 4)
        inf, lb = spectral.mmse_logdet_lb_check(seq, 1.0, 6, check=False)
        worst = min(worst, inf - lb)
    return bool(worst >= -1e-9), f"min margin {worst:.3g}"


def check_mmse_identity():
    from scipy.integrate import quad
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(3):
        S = spectral.spectrum_from_seq(random_psd_sequence(rng, 3))
        lhs, _ = quad(lambda g: spectral.noncausal_mmse(S, g), 0, 2.0, epsabs=1e-13, epsrel=1e-12)
        worst = max(worst, abs(lhs - spectral.spectral_log_integral(S, 2.0)))
    return worst < 1e-8, f"max deviation {worst:.3g}"


def check_mi_sandwich():
    ok = True
    for rho in np.logspace(-4, 1, 6):
        i = mi_kernel.mi_cm_coherent(rho, "quadrature").value
        ok &= 0 <= i <= mi_kernel.e_log_awgn(rho)
    return bool(ok), "0 <= I <= E log(1 + rho g)"


def check_bound_ordering():
    sf, grid = _brick_toy()
    req = bounds.BoundRequest(sf, grid, PowerSpec(2.42e7), (1e5, 1e6, 1e9))
    try:
        bounds.sweep(req)
    except bounds.BoundError as exc:
        return False, str(exc)
    return True, "ordering holds"


def check_wideband_ratio():
    sf = scattering.make_scattering(Brick(), 500.0, 0.5e-6)
    tc = bounds.kappa1(PowerSpec(1.0), sf, GridParams(np.sqrt(1.25), np.sqrt(1.25)))
    want = (1000 / 2 - 1.25) / ((1000 - 1.25) / 2)
    return abs(tc.ratio - want) < 1e-9, f"ratio {tc.ratio:.6f}"


def check_infbw():
    sf, _ = _brick_toy()
    p = PowerSpec(2.42e7)
    lb, ub = bounds.cinf_lb(p, sf), bounds.cinf_ub(p, sf)
    return abs(ub - lb) <= 1e-9 * abs(lb), f"gap {ub - lb:.3g}"


def check_radar_volume():
    p = pulse_design.Pulse(0.7)
    vol = float(integrate2d(lambda N, T: p.ambiguity_sq(N, T), [-12, 12], [-12, 12], order=24))
    return abs(vol - 1) < 1e-6, f"volume {vol:.12g}"


def check_channel_statistics():
    sf = scattering.make_scattering(Brick(), 5.0, 0.5e-6)
    grid = GridParams(0.08, 3.53e5)
    corr = scattering.CorrelationSeq(sf, grid)
    R = channel_sim.generate(sf, grid, 6, 6, 3000, seed=11)
    worst = 0.0
    for n, m in [(0, 0), (1, 0), (0, 1), (2, 1), (1, -2)]:
        v, se = channel_sim.empirical_correlation(R, n, m)
        worst = max(worst, abs(v - corr(n, m)) / se)
    return worst < 4.0, f"max z-score {worst:.2f}"


def check_mi_monte_carlo():
    q = mi_kernel.mi_cm_coherent(1.0, "quadrature").value
    mc = mi_kernel.mi_cm_coherent(1.0, seed=5, n_samples=200_000)
    z = abs(q - mc.value) / mc.stderr
    return z < 3, f"z-score {z:.2f}"


FAST = [check_normalization, check_peakiness, check_psd_volume, check_circulant_sandwich,
        check_szego, check_binary_infimum, check_mmse_identity, check_mi_sandwich,
        check_bound_ordering, check_wideband_ratio, check_infbw, check_radar_volume]
FULL = FAST + [check_channel_statistics, check_mi_monte_carlo]


def run(level="fast", circulant=None):
    if level not in ("fast", "full"):
        raise ValueError("level must be fast or full")
    results = []
    for check in (FAST if level == "fast" else FULL):
        t0 = time.perf_counter()
        try:
            if check is check_circulant_sandwich and circulant is not None:
                ok, detail = check(circulant)
            else:
                ok, detail = check()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"name": check.__name__.removeprefix("check_"), "ok": bool(ok),
                        "detail": detail, "seconds": round(time.perf_counter() - t0, 3)})
    return results
