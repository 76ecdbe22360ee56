"""Ambiguity-function analysis of Gaussian prototype pulses.

The unit-energy Gaussian g(t) = (2/s^2)^{1/4} exp(-pi t^2 / s^2) has

    A(nu, tau) = int g(t) g(t - tau) exp(-j 2 pi nu t) dt
               = exp(-pi tau^2 / (2 s^2) - pi s^2 nu^2 / 2) exp(-j pi nu tau),

so |A|^2 = exp(-pi (tau^2 / s^2 + s^2 nu^2)) factors over (nu, tau), which is
what makes the lattice sums below cheap.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfc

from .scattering import GridParams, ScatteringError


@dataclass(frozen=True)
class Pulse:
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("pulse scale must be positive")

    @staticmethod
    def matched(grid):
        """Gaussian whose ambiguity contours match the lattice: s^2 = T/F."""
        return Pulse(float(np.sqrt(grid.T / grid.F)))

    @property
    def effective_duration(self):
        return self.scale / (2 * np.sqrt(np.pi))

    @property
    def effective_bandwidth(self):
        return 1.0 / (2 * np.sqrt(np.pi) * self.scale)

    def waveform(self, t):
        s = self.scale
        return (2 / s**2) ** 0.25 * np.exp(-np.pi * np.asarray(t) ** 2 / s**2)

    def ambiguity(self, nu, tau):
        nu = np.asarray(nu, dtype=float)
        tau = np.asarray(tau, dtype=float)
        s2 = self.scale**2
        mag = np.exp(-0.5 * np.pi * (tau**2 / s2 + s2 * nu**2))
        return mag * np.exp(-1j * np.pi * nu * tau)

    def ambiguity_sq(self, nu, tau):
        s2 = self.scale**2
        return np.exp(-np.pi * (np.asarray(tau) ** 2 / s2 + s2 * np.asarray(nu) ** 2))

    # 1D factors of |A|^2
    def doppler_factor(self, nu):
        return np.exp(-np.pi * self.scale**2 * np.asarray(nu) ** 2)

    def delay_factor(self, tau):
        return np.exp(-np.pi * np.asarray(tau) ** 2 / self.scale**2)


def ambiguity(pulse, nu, tau):
    return pulse.ambiguity(nu, tau)


def eigenfunction_error_e1(sf, pulse):
    """e1 = int int C_H (1 - |A|^2)."""
    s2 = pulse.scale**2

    def h(N, T):
        return -np.expm1(-np.pi * (T**2 / s2 + s2 * N**2))

    return float(np.clip(sf.expect(h), 0.0, 1.0))


def eigenvalue_error_e2(sf, pulse):
    """e2 = int int C_H |1 - A|^2."""
    s2 = pulse.scale**2

    def h(N, T):
        x = 0.5 * np.pi * (T**2 / s2 + s2 * N**2)
        y = np.pi * N * T
        mag = np.exp(-x)
        # 1 - mag cos y, written without cancellation
        re = -np.expm1(-x) + 2 * mag * np.sin(0.5 * y) ** 2
        im = mag * np.sin(y)
        return re * re + im * im

    return float(np.clip(sf.expect(h), 0.0, 4.0))


def _profile_gauss_moments(profile, shifts, factor):
    """int p(x) factor(x + shift) dx for each shift."""
    shifts = np.asarray(shifts, dtype=float)
    if profile.is_piecewise_constant:
        edges, vals = profile.steps()
        return _step_gauss(edges, vals, shifts, factor.width)
    return profile.expect(lambda x: factor(x[None, :] + shifts[:, None]))


class _GaussFactor:
    """x -> exp(-pi x^2 / width^2)."""

    def __init__(self, width):
        self.width = width

    def __call__(self, x):
        return np.exp(-np.pi * x**2 / self.width**2)


def _erf_diff(x):
    """erf(x[..., 1:]) - erf(x[..., :-1]) without cancellation in the tails."""
    a, b = x[..., :-1], x[..., 1:]
    out = erf(b) - erf(a)
    hi = a > 1
    lo = b < -1
    out = np.where(hi, erfc(a) - erfc(b), out)
    return np.where(lo, erfc(-b) - erfc(-a), out)


def _step_gauss(edges, vals, shifts, width):
    # int_a^b exp(-pi (x+c)^2 / w^2) dx = (w/2) [erf(sqrt(pi)(b+c)/w) - erf(sqrt(pi)(a+c)/w)]
    k = np.sqrt(np.pi) / width
    return 0.5 * width * (_erf_diff(k * (edges[None, :] + shifts[:, None])) @ vals)


def _shift_factors(sf, pulse, grid, radius):
    m = np.arange(-radius, radius + 1)
    fn = _GaussFactor(1.0 / pulse.scale)     # exp(-pi s^2 nu^2)
    ft = _GaussFactor(pulse.scale)           # exp(-pi tau^2 / s^2)
    if sf.separable:
        a = _profile_gauss_moments(sf.doppler, m * grid.F, fn)
        b = _profile_gauss_moments(sf.delay, m * grid.T, ft)
        return np.outer(a, b)
    R, C = sf.table.shape
    ne = np.linspace(-sf.nu_max, sf.nu_max, R + 1)
    te = np.linspace(-sf.tau_max, sf.tau_max, C + 1)
    kn, kt = np.sqrt(np.pi) * pulse.scale, np.sqrt(np.pi) / pulse.scale
    An = 0.5 / kn * np.sqrt(np.pi) * _erf_diff(kn * (ne[None, :] + (m * grid.F)[:, None]))
    At = 0.5 / kt * np.sqrt(np.pi) * _erf_diff(kt * (te[None, :] + (m * grid.T)[:, None]))
    return An @ sf.table @ At.T


def isi_ici_bound_e4(sf, pulse, grid, truncation_radius=5):
    """Lattice sum of C_H shifted by (m F, n T), weighted by |A|^2.

    Sums all (n, m) != (0, 0) with max(|n|, |m|) <= radius. Returns
    (value, tail) where ``tail`` bounds the omitted shells using the
    Gaussian decay of |A|^2 beyond the support.
    """
    grid.check(sf, require_tf=False)
    if truncation_radius < 1:
        raise ScatteringError("truncation radius must be at least 1")
    R = int(truncation_radius)
    terms = _shift_factors(sf, pulse, grid, R)
    value = float(terms.sum() - terms[R, R])
    return value, _e4_tail(sf, pulse, grid, R)


def _e4_tail(sf, pulse, grid, R, extra=60):
    m = np.arange(0, R + extra + 1)
    s2 = pulse.scale**2
    an = np.exp(-np.pi * s2 * np.maximum(m * grid.F - sf.nu_max, 0.0) ** 2)
    bt = np.exp(-np.pi * np.maximum(m * grid.T - sf.tau_max, 0.0) ** 2 / s2)
    # two-sided sums, inside-box and full
    an2 = np.concatenate([an[:0:-1], an])
    bt2 = np.concatenate([bt[:0:-1], bt])
    full = an2.sum() * bt2.sum()
    c = len(m) - 1
    box = an2[c - R:c + R + 1].sum() * bt2[c - R:c + R + 1].sum()
    return float(max(full - box, 0.0))


def isi_ici_generic(sf, ambiguity_sq, grid, truncation_radius=5):
    """e4 by 2D quadrature for an arbitrary |A|^2 callable (no tail estimate)."""
    grid.check(sf, require_tf=False)
    R = int(truncation_radius)
    total = 0.0
    for n in range(-R, R + 1):
        for m in range(-R, R + 1):
            if n == 0 and m == 0:
                continue
            total += float(sf.expect(
                lambda N, T, n=n, m=m: ambiguity_sq(N + m * grid.F, T + n * grid.T)))
    return total


def grid_ratio_sweep(sf, tf_product, ratios, truncation_radius=5):
    """e4 for lattices with fixed T F and varying T/F, each with its matched Gaussian.

    Ratios whose lattice violates Nyquist are reported as NaN.
    """
    out = []
    for q in np.asarray(ratios, dtype=float):
        grid = GridParams(float(np.sqrt(tf_product * q)), float(np.sqrt(tf_product / q)))
        if not grid.is_nyquist(sf):
            out.append((q, np.nan, np.nan))
            continue
        val, tail = isi_ici_bound_e4(sf, Pulse.matched(grid), grid, truncation_radius)
        out.append((q, val, tail))
    return out
