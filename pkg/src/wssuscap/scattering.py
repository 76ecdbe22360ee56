"""Scattering functions and the statistics of the discretized channel.

A scattering function C_H(nu, tau) lives on [-nu_max, nu_max] x [-tau_max,
tau_max] and is normalized to unit volume. Sampling the channel on a
time-frequency lattice with steps (T, F) gives a 2D stationary process with
correlation

    r[n, m] = int int C_H(nu, tau) exp(j 2 pi (n T nu - m F tau)) dnu dtau

and, when the lattice satisfies Nyquist, 2D spectral density
c(theta, phi) = C_H(theta / T, phi / F) / (T F) on [-1/2, 1/2]^2.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .quadrature import DEFAULT_RTOL, integrate, integrate2d


class ScatteringError(ValueError):
    pass


# ---------------------------------------------------------------- profiles

@dataclass(frozen=True, eq=False)
class Profile:
    """Unit-area density on [-half_width, half_width].

    ``kind`` is one of ``flat``, ``triangular``, ``table`` (piecewise constant
    cells) or ``custom`` (user callable on the normalized axis u in [-1, 1]).
    Shapes are built with unit half-width and rescaled with ``with_width``.
    """

    kind: str
    half_width: float = 1.0
    values: Optional[tuple] = None
    func: Optional[Callable] = None
    scale: float = 1.0  # normalizer applied to the raw table/callable

    @staticmethod
    def flat():
        return Profile("flat")

    @staticmethod
    def triangular():
        return Profile("triangular")

    @staticmethod
    def table(values):
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0 or np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ScatteringError("table values must be finite and nonnegative")
        total = v.sum() * 2.0 / v.size
        if total <= 0:
            raise ScatteringError("table values are all zero")
        return Profile("table", values=tuple(v), scale=1.0 / total)

    @staticmethod
    def custom(func):
        """Profile proportional to ``func(u)`` for u in [-1, 1]."""
        area = float(integrate(lambda u: np.asarray(func(u), dtype=float), -1.0, 1.0))
        if not area > 0:
            raise ScatteringError("custom profile has zero area")
        return Profile("custom", func=func, scale=1.0 / area)

    def with_width(self, half_width):
        if not half_width > 0:
            raise ScatteringError("half width must be positive")
        return replace(self, half_width=float(half_width))

    # normalized density q(u) on [-1, 1]
    def _q(self, u):
        u = np.asarray(u, dtype=float)
        inside = np.abs(u) <= 1.0
        if self.kind == "flat":
            out = np.full(u.shape, 0.5)
        elif self.kind == "triangular":
            out = 1.0 - np.abs(u)
        elif self.kind == "table":
            v = np.asarray(self.values)
            idx = np.clip(np.floor((u + 1.0) * v.size / 2.0).astype(int), 0, v.size - 1)
            out = v[idx] * self.scale
        else:
            out = np.asarray(self.func(np.clip(u, -1.0, 1.0)), dtype=float) * self.scale
        return np.where(inside, out, 0.0)

    def __call__(self, x):
        w = self.half_width
        return self._q(np.asarray(x, dtype=float) / w) / w

    @property
    def is_flat(self):
        if self.kind == "flat":
            return True
        if self.kind == "table":
            v = np.asarray(self.values)
            return bool(np.all(v == v[0]))
        return False

    @property
    def is_piecewise_constant(self):
        return self.kind in ("flat", "table")

    def breakpoints(self):
        w = self.half_width
        if self.kind == "triangular":
            return np.array([-w, 0.0, w])
        if self.kind == "table":
            return np.linspace(-w, w, len(self.values) + 1)
        return np.array([-w, w])

    def steps(self):
        """Cell edges and cell values of a piecewise-constant profile."""
        if self.kind == "flat":
            return np.array([-self.half_width, self.half_width]), np.array([0.5 / self.half_width])
        if self.kind == "table":
            return self.breakpoints(), np.asarray(self.values) * self.scale / self.half_width
        raise ScatteringError(f"{self.kind} profile is not piecewise constant")

    def fourier(self, f):
        """int p(x) exp(-j 2 pi f x) dx."""
        f = np.asarray(f, dtype=float)
        w = self.half_width
        if self.kind == "flat":
            return np.sinc(2.0 * f * w).astype(complex)
        if self.kind == "triangular":
            return (np.sinc(f * w) ** 2).astype(complex)
        if self.kind == "table":
            edges, vals = self.steps()
            h = edges[1] - edges[0]
            centers = 0.5 * (edges[1:] + edges[:-1])
            fr = f[..., None]
            terms = vals * h * np.sinc(fr * h) * np.exp(-2j * np.pi * fr * centers)
            return terms.sum(axis=-1)
        flat = f.ravel()
        re = integrate(lambda x: self(x)[None, :] * np.cos(2 * np.pi * flat[:, None] * x[None, :]),
                       -w, w, self.breakpoints())
        im = integrate(lambda x: self(x)[None, :] * np.sin(2 * np.pi * flat[:, None] * x[None, :]),
                       -w, w, self.breakpoints())
        return (re - 1j * im).reshape(f.shape)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        u = np.clip(x / self.half_width, -1.0, 1.0)
        if self.kind == "flat":
            return 0.5 * (u + 1.0)
        if self.kind == "triangular":
            return np.where(u < 0, 0.5 * (1.0 + u) ** 2, 1.0 - 0.5 * (1.0 - u) ** 2)
        if self.kind == "table":
            v = np.asarray(self.values) * self.scale
            n = v.size
            cum = np.concatenate([[0.0], np.cumsum(v) * 2.0 / n])
            pos = (u + 1.0) * n / 2.0
            k = np.clip(np.floor(pos).astype(int), 0, n - 1)
            return np.minimum(cum[k] + (pos - k) * v[k] * 2.0 / n, 1.0)
        flat = u.ravel()
        out = np.array([float(integrate(lambda s: self._q(s), -1.0, t)) if t > -1 else 0.0
                        for t in flat])
        return out.reshape(u.shape)

    def expect(self, g):
        """int p(x) g(x) dx; ``g`` may return a leading batch axis."""
        w = self.half_width
        return integrate(lambda x: self(x) * g(x), -w, w, self.breakpoints())


# ------------------------------------------------------------------ shapes

@dataclass(frozen=True)
class Brick:
    pass


@dataclass(frozen=True)
class DopplerFlat:
    delay_profile: Profile


@dataclass(frozen=True)
class DelayFlat:
    doppler_profile: Profile


@dataclass(frozen=True)
class Separable:
    doppler_profile: Profile
    delay_profile: Profile


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Nonnegative cell values; rows are Doppler bins, columns delay bins."""

    values: np.ndarray


@dataclass(frozen=True, eq=False)
class ScatteringFunction:
    shape: object
    nu_max: float
    tau_max: float
    norm_constant: float
    doppler: Profile
    delay: Profile
    table: Optional[np.ndarray] = None

    @property
    def spread(self):
        return 4.0 * self.nu_max * self.tau_max

    @property
    def separable(self):
        return self.table is None

    def __call__(self, nu, tau):
        nu = np.asarray(nu, dtype=float)
        tau = np.asarray(tau, dtype=float)
        if self.separable:
            return self.doppler(nu) * self.delay(tau)
        R, C = self.table.shape
        i = np.floor((nu + self.nu_max) * R / (2 * self.nu_max)).astype(int)
        k = np.floor((tau + self.tau_max) * C / (2 * self.tau_max)).astype(int)
        inside = (np.abs(nu) <= self.nu_max) & (np.abs(tau) <= self.tau_max)
        vals = self.table[np.clip(i, 0, R - 1), np.clip(k, 0, C - 1)]
        return np.where(inside, vals, 0.0)

    def cell_area(self):
        R, C = self.table.shape
        return (2 * self.nu_max / R) * (2 * self.tau_max / C)

    def edges(self):
        if self.separable:
            return self.doppler.breakpoints(), self.delay.breakpoints()
        R, C = self.table.shape
        return (np.linspace(-self.nu_max, self.nu_max, R + 1),
                np.linspace(-self.tau_max, self.tau_max, C + 1))

    def integrate_values(self, g, rtol=DEFAULT_RTOL):
        """int int g(C_H(nu, tau)) over the support.

        ``g`` acts elementwise on an array of C_H values and may prepend batch
        axes, which lets one call cover many penalty scalings at once.
        """
        if not self.separable:
            vals = np.asarray(g(self.table))
            return vals.sum(axis=(-2, -1)) * self.cell_area()
        dop, dly = self.doppler, self.delay
        if dop.is_flat and dly.is_flat:
            return np.asarray(g(np.array([1.0 / self.spread])))[..., 0] * self.spread
        if dop.is_flat:
            a = 1.0 / (2 * self.nu_max)
            return 2 * self.nu_max * integrate(lambda t: g(a * dly(t)), -self.tau_max,
                                               self.tau_max, dly.breakpoints(), rtol)
        if dly.is_flat:
            a = 1.0 / (2 * self.tau_max)
            return 2 * self.tau_max * integrate(lambda v: g(a * dop(v)), -self.nu_max,
                                                self.nu_max, dop.breakpoints(), rtol)
        return integrate2d(lambda N, T: g(dop(N) * dly(T)), dop.breakpoints(),
                           dly.breakpoints(), rtol)

    def expect(self, h, rtol=DEFAULT_RTOL):
        """int int C_H(nu, tau) h(nu, tau) dnu dtau."""
        ne, te = self.edges()
        return integrate2d(lambda N, T: self(N, T) * h(N, T), ne, te, rtol)


def make_scattering(shape, nu_max, tau_max, center=(0.0, 0.0)):
    """Build a unit-volume scattering function on the given support."""
    if not (nu_max > 0 and tau_max > 0):
        raise ScatteringError("nu_max and tau_max must be positive")
    if tuple(center) != (0.0, 0.0):
        raise ScatteringError("scattering functions must be centered at the origin")
    if 4.0 * nu_max * tau_max >= 1.0:
        raise ScatteringError(f"overspread: spread {4 * nu_max * tau_max:g} >= 1")
    nu_max, tau_max = float(nu_max), float(tau_max)
    flat = Profile.flat()
    if isinstance(shape, Brick):
        dop, dly = flat, flat
    elif isinstance(shape, DopplerFlat):
        dop, dly = flat, shape.delay_profile
    elif isinstance(shape, DelayFlat):
        dop, dly = shape.doppler_profile, flat
    elif isinstance(shape, Separable):
        dop, dly = shape.doppler_profile, shape.delay_profile
    elif isinstance(shape, Tabulated):
        return _make_tabulated(shape, nu_max, tau_max)
    else:
        raise ScatteringError(f"unknown shape {shape!r}")
    dop = dop.with_width(nu_max)
    dly = dly.with_width(tau_max)
    norm = dop.scale * dly.scale
    return ScatteringFunction(shape, nu_max, tau_max, norm, dop, dly)


def _make_tabulated(shape, nu_max, tau_max):
    raw = np.asarray(shape.values, dtype=float)
    if raw.ndim != 2 or raw.size == 0:
        raise ScatteringError("tabulated values must be a nonempty 2D array")
    if np.any(raw < 0) or not np.all(np.isfinite(raw)):
        raise ScatteringError("tabulated values must be finite and nonnegative")
    R, C = raw.shape
    area = (2 * nu_max / R) * (2 * tau_max / C)
    total = raw.sum() * area
    if total <= 0:
        raise ScatteringError("tabulated values are all zero")
    norm = 1.0 / total
    table = raw * norm
    table.setflags(write=False)
    dop = Profile.table(table.sum(axis=1)).with_width(nu_max)
    dly = Profile.table(table.sum(axis=0)).with_width(tau_max)
    return ScatteringFunction(shape, nu_max, tau_max, norm, dop, dly, table)


def spread(sf):
    return sf.spread


def peakiness(sf):
    """sigma = int int C_H^2; at least 1/spread, with equality for the brick."""
    return float(sf.integrate_values(lambda c: c * c))


def volume(sf):
    return float(sf.integrate_values(lambda c: c))


def power_profiles(sf):
    """Return (delay profile P_H(tau), Doppler profile S_H(nu))."""
    return sf.delay, sf.doppler


# -------------------------------------------------------------------- grids

@dataclass(frozen=True)
class GridParams:
    T: float
    F: float
    adjusted: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not (self.T > 0 and self.F > 0):
            raise ScatteringError("grid steps must be positive")

    @property
    def tf(self):
        return self.T * self.F

    def is_nyquist(self, sf, rtol=1e-12):
        return (self.T <= (1 + rtol) / (2 * sf.nu_max)
                and self.F <= (1 + rtol) / (2 * sf.tau_max))

    def check(self, sf, require_tf=True):
        if not self.is_nyquist(sf):
            raise ScatteringError(
                f"grid T={self.T:g}, F={self.F:g} violates Nyquist for "
                f"nu_max={sf.nu_max:g}, tau_max={sf.tau_max:g}")
        if require_tf and not self.tf > 1:
            raise ScatteringError(f"grid has TF={self.tf:g} <= 1")
        return self


@dataclass(frozen=True)
class PowerSpec:
    P: float
    kappa: float = 1.0

    def __post_init__(self):
        if not (self.P >= 0 and np.isfinite(self.P)):
            raise ScatteringError("power must be finite and nonnegative")
        if not self.kappa >= 1:
            raise ScatteringError("kappa must be >= 1")


def design_grid(nu_max, tau_max, tf_product):
    """Grid with T/F = tau_max/nu_max and T*F = tf_product.

    If that grid violates Nyquist (tf_product * spread > 1), the steps are
    shrunk proportionally to the Nyquist corner and ``adjusted`` is set.
    """
    if not tf_product > 1:
        raise ScatteringError("tf_product must exceed 1")
    T = np.sqrt(tf_product * tau_max / nu_max)
    F = np.sqrt(tf_product * nu_max / tau_max)
    if T > 1 / (2 * nu_max) or F > 1 / (2 * tau_max):
        return GridParams(1 / (2 * nu_max), 1 / (2 * tau_max), adjusted=True)
    return GridParams(float(T), float(F))


# ---------------------------------------------------- discrete statistics

@dataclass(frozen=True, eq=False)
class CorrelationSeq:
    """r[n, m] of the lattice-sampled channel, evaluated in closed form."""

    sf: ScatteringFunction
    grid: GridParams

    def __call__(self, n, m):
        n = np.asarray(n, dtype=float)
        m = np.asarray(m, dtype=float)
        T, F = self.grid.T, self.grid.F
        sf = self.sf
        if sf.separable:
            return sf.doppler.fourier(-n * T) * sf.delay.fourier(m * F)
        R, C = sf.table.shape
        hn, ht = 2 * sf.nu_max / R, 2 * sf.tau_max / C
        nc = -sf.nu_max + hn * (np.arange(R) + 0.5)
        tc = -sf.tau_max + ht * (np.arange(C) + 0.5)
        n_, m_ = np.broadcast_arrays(n, m)
        a = np.sinc(n_[..., None] * T * hn) * np.exp(2j * np.pi * n_[..., None] * T * nc)
        b = np.sinc(m_[..., None] * F * ht) * np.exp(-2j * np.pi * m_[..., None] * F * tc)
        return np.einsum("...i,ij,...j->...", a, sf.table, b) * hn * ht

    def delay_transform(self, nu, m):
        """d_m(nu) = int C_H(nu, tau) exp(-j 2 pi m F tau) dtau."""
        sf = self.sf
        nu = np.asarray(nu, dtype=float)
        m = np.asarray(m, dtype=float)
        if sf.separable:
            return sf.doppler(nu)[..., None] * sf.delay.fourier(m * self.grid.F)
        R, C = sf.table.shape
        i = np.clip(np.floor((nu + sf.nu_max) * R / (2 * sf.nu_max)).astype(int), 0, R - 1)
        ht = 2 * sf.tau_max / C
        tc = -sf.tau_max + ht * (np.arange(C) + 0.5)
        b = np.sinc(m[:, None] * self.grid.F * ht) * np.exp(-2j * np.pi * m[:, None] * self.grid.F * tc)
        row = sf.table[i] * (np.abs(nu) <= sf.nu_max)[..., None]
        return row @ b.T * ht


def correlation(sf, grid, n, m):
    return CorrelationSeq(sf, grid)(n, m)


@dataclass(frozen=True, eq=False)
class SpectralDensity2D:
    sf: ScatteringFunction
    grid: GridParams

    def __call__(self, theta, phi):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        # Wrap into the fundamental cell; no replica overlaps under Nyquist.
        theta = theta - np.round(theta)
        phi = phi - np.round(phi)
        T, F = self.grid.T, self.grid.F
        return self.sf(theta / T, phi / F) / (T * F)

    def support(self):
        return self.sf.nu_max * self.grid.T, self.sf.tau_max * self.grid.F


def psd2d(sf, grid):
    grid.check(sf, require_tf=False)
    return SpectralDensity2D(sf, grid)


# -------------------------------------------------------------- file I/O

def parse_matrix_header(line):
    fields_ = {}
    for tok in line.split():
        if "=" not in tok:
            raise ScatteringError(f"malformed header token {tok!r}")
        k, v = tok.split("=", 1)
        fields_[k] = v
    for key in ("rows", "cols"):
        if key not in fields_:
            raise ScatteringError(f"header lacks {key}")
    return fields_


def read_tabulated(path):
    """Read a tabulated scattering function file and build it."""
    with open(path) as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ScatteringError(f"{path}: empty file")
    hdr = parse_matrix_header(lines[0])
    for key in ("nu_center", "tau_center"):
        if float(hdr.get(key, 0.0)) != 0.0:
            raise ScatteringError("offset scattering functions are not supported")
    try:
        nu_max, tau_max = float(hdr["nu_max"]), float(hdr["tau_max"])
        R, C = int(hdr["rows"]), int(hdr["cols"])
    except KeyError as exc:
        raise ScatteringError(f"header lacks {exc}") from None
    rows = [[float(x) for x in ln.replace(",", " ").split()] for ln in lines[1:]]
    vals = np.array(rows, dtype=float)
    if vals.shape != (R, C):
        raise ScatteringError(f"{path}: expected {R}x{C} values, got {vals.shape}")
    return make_scattering(Tabulated(vals), nu_max, tau_max)


def write_tabulated(path, values, nu_max, tau_max):
    values = np.asarray(values, dtype=float)
    R, C = values.shape
    with open(path, "w") as fh:
        fh.write(f"nu_max={nu_max!r} tau_max={tau_max!r} rows={R} cols={C}\n")
        for row in values:
            fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")
