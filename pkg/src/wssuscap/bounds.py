"""Capacity bounds for underspread WSSUS channels, explicit in C_H.

All rates are in nat/s. Notation: B bandwidth, K = floor(B / F) frequency
slots, P receive power over noise density (1/s), kappa the nominal PAPR.

ucoh      coherent (channel known at receiver) upper bound
u1        AWGN-like term minus the scattering-function penalty psi
l1        constant-modulus lower bound with the exact two-level penalty
l1cf      l1 with the circulant (upper) penalty, cheap at any K
l1approx  l1 with the scattering-function (lower) penalty
l1a       l1approx with the two-term MI expansion
"""

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .mi_kernel import e_log_awgn, mi_cm_for_bounds
from .quadrature import integrate
from .scattering import CorrelationSeq, GridParams, PowerSpec, ScatteringFunction, peakiness
from .spectral import circulant_diagonals, fejer_circulant_diagonals, two_level_limit

EXACT_K_MAX = 512
DFT_K_MAX = 1 << 21
DFT_K_HARD = 1 << 24
FEJER_MARGIN = 4096
SUBCELLS = 4
TAIL_SERIES_MAX = 1e-3     # largest a * c_i at the margin for the two-term log series
ALPHA_FLOOR = 1e-12
BOUND_IDS = ("ucoh", "u1", "l1", "l1cf", "l1approx", "l1a")
UPPER_IDS = ("ucoh", "u1")
LOWER_IDS = ("l1", "l1cf")


class BoundError(ArithmeticError):
    pass


def slots(B, grid):
    K = int(np.floor(B / grid.F * (1 + 1e-12)))
    if K < 1:
        raise BoundError(f"bandwidth {B:g} Hz is below one frequency slot ({grid.F:g} Hz)")
    return K


# ------------------------------------------------------------ upper bounds

def ucoh(B, power, grid):
    if power.P == 0:
        return 0.0
    return B / grid.tf * e_log_awgn(power.P * grid.tf / B)


def penalty_psi(B, power, sf):
    """(B / kappa) int int log(1 + kappa P / B C_H)."""
    if power.P == 0:
        return 0.0
    c = power.kappa * power.P / B
    return B / power.kappa * float(sf.integrate_values(lambda x: np.log1p(c * x)))


def alpha_star(B, power, sf, grid, psi=None):
    psi = penalty_psi(B, power, sf) if psi is None else psi
    if psi <= 0:
        raise BoundError("penalty must be positive")
    a = min(1.0, B / grid.tf * (1.0 / psi - 1.0 / power.P))
    if a <= 0:
        warnings.warn(f"alpha* formula gave {a:.3g} at B={B:g}; clipped to {ALPHA_FLOOR:g}",
                      RuntimeWarning, stacklevel=2)
        a = ALPHA_FLOOR
    return a


def alpha_star_snr_threshold(spread, kappa, tf):
    """P/B below which alpha* = 1 is guaranteed (with the spread clause)."""
    with np.errstate(over="ignore"):        # tiny spreads give an infinite threshold
        return spread / kappa * np.expm1(kappa / (2 * tf * spread))


def alpha_star_condition(power, sf, grid, B):
    k, tf, d = power.kappa, grid.tf, sf.spread
    return bool(d <= k / (3 * tf) and power.P / B < alpha_star_snr_threshold(d, k, tf))


def u1(B, power, sf, grid, return_alpha=False):
    if power.P == 0:
        return (0.0, 1.0) if return_alpha else 0.0
    psi = penalty_psi(B, power, sf)
    a = alpha_star(B, power, sf, grid, psi)
    val = float(B / grid.tf * np.log1p(a * power.P * grid.tf / B) - a * psi)
    return (val, a) if return_alpha else val


# ------------------------------------------------------------ lower bounds

def maximize_gamma(objective, kappa, coarse=16, tol=1e-6):
    """Maximize ``objective`` over gamma in [1, kappa]: coarse grid, then golden section."""
    if kappa == 1:
        return objective(1.0), 1.0
    g = np.linspace(1.0, kappa, coarse)
    vals = np.array([objective(x) for x in g])
    i = int(np.argmax(vals))
    lo, hi = g[max(i - 1, 0)], g[min(i + 1, coarse - 1)]
    phi = (np.sqrt(5) - 1) / 2
    a, b = lo + (1 - phi) * (hi - lo), lo + phi * (hi - lo)
    fa, fb = objective(a), objective(b)
    while hi - lo > tol * kappa:
        if fa >= fb:
            hi, b, fb = b, a, fa
            a = lo + (1 - phi) * (hi - lo)
            fa = objective(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + phi * (hi - lo)
            fb = objective(b)
    best = max((vals[i], g[i]), (fa, a), (fb, b))
    return float(best[0]), float(best[1])


def _mi_term(B, gamma, power, grid, flags):
    rho = gamma * power.P * grid.tf / B
    val, how = mi_cm_for_bounds(rho)
    flags.add(f"mi:{how}")
    return B / (gamma * grid.tf) * val


def lower_penalty(B, gamma, power, sf):
    """(B / gamma) int int log(1 + gamma P / B C_H): the small side of the sandwich."""
    c = gamma * power.P / B
    return B / gamma * float(sf.integrate_values(lambda x: np.log1p(c * x)))


def exact_penalty(B, gamma, power, sf, grid):
    """(1 / (gamma T)) int logdet(I_K + gamma P T F / B C(theta)) dtheta."""
    K = slots(B, grid)
    if K > EXACT_K_MAX:
        raise BoundError(f"K={K} exceeds the exact-path limit {EXACT_K_MAX}; use l1cf")
    rho = gamma * power.P * grid.tf / B
    return two_level_limit(CorrelationSeq(sf, grid), K, rho) / (gamma * grid.T)


@dataclass
class CirculantPenalty:
    """Circulant (large) side of the penalty sandwich for a fixed K.

    For separable C_H the diagonals factor as S_H(nu) * c_i, with c_i the
    circulant diagonal of the frequency correlation r[0, m]. The diagonals
    come from one DFT when K <= DFT_K_MAX and otherwise from the Fejer-kernel
    evaluation around the delay support, with the far bins summed through
    log(1 + x) ~ x - x^2 / 2.
    """

    sf: ScatteringFunction
    grid: GridParams
    K: int
    method: str = "auto"
    pieces: list = field(init=False, default_factory=list)
    _full: dict = field(init=False, default_factory=dict, repr=False)

    def __post_init__(self):
        sf = self.sf
        if sf.separable:
            self.pieces = [(None, self._diagonals(sf.delay))]
        else:
            R = sf.table.shape[0]
            from .scattering import Profile
            for row in sf.table:
                mass = row.sum() * 2 * sf.tau_max / row.size
                if mass <= 0:
                    continue
                prof = Profile.table(row).with_width(sf.tau_max)
                self.pieces.append((mass, self._diagonals(prof)))
            self.row_width = 2 * sf.nu_max / R

    def _diagonals(self, profile):
        K, F = self.K, self.grid.F
        w = F * profile.half_width
        # far enough out that c_i decays like 1/i^2 and the tail is tiny
        M = int(np.ceil(K * w)) + 1 + max(FEJER_MARGIN, 2 * int(np.ceil(K * w)))
        method = self.method
        if method == "auto":
            method = "dft" if K <= DFT_K_MAX or 2 * M + 1 > K else "fejer"
        if method == "dft" or 2 * M + 1 > K:
            if K > DFT_K_HARD:
                raise BoundError(f"K={K} too large for the direct circulant evaluation")
            r = profile.fourier(np.arange(K) * F)
            return ("full", circulant_diagonals(r, K).values)
        if profile.is_piecewise_constant:
            edges, vals = profile.steps()
        else:
            # averages on cells of width 1/(SUBCELLS K); exact for steps,
            # second order in the cell width elsewhere
            n = SUBCELLS * K
            j = np.arange(-int(np.ceil(n * w)) - 1, int(np.ceil(n * w)) + 2)
            edges = (np.concatenate([j, [j[-1] + 1]]) - 0.5) / n
            vals = np.diff(-profile.cdf(-edges / F)) * n
            return ("center", fejer_circulant_diagonals(edges, vals, K, M), profile)
        # spectrum in cycles per slot: S_f(x) = P(-x / F) / F
        x_edges = -edges[::-1] * F
        return ("center", fejer_circulant_diagonals(x_edges, vals[::-1] / F, K, M), profile)

    def _full_diagonals(self, profile):
        if id(profile) not in self._full:
            if self.K > DFT_K_HARD:
                raise BoundError(f"K={self.K}: far circulant bins too large for the series "
                                 "and too many for the direct evaluation")
            r = profile.fourier(np.arange(self.K) * self.grid.F)
            self._full[id(profile)] = ("full", circulant_diagonals(r, self.K).values)
        return self._full[id(profile)]

    def _logsum(self, a, diag):
        kind, c = diag[:2]
        if kind == "full":
            return np.sum(np.log1p(np.multiply.outer(a, c)), axis=-1)
        if np.max(np.abs(a)) * max(c[0], c[-1]) > TAIL_SERIES_MAX:
            return self._logsum(a, self._full_diagonals(diag[2]))
        body = np.sum(np.log1p(np.multiply.outer(a, c)), axis=-1)
        rest = self.K - c.sum()
        margin = (c.size - 1) // 2
        tail_sq = (c[0] ** 2 + c[-1] ** 2) * margin / 3
        return body + a * rest - 0.5 * a * a * tail_sq

    def logsum(self, coef):
        """int dnu sum_i log(1 + coef * S(nu) c_i)."""
        sf = self.sf
        if not sf.separable:
            return float(sum(self.row_width * self._logsum(coef * m / self.row_width, d)
                             for m, d in self.pieces))
        diag = self.pieces[0][1]
        dop = sf.doppler
        if dop.is_flat:
            level = 1.0 / (2 * sf.nu_max)
            return float(2 * sf.nu_max * self._logsum(coef * level, diag))
        return float(integrate(lambda nu: self._logsum(coef * dop(nu), diag),
                               -sf.nu_max, sf.nu_max, dop.breakpoints()))

    def penalty(self, B, gamma, power):
        """(1 / gamma) int sum_i log(1 + gamma P F / B S(nu) c_i) dnu."""
        return self.logsum(gamma * power.P * self.grid.F / B) / gamma


def l1(B, power, sf, grid, gamma_grid=16, flags=None):
    flags = set() if flags is None else flags
    if power.P == 0:
        return 0.0, 1.0
    K = slots(B, grid)
    Be = K * grid.F
    return maximize_gamma(lambda g: _mi_term(Be, g, power, grid, flags)
                          - exact_penalty(Be, g, power, sf, grid), power.kappa, gamma_grid)


def l1cf(B, power, sf, grid, flags=None, method="auto"):
    flags = set() if flags is None else flags
    if power.P == 0:
        return 0.0, 1.0
    K = slots(B, grid)
    Be = K * grid.F
    circ = CirculantPenalty(sf, grid, K, method)
    kinds = {d[0] for _, d in circ.pieces}
    flags.add("circulant:" + ("fejer" if "center" in kinds else "dft"))
    return maximize_gamma(lambda g: _mi_term(Be, g, power, grid, flags)
                          - circ.penalty(Be, g, power), power.kappa)


def l1approx(B, power, sf, grid, flags=None):
    flags = set() if flags is None else flags
    if power.P == 0:
        return 0.0, 1.0
    return maximize_gamma(lambda g: _mi_term(B, g, power, grid, flags)
                          - lower_penalty(B, g, power, sf), power.kappa)


def l1a(B, power, sf, grid):
    if power.P == 0:
        return 0.0, 1.0
    P, tf = power.P, grid.tf
    return maximize_gamma(lambda g: P - g * P * P * tf / B - lower_penalty(B, g, power, sf),
                          power.kappa)


# ----------------------------------------------------- wideband coefficients

@dataclass(frozen=True)
class TaylorCoeffs:
    kappa1: float
    kappa1_lb: float
    sigma: float
    peaky_regime: bool   # kappa > 2 T F / sigma

    @property
    def ratio(self):
        return self.kappa1_lb / self.kappa1


def kappa1(power, sf, grid, sigma=None):
    """First-order coefficients: B * bound(B) -> kappa1 as B -> infinity."""
    s = peakiness(sf) if sigma is None else sigma
    P, k, tf = power.P, power.kappa, grid.tf
    peaky = k > 2 * tf / s
    k1 = P * P * (k * s - tf) / 2 if peaky else (k * P * s) ** 2 / (8 * tf)
    return TaylorCoeffs(k1, kappa1_lb(power, sf, grid, s), s, peaky)


def kappa1_lb(power, sf, grid, sigma=None):
    s = peakiness(sf) if sigma is None else sigma
    return power.kappa * power.P**2 * (s / 2 - grid.tf)


# ------------------------------------------------- infinite bandwidth

def cinf_lb(power, sf):
    """P - (1/kappa) int log(1 + kappa P S_H(nu)) dnu."""
    if power.P == 0:
        return 0.0
    c = power.kappa * power.P
    dop = sf.doppler
    if dop.is_flat:
        loss = 2 * sf.nu_max * np.log1p(c / (2 * sf.nu_max))
    else:
        loss = float(integrate(lambda nu: np.log1p(c * dop(nu)), -sf.nu_max, sf.nu_max,
                               dop.breakpoints()))
    return power.P - loss / power.kappa


def cinf_ub(power, sf, F=None):
    """P - (F / kappa) int int log(1 + kappa P / F C_H); default F = 1/(2 tau_max)."""
    Fmax = 1 / (2 * sf.tau_max)
    F = Fmax if F is None else F
    if F > Fmax * (1 + 1e-12):
        raise BoundError(f"F={F:g} violates Nyquist (max {Fmax:g})")
    if power.P == 0:
        return 0.0
    c = power.kappa * power.P / F
    return power.P - F / power.kappa * float(sf.integrate_values(lambda x: np.log1p(c * x)))


# ------------------------------------------------------------------ sweep

@dataclass(frozen=True, eq=False)
class BoundRequest:
    sf: ScatteringFunction
    grid: GridParams
    power: PowerSpec
    bandwidths: tuple
    which: frozenset = frozenset(BOUND_IDS)

    def __post_init__(self):
        b = np.asarray(self.bandwidths, dtype=float)
        if b.size == 0 or np.any(b <= 0) or np.any(np.diff(b) <= 0):
            raise BoundError("bandwidths must be positive and strictly ascending")
        if b[0] < self.grid.F:
            raise BoundError("smallest bandwidth is below one frequency slot")
        unknown = set(self.which) - set(BOUND_IDS)
        if unknown:
            raise BoundError(f"unknown bound ids {sorted(unknown)}")
        self.grid.check(self.sf)


@dataclass
class BoundPoint:
    B: float
    B_eff: float
    K: int
    values: dict
    alpha_star: float
    gamma_star: dict
    rho: float
    flags: list


@dataclass
class BoundCurve:
    points: list
    meta: dict

    def column(self, name):
        return np.array([np.nan if p.values.get(name) is None else p.values[name]
                         for p in self.points])


def evaluate_point(req, B):
    K = slots(B, req.grid)
    Be = K * req.grid.F
    pw, sf, grid = req.power, req.sf, req.grid
    vals, gam, flags = {}, {}, set()
    a = np.nan
    if "ucoh" in req.which:
        vals["ucoh"] = ucoh(Be, pw, grid)
    if "u1" in req.which:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            u, a = u1(Be, pw, sf, grid, return_alpha=True)
            vals["u1"] = float(u)
        if caught:
            flags.add("alpha:clipped")
    if "l1" in req.which:
        if K <= EXACT_K_MAX:
            vals["l1"], gam["l1"] = l1(Be, pw, sf, grid, flags=flags)
        else:
            vals["l1"] = None
            flags.add("l1:exact-path-limit")
    if "l1cf" in req.which:
        vals["l1cf"], gam["l1cf"] = l1cf(Be, pw, sf, grid, flags=flags)
    if "l1approx" in req.which:
        vals["l1approx"], gam["l1approx"] = l1approx(Be, pw, sf, grid, flags=flags)
    if "l1a" in req.which:
        vals["l1a"], gam["l1a"] = l1a(Be, pw, sf, grid)
    return BoundPoint(float(B), float(Be), K, vals, float(a), gam,
                      pw.P * grid.tf / Be, sorted(flags))


def check_ordering(point, rtol=1e-9):
    """Raise if any lower bound exceeds any upper bound or the sandwich breaks."""
    v = {k: x for k, x in point.values.items() if x is not None}
    scale = max([abs(x) for x in v.values()] + [1.0])
    slack = rtol * scale
    lows = [v[k] for k in LOWER_IDS if k in v]
    ups = [v[k] for k in UPPER_IDS if k in v]
    problems = []
    if lows and ups and max(lows) > min(ups) + slack:
        problems.append(f"lower {max(lows):.12g} > upper {min(ups):.12g}")
    chain = [v.get("l1cf"), v.get("l1"), v.get("l1approx")]
    chain = [x for x in chain if x is not None]
    if any(b < a - slack for a, b in zip(chain, chain[1:])):
        problems.append("l1cf <= l1 <= l1approx violated")
    if problems:
        raise BoundError(f"B={point.B:g}: " + "; ".join(problems))


def sweep(req, workers=1):
    Bs = [float(b) for b in req.bandwidths]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            points = list(ex.map(evaluate_point, [req] * len(Bs), Bs))
    else:
        points = [evaluate_point(req, b) for b in Bs]
    for p in points:
        check_ordering(p)
    meta = {"slot_rule": "K = floor(B / F)", "workers": workers}
    return BoundCurve(points, meta)
