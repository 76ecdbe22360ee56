"""Mutual information of the scalar Rayleigh channel y = h x + w.

h, w ~ CN(0, 1) independent. Two quantities are needed:

* the coherent MI with a constant-modulus, uniform-phase input |x|^2 = rho,
  I(y; x | h) = E_g[J(rho g)] with g = |h|^2 ~ Exp(1) and
  J(s) = 2 s - E[log I0(2 sqrt(s) |sqrt(s) + w|)];
* the Gaussian-input value E[log(1 + rho |h|^2)] = exp(1/rho) E1(1/rho).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import exp1, i0e

TAYLOR_SWITCH = 1e-4
CONTROL_VARIATE_MAX = 0.25   # below this SNR the low-order terms are subtracted exactly


class MIError(ValueError):
    pass


@dataclass(frozen=True)
class SnrPoint:
    rho: float

    def __post_init__(self):
        if not self.rho >= 0:
            raise MIError("rho must be nonnegative")


@dataclass(frozen=True)
class MIEstimate:
    value: float
    stderr: float = 0.0
    method: str = "quadrature"

    def __float__(self):
        return self.value


def _log_i0(z):
    return np.log(i0e(z)) + z


@lru_cache(maxsize=4)
def _hermite_2d(n):
    x, w = np.polynomial.hermite.hermgauss(n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w) / np.pi
    return X.ravel(), Y.ravel(), W.ravel()


def coherent_kernel(s, n_nodes=96):
    """J(s): MI given the channel gain, for received SNR s (vectorized)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    X, Y, W = _hermite_2d(n_nodes)
    root = np.sqrt(s)[:, None]
    # w = X + jY with X, Y ~ N(0, 1/2) under the Hermite weight
    R = np.hypot(root + X, Y)
    out = 2 * s - (_log_i0(2 * root * R) @ W)
    return np.maximum(out, 0.0)


@lru_cache(maxsize=4096)
def _mi_quadrature(rho):
    if rho == 0:
        return 0.0
    val, _ = quad(lambda g: coherent_kernel(rho * g)[0] * np.exp(-g), 0.0, np.inf,
                  epsabs=1e-13, epsrel=1e-10, limit=200)
    return val


def _mi_monte_carlo(rho, n_samples, seed, chunk=250_000):
    rng = np.random.Generator(np.random.Philox(seed))
    shift = None
    total = 0.0
    total_sq = 0.0
    left = n_samples
    while left > 0:
        n = min(chunk, left)
        h = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        w = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        phase = np.exp(2j * np.pi * rng.random(n))
        y = h * np.sqrt(rho) * phase + w
        s = rho * np.abs(h) ** 2
        # log p(y|x,h) - log p(y|h) with the phase marginalized in closed form.
        # |y|^2 - |w|^2 is replaced by its conditional mean s: the dropped
        # cross term has zero mean and variance O(rho), which would swamp the
        # O(rho^2) curvature at low SNR.
        z = 2 * np.sqrt(s) * np.abs(y)
        if rho < CONTROL_VARIATE_MAX:
            # control variates 2s and s|y|^2 = z^2/4 with exact means 2 rho
            # and rho + 2 rho^2; what is left has variance O(rho^4)
            val = rho - 2 * rho * rho + (0.25 * z * z - _log_i0(z))
        else:
            val = 2 * s - _log_i0(z)
        if shift is None:
            shift = val.mean()
        d = val - shift
        total += d.sum()
        total_sq += (d * d).sum()
        left -= n
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    return shift + mean, np.sqrt(var / n_samples)


def mi_cm_coherent(rho, method="monte_carlo", seed=0, n_samples=10**6):
    """Coherent MI (nats) of constant-modulus input at per-symbol SNR ``rho``.

    ``method`` is ``monte_carlo`` (with standard error) or ``quadrature``
    (Gauss-Hermite over the noise, adaptive over the fading gain).
    """
    SnrPoint(rho)
    if method == "monte_carlo":
        if n_samples < 1000:
            raise MIError("n_samples must be at least 1000")
        if rho == 0:
            return MIEstimate(0.0, 0.0, method)
        mean, se = _mi_monte_carlo(rho, int(n_samples), seed)
        return MIEstimate(float(mean), float(se), method)
    if method == "quadrature":
        return MIEstimate(_mi_quadrature(float(rho)), 0.0, method)
    raise MIError(f"unknown method {method!r}")


def mi_cm_for_bounds(rho):
    """Deterministic MI used inside bound evaluations.

    Returns (value, method flag); below TAYLOR_SWITCH the two-term expansion
    replaces the quadrature.
    """
    if rho < TAYLOR_SWITCH:
        return mi_cm_taylor(rho), "taylor"
    return _mi_quadrature(float(rho)), "quadrature"


def mi_cm_taylor(rho):
    """rho - rho^2; a surrogate for the coherent MI valid only for rho << 1."""
    SnrPoint(rho)
    return rho - rho * rho


def e_log_awgn(rho):
    """E[log(1 + rho g)], g ~ Exp(1), as exp(1/rho) E1(1/rho)."""
    SnrPoint(rho)
    if rho == 0:
        return 0.0
    x = 1.0 / rho
    if x < 50.0:
        return float(np.exp(x) * exp1(x))
    # asymptotic series of exp(x) E1(x); terms shrink until k ~ x
    term, total = 1.0 / x, 0.0
    for k in range(1, 60):
        total += term
        term *= -k / x
    return float(total)
