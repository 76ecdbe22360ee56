"""Adaptive Gauss-Legendre quadrature on finite intervals.

Integrands are evaluated on whole arrays of nodes at once and may return a
leading batch of values, e.g. ``f(x) -> shape (k, len(x))``; the result then
has shape ``(k,)`` and the error control uses the worst batch member.
"""

from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

DEFAULT_RTOL = 1e-9


@lru_cache(maxsize=32)
def gl_rule(order):
    x, w = roots_legendre(order)
    return x, w


def _panel_sums(f, lo, hi, order):
    x, w = gl_rule(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(nodes.ravel()))
    vals = vals.reshape(vals.shape[:-1] + nodes.shape)
    return np.sum(vals * w, axis=-1) * half


def integrate(f, a, b, breakpoints=(), rtol=DEFAULT_RTOL, atol=0.0, order=16,
              max_panels=1 << 16):
    """Integrate ``f`` over ``[a, b]`` to relative tolerance ``rtol``.

    Panels are split wherever the full-panel rule and the two half-panel rules
    disagree. ``breakpoints`` inside ``(a, b)`` seed the initial panel edges,
    which is how kinks of piecewise profiles are handled.
    """
    if b == a:
        probe = np.asarray(f(np.array([a], dtype=float)))
        return np.zeros(probe.shape[:-1])
    if b < a:
        return -integrate(f, b, a, breakpoints, rtol, atol, order, max_panels)
    edges = np.unique(np.concatenate(
        [[a, b], [p for p in breakpoints if a < p < b]]).astype(float))
    lo, hi = edges[:-1], edges[1:]
    done = None
    while True:
        mid = 0.5 * (lo + hi)
        whole = _panel_sums(f, lo, hi, order)
        halves = (_panel_sums(f, lo, mid, order)
                  + _panel_sums(f, mid, hi, order))
        err = np.abs(halves - whole)
        if err.ndim > 1:
            err = err.reshape(-1, err.shape[-1]).max(axis=0)
        total = halves.sum(axis=-1) + (0.0 if done is None else done)
        scale = np.max(np.abs(total)) if np.ndim(total) else abs(total)
        tol = max(atol, rtol * scale)
        if err.sum() <= tol:
            return total
        # Freeze the panels that are already accurate, split the rest.
        bad = err > tol / len(err)
        good_sum = halves[..., ~bad].sum(axis=-1)
        done = good_sum if done is None else done + good_sum
        if 2 * bad.sum() + len(lo) > max_panels:
            raise ArithmeticError(
                f"quadrature did not converge: error {err.sum():.3g} > {tol:.3g}")
        lo_b, hi_b, mid_b = lo[bad], hi[bad], mid[bad]
        lo = np.concatenate([lo_b, mid_b])
        hi = np.concatenate([mid_b, hi_b])


def tensor_nodes(edges, order):
    """Gauss-Legendre nodes and weights on consecutive panels given by ``edges``."""
    x, w = gl_rule(order)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def integrate2d(f, xedges, yedges, rtol=DEFAULT_RTOL, order=12, max_level=6, atol=0.0):
    """Tensor-product Gauss-Legendre over a rectangle split into panels.

    ``f(X, Y)`` receives 2D node arrays. Every panel is halved in both
    directions until two successive levels agree to ``rtol`` (or ``atol``).
    """
    xedges = np.asarray(xedges, dtype=float)
    yedges = np.asarray(yedges, dtype=float)
    prev = None
    for _ in range(max_level + 1):
        xn, xw = tensor_nodes(xedges, order)
        yn, yw = tensor_nodes(yedges, order)
        X, Y = np.meshgrid(xn, yn, indexing="ij")
        vals = np.asarray(f(X, Y))
        cur = np.einsum("...ij,i,j->...", vals, xw, yw)
        if prev is not None:
            scale = np.max(np.abs(cur))
            if np.max(np.abs(cur - prev)) <= max(rtol * scale, atol, 1e-300):
                return cur
        prev = cur
        xedges = _refine(xedges)
        yedges = _refine(yedges)
    raise ArithmeticError("2D quadrature did not converge")


def _refine(edges):
    mids = 0.5 * (edges[1:] + edges[:-1])
    out = np.empty(2 * len(edges) - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out
