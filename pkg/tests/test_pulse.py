import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import dblquad, quad

from wssuscap import pulse_design
from wssuscap.pulse_design import (Pulse, eigenfunction_error_e1, eigenvalue_error_e2,
                                   grid_ratio_sweep, isi_ici_bound_e4, isi_ici_generic)
from wssuscap.scattering import (Brick, DopplerFlat, GridParams, Profile, ScatteringError,
                                 Tabulated, make_scattering)

SF = make_scattering(Brick(), 5.0, 0.5e-6)
GRID = GridParams(0.35e-3, 3.53e3)

# regression baselines (closed-form Gaussian lattice sums)
E1_BASELINE = 5.23615927111e-06
E2_BASELINE = 1.6450165542e-11
E4_BASELINE = 0.08418761162123833


def ambiguity_by_quadrature(p, nu, tau):
    g = p.waveform
    f = lambda t: g(t) * g(t - tau) * np.exp(-2j * np.pi * nu * t)
    lim = 12 * p.scale + abs(tau)
    re, _ = quad(lambda t: f(t).real, -lim, lim, epsabs=1e-14, epsrel=1e-13, limit=400)
    im, _ = quad(lambda t: f(t).imag, -lim, lim, epsabs=1e-14, epsrel=1e-13, limit=400)
    return complex(re, im)


def test_unit_energy_and_origin():
    p = Pulse(0.8)
    e, _ = quad(lambda t: p.waveform(t) ** 2, -20, 20, epsabs=1e-14)
    assert e == pytest.approx(1.0, abs=1e-12)
    assert pulse_design.ambiguity(p, 0.0, 0.0) == pytest.approx(1.0)


def test_heisenberg():
    for s in (1e-3, 0.3, 7.0):
        p = Pulse(s)
        assert p.effective_duration * p.effective_bandwidth >= 1 / (4 * np.pi) * (1 - 1e-12)
    # the Gaussian attains it
    p = Pulse(0.3)
    assert p.effective_duration * p.effective_bandwidth == pytest.approx(1 / (4 * np.pi))
    # second-moment definitions checked directly
    t2, _ = quad(lambda t: t * t * p.waveform(t) ** 2, -5, 5, epsabs=1e-15)
    assert np.sqrt(t2) == pytest.approx(p.effective_duration, rel=1e-10)


def test_closed_form_ambiguity_matches_quadrature():
    p = Pulse(1.0)
    assert abs(p.ambiguity(0.5, 0.5) - ambiguity_by_quadrature(p, 0.5, 0.5)) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-3, 3), st.floats(-3, 3))
def test_ambiguity_random_points(s, nu, tau):
    p = Pulse(s)
    nu, tau = nu / s, tau * s
    A = p.ambiguity(nu, tau)
    assert abs(A - ambiguity_by_quadrature(p, nu, tau)) < 1e-8
    assert abs(A) <= 1.0


@pytest.mark.parametrize("s", [0.3, 1.0, 2.5])
def test_radar_uncertainty_volume(s):
    p = Pulse(s)
    vol, _ = dblquad(lambda t, n: p.ambiguity_sq(n, t), -8 / s, 8 / s, -8 * s, 8 * s,
                     epsabs=1e-12, epsrel=1e-10)
    assert vol == pytest.approx(1.0, abs=1e-6)
    # maximum at the origin
    N, T = np.meshgrid(np.linspace(-3 / s, 3 / s, 41), np.linspace(-3 * s, 3 * s, 41))
    assert np.abs(p.ambiguity(N, T)).max() == pytest.approx(1.0)


def _brute(sf, h):
    ne, te = sf.edges()
    val, _ = dblquad(lambda t, n: sf(n, t) * h(n, t), ne[0], ne[-1], te[0], te[-1],
                     epsabs=0, epsrel=1e-11)
    return val


def test_e1_e2_match_brute_force():
    sf = make_scattering(DopplerFlat(Profile.triangular()), 50.0, 1e-3)
    p = Pulse(0.02)
    h1 = lambda n, t: 1 - p.ambiguity_sq(n, t)
    h2 = lambda n, t: abs(1 - p.ambiguity(n, t)) ** 2
    assert eigenfunction_error_e1(sf, p) == pytest.approx(_brute(sf, h1), rel=1e-8)
    assert eigenvalue_error_e2(sf, p) == pytest.approx(_brute(sf, h2), rel=1e-8)


def test_matched_grid_errors():
    p = Pulse.matched(GRID)
    assert p.scale == pytest.approx(np.sqrt(GRID.T / GRID.F))
    e1 = eigenfunction_error_e1(SF, p)
    e2 = eigenvalue_error_e2(SF, p)
    assert e1 < 1e-3 and e2 < 1e-3
    assert e1 == pytest.approx(E1_BASELINE, rel=1e-9)
    assert e2 == pytest.approx(E2_BASELINE, rel=1e-8)


def test_error_extremes():
    # |A|^2 ~ 0 over the support: a pulse far too narrow in time
    sf = make_scattering(Brick(), 5.0, 0.02)
    p = Pulse(1e-7)
    assert eigenfunction_error_e1(sf, p) == pytest.approx(1.0, abs=1e-6)
    tiny = make_scattering(Brick(), 1e-6, 1e-12)
    assert eigenfunction_error_e1(tiny, Pulse(1.0)) < 1e-10
    assert eigenvalue_error_e2(tiny, Pulse(1.0)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(0.1, 10.0), st.floats(0.1, 0.95))
def test_errors_shrink_with_spread(delta, aspect, shrink):
    nu = np.sqrt(delta * aspect) / 2
    tau = np.sqrt(delta / aspect) / 2
    big = make_scattering(Brick(), nu, tau)
    small = make_scattering(Brick(), nu * shrink, tau * shrink)
    p = Pulse(np.sqrt(tau / nu))
    assert eigenfunction_error_e1(small, p) <= eigenfunction_error_e1(big, p)
    assert eigenvalue_error_e2(small, p) <= eigenvalue_error_e2(big, p)
    for e in (eigenfunction_error_e1(big, p), ):
        assert 0 <= e <= 1
    assert 0 <= eigenvalue_error_e2(big, p) <= 4


def test_e4_baseline_and_generic_route():
    p = Pulse.matched(GRID)
    val, tail = isi_ici_bound_e4(SF, p, GRID)
    assert val < 0.1
    assert val == pytest.approx(E4_BASELINE, rel=1e-9)
    assert tail < 1e-12
    generic = isi_ici_generic(SF, p.ambiguity_sq, GRID, 2)
    closed, _ = isi_ici_bound_e4(SF, p, GRID, 2)
    assert generic == pytest.approx(closed, rel=1e-8)


def test_e4_nondecreasing_in_radius_and_tail_bounds_gap():
    sf = make_scattering(Tabulated(np.arange(1.0, 7.0).reshape(2, 3)), 5.0, 0.5e-6)
    grid = GridParams(0.02, 2e4)
    p = Pulse(0.05 * np.sqrt(grid.T / grid.F))
    vals = [isi_ici_bound_e4(sf, p, grid, R) for R in range(1, 8)]
    v = [x for x, _ in vals]
    assert all(b >= a * (1 - 1e-14) for a, b in zip(v, v[1:]))
    final = isi_ici_bound_e4(sf, p, grid, 40)[0]
    for x, t in vals:
        assert final - x <= t * (1 + 1e-9) + 1e-15


def test_e4_touching_grid_is_worse():
    p = Pulse.matched(GRID)
    base, _ = isi_ici_bound_e4(SF, p, GRID)
    touch = GridParams(5e-7, 5.0)
    worse, _ = isi_ici_bound_e4(SF, Pulse.matched(touch), touch)
    assert worse > base


def test_e4_zero_for_confined_ambiguity():
    narrow = lambda n, t: np.where((np.abs(n) < 6.0) & (np.abs(t) < 6e-7), 1.0, 0.0)
    assert isi_ici_generic(SF, narrow, GRID, 2) == 0.0


def test_e4_rejects_bad_inputs():
    p = Pulse.matched(GRID)
    with pytest.raises(ScatteringError):
        isi_ici_bound_e4(SF, p, GRID, 0)
    with pytest.raises(ScatteringError):
        isi_ici_bound_e4(SF, p, GridParams(0.2, 3.53e3))


def test_grid_ratio_argmin():
    sf = make_scattering(Brick(), 50.0, 1e-3)
    q0 = sf.tau_max / sf.nu_max
    ratios = q0 * np.logspace(-1, 1, 21)
    rows = grid_ratio_sweep(sf, 1.25, ratios)
    vals = np.array([v for _, v, _ in rows])
    assert np.nanargmin(vals) == 10
    # the grid spacing 10^0.1 brackets the optimum
    assert ratios[np.nanargmin(vals)] == pytest.approx(q0)


def test_grid_ratio_marks_non_nyquist():
    rows = grid_ratio_sweep(SF, 1.25, [1e-12, 1e-7])
    assert np.isnan(rows[0][1]) and not np.isnan(rows[1][1])
