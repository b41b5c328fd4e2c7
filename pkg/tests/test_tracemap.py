import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmvwalk import tracemap
from cmvwalk.checks import PAIR_32
from cmvwalk.coins import fibonacci_number
from cmvwalk.errors import ComplexBranch, DegenerateCoin, NoRootFound

angles = st.floats(-1.4, 1.4).filter(lambda t: abs(t) > 1e-3)


def test_initial_traces_special_points():
    a, b = 0.5, 1.1
    xm1, x0, x1 = tracemap.fib_initial_traces(a, b, 1j)
    assert xm1 == 0 and x0 == 0
    assert x1 == pytest.approx(-1 / (math.cos(a) * math.cos(b)) + math.tan(a) * math.tan(b))
    xm1, x0, x1 = tracemap.fib_initial_traces(a, b, 1.0)
    assert (xm1, x0) == (1 / math.cos(b), 1 / math.cos(a))


@pytest.mark.parametrize("k", [-1, 0, 1, 2, 5, 8])
def test_half_traces_match_cocycle_products(k):
    a, b = 0.7, -0.4
    th = np.linspace(0.1, 6.2, 23)
    x = tracemap.fib_trace(a, b, th, k)
    M = tracemap.fib_monodromy(a, b, th, k)
    ref = 0.5 * np.trace(M, axis1=-2, axis2=-1)
    assert np.all(np.abs(ref.imag) <= 1e-10 * np.maximum(1, np.abs(ref.real)))
    assert np.allclose(x, ref.real, atol=1e-9 * max(1, np.max(np.abs(x))))


@settings(max_examples=50, deadline=None)
@given(angles, angles, st.floats(0, 2 * np.pi))
def test_invariant_of_initial_traces(a, b, th):
    z = np.exp(1j * th)
    xm1, x0, x1 = tracemap.fib_initial_traces(a, b, z)
    lhs = tracemap.fricke_vogt(x1, x0, xm1)
    rhs = tracemap.invariant_closed_form(a, b, z)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, x1 * x1, abs(2 * x1 * x0 * xm1))


def test_invariant_vanishes_on_real_axis_and_kappa_value():
    for z in (1.0, -1.0):
        assert tracemap.invariant_closed_form(0.9, 0.3, z) == 0
    assert tracemap.kappa(math.pi / 3, math.pi / 4) == pytest.approx(abs(2 - math.sqrt(6)))
    assert tracemap.kappa(0.4, 0.4) == 0


def test_orbit_conserves_invariant_and_escapes():
    a, b = PAIR_32
    for th in (0.3, 1.0, 2.0, 4.4):
        orb = tracemap.fib_orbit(a, b, th, 25)
        I0 = float(tracemap.invariant_closed_form(a, b, np.exp(1j * th)))
        assert tracemap.invariant_drift(orb, I0) <= 1e-12
    orb = tracemap.fib_orbit(0.5, 1.1, 0.0, 10, escape_delta=0.01)
    assert orb.escape_index == 0 and orb.growth_ok


def test_orbit_log_mode_matches_recursion():
    a, b = 1.2, 0.9
    orb = tracemap.fib_orbit(a, b, 0.0, 40)
    # at z = 1 the orbit overflows doubles; redo the recursion in extended precision
    with mpmath.workdps(50):
        x = [mpmath.mpf(float(v)) for v in tracemap.fib_initial_traces(a, b, 1.0)]
        for _ in range(3, len(orb.ks)):
            x.append(2 * x[-1] * x[-2] - x[-3])
        ref = [float(mpmath.log(abs(v))) for v in x]
    assert np.allclose(orb.log_abs, ref, rtol=1e-12)
    assert np.all(np.isnan(orb.values[-5:]))


def test_g_pm_branches():
    assert tracemap.g_pm(0.0, 0.0, 3.0, +1) == pytest.approx(2.0)
    assert tracemap.g_pm(0.0, 0.0, 3.0, -1) == pytest.approx(-2.0)
    with pytest.raises(ComplexBranch):
        tracemap.g_pm(2.0, 0.0, 0.0, +1)
    a, b, th = 0.8, 1.0, 1.7
    x = tracemap.fib_traces(a, b, [th], 6)[:, 0]
    I0 = float(tracemap.invariant_closed_form(a, b, np.exp(1j * th)))
    for i in range(2, 7):
        cands = [tracemap.g_pm(x[i], x[i - 1], I0, s) for s in (+1, -1)]
        assert min(abs(c - x[i + 1]) for c in cands) <= 1e-9 * max(1, abs(x[i + 1]))


def test_sigma_minus1_arcs_against_sampling():
    b = 0.9
    th = np.linspace(0, 2 * np.pi, 20001)
    inside = np.abs(tracemap.fib_trace(0.3, b, th, -1)) <= 1
    arcs = tracemap.sigma_minus1_arcs(b)
    in_arcs = np.zeros_like(inside)
    for lo, hi in arcs:
        in_arcs |= (th >= lo) & (th <= hi)
    assert np.mean(inside != in_arcs) < 1e-3
    bs = tracemap.bands(0.3, b, -1)
    assert len(bs) == 2
    for band, (lo, hi) in zip(bs, arcs):
        assert band.theta1 == pytest.approx(lo, abs=1e-10)
        assert band.theta2 == pytest.approx(hi, abs=1e-10)


def test_band_edges_and_interiors():
    a, b = PAIR_32
    for k in (2, 4, 6):
        bs = tracemap.bands(a, b, k)
        assert len(bs) == 2 * fibonacci_number(k)
        for band in bs:
            edge = tracemap.fib_trace(a, b, [band.theta1, band.theta2], k)
            assert np.allclose(np.abs(edge), 1, atol=1e-8)
            mid = np.linspace(band.theta1, band.theta2, 9)[1:-1]
            assert np.all(np.abs(tracemap.fib_trace(a, b, mid, k)) <= 1 + 1e-12)


def test_large_coupling_hierarchy():
    a, b = PAIR_32
    levels = tracemap.band_hierarchy(a, b, 7)
    s = math.sin(b)
    for k, bs in levels.items():
        for band in bs:
            th = np.linspace(band.theta1, band.theta2, 17)
            assert np.all(np.abs(np.sin(th)) >= s - 1e-12)
    # widths shrink with the level
    widths = [max(x.width for x in levels[k]) for k in range(2, 8)]
    assert all(w2 < w1 for w1, w2 in zip(widths, widths[1:]))
    for k in range(1, 6):
        typed, problems = tracemap.classify_bands(levels, k)
        assert not problems
        assert tracemap.check_nesting(levels, {k: typed}, k) == []


def test_largecoup_sweep_and_exponents():
    ta = tracemap.largecoup_sweep(1.0, 32.0)
    assert ta is not None and tracemap.largecoup_conditions(ta, 1.0, 32.0)
    assert not tracemap.largecoup_conditions(ta - 1e-3, 1.0, 32.0)
    kap = tracemap.kappa(*PAIR_32)
    uppers = []
    for mu in (40.0, 400.0, 4000.0, 4e4):
        m, M = tracemap.derivative_constants(PAIR_32[1], mu)
        uppers.append(tracemap.predicted_exponents(kap, mu, m, M, 2.0)["upper"])
    assert all(u2 < u1 for u1, u2 in zip(uppers, uppers[1:]))
    with pytest.raises(DegenerateCoin):
        tracemap.fib_initial_traces(math.pi / 2, 0.3, 1.0)


def test_derivatives_against_finite_differences():
    a, b, h = 0.6, 1.0, 1e-6
    th = np.array([0.4, 1.9, 3.3])
    _, d = tracemap.fib_trace_derivatives(a, b, th, 5)
    fd = (tracemap.fib_traces(a, b, th + h, 5) - tracemap.fib_traces(a, b, th - h, 5)) / (2 * h)
    assert np.allclose(d, fd, rtol=1e-5, atol=1e-6)
    t, dt = tracemap.tm_traces(a, b, th, 4)
    fd = (tracemap.tm_traces(a, b, th + h, 4)[0] - tracemap.tm_traces(a, b, th - h, 4)[0]) / (2 * h)
    assert np.allclose(dt, fd, rtol=1e-5, atol=1e-5)


@pytest.mark.parametrize("n", [0, 1, 2, 3, 5])
def test_tm_traces_match_monodromies(n):
    a, b = 0.7, 1.2
    for th in (0.35, 1.4, 2.8):
        t = tracemap.tm_traces(a, b, np.array([th]), max(n, 2))[0][n + 1, 0]
        M = tracemap.tm_monodromy(a, b, th, n)
        assert abs(t - np.trace(M)) <= 1e-9 * max(1.0, abs(t))


def test_tm_mp_monodromies_match_double():
    a, b, th = 0.7, 1.2, 0.9
    Ms = tracemap.tm_monodromies_mp(a, b, th, 4)
    for n in range(5):
        M = np.array(Ms[n].tolist(), dtype=complex)
        assert np.allclose(M, tracemap.tm_monodromy(a, b, th, n), atol=1e-10)


def test_closed_gaps():
    a, b = 0.7, 1.2
    roots = tracemap.tm_closed_gap_search(a, b, 5)
    assert roots
    r = min(roots, key=lambda d: d["k"])
    rep = tracemap.verify_closed_gap_mp(a, b, r["theta"], r["k"], 6)
    assert rep["monodromy"] <= 1e-8 and rep["trace"] <= 1e-8 and rep["derivative"] <= 1e-8
    with pytest.raises(ValueError):
        tracemap.tm_closed_gap_search(a, b, 2)
    with pytest.raises(NoRootFound):
        tracemap.polish_tm_root(a, b, 0.0, 1, width=1e-12)
