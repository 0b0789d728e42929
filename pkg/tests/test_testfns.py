"""Tests for the enumeration and the smooth test-function chain."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import gamma as gamma_fn

from sdnse import testfns as tf


# ---------------------------------------------------------------------------
# pairing and rationals
# ---------------------------------------------------------------------------

def test_pair_index_examples():
    assert tf.pair_index(1, 1) == 1
    assert tf.pair_index(2, 2) == 5
    assert tf.pair_index(4, 1) == 7


def test_pair_prefix_order():
    got = [tf.unpair_index(k) for k in range(1, 7)]
    assert got == [(1, 1), (2, 1), (1, 2), (1, 3), (2, 2), (3, 1)]


def test_pair_bijection_dense():
    seen = {}
    for l in range(1, 60):
        for i in range(1, 60):
            k = tf.pair_index(l, i)
            assert k not in seen
            seen[k] = (l, i)
            assert tf.unpair_index(k) == (l, i)
    # the image covers an initial segment of N
    covered = sorted(seen)
    assert covered[:1000] == list(range(1, 1001))


@given(st.integers(min_value=1, max_value=10**9))
def test_unpair_roundtrip(k):
    l, i = tf.unpair_index(k)
    assert l >= 1 and i >= 1
    assert tf.pair_index(l, i) == k


def test_pair_rejects_nonpositive():
    with pytest.raises(ValueError):
        tf.pair_index(0, 1)
    with pytest.raises(ValueError):
        tf.unpair_index(0)


def test_calkin_wilf_prefix():
    from fractions import Fraction as F
    want = [F(1), F(1, 2), F(2), F(1, 3), F(3, 2), F(2, 3), F(3)]
    assert [tf.calkin_wilf(m) for m in range(1, 8)] == want


def test_calkin_wilf_injective():
    vals = {tf.calkin_wilf(m) for m in range(1, 5001)}
    assert len(vals) == 5000
    assert all(v > 0 for v in vals)


def test_enumerate_rationals_structure():
    from fractions import Fraction as F
    got = [tf.enumerate_rationals(i) for i in range(1, 11)]
    assert got == [F(0), F(1), F(-1), F(1, 2), F(-1, 2),
                   F(2), F(-2), F(1, 3), F(-1, 3), F(3, 2)]
    vals = {tf.enumerate_rationals(i) for i in range(1, 3001)}
    assert len(vals) == 3000


def test_rational_point_injective():
    pts = {tf.rational_point(i, 3) for i in range(1, 2001)}
    assert len(pts) == 2000
    assert tf.rational_point(1, 3) == (0, 0, 0)


def test_cube_index_consistency():
    cube = tf.cube_index(7, 2)
    assert (cube.l, cube.i) == (4, 1)
    assert cube.edge == pytest.approx(math.pi / 24.0)
    lo, hi = cube.bounds()
    assert np.allclose(hi - lo, cube.edge)


# ---------------------------------------------------------------------------
# Jones functions
# ---------------------------------------------------------------------------

def test_jones_h0_gamma_oracle():
    for a in (3.0, 6.0, 12.0, 48.0):
        assert tf.jones_h0(a) == pytest.approx(
            gamma_fn(1.0 / a + 1.0), abs=1e-10)


def test_jones_h_identity_against_h0():
    for a in (3.0, 6.0, 12.0):
        half = math.pi / (2 * a)
        x = np.linspace(-half, half, 101)
        h = tf.jones_h(x, a)
        ref = tf.jones_h0(a) * np.exp(-1j * x)
        assert np.max(np.abs(h - ref)) < 1e-10


def test_jones_h_matches_direct_quadrature():
    # independent straight-line quadrature on the strict interior
    for a in (3.0, 6.0, 12.0):
        half = math.pi / (2 * a)
        for x in np.linspace(-0.95 * half, 0.95 * half, 9):
            direct = tf.jones_h_direct(float(x), a)
            assert abs(tf.jones_h(x, a) - direct) < 1e-8


def test_jones_h_zero_outside():
    a = 3.0
    half = math.pi / (2 * a)
    assert tf.jones_h(half * 1.01, a) == 0
    assert tf.jones_h(-2.0, a) == 0


def test_jones_h_derivative_identity():
    # h' = -i h, via finite differences of the evaluated h
    a = 6.0
    half = math.pi / (2 * a)
    x = np.linspace(-0.8 * half, 0.8 * half, 21)
    d = 1e-6
    hp = (tf.jones_h(x + d, a) - tf.jones_h(x - d, a)) / (2 * d)
    assert np.max(np.abs(hp + 1j * tf.jones_h(x, a))) < 1e-6


def test_jones_g_pde_identity():
    # i y dg/dy = dg/dx pointwise
    a = 3.0
    rng = np.random.default_rng(0)
    x = rng.uniform(-math.pi / (2 * a), math.pi / (2 * a), 20)
    y = rng.uniform(0.1, 1.5, 20)
    d = 1e-6
    gy = (tf.jones_g(x, y + d, a) - tf.jones_g(x, y - d, a)) / (2 * d)
    gx = (tf.jones_g(x + d, y, a) - tf.jones_g(x - d, y, a)) / (2 * d)
    assert np.max(np.abs(1j * y * gy - gx)) < 1e-4 * np.max(np.abs(gx))


def test_jones_g_requires_valid_args():
    with pytest.raises(ValueError):
        tf.jones_g(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        tf.jones_g(0.0, -1.0, 3.0)
    with pytest.raises(ValueError):
        tf.jones_h(0.0, 0.5)


# ---------------------------------------------------------------------------
# mollifier and chi
# ---------------------------------------------------------------------------

def test_mollifier_unit_mass_and_support():
    for l in (1, 3, 5):
        eps = tf.JonesParams(l).eps
        val, err = integrate.quad(lambda x: tf.mollifier(l, x),
                                  -eps, eps, limit=200)
        assert val == pytest.approx(1.0, abs=1e-9)
        assert tf.mollifier(l, eps * 1.001) == 0.0
        assert tf.mollifier(l, -eps * 1.001) == 0.0


def test_chi_support():
    for l in (1, 2, 4):
        half = math.pi / 2.0 ** (l + 1)
        assert abs(tf.chi(l, half * (1 + 1e-9))) == 0.0
        assert abs(tf.chi(l, -half * (1 + 1e-9))) == 0.0
        assert abs(tf.chi(l, 0.0)) > 0.0


def test_chi_core_identity():
    # on the core |w| <= eps the convolution is exactly alpha e^{-iw}
    for l in (1, 3):
        eps = tf.JonesParams(l).eps
        w = np.linspace(-eps, eps, 41)
        ref = tf.alpha(l) * np.exp(-1j * w)
        assert np.max(np.abs(tf.chi(l, w) - ref)) < 1e-12


def test_chi_against_direct_convolution():
    # independent oracle: adaptive quadrature of (f_l * h_l)(w)
    l = 2
    p = tf.JonesParams(l)

    def direct(w):
        re, _ = integrate.quad(
            lambda z: tf.mollifier(l, z)
            * np.real(tf.jones_h(w - z, p.a)), -p.eps, p.eps, limit=200)
        im, _ = integrate.quad(
            lambda z: tf.mollifier(l, z)
            * np.imag(tf.jones_h(w - z, p.a)), -p.eps, p.eps, limit=200)
        return re + 1j * im

    for w in np.linspace(-2.8 * p.eps, 2.8 * p.eps, 9):
        assert abs(tf.chi(l, w) - direct(w)) < 1e-10


def test_chi_derivative_spline_accuracy():
    from sdnse.testfns import _level
    lev = _level(2)
    eps = lev.params.eps
    w = np.linspace(-2.9 * eps, 2.9 * eps, 25)
    h = eps * 1e-5
    fd = (lev.chi(w + h) - lev.chi(w - h)) / (2 * h)
    sp = lev.chi_derivative(1)(w)
    assert np.max(np.abs(fd - sp)) < 1e-8 * np.max(np.abs(sp))


# ---------------------------------------------------------------------------
# xi and E_k
# ---------------------------------------------------------------------------

def test_xi_core_magnitude():
    # |xi| on the core equals 3^-(pi+|c|)/n exactly under the chosen scaling
    cube = tf.cube_index(2, 3)  # level 2, center 0
    val = tf.xi(cube, float(cube.center[0]), axis=0)
    assert abs(val) == pytest.approx(3.0 ** (-math.pi) / 3.0, rel=1e-12)


def test_xi_modes_agree():
    for k in (1, 2, 5, 9):
        cube = tf.cube_index(k, 2)
        c = float(cube.center[0])
        x = c + np.linspace(-2.9, 2.9, 31) * cube.params.eps
        a = tf.xi(cube, x, axis=0, mode="convolution")
        b = tf.xi(cube, x, axis=0, mode="closed-form-core")
        assert np.max(np.abs(a - b)) < 1e-8


def test_xi_bound_below_one_over_n():
    rng = np.random.default_rng(1)
    for k in range(1, 120):
        for n in (1, 2, 3):
            cube = tf.cube_index(k, n)
            c = float(cube.center[0])
            x = c + rng.uniform(-3, 3, 64) * cube.params.eps
            assert np.max(np.abs(tf.xi(cube, x, axis=0))) < 1.0 / n


def test_eval_E_zero_outside_cube():
    for k in (1, 4, 11, 30):
        cube = tf.cube_index(k, 3)
        lo, hi = cube.bounds()
        outside = np.stack([hi + cube.edge * 0.01,
                            lo - cube.edge * 0.01,
                            hi + 5.0])
        assert np.all(tf.eval_E(cube, outside) == 0.0)


def test_eval_E_componentwise_inside():
    cube = tf.cube_index(3, 2)
    pt = cube.center_floats()[None, :]
    vals = tf.eval_E(cube, pt)
    for j in range(2):
        assert vals[0, j] == pytest.approx(
            complex(tf.xi(cube, float(cube.center[j]), axis=j)))


def test_eval_E_dimension_mismatch():
    cube = tf.cube_index(1, 3)
    with pytest.raises(ValueError):
        tf.eval_E(cube, np.zeros((4, 2)))


def test_scale_factor_overflow_guard():
    with pytest.raises(OverflowError):
        tf._scale_factor(1, tf.MAX_ABS_CENTER + 1.0)


@settings(deadline=None, max_examples=30)
@given(st.integers(min_value=1, max_value=400), st.integers(1, 3))
def test_cube_enumeration_total(k, n):
    cube = tf.cube_index(k, n)
    assert cube.k == k
    assert tf.pair_index(cube.l, cube.i) == k
    assert len(cube.center) == n
