"""Interpolation kernels: compiled extension against the pure fallback."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdnse import kernels
from sdnse.kernels import _reference as ref

try:
    from sdnse.kernels import _core as core
    HAVE_EXT = True
except ImportError:
    core = None
    HAVE_EXT = False

needs_ext = pytest.mark.skipif(not HAVE_EXT,
                               reason="compiled extension not built")


def test_backend_reported():
    assert kernels.BACKEND in ("compiled", "python")


@needs_ext
@pytest.mark.parametrize("ndim", [1, 2, 3])
def test_clamped_backends_agree(ndim):
    rng = np.random.default_rng(ndim)
    shape = (2,) + (7, 6, 5)[:ndim]
    vals = rng.standard_normal(shape)
    origin = rng.uniform(-1, 0, ndim)
    spacing = rng.uniform(0.1, 0.5, ndim)
    pts = rng.uniform(-2, 4, (200, ndim))
    a = core.interp_linear(vals, origin, spacing, pts)
    b = ref.interp_linear(vals, origin, spacing, pts)
    assert np.allclose(a, b, atol=1e-14)


@needs_ext
@pytest.mark.parametrize("ndim", [1, 2, 3])
def test_periodic_backends_agree(ndim):
    rng = np.random.default_rng(10 + ndim)
    shape = (3,) + (8, 8, 8)[:ndim]
    vals = rng.standard_normal(shape)
    L = 2.5
    pts = rng.uniform(-3 * L, 3 * L, (300, ndim))  # includes negatives
    a = core.interp_linear_periodic(vals, L, pts)
    b = ref.interp_linear_periodic(vals, L, pts)
    assert np.allclose(a, b, atol=1e-13)


def test_clamped_exact_on_nodes():
    rng = np.random.default_rng(2)
    vals = rng.standard_normal((1, 6, 5))
    origin = np.array([0.0, 0.0])
    spacing = np.array([0.5, 0.25])
    ii, jj = np.meshgrid(np.arange(6), np.arange(5), indexing="ij")
    pts = np.stack([origin[0] + spacing[0] * ii.ravel(),
                    origin[1] + spacing[1] * jj.ravel()], axis=1)
    out = kernels.interp_linear(vals, origin, spacing, pts)
    assert np.allclose(out[:, 0], vals[0].ravel(), atol=1e-14)


def test_clamped_zero_outside_box():
    vals = np.ones((1, 4, 4))
    out = kernels.interp_linear(vals, [0.0, 0.0], [1.0, 1.0],
                                [[-0.5, 1.0], [1.0, 3.5], [5.0, 5.0]])
    assert np.all(out == 0.0)


def test_periodic_wraps():
    vals = np.arange(4.0)[None]
    L = 4.0
    out = kernels.interp_linear_periodic(vals, L, [[0.0], [4.0], [-4.0],
                                                   [3.5], [-0.5]])
    assert out[0, 0] == out[1, 0] == out[2, 0] == pytest.approx(0.0)
    # halfway between last node (3) and wrapped first node (0)
    assert out[3, 0] == pytest.approx(1.5)
    assert out[4, 0] == pytest.approx(1.5)


def test_linear_function_reproduced():
    # multilinear interpolation is exact for affine data
    xs = np.arange(8) * 0.3 - 1.0
    ys = np.arange(6) * 0.4
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vals = (2.0 * X - 0.7 * Y + 0.3)[None]
    rng = np.random.default_rng(3)
    pts = np.stack([rng.uniform(xs[0], xs[-1], 100),
                    rng.uniform(ys[0], ys[-1], 100)], axis=1)
    out = kernels.interp_linear(vals, [xs[0], ys[0]], [0.3, 0.4], pts)
    want = 2.0 * pts[:, 0] - 0.7 * pts[:, 1] + 0.3
    assert np.allclose(out[:, 0], want, atol=1e-12)


@settings(deadline=None, max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_interpolant_within_data_range(seed):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal((1, 9, 9))
    L = 3.0
    pts = rng.uniform(-2 * L, 2 * L, (50, 2))
    out = kernels.interp_linear_periodic(vals, L, pts)
    assert np.all(out >= vals.min() - 1e-12)
    assert np.all(out <= vals.max() + 1e-12)


def test_env_var_forces_fallback():
    import subprocess
    import sys
    code = ("import sdnse.kernels as k; print(k.BACKEND)")
    out = subprocess.run([sys.executable, "-c", code],
                         env={"SDNSE_NO_EXT": "1", "PATH": "/usr/bin:/bin"},
                         capture_output=True, text=True)
    assert out.stdout.strip() == "python"
