"""Smooth compactly supported test functions and the cube enumeration.

The construction chain is:

    g(x, y) = exp(-y^a e^{iax})          (complex seed)
    h(x)    = int_0^inf g(x, y) dy       on [-pi/2a, pi/2a], 0 outside
    f_l     = normalized bump of radius eps_l = pi/(4 a_l)
    chi_l   = f_l * h_l                  (compactly supported, C-infinity)
    xi      = chi_l(x - c) / (n alpha_l 3^(pi + |c|))

with a_l = 3 * 2^(l-1).  Vector fields E_k evaluate xi componentwise on
the closed cube B_k of edge pi/a_l centered at a rational point, and are
taken to be zero outside B_k.  Cubes are enumerated by a boustrophedon
pairing of (level, center-index) with rational centers listed by a
Calkin-Wilf scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

__all__ = [
    "JonesParams",
    "CubeIndex",
    "QuadratureError",
    "pair_index",
    "unpair_index",
    "calkin_wilf",
    "enumerate_rationals",
    "rational_point",
    "cube_index",
    "jones_g",
    "jones_h",
    "jones_h_direct",
    "jones_h0",
    "mollifier",
    "mollifier_constant",
    "chi",
    "alpha",
    "xi",
    "xi_derivative",
    "eval_E",
]

LOG3 = math.log(3.0)
# largest |center coordinate| before 3^(pi+|c|) overflows double precision
MAX_ABS_CENTER = 700.0 / LOG3 - math.pi


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Carries the achieved absolute error estimate in ``estimate``.
    """

    def __init__(self, message, estimate):
        super().__init__(f"{message} (achieved error estimate {estimate:.3e})")
        self.estimate = estimate


# ---------------------------------------------------------------------------
# enumeration: pairing and rationals
# ---------------------------------------------------------------------------

def pair_index(l: int, i: int) -> int:
    """Map (l, i) in N x N to k in N by boustrophedon diagonals.

    Diagonals l + i = d are listed for d = 2, 3, ...; even diagonals are
    traversed with l ascending, odd diagonals with l descending.  The
    resulting prefix is (1,1), (2,1), (1,2), (1,3), (2,2), (3,1), (4,1), ...
    """
    if l < 1 or i < 1:
        raise ValueError(f"pair_index requires l, i >= 1, got ({l}, {i})")
    d = l + i
    before = (d - 2) * (d - 1) // 2
    return before + (l if d % 2 == 0 else i)


def unpair_index(k: int) -> tuple[int, int]:
    """Inverse of :func:`pair_index`."""
    if k < 1:
        raise ValueError(f"unpair_index requires k >= 1, got {k}")
    # largest d with (d-2)(d-1)/2 < k
    d = int((1 + math.isqrt(8 * k - 7)) // 2) + 1
    while (d - 2) * (d - 1) // 2 >= k:
        d -= 1
    while (d - 1) * d // 2 < k:
        d += 1
    pos = k - (d - 2) * (d - 1) // 2
    if d % 2 == 0:
        l = pos
    else:
        l = d - pos
    return l, d - l


def calkin_wilf(m: int) -> Fraction:
    """m-th positive rational in the breadth-first Calkin-Wilf tree, m >= 1."""
    if m < 1:
        raise ValueError(f"calkin_wilf requires m >= 1, got {m}")
    num, den = 1, 1
    for bit in bin(m)[3:]:
        if bit == "1":
            num = num + den
        else:
            den = num + den
    return Fraction(num, den)


def enumerate_rationals(i: int) -> Fraction:
    """Bijection N -> Q: 1 -> 0, then Calkin-Wilf positives interleaved
    with their negatives (2 -> 1, 3 -> -1, 4 -> 1/2, 5 -> -1/2, ...)."""
    if i < 1:
        raise ValueError(f"enumerate_rationals requires i >= 1, got {i}")
    if i == 1:
        return Fraction(0)
    q = calkin_wilf(i // 2)
    return q if i % 2 == 0 else -q


def rational_point(i: int, n: int) -> tuple[Fraction, ...]:
    """i-th element of the bijection N -> Q^n.

    Coordinates are split off one at a time with the diagonal pairing,
    so the 1-D enumeration and the pairing fully determine the order.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if n == 1:
        return (enumerate_rationals(i),)
    j1, rest = unpair_index(i)
    return (enumerate_rationals(j1),) + rational_point(rest, n - 1)


@dataclass(frozen=True)
class JonesParams:
    """Per-level constants: a_l = 3*2^(l-1), eps_l = pi/(4 a_l)."""

    l: int

    def __post_init__(self):
        if self.l < 1:
            raise ValueError(f"level must be >= 1, got {self.l}")

    @property
    def a(self) -> float:
        return 3.0 * 2.0 ** (self.l - 1)

    @property
    def eps(self) -> float:
        return math.pi / (4.0 * self.a)

    @property
    def support_halfwidth(self) -> float:
        """Half-width of spt(chi_l): pi / 2^(l+1) = 3 * eps_l."""
        return math.pi / 2.0 ** (self.l + 1)


@dataclass(frozen=True)
class CubeIndex:
    """Closed cube B_k = B_l(x^i): center x^i in Q^n, edge pi/a_l."""

    k: int
    l: int
    i: int
    center: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def params(self) -> JonesParams:
        return JonesParams(self.l)

    @property
    def edge(self) -> float:
        return math.pi / self.params.a

    @property
    def diagonal(self) -> float:
        return self.edge * math.sqrt(self.n)

    def center_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.center])

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        c = self.center_floats()
        h = 0.5 * self.edge
        return c - h, c + h


def cube_index(k: int, n: int) -> CubeIndex:
    """k-th cube of the enumeration in dimension n."""
    l, i = unpair_index(k)
    return CubeIndex(k=k, l=l, i=i, center=rational_point(i, n))


# ---------------------------------------------------------------------------
# Jones functions
# ---------------------------------------------------------------------------

def jones_g(x, y, a: float):
    """g(x, y) = exp(-y^a e^{iax}) for y >= 0, a > 1."""
    if a <= 1:
        raise ValueError(f"jones_g requires a > 1, got {a}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("jones_g requires y >= 0")
    ya = y**a
    return np.exp(-ya * np.cos(a * x)) * np.exp(-1j * ya * np.sin(a * x))


@lru_cache(maxsize=None)
def jones_h0(a: float, tol: float = 1e-12) -> float:
    """h(0) = int_0^inf exp(-y^a) dy by adaptive quadrature."""
    if a <= 1:
        raise ValueError(f"jones_h0 requires a > 1, got {a}")

    def integrand(y):
        e = a * math.log(y) if y > 0 else -math.inf
        return math.exp(-math.exp(e)) if e < 700.0 else 0.0

    # split at y = 1: for large a the integrand is a near-step there
    v1, e1 = integrate.quad(integrand, 0.0, 1.0,
                            epsabs=tol, epsrel=tol, limit=200)
    v2, e2 = integrate.quad(integrand, 1.0, np.inf,
                            epsabs=tol, epsrel=tol, limit=200)
    if e1 + e2 > 1e-10:
        raise QuadratureError("h(0) quadrature did not converge", e1 + e2)
    return v1 + v2


def jones_h(x, a: float):
    """h(x) = int_0^inf g(x, y) dy on [-pi/2a, pi/2a], zero outside.

    The improper integral is evaluated on the ray y = e^{-ix} r, along
    which the integrand is the real decaying exp(-r^a); this is the same
    integral by analyticity and gives h(x) = h(0) e^{-ix} uniformly on
    the closed interval (including the endpoints, where the straight-line
    integral is only conditionally convergent).
    """
    if a <= 1:
        raise ValueError(f"jones_h requires a > 1, got {a}")
    x = np.asarray(x, dtype=float)
    half = math.pi / (2.0 * a)
    inside = np.abs(x) <= half + 1e-15
    out = np.zeros(x.shape, dtype=complex)
    out[inside] = jones_h0(a) * np.exp(-1j * x[inside])
    if out.ndim == 0:
        return complex(out)
    return out


def jones_h_direct(x: float, a: float, tol: float = 1e-10) -> complex:
    """Straight-line quadrature of int_0^inf g(x, y) dy.

    Independent of :func:`jones_h`; valid for |x| strictly inside
    [-pi/2a, pi/2a] where cos(ax) > 0 gives absolute convergence.
    """
    if a <= 1:
        raise ValueError(f"jones_h_direct requires a > 1, got {a}")
    half = math.pi / (2.0 * a)
    if abs(x) >= half:
        return 0.0 + 0.0j
    c, s = math.cos(a * x), math.sin(a * x)

    def re(y):
        return math.exp(-(y**a) * c) * math.cos((y**a) * s)

    def im(y):
        return -math.exp(-(y**a) * c) * math.sin((y**a) * s)

    vr, er = integrate.quad(re, 0.0, np.inf, epsabs=tol, epsrel=tol, limit=400)
    vi, ei = integrate.quad(im, 0.0, np.inf, epsabs=tol, epsrel=tol, limit=400)
    if max(er, ei) > 100 * tol:
        raise QuadratureError("direct h quadrature did not converge", max(er, ei))
    return vr + 1j * vi


# ---------------------------------------------------------------------------
# mollifier and convolution
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _bump_mass() -> float:
    """int_{-1}^{1} exp(1/(t^2 - 1)) dt, the unnormalized unit-bump mass."""
    val, err = integrate.quad(lambda t: math.exp(1.0 / (t * t - 1.0)),
                              -1.0, 1.0, epsabs=1e-14, epsrel=1e-14, limit=200)
    if err > 1e-12:
        raise QuadratureError("bump mass quadrature did not converge", err)
    return val


def mollifier_constant(l: int) -> float:
    """Normalizing constant c_l so that int f_l = 1."""
    return 1.0 / (JonesParams(l).eps * _bump_mass())


def mollifier(l: int, x, center: float = 0.0):
    """Smooth bump f_l supported on |x - center| < eps_l, unit mass."""
    p = JonesParams(l)
    x = np.asarray(x, dtype=float)
    t = (x - center) / p.eps
    out = np.zeros(t.shape)
    core = np.abs(t) < 1.0
    tc = t[core]
    out[core] = mollifier_constant(l) * np.exp(1.0 / (tc * tc - 1.0))
    if out.ndim == 0:
        return float(out)
    return out


class _LevelCache:
    """Per-level table for chi_l = f_l * h_l.

    Since h_l(w) = h_l(0) e^{-iw} on its support [-2 eps, 2 eps],

        chi_l(w) = h0 e^{-iw} * int e^{iz} f_l(z) dz

    with z restricted to [w - 2 eps, w + 2 eps] cap [-eps, eps].  We cache
    the cumulative integral C(t) = int_{-1}^{t} e^{i eps s} phi(s) ds of
    the unit bump phi on a dense grid (cubic-spline antiderivative), so a
    chi evaluation is two interpolated lookups.
    """

    GRID = 24001

    def __init__(self, l: int):
        self.params = p = JonesParams(l)
        self.h0 = jones_h0(p.a)
        t = np.linspace(-1.0, 1.0, self.GRID)
        phi = np.zeros_like(t)
        inner = np.abs(t) < 1.0
        phi[inner] = np.exp(1.0 / (t[inner] ** 2 - 1.0)) / _bump_mass()
        integrand = np.exp(1j * p.eps * t) * phi
        spline = CubicSpline(t, integrand)
        self.cumint = spline.antiderivative()
        # alpha_l = chi_l(0) = h0 * int e^{iz} f_l(z) dz
        self.alpha = self.h0 * complex(self.cumint(1.0) - self.cumint(-1.0))

    def chi(self, w):
        """chi_l at offsets w from the cube center (vectorized)."""
        w = np.asarray(w, dtype=float)
        eps = self.params.eps
        lo = np.clip((w - 2.0 * eps) / eps, -1.0, 1.0)
        hi = np.clip((w + 2.0 * eps) / eps, -1.0, 1.0)
        val = self.h0 * np.exp(-1j * w) * (self.cumint(hi) - self.cumint(lo))
        return np.where(np.abs(w) <= 3.0 * eps, val, 0.0)

    def chi_derivative(self, order: int):
        """Spline of the order-th derivative of chi_l on its support."""
        if not hasattr(self, "_dsplines"):
            eps = self.params.eps
            w = np.linspace(-3.0 * eps, 3.0 * eps, self.GRID)
            self._dsplines = {0: CubicSpline(w, self.chi(w))}
        if order not in self._dsplines:
            self._dsplines[order] = self._dsplines[0].derivative(order)
        return self._dsplines[order]


@lru_cache(maxsize=None)
def _level(l: int) -> _LevelCache:
    return _LevelCache(l)


def chi(l: int, x):
    """chi_l(x) = (f_l * h_l)(x); supported in [-pi/2^(l+1), pi/2^(l+1)]."""
    out = _level(l).chi(x)
    if out.ndim == 0:
        return complex(out)
    return out


def alpha(l: int) -> complex:
    """alpha_l = chi_l(0), the core-region amplitude of chi_l."""
    return _level(l).alpha


def _scale_factor(n: int, abs_center: float) -> float:
    """1 / (n * 3^(pi + |c|)), with overflow guard."""
    if abs_center > MAX_ABS_CENTER:
        raise OverflowError(
            f"center coordinate |c| = {abs_center:.3g} exceeds the "
            f"double-precision limit {MAX_ABS_CENTER:.1f} for 3^(pi + |c|)")
    return math.exp(-(math.pi + abs_center) * LOG3) / n


def _xi_1d(l: int, n: int, center: float, x, mode: str = "convolution"):
    """One coordinate factor of E_k; vectorized over x."""
    lev = _level(l)
    w = np.asarray(x, dtype=float) - center
    s = _scale_factor(n, abs(center))
    if mode == "convolution":
        return lev.chi(w) * (s / lev.alpha)
    if mode == "closed-form-core":
        core = np.abs(w) <= lev.params.eps
        vals = np.where(core, np.exp(-1j * w) * s,
                        lev.chi(w) * (s / lev.alpha))
        return np.where(np.abs(w) <= 3.0 * lev.params.eps, vals, 0.0)
    if mode == "literal-real":
        # the printed real-exponential variant, for comparison only
        vals = np.exp(w) * s + 0.0j
        return np.where(np.abs(w) <= 3.0 * lev.params.eps, vals, 0.0)
    raise ValueError(f"unknown evaluation mode {mode!r}")


def xi(cube: CubeIndex, coordinate, axis: int = 0, mode: str = "convolution"):
    """xi along the given axis of the cube: chi_l(x - c)/(n alpha_l 3^(pi+|c|))."""
    return _xi_1d(cube.l, cube.n, float(cube.center[axis]), coordinate, mode)


def xi_derivative(cube: CubeIndex, coordinate, axis: int = 0,
                  order: int = 1):
    """order-th derivative of xi along the given axis (vectorized).

    Derivatives of chi come from a dense cubic-spline model of chi on its
    support, accurate to ~1e-10 relative for the first two orders.
    """
    if order == 0:
        return xi(cube, coordinate, axis)
    lev = _level(cube.l)
    center = float(cube.center[axis])
    w = np.asarray(coordinate, dtype=float) - center
    s = _scale_factor(cube.n, abs(center))
    spline = lev.chi_derivative(order)
    vals = spline(np.clip(w, -3.0 * lev.params.eps, 3.0 * lev.params.eps))
    vals = vals * (s / lev.alpha)
    return np.where(np.abs(w) <= 3.0 * lev.params.eps, vals, 0.0)


def eval_E(cube: CubeIndex, points, mode: str = "convolution") -> np.ndarray:
    """E_k at points of shape (m, n): componentwise xi, zero outside B_k.

    Following the defining restriction to the cube, the field is truncated
    to zero off B_k even where the chi factors are still nonzero.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != cube.n:
        raise ValueError(
            f"points have dimension {pts.shape[1]}, cube has {cube.n}")
    lo, hi = cube.bounds()
    inside = np.all((pts >= lo - 1e-15) & (pts <= hi + 1e-15), axis=1)
    out = np.zeros((pts.shape[0], cube.n), dtype=complex)
    if inside.any():
        sub = pts[inside]
        for j in range(cube.n):
            out[inside, j] = _xi_1d(cube.l, cube.n,
                                    float(cube.center[j]), sub[:, j], mode)
    return out
