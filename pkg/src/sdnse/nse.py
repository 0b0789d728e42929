"""Pseudo-spectral incompressible Navier-Stokes on a periodic box.

The periodic box [-L/2, L/2)^3 stands in for free space; the divergence
constraint is enforced by the Fourier-space Leray projection and the
convective term is dealiased with the 2/3 rule.  Time stepping treats
the viscous part exactly per mode (integrating factor) and the rest with
explicit RK2.  An optional advected density rho gives the inhomogeneous
variant: rho is transported semi-Lagrangially (which preserves its
pointwise bounds by construction) and the viscosity is applied as
mu/rho, split into the uniform mu/beta integrating factor plus an
explicit correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .sdspace import SampledField, sd_norm

__all__ = [
    "SpectralField",
    "SolverConfig",
    "Trajectory",
    "wavegrid",
    "leray_project",
    "stokes_semigroup",
    "nonlinear_B",
    "taylor_green",
    "random_divfree",
    "single_mode",
    "make_forcing",
    "step",
    "solve",
    "duhamel_residual",
]


@lru_cache(maxsize=8)
def wavegrid(N: int, L: float):
    """Wavevectors, |k|^2, inverse |k|^2 and the 2/3-rule mask."""
    k1 = 2.0 * math.pi * np.fft.fftfreq(N, d=L / N)
    KX, KY, KZ = np.meshgrid(k1, k1, k1, indexing="ij")
    K2 = KX**2 + KY**2 + KZ**2
    K2inv = np.where(K2 > 0, 1.0 / np.where(K2 > 0, K2, 1.0), 0.0)
    kcut = (2.0 / 3.0) * (N // 2) * (2.0 * math.pi / L)
    mask = ((np.abs(KX) < kcut + 1e-12) & (np.abs(KY) < kcut + 1e-12)
            & (np.abs(KZ) < kcut + 1e-12))
    return (KX, KY, KZ), K2, K2inv, mask


class SpectralField:
    """Divergence-free velocity as Fourier coefficients, shape (3, N, N, N)."""

    def __init__(self, uhat, N: int, L: float):
        self.uhat = np.asarray(uhat, dtype=complex)
        if self.uhat.shape != (3, N, N, N):
            raise ValueError(f"expected coefficients (3, {N}, {N}, {N})")
        self.N = N
        self.L = L

    @classmethod
    def from_physical(cls, u, L: float):
        u = np.asarray(u, dtype=float)
        N = u.shape[1]
        return cls(np.stack([np.fft.fftn(u[j]) for j in range(3)]), N, L)

    def to_physical(self) -> np.ndarray:
        return np.stack([np.fft.ifftn(self.uhat[j]).real for j in range(3)])

    def copy(self) -> "SpectralField":
        return SpectralField(self.uhat.copy(), self.N, self.L)

    def norm_l2(self) -> float:
        """||u||_2 over the box (Parseval)."""
        scale = self.L**3 / self.N**6
        return math.sqrt(scale * float(np.sum(np.abs(self.uhat) ** 2)))

    def grad_norm_l2(self) -> float:
        """||grad u||_2 over the box."""
        _, K2, _, _ = wavegrid(self.N, self.L)
        scale = self.L**3 / self.N**6
        return math.sqrt(scale * float(np.sum(K2 * np.abs(self.uhat) ** 2)))

    def divergence_max(self) -> float:
        """max_k |k . uhat(k)| / max|uhat| (relative)."""
        (KX, KY, KZ), _, _, _ = wavegrid(self.N, self.L)
        div = KX * self.uhat[0] + KY * self.uhat[1] + KZ * self.uhat[2]
        umax = float(np.max(np.abs(self.uhat)))
        if umax == 0.0:
            return 0.0
        kmax = 2.0 * math.pi * (self.N // 2) / self.L
        return float(np.max(np.abs(div))) / (umax * kmax)

    def max_speed(self) -> float:
        u = self.to_physical()
        return float(np.max(np.sqrt(np.sum(u**2, axis=0))))

    def to_sampled_field(self) -> SampledField:
        """Physical-space samples on [-L/2, L/2) as a SampledField."""
        u = self.to_physical()
        spacing = np.full(3, self.L / self.N)
        origin = np.full(3, -self.L / 2.0)
        return SampledField(u, origin, spacing)


def _project(uhat, N: int, L: float):
    (KX, KY, KZ), _, K2inv, _ = wavegrid(N, L)
    kdot = KX * uhat[0] + KY * uhat[1] + KZ * uhat[2]
    return np.stack([uhat[0] - KX * kdot * K2inv,
                     uhat[1] - KY * kdot * K2inv,
                     uhat[2] - KZ * kdot * K2inv])


def leray_project(v: SpectralField) -> SpectralField:
    """Remove the gradient part: uhat <- uhat - k (k.uhat)/|k|^2 (k=0 kept)."""
    return SpectralField(_project(v.uhat, v.N, v.L), v.N, v.L)


def stokes_semigroup(u0: SpectralField, t: float, nu: float) -> SpectralField:
    """Heat propagator of the Stokes operator: per-mode exp(-nu |k|^2 t)."""
    if t < 0:
        raise ValueError("stokes_semigroup requires t >= 0")
    _, K2, _, _ = wavegrid(u0.N, u0.L)
    return SpectralField(u0.uhat * np.exp(-nu * K2 * t), u0.N, u0.L)


def _convective(uhat, vhat, N: int, L: float):
    """Spectral (u.grad)v with 2/3 dealiasing, before projection."""
    (KX, KY, KZ), _, _, mask = wavegrid(N, L)
    ud = uhat * mask
    vd = vhat * mask
    u = np.stack([np.fft.ifftn(ud[j]).real for j in range(3)])
    out = np.empty_like(uhat)
    for j in range(3):
        gx = np.fft.ifftn(1j * KX * vd[j]).real
        gy = np.fft.ifftn(1j * KY * vd[j]).real
        gz = np.fft.ifftn(1j * KZ * vd[j]).real
        out[j] = np.fft.fftn(u[0] * gx + u[1] * gy + u[2] * gz) * mask
    return out


def nonlinear_B(u: SpectralField, v: SpectralField) -> SpectralField:
    """B(u, v) = P (u . grad) v, dealiased; divergence-free output."""
    conv = _convective(u.uhat, v.uhat, u.N, u.L)
    return SpectralField(_project(conv, u.N, u.L), u.N, u.L)


def inner_l2(u: SpectralField, v: SpectralField) -> float:
    """L2 inner product <u, v> over the box (Parseval)."""
    scale = u.L**3 / u.N**6
    return scale * float(np.real(np.sum(u.uhat * np.conj(v.uhat))))


# ---------------------------------------------------------------------------
# initial conditions and forcing
# ---------------------------------------------------------------------------

def _meshgrid(N: int, L: float):
    x = -L / 2.0 + L * np.arange(N) / N
    return np.meshgrid(x, x, x, indexing="ij")


def taylor_green(N: int, L: float, amplitude: float = 1.0) -> SpectralField:
    """Classical Taylor-Green vortex, divergence-free by construction."""
    X, Y, Z = _meshgrid(N, L)
    a = 2.0 * math.pi / L
    u = np.stack([
        amplitude * np.cos(a * X) * np.sin(a * Y) * np.sin(a * Z),
        -0.5 * amplitude * np.sin(a * X) * np.cos(a * Y) * np.sin(a * Z),
        -0.5 * amplitude * np.sin(a * X) * np.sin(a * Y) * np.cos(a * Z),
    ])
    return SpectralField.from_physical(u, L)


def single_mode(N: int, L: float, amplitude: float = 1.0,
                mode: int = 1) -> SpectralField:
    """u = (A sin(2 pi m y / L), 0, 0): B(u, u) = 0 exactly."""
    X, Y, Z = _meshgrid(N, L)
    a = 2.0 * math.pi * mode / L
    u = np.stack([amplitude * np.sin(a * Y),
                  np.zeros_like(Y), np.zeros_like(Y)])
    return SpectralField.from_physical(u, L)


def random_divfree(N: int, L: float, seed: int, kmax: int = 4,
                   amplitude: float = 1.0, dealias: bool = True) -> SpectralField:
    """Random divergence-free field with modes up to |k_i| <= kmax."""
    rng = np.random.default_rng(seed)
    u = np.zeros((3, N, N, N))
    X, Y, Z = _meshgrid(N, L)
    a = 2.0 * math.pi / L
    for _ in range(12):
        k = rng.integers(-kmax, kmax + 1, size=3)
        if not np.any(k):
            continue
        phase = rng.uniform(0, 2 * math.pi)
        amp = rng.standard_normal(3)
        carg = a * (k[0] * X + k[1] * Y + k[2] * Z) + phase
        for j in range(3):
            u[j] += amp[j] * np.cos(carg)
    f = SpectralField.from_physical(u, L)
    fhat = _project(f.uhat, N, L)
    if dealias:
        _, _, _, mask = wavegrid(N, L)
        fhat = fhat * mask
    f = SpectralField(fhat, N, L)
    n = f.norm_l2()
    if n > 0:
        f = SpectralField(f.uhat * (amplitude / n), N, L)
    return f


def make_forcing(config: "SolverConfig"):
    """Pf(t): fixed low-mode divergence-free profile times a Hoelder
    envelope a (1 + t)^(-theta).  Returns (callable t -> coefficient
    array, sup_t ||Pf(t)||_2)."""
    if config.forcing_amplitude == 0.0:
        zero = np.zeros((3, config.N, config.N, config.N), dtype=complex)
        return (lambda t: zero), 0.0
    if not (0.0 < config.forcing_theta < 1.0):
        raise ValueError("forcing envelope exponent must be in (0, 1)")
    profile = random_divfree(config.N, config.L, seed=config.seed + 7919,
                             kmax=2, amplitude=1.0)

    def pf(t):
        return profile.uhat * (config.forcing_amplitude
                               * (1.0 + t) ** (-config.forcing_theta))

    return pf, config.forcing_amplitude  # envelope max at t = 0


# ---------------------------------------------------------------------------
# configuration and stepping
# ---------------------------------------------------------------------------

@dataclass
class SolverConfig:
    nu: float = 0.1
    N: int = 32
    L: float = 2.0 * math.pi
    dt: float = 0.01
    T: float = 1.0
    forcing_amplitude: float = 0.0
    forcing_theta: float = 0.5
    dealias: bool = True
    seed: int = 0
    # inhomogeneous variant: effective nu = mu / beta
    mu: float | None = None
    beta: float | None = None
    checkpoint_every: int = 10
    cfl_max: float = 0.8
    sd_truncation: int = 0  # record sd_norm along the run when > 0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if (self.mu is None) != (self.beta is None):
            raise ValueError("mu and beta must be given together")
        if self.mu is not None:
            if self.beta <= 0:
                raise ValueError("beta must be positive")
            self.nu = self.mu / self.beta

    @property
    def inhomogeneous(self) -> bool:
        return self.mu is not None


class SolverError(RuntimeError):
    pass


def _check_cfl(u: SpectralField, config: SolverConfig, t: float):
    dx = config.L / config.N
    speed = u.max_speed()
    if speed * config.dt / dx > config.cfl_max:
        raise SolverError(
            f"CFL violation at t={t:.4g}: max|u| dt/dx = "
            f"{speed * config.dt / dx:.3g} > {config.cfl_max}")


def _rhs(uhat, rho, t, config: SolverConfig, pf):
    """Non-stiff right-hand side: -B(u,u) + Pf + variable-viscosity part."""
    N, L = config.N, config.L
    out = -_convective(uhat, uhat, N, L) + pf(t)
    if config.inhomogeneous and rho is not None:
        (KX, KY, KZ), K2, _, mask = wavegrid(N, L)
        nu_var = config.mu / np.maximum(rho, 1e-12) - config.nu
        for j in range(3):
            lap = np.fft.ifftn(-K2 * uhat[j]).real
            out[j] += np.fft.fftn(nu_var * lap) * mask
    return _project(out, N, L)


def _advect_density(rho, u: SpectralField, dt: float):
    """Semi-Lagrangian transport: rho'(x) = rho(x - dt u*), midpoint u*.

    Multilinear interpolation keeps rho within its initial bounds.
    """
    N, L = u.N, u.L
    uphys = u.to_physical()
    X = np.stack(_meshgrid(N, L), axis=-1).reshape(-1, 3) + L / 2.0
    uvals = uphys.reshape(3, -1).T
    mid = X - 0.5 * dt * uvals
    umid = kernels.interp_linear_periodic(uphys, L, mid)
    dep = X - dt * umid
    vals = kernels.interp_linear_periodic(rho[None], L, dep)
    return vals[:, 0].reshape(N, N, N)


def step(u: SpectralField, rho, t: float, config: SolverConfig,
         pf=None) -> tuple[SpectralField, np.ndarray | None]:
    """One integrating-factor RK2 step; density advanced with the
    start-of-step velocity."""
    if pf is None:
        pf, _ = make_forcing(config)
    N, L, dt = config.N, config.L, config.dt
    _, K2, _, _ = wavegrid(N, L)
    E = np.exp(-config.nu * K2 * dt)

    k1 = _rhs(u.uhat, rho, t, config, pf)
    umid = E * (u.uhat + dt * k1)
    k2 = _rhs(umid, rho, t + dt, config, pf)
    unew = E * u.uhat + 0.5 * dt * (E * k1 + k2)
    if not np.all(np.isfinite(unew.view(float))):
        raise SolverError(f"non-finite velocity at t={t:.4g}")

    rho_new = None
    if rho is not None:
        rho_new = _advect_density(rho, u, dt)
    return SpectralField(unew, N, L), rho_new


@dataclass
class Trajectory:
    """Checkpointed solver output plus per-checkpoint scalar series."""

    config: SolverConfig
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    densities: list = field(default_factory=list)
    series: dict = field(default_factory=dict)

    def record(self, t, u: SpectralField, rho, pf, diss_int=None):
        self.times.append(t)
        self.states.append(u.copy())
        if rho is not None:
            self.densities.append(rho.copy())
        row = {
            "t": t,
            "energy": u.norm_l2() ** 2,
            "enstrophy": u.grad_norm_l2() ** 2,
            "div_max": u.divergence_max(),
            "f_norm": SpectralField(pf(t), u.N, u.L).norm_l2(),
        }
        if diss_int is not None:
            row["diss_int"] = diss_int
        if rho is not None:
            row["rho_min"] = float(np.min(rho))
            row["rho_max"] = float(np.max(rho))
            row["rho_mass"] = float(np.sum(rho)) * (u.L / u.N) ** 3
        if self.config.sd_truncation > 0:
            row["sd_norm"] = sd_norm(u.to_sampled_field(),
                                     K=self.config.sd_truncation).real
        for key, val in row.items():
            self.series.setdefault(key, []).append(val)


def solve(config: SolverConfig, u0: SpectralField,
          rho0: np.ndarray | None = None) -> Trajectory:
    """March the projected system from u0 (and optional density rho0)."""
    if u0.divergence_max() > 1e-10:
        raise ValueError("initial velocity is not divergence-free")
    if config.inhomogeneous:
        if rho0 is None:
            raise ValueError("inhomogeneous run needs an initial density")
        if np.min(rho0) < 0 or np.max(rho0) > config.beta + 1e-12:
            raise ValueError("initial density violates 0 <= rho <= beta")
    pf, _ = make_forcing(config)
    _check_cfl(u0, config, 0.0)

    traj = Trajectory(config=config)
    u = u0.copy()
    rho = None if rho0 is None else np.array(rho0, dtype=float)
    t = 0.0
    diss_int = 0.0  # running trapezoid of ||grad u||^2 at every step
    ens_prev = u.grad_norm_l2() ** 2
    traj.record(t, u, rho, pf, diss_int)
    nsteps = int(round(config.T / config.dt))
    for istep in range(1, nsteps + 1):
        _check_cfl(u, config, t)
        u, rho = step(u, rho, t, config, pf)
        t = istep * config.dt
        ens = u.grad_norm_l2() ** 2
        diss_int += 0.5 * config.dt * (ens_prev + ens)
        ens_prev = ens
        if istep % config.checkpoint_every == 0 or istep == nsteps:
            traj.record(t, u, rho, pf, diss_int)
    return traj


def duhamel_residual(traj: Trajectory, config: SolverConfig) -> np.ndarray:
    """Mild-form residual at each checkpoint.

    r(t_m) = || u(t_m) - S(t_m) u_0 - int_0^{t_m} S(t_m - s) G(s) ds ||_2
    with G = -B(u, u) + Pf evaluated at the checkpoints and trapezoid
    time quadrature.
    """
    pf, _ = make_forcing(config)
    N, L = config.N, config.L
    _, K2, _, _ = wavegrid(N, L)
    times = np.array(traj.times)
    G = [_rhs(s.uhat, None, t, config, pf)
         for s, t in zip(traj.states, times)]
    u0 = traj.states[0]
    out = np.zeros(len(times))
    for m in range(len(times)):
        tm = times[m]
        acc = u0.uhat * np.exp(-config.nu * K2 * tm)
        if m > 0:
            w = np.zeros(m + 1)
            dts = np.diff(times[: m + 1])
            w[:-1] += 0.5 * dts
            w[1:] += 0.5 * dts
            for j in range(m + 1):
                acc = acc + w[j] * G[j] * np.exp(-config.nu * K2
                                                 * (tm - times[j]))
        diff = SpectralField(traj.states[m].uhat - acc, N, L)
        out[m] = diff.norm_l2()
    return out
