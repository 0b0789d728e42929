"""Dissipativity diagnostics along solver trajectories.

Quantifies the nonlinear-term constant M, the quadratic thresholds it
implies for the dissipation inequality, contraction of trajectory
pairs, the energy balance, componentwise energy matrices, and algebraic
decay-rate fits.  Assertions are made in the L2 norm, where the
convective orthogonality is exact; the weighted-functional (SD) norm
variants are computed and reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .nse import (SolverConfig, SpectralField, Trajectory, inner_l2,
                  make_forcing, nonlinear_B, solve, stokes_semigroup,
                  wavegrid)
from .sdspace import sd_inner, sd_norm

__all__ = [
    "DissipativityReport",
    "EnergyMatrices",
    "ContractionReport",
    "estimate_M",
    "thresholds",
    "contraction_ball",
    "check_zero_dissipativity",
    "check_contraction",
    "energy_inequality",
    "energy_matrices",
    "decay_fit",
    "decay_fit_trajectory",
    "dissipativity_report",
]


@dataclass
class DissipativityReport:
    """Measured dissipativity constants and per-checkpoint margins."""

    M_hat: float
    f_sup: float
    gamma: float
    u_plus: float
    u_minus: float
    sigma: float
    margins: list = field(default_factory=list)  # (t, <A(u,t), u>)
    annulus_ok: bool = True
    norm_used: str = "L2"
    norm_min: float = 0.0
    norm_max: float = 0.0

    def to_dict(self) -> dict:
        return {
            "M_hat": self.M_hat, "f_sup": self.f_sup, "gamma": self.gamma,
            "u_plus": self.u_plus, "u_minus": self.u_minus,
            "sigma": self.sigma, "margins": [list(m) for m in self.margins],
            "annulus_ok": self.annulus_ok, "norm_used": self.norm_used,
            "norm_min": self.norm_min, "norm_max": self.norm_max,
        }


@dataclass
class EnergyMatrices:
    """Componentwise energy matrix E_{h,k}(t) and its running integral."""

    times: np.ndarray
    E: np.ndarray      # (m, 3, 3)
    Kint: np.ndarray   # (m, 3, 3), cumulative trapezoid of E


@dataclass
class ContractionReport:
    times: list
    distances: list
    nonincreasing: bool
    fitted_rate: float
    sigma: float
    in_region: bool


def _sd_norm_state(u: SpectralField, K: int) -> float:
    return sd_norm(u.to_sampled_field(), K=K).real


def _sd_inner_states(a: SpectralField, b: SpectralField, K: int) -> float:
    return sd_inner(a.to_sampled_field(), b.to_sampled_field(), K=K).real


def estimate_M(traj: Trajectory, norm_choice: str = "L2",
               K: int = 60) -> float:
    """Empirical constant M with |<B(u,u), u>| <= M ||u||^3 on the run.

    In L2 the direct triple product vanishes identically for
    divergence-free fields, so the sharp trajectory constant would be 0;
    the Cauchy-Schwarz majorant max_t ||B(u,u)||_2 / ||u||_2^2 is used
    instead, which bounds |<B(u,u), v>| <= M ||u||^2 ||v|| for any v.
    The weighted-functional (SD2) variant uses the triple product
    directly, which is not zero in that inner product.
    """
    if norm_choice not in ("L2", "SD2"):
        raise ValueError(f"unknown norm choice {norm_choice!r}")
    best = None
    for u in traj.states:
        if norm_choice == "L2":
            nrm = u.norm_l2()
            if nrm == 0.0:
                continue
            val = nonlinear_B(u, u).norm_l2() / nrm**2
        else:
            nrm = _sd_norm_state(u, K)
            if nrm == 0.0:
                continue
            val = abs(_sd_inner_states(nonlinear_B(u, u), u, K)) / nrm**3
        best = val if best is None else max(best, val)
    if best is None:
        raise ValueError("M undefined: trajectory norm is identically zero")
    return best


def thresholds(nu: float, M: float,
               f_sup: float) -> tuple[float, float, float, float]:
    """(gamma, u_minus, u_plus, sigma) from the dissipation quadratic.

    The quadratic M u^2 - nu u + f has real distinct roots
    u_pm = (nu/2M)(1 +- sqrt(1 - gamma)) when gamma = 4 f M / nu^2 < 1;
    sigma = (nu/2)(1 - sqrt(1 - gamma)).
    """
    if nu <= 0 or M <= 0:
        raise ValueError("thresholds requires nu > 0 and M > 0")
    if f_sup < 0:
        raise ValueError("f_sup must be nonnegative")
    if f_sup == 0.0:
        return 0.0, 0.0, nu / M, 0.0
    gamma = 4.0 * f_sup * M / nu**2
    if gamma >= 1.0:
        raise ValueError("no real distinct roots: gamma = "
                         f"{gamma:.6g} >= 1 (forcing too strong)")
    root = math.sqrt(1.0 - gamma)
    u_minus = (nu / (2.0 * M)) * (1.0 - root)
    u_plus = (nu / (2.0 * M)) * (1.0 + root)
    sigma = (nu / 2.0) * (1.0 - root)
    return gamma, u_minus, u_plus, sigma


def contraction_ball(nu: float, M: float,
                     eps: float = 0.5) -> tuple[float, float]:
    """Unforced contraction ball: radius (1 - eps)/2 u_+ and rate nu*eps."""
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must be in (0, 1)")
    _, _, u_plus, _ = thresholds(nu, M, 0.0)
    return 0.5 * (1.0 - eps) * u_plus, nu * eps


def check_zero_dissipativity(traj: Trajectory, config: SolverConfig,
                             report_norm: str = "L2", K: int = 60,
                             rtol: float = 1e-8) -> DissipativityReport:
    """Margins <A(u,t), u> along the run against the quadratic bound.

    Whenever the scalar inequality -nu ||u|| + M ||u||^2 + f <= 0 holds
    with the measured M and ||u|| lies between the two roots, the direct
    L2 inner product must be nonpositive up to rtol * nu ||u||^2.
    """
    pf, f_sup = make_forcing(config)
    M_hat = estimate_M(traj, "L2")
    try:
        gamma, u_minus, u_plus, sigma = thresholds(
            config.nu, max(M_hat, 1e-300), f_sup)
    except ValueError:
        gamma, u_minus, u_plus, sigma = math.inf, math.nan, math.nan, math.nan
    _, K2, _, _ = wavegrid(config.N, config.L)
    margins = []
    annulus_ok = True
    norms = []
    for t, u in zip(traj.times, traj.states):
        nrm = u.norm_l2()
        norms.append(nrm)
        force = SpectralField(pf(t), config.N, config.L)
        margin = (-config.nu * u.grad_norm_l2() ** 2
                  - inner_l2(nonlinear_B(u, u), u)
                  + inner_l2(force, u))
        margins.append((t, margin))
        scalar_ok = (-config.nu * nrm + M_hat * nrm**2 + f_sup) <= 0.0
        in_band = math.isfinite(u_minus) and u_minus <= nrm <= u_plus
        if scalar_ok and in_band and margin > rtol * config.nu * nrm**2:
            annulus_ok = False
    if report_norm == "SD2":
        margins = [(t, _sd_inner_states(
            _state_rhs(u, t, config, pf), u, K))
            for t, u in zip(traj.times, traj.states)]
    return DissipativityReport(
        M_hat=M_hat, f_sup=f_sup, gamma=gamma, u_plus=u_plus,
        u_minus=u_minus, sigma=sigma, margins=margins,
        annulus_ok=annulus_ok, norm_used=report_norm,
        norm_min=float(min(norms)), norm_max=float(max(norms)))


def _state_rhs(u: SpectralField, t: float, config: SolverConfig,
               pf) -> SpectralField:
    """A(u, t) = -nu A u - B(u,u) + Pf(t) as a spectral field."""
    _, K2, _, _ = wavegrid(config.N, config.L)
    lap = -config.nu * K2 * u.uhat
    return SpectralField(lap - nonlinear_B(u, u).uhat + pf(t),
                         config.N, config.L)


def check_contraction(config: SolverConfig, u0: SpectralField,
                      v0: SpectralField, eps: float = 0.5,
                      rtol: float = 1e-8) -> ContractionReport:
    """Distance between two trajectories under identical forcing.

    Asserts d(t) = ||u - v||_2 nonincreasing (within rtol per step)
    when both initial data lie in the contraction ball; the fitted
    exponential rate is compared with sigma but only reported.
    """
    tu = solve(config, u0)
    tv = solve(config, v0)
    dists, times = [], []
    for t, a, b in zip(tu.times, tu.states, tv.states):
        times.append(t)
        dists.append(SpectralField(a.uhat - b.uhat, config.N,
                                   config.L).norm_l2())
    probe = Trajectory(config=config, times=list(tu.times),
                       states=list(tu.states))
    M_hat = estimate_M(probe, "L2") if any(
        s.norm_l2() > 0 for s in tu.states) else 0.0
    in_region = False
    sigma = math.nan
    if M_hat > 0:
        radius, sigma = contraction_ball(config.nu, M_hat, eps)
        in_region = (u0.norm_l2() <= radius and v0.norm_l2() <= radius)
    nonincr = all(
        b <= a * (1.0 + rtol) + 1e-300 for a, b in zip(dists, dists[1:]))
    rate = math.nan
    pos = [(t, d) for t, d in zip(times, dists) if d > 0 and t > 0]
    if len(pos) >= 2:
        ts = np.array([p[0] for p in pos])
        ds = np.array([p[1] for p in pos])
        rate = -float(np.polyfit(ts, np.log(ds), 1)[0])
    return ContractionReport(times=times, distances=dists,
                             nonincreasing=nonincr, fitted_rate=rate,
                             sigma=sigma, in_region=in_region)


def energy_inequality(traj: Trajectory, nu: float) -> np.ndarray:
    """slack(t) = ||u0||^2 - ||u(t)||^2 - 2 nu int_0^t ||grad u||^2 ds.

    Uses the per-step dissipation integral accumulated by the solver
    when present, falling back to a trapezoid over checkpoints.
    """
    E = np.array(traj.series["energy"])
    if "diss_int" in traj.series:
        diss = np.array(traj.series["diss_int"])
    else:
        ens = np.array(traj.series["enstrophy"])
        diss = cumulative_trapezoid(ens, traj.times, initial=0.0)
    return E[0] - E - 2.0 * nu * diss


def energy_matrices(traj: Trajectory) -> EnergyMatrices:
    """E_{h,k}(t) = int u_h u_k dx per checkpoint, plus its integral."""
    times = np.array(traj.times)
    mats = np.empty((len(times), 3, 3))
    for m, u in enumerate(traj.states):
        phys = u.to_physical()
        vol = (u.L / u.N) ** 3
        for h in range(3):
            for k in range(3):
                mats[m, h, k] = float(np.sum(phys[h] * phys[k])) * vol
    Kint = cumulative_trapezoid(mats, times, axis=0, initial=0.0)
    return EnergyMatrices(times=times, E=mats, Kint=Kint)


def decay_fit(times, distances) -> float:
    """alpha_hat = -2 x least-squares slope of log d against log t."""
    pairs = [(t, d) for t, d in zip(times, distances) if t > 0 and d > 0]
    if len(pairs) < 4:
        raise ValueError("decay window too short: need >= 4 positive points")
    lt = np.log([p[0] for p in pairs])
    ld = np.log([p[1] for p in pairs])
    slope = float(np.polyfit(lt, ld, 1)[0])
    return -2.0 * slope


def decay_fit_trajectory(traj: Trajectory, u0: SpectralField, nu: float,
                         t_min: float = 0.0) -> float:
    """Fit of ||u(t) - S(t) u0||_2 along an unforced run, t > t_min."""
    times, dists = [], []
    for t, u in zip(traj.times, traj.states):
        if t <= t_min:
            continue
        ref = stokes_semigroup(u0, t, nu)
        times.append(t)
        dists.append(SpectralField(u.uhat - ref.uhat, u.N, u.L).norm_l2())
    return decay_fit(times, dists)


def dissipativity_report(traj: Trajectory, config: SolverConfig,
                         K: int = 60) -> DissipativityReport:
    """Convenience wrapper used by the command-line monitor path."""
    return check_zero_dissipativity(traj, config, report_norm="L2", K=K)
