"""Property-verification harness for norm comparisons and embeddings.

Each check measures its own constants first (never assuming the
theoretical ones), evaluates both sides of the claimed inequality on
concrete sampled fields, and returns a CheckReport.  The corpus of test
functions is generated deterministically from a seed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .sdspace import (SampledField, E_norm, functional_F_support,
                      functionals, sd_norm, sd_norm_p)
from .testfns import cube_index

__all__ = [
    "CheckReport",
    "CorpusSpec",
    "build_corpus",
    "default_corpus",
    "embedding_constant",
    "check_embedding_lp",
    "check_compactness",
    "check_weak_derivative",
    "check_sobolev_membership",
    "check_minkowski",
    "check_sdinfty_in_sdp",
    "bmo_norm",
    "check_bmo_inverse_pairing",
    "corpus_checks",
    "suite_extras",
    "run_suite",
]


@dataclass
class CheckReport:
    """Outcome of one property check with its measured quantities."""

    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in self.measured.items())
        return f"[{status}] {self.name}: {parts}"


# ---------------------------------------------------------------------------
# corpus generation
# ---------------------------------------------------------------------------

def _unit_bump(r):
    """C-infinity bump of the radial coordinate, 1 at 0, 0 for r >= 1."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1.0
    ri = r[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ri * ri))
    return out


def _radial(mesh, center, scale):
    r2 = sum((m - c) ** 2 for m, c in zip(mesh, center))
    return np.sqrt(r2) / scale


@dataclass
class CorpusSpec:
    """Deterministic recipe for a corpus of sampled test fields."""

    dim: int = 3
    lo: float = -1.5
    hi: float = 1.5
    points: int = 33
    K: int = 200
    seed: int = 0
    generators: list = field(default_factory=list)


def _make_field(spec: CorpusSpec, values_fn) -> SampledField:
    axes = [np.linspace(spec.lo, spec.hi, spec.points)] * spec.dim
    mesh = np.meshgrid(*axes, indexing="ij")
    scalar = values_fn(mesh)
    comps = np.broadcast_to(scalar, (spec.dim,) + scalar.shape).copy()
    spacing = (spec.hi - spec.lo) / (spec.points - 1)
    return SampledField(comps, [spec.lo] * spec.dim, [spacing] * spec.dim)


def generate(spec: CorpusSpec, name: str, **params) -> SampledField:
    """One corpus member; every generator yields finite grid values."""
    n = spec.dim
    if name == "gaussian":
        center = params.get("center", (0.0,) * n)
        width = params.get("width", 0.3)
        amp = params.get("amplitude", 1.0)
        return _make_field(spec, lambda mesh: amp * np.exp(
            -_radial(mesh, center, width) ** 2))
    if name == "bump":
        center = params.get("center", (0.0,) * n)
        radius = params.get("radius", 0.8)
        amp = params.get("amplitude", 1.0)
        return _make_field(spec, lambda mesh: amp * _unit_bump(
            _radial(mesh, center, radius)))
    if name == "oscillatory":
        m = params.get("frequency", 4.0)
        axis = params.get("axis", 0)
        radius = params.get("radius", 0.9)
        return _make_field(spec, lambda mesh: np.sin(m * mesh[axis])
                           * _unit_bump(_radial(mesh, (0.0,) * n, radius)))
    if name == "random-smooth":
        rng = np.random.default_rng(spec.seed + params.get("index", 0))
        coef = rng.standard_normal((4, n))
        phase = rng.uniform(0, 2 * math.pi, 4)

        def values(mesh):
            out = np.zeros_like(mesh[0])
            for t in range(4):
                arg = sum(coef[t, j] * mesh[j] for j in range(n)) + phase[t]
                out += np.cos(arg) / (t + 1)
            return out * _unit_bump(_radial(mesh, (0.0,) * n, 1.2))

        return _make_field(spec, values)
    if name == "translate":
        shift = params.get("shift", 0.0)
        radius = params.get("radius", 0.3)
        center = (shift,) + (0.0,) * (n - 1)
        return _make_field(spec, lambda mesh: _unit_bump(
            _radial(mesh, center, radius)))
    if name == "bmo-log":
        floor = params.get("floor", 1e-4)
        return _make_field(spec, lambda mesh: np.log(
            np.maximum(np.abs(mesh[0]), floor)))
    raise ValueError(f"unknown generator {name!r}")


def default_corpus(spec: CorpusSpec | None = None) -> list:
    """20 deterministic fields: gaussians, bumps, modulated and random."""
    if spec is None:
        spec = CorpusSpec()
    n = spec.dim
    items = []
    for j, width in enumerate((0.2, 0.35, 0.5, 0.7)):
        items.append((f"gaussian-w{width}", generate(
            spec, "gaussian", width=width)))
    for j, center in enumerate(((0.3,) + (0.0,) * (n - 1),
                                (-0.4,) + (0.1,) * (n - 1))):
        items.append((f"gaussian-c{j}", generate(
            spec, "gaussian", center=center, width=0.3)))
    items.append(("gaussian-tall", generate(
        spec, "gaussian", width=0.25, amplitude=3.0)))
    items.append(("gaussian-small", generate(
        spec, "gaussian", width=0.4, amplitude=0.05)))
    for j, radius in enumerate((0.4, 0.7, 1.0, 1.3)):
        items.append((f"bump-r{radius}", generate(
            spec, "bump", radius=radius)))
    for j, m in enumerate((2.0, 5.0, 9.0, 14.0)):
        items.append((f"oscillatory-m{m:g}", generate(
            spec, "oscillatory", frequency=m)))
    for j in range(4):
        items.append((f"random-{j}", generate(
            spec, "random-smooth", index=j)))
    return items


def build_corpus(spec: CorpusSpec) -> list:
    """Corpus from explicit generator entries, or the default 20."""
    if not spec.generators:
        return default_corpus(spec)
    out = []
    for entry in spec.generators:
        params = dict(entry)
        name = params.pop("name")
        label = params.pop("label", name)
        out.append((label, generate(spec, name, **params)))
    return out


# ---------------------------------------------------------------------------
# embedding and norm-comparison checks
# ---------------------------------------------------------------------------

def _conjugate(q: float) -> float:
    if q == 1:
        return math.inf
    if math.isinf(q):
        return 1.0
    return q / (q - 1.0)


@lru_cache(maxsize=32)
def embedding_constant(q: float, K: int, n: int) -> tuple[float, bool]:
    """c_q = sup_{k<=K} ||E_k||_{q'} with q' the conjugate exponent.

    Returns (c_q, all_below_one); the latter records whether every
    per-cube norm was < 1, which the inequality does not rely on.
    """
    qp = _conjugate(q)
    vals = [E_norm(cube_index(k, n), qp) for k in range(1, K + 1)]
    c = max(vals)
    return c, bool(all(v < 1.0 for v in vals))


def check_embedding_lp(f: SampledField, q: float, K: int = 200) -> CheckReport:
    """sd_norm(f) <= c_q ||f||_q + tail with the measured constant c_q."""
    c_q, below_one = embedding_constant(q, K, f.n)
    lhs = sd_norm(f, K)
    rhs = c_q * f.norm_lq(q) + lhs.tail_bound
    report = CheckReport(
        name=f"embedding-L{q:g}",
        passed=lhs.real <= rhs * (1.0 + 1e-12),
        measured={"lhs": lhs.real, "rhs": rhs, "c_q": c_q,
                  "c_q_below_one": below_one},
        notes=list(lhs.warnings))
    return report


def check_compactness(sequence: list, K: int = 200,
                      threshold: float = 0.05) -> CheckReport:
    """sd_norm decay along a sequence built to converge weakly to zero."""
    values = [sd_norm(f, K).real for f in sequence]
    notes = []
    first, final = values[0], values[-1]
    if first > 0 and max(values) / max(first, 1e-300) < 1.0 + 1e-9 \
            and min(values) / max(first, 1e-300) > 1.0 - 1e-9:
        notes.append("not weakly null: sd_norm is constant along the sequence")
    half = values[len(values) // 2:]
    decreasing = all(b <= a * (1.0 + 1e-9) for a, b in zip(half, half[1:]))
    passed = (first > 0 and final < threshold * first and decreasing
              and not notes)
    return CheckReport(
        name="compactness-surrogate",
        passed=passed,
        measured={"first": first, "final": final,
                  "ratio": final / first if first > 0 else math.inf,
                  "values": values, "decreasing_tail": decreasing},
        notes=notes)


def _derivative(f: SampledField, alpha) -> SampledField:
    """D^alpha f by repeated centered differences, componentwise."""
    comps = f.components.astype(float).copy()
    for axis, order in enumerate(alpha):
        for _ in range(order):
            comps = np.stack([np.gradient(comps[c], f.spacing[axis],
                                          axis=axis)
                              for c in range(comps.shape[0])])
    return SampledField(comps, f.origin, f.spacing)


def _support_inside(cube, f: SampledField) -> bool:
    """Whether the full test-factor support lies inside the field box."""
    half = 3.0 * cube.params.eps
    c = cube.center_floats()
    return bool(np.all(c - half >= f.origin - 1e-12)
                and np.all(c + half <= f.upper + 1e-12))


def _boundary_max(f: SampledField) -> float:
    worst = 0.0
    for ax in range(f.n):
        for idx in (0, -1):
            face = np.take(f.components, idx, axis=1 + ax)
            worst = max(worst, float(np.max(np.abs(face))))
    return worst


def check_weak_derivative(f: SampledField, alpha, K: int = 100) -> CheckReport:
    """Integration-by-parts duality plus the (reported) norm ratio.

    (a) asserts F_k(D^alpha f) = (-1)^|alpha| int D^alpha E_k . f for
    every k <= K, both sides integrated over the full support of the
    test factors;  (b) reports sd_norm(D^alpha f)/sd_norm(f) without
    asserting a value for it.
    """
    alpha = tuple(int(a) for a in alpha)
    notes = []
    interior_scale = float(np.max(np.abs(f.components)))
    if _boundary_max(f) > 1e-8 * (1.0 + interior_scale):
        notes.append("field does not vanish at the box boundary; "
                     "boundary terms may contaminate the duality")
    df = _derivative(f, alpha)
    sign = (-1.0) ** sum(alpha)
    worst = 0.0
    checked = 0
    for k in range(1, K + 1):
        cube = cube_index(k, f.n)
        if not _support_inside(cube, f):
            continue  # truncated support reintroduces boundary terms
        lhs = functional_F_support(cube, df)
        rhs = sign * functional_F_support(cube, f, alpha=alpha)
        worst = max(worst, abs(lhs - rhs))
        checked += 1
    ratio = math.nan
    base = sd_norm(f, min(K, 200)).real
    if base > 0:
        ratio = sd_norm(df, min(K, 200)).real / base
    return CheckReport(
        name=f"weak-derivative-{''.join(map(str, alpha))}",
        passed=worst <= 1e-6 and checked > 0 and not notes,
        measured={"duality_residual": worst, "norm_ratio": ratio,
                  "cubes_checked": checked},
        notes=notes)


def check_sobolev_membership(f: SampledField, kmax: int, p: float,
                             K: int = 200) -> CheckReport:
    """sd_norm(f)^p <= sum_{|alpha|<=kmax} ||D^alpha f||_p^p c^p + tail."""
    c, _ = embedding_constant(p, K, f.n)
    lhs_norm = sd_norm(f, K)
    alphas = [a for a in itertools.product(range(kmax + 1), repeat=f.n)
              if sum(a) <= kmax]
    dnorms = {a: _derivative(f, a).norm_lq(p) for a in alphas}
    if math.isinf(p):
        lhs = lhs_norm.real
        rhs = c * max(dnorms.values()) + lhs_norm.tail_bound
    else:
        lhs = lhs_norm.real ** p
        rhs = (sum(v**p for v in dnorms.values()) * c**p
               + (lhs_norm.real + lhs_norm.tail_bound) ** p
               - lhs_norm.real ** p)
    return CheckReport(
        name=f"sobolev-k{kmax}-p{p:g}",
        passed=lhs <= rhs * (1.0 + 1e-12),
        measured={"lhs": lhs, "rhs": rhs, "c": c})


def check_minkowski(f: SampledField, g: SampledField, p: float,
                    K: int = 200) -> CheckReport:
    """sd_norm_p(f + g) <= sd_norm_p(f) + sd_norm_p(g) + 2 tail."""
    if not f.grid_compatible(g):
        raise ValueError("check_minkowski requires a shared grid")
    fg = SampledField(f.components + g.components, f.origin, f.spacing)
    a = sd_norm_p(fg, p, K)
    b = sd_norm_p(f, p, K)
    c = sd_norm_p(g, p, K)
    rhs = b.value + c.value + 2.0 * max(b.tail_bound, c.tail_bound)
    return CheckReport(
        name=f"minkowski-p{p:g}",
        passed=a.value <= rhs * (1.0 + 1e-12) + 1e-300,
        measured={"lhs": float(a.value), "rhs": float(rhs)})


def check_sdinfty_in_sdp(f: SampledField, p: float,
                         K: int = 200) -> CheckReport:
    """sd_norm_p(f) <= (sum t_k)^(1/p) sd_norm_inf(f) + tail."""
    a = sd_norm_p(f, p, K)
    b = sd_norm_p(f, math.inf, K)
    tsum = 1.0 - 0.5**K
    mid = tsum ** (1.0 / p) * b.value + a.tail_bound
    outer = b.value + a.tail_bound
    return CheckReport(
        name=f"sdinfty-in-sd{p:g}",
        passed=(a.value <= mid * (1.0 + 1e-12) + 1e-300
                and mid <= outer * (1.0 + 1e-12) + 1e-300),
        measured={"lhs": float(a.value), "mid": float(mid),
                  "sup_norm": float(b.value)})


# ---------------------------------------------------------------------------
# bounded mean oscillation
# ---------------------------------------------------------------------------

def _mean_oscillation(block: np.ndarray) -> float:
    m = float(np.mean(block))
    return float(np.mean(np.abs(block - m)))


def bmo_norm(g: SampledField, cube_samples: int = 10000,
             seed: int = 0, max_depth: int = 6) -> float:
    """Lower bound on the mean-oscillation norm of a scalar field.

    The sup over all cubes is sampled over a dyadic partition family
    plus `cube_samples` random axis-aligned cubes inside the box.
    """
    if g.ncomp != 1:
        raise ValueError("bmo_norm is defined for scalar fields")
    vals = g.components[0]
    shape = np.array(g.shape)
    best = 0.0
    # dyadic family
    for depth in range(max_depth + 1):
        parts = 2**depth
        if np.any(shape // parts < 2):
            break
        splits = [np.array_split(np.arange(s), parts) for s in shape]
        for combo in itertools.product(*splits):
            block = vals[np.ix_(*combo)]
            best = max(best, _mean_oscillation(block))
    # random cubes
    rng = np.random.default_rng(seed)
    extent = shape - 1
    for _ in range(cube_samples):
        side = rng.integers(2, int(np.min(shape)) + 1)
        lo = np.array([rng.integers(0, e - side + 2) for e in extent])
        block = vals[tuple(slice(a, a + side) for a in lo)]
        best = max(best, _mean_oscillation(block))
    return best


def check_bmo_inverse_pairing(f_components: list, K: int = 100,
                              duality_K: int = 40) -> CheckReport:
    """Distributional pairing for u = sum_i d_i f^i with BMO pieces f^i.

    Forms u by centered differences, asserts sup_{k<=K} |F_k(u)| is
    finite, reports the sup-type norm, and verifies the pairing through
    the derivative, F_k(d_i f^i) = -int d_i E_k . f^i, per component.
    """
    n = f_components[0].n
    if len(f_components) != n:
        raise ValueError(f"need {n} potential components, got "
                         f"{len(f_components)}")
    base = f_components[0]
    du = []
    for i, fi in enumerate(f_components):
        if fi.ncomp != 1:
            raise ValueError("potential components must be scalar fields")
        if not fi.grid_compatible(base):
            raise ValueError("potential components must share one grid")
        du.append(np.gradient(fi.components[0], fi.spacing[i], axis=i))
    u = SampledField(np.stack(du), base.origin, base.spacing)
    F, _ = functionals(u, K)
    sup_F = float(np.max(np.abs(F)))
    sup_val = sd_norm_p(u, math.inf, K)
    worst = 0.0
    for i, fi in enumerate(f_components):
        dcomp = np.zeros_like(u.components)
        dcomp[i] = du[i]
        dfield = SampledField(dcomp, base.origin, base.spacing)
        pcomp = np.zeros_like(u.components)
        pcomp[i] = fi.components[0]
        pfield = SampledField(pcomp, base.origin, base.spacing)
        alpha = tuple(1 if j == i else 0 for j in range(n))
        for k in range(1, duality_K + 1):
            cube = cube_index(k, n)
            if not _support_inside(cube, base):
                continue
            lhs = functional_F_support(cube, dfield)
            rhs = -functional_F_support(cube, pfield, alpha=alpha)
            worst = max(worst, abs(lhs - rhs))
    return CheckReport(
        name="bmo-inverse-pairing",
        passed=math.isfinite(sup_F) and worst <= 1e-6,
        measured={"sup_F": sup_F, "sd_sup_norm": float(sup_val.value),
                  "duality_residual": worst})


# ---------------------------------------------------------------------------
# suite runner
# ---------------------------------------------------------------------------

def corpus_checks(spec: CorpusSpec, qs=(1.0, 2.0, math.inf)) -> list:
    """Embedding inequality checks over every corpus member."""
    reports = []
    for label, f in build_corpus(spec):
        for q in qs:
            rep = check_embedding_lp(f, q, spec.K)
            rep.name = f"{rep.name}:{label}"
            reports.append(rep)
    return reports


def suite_extras(spec: CorpusSpec) -> list:
    """Non-corpus checks: compactness, duality, BMO, norm comparisons."""
    reports = []
    seq_spec = CorpusSpec(dim=1, lo=-1.5, hi=1.5, points=8193,
                          K=spec.K, seed=spec.seed)
    seq = [generate(seq_spec, "oscillatory", frequency=float(m), radius=1.0)
           for m in (1, 2, 4, 8, 16, 32, 64, 128)]
    reports.append(check_compactness(seq, K=spec.K))

    smooth_spec = CorpusSpec(dim=1, lo=-1.5, hi=1.5, points=8193,
                             K=spec.K, seed=spec.seed)
    smooth = generate(smooth_spec, "gaussian", width=0.3)
    reports.append(check_weak_derivative(smooth, (1,), K=min(spec.K, 100)))
    reports.append(check_sobolev_membership(smooth, 1, 2.0, spec.K))

    f0 = generate(smooth_spec, "gaussian", width=0.35)
    g0 = generate(smooth_spec, "oscillatory", frequency=5.0)
    reports.append(check_minkowski(f0, g0, 2.0, spec.K))
    reports.append(check_sdinfty_in_sdp(f0, 2.0, spec.K))

    logf = generate(smooth_spec, "bmo-log")
    bval = bmo_norm(SampledField(logf.components[:1], logf.origin,
                                 logf.spacing), cube_samples=2000,
                    seed=spec.seed)
    reports.append(CheckReport(
        name="bmo-log-finite", passed=math.isfinite(bval) and bval > 0,
        measured={"bmo_norm": bval}))
    # truncate the log potential smoothly so it is box-supported
    window = generate(smooth_spec, "bump", radius=1.2)
    logw = SampledField(logf.components[:1] * window.components[:1],
                        logf.origin, logf.spacing)
    reports.append(check_bmo_inverse_pairing([logw], K=min(spec.K, 100)))
    return reports


def run_suite(spec: CorpusSpec | None = None) -> list:
    """Full verification sweep used by the command-line `verify` path."""
    if spec is None:
        spec = CorpusSpec()
    return corpus_checks(spec) + suite_extras(spec)
