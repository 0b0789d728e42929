"""Tests for the norm-comparison verification harness."""

import math

import numpy as np
import pytest

from sdnse import embeddings as em
from sdnse.sdspace import SampledField

SPEC1 = em.CorpusSpec(dim=1, lo=-1.5, hi=1.5, points=4097, K=100)


def _gauss(width=0.3):
    return em.generate(SPEC1, "gaussian", width=width)


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------

def test_default_corpus_size_and_finiteness():
    spec = em.CorpusSpec(dim=1, points=257, K=50)
    corpus = em.default_corpus(spec)
    assert len(corpus) == 20
    labels = [lab for lab, _ in corpus]
    assert len(set(labels)) == 20
    for _, f in corpus:
        assert np.all(np.isfinite(f.components))


def test_corpus_deterministic():
    spec = em.CorpusSpec(dim=1, points=257, K=50, seed=7)
    a = em.generate(spec, "random-smooth", index=2)
    b = em.generate(spec, "random-smooth", index=2)
    assert np.array_equal(a.components, b.components)


def test_unknown_generator():
    with pytest.raises(ValueError):
        em.generate(SPEC1, "nope")


# ---------------------------------------------------------------------------
# embedding inequality
# ---------------------------------------------------------------------------

def test_embedding_constant_measured_below_one():
    for q in (1.0, 2.0, math.inf):
        c, below = em.embedding_constant(q, 100, 1)
        assert 0 < c < 1
        assert below


def test_embedding_zero_field():
    f = SampledField(np.zeros((1, 101)), [-1.0], [0.02])
    rep = em.check_embedding_lp(f, 2.0, K=50)
    assert rep.passed
    assert rep.measured["lhs"] == 0.0


@pytest.mark.parametrize("q", [1.0, 2.0, math.inf])
def test_embedding_gaussian(q):
    rep = em.check_embedding_lp(_gauss(), q, K=100)
    assert rep.passed
    assert rep.measured["lhs"] <= rep.measured["rhs"]


# ---------------------------------------------------------------------------
# compactness surrogate
# ---------------------------------------------------------------------------

def test_compactness_oscillatory_sequence():
    seq = [em.generate(SPEC1, "oscillatory", frequency=float(m), radius=1.0)
           for m in (1, 2, 4, 8, 16, 32, 64, 128)]
    rep = em.check_compactness(seq, K=100)
    assert rep.passed
    assert rep.measured["ratio"] < 0.05


def test_compactness_constant_sequence_flagged():
    f = _gauss()
    rep = em.check_compactness([f] * 6, K=50)
    assert not rep.passed
    assert any("not weakly null" in n for n in rep.notes)


def test_compactness_translates_leave_fixed_cubes():
    # translating bumps eventually miss any fixed cube's support
    from sdnse.sdspace import functional_F
    from sdnse.testfns import cube_index
    spec = em.CorpusSpec(dim=1, lo=-8.0, hi=8.0, points=4097, K=20)
    cube = cube_index(1, 1)
    vals = []
    for shift in (0.0, 2.0, 4.0, 6.0):
        f = em.generate(spec, "translate", shift=shift, radius=0.3)
        vals.append(abs(functional_F(cube, f)))
    assert vals[0] > 0
    assert vals[-1] == 0.0


# ---------------------------------------------------------------------------
# weak derivatives and Sobolev
# ---------------------------------------------------------------------------

def test_weak_derivative_identity_alpha_zero():
    rep = em.check_weak_derivative(_gauss(), (0,), K=30)
    assert rep.passed
    assert rep.measured["norm_ratio"] == pytest.approx(1.0, abs=1e-12)


def test_weak_derivative_first_order():
    spec = em.CorpusSpec(dim=1, lo=-1.5, hi=1.5, points=8193, K=100)
    rep = em.check_weak_derivative(em.generate(spec, "gaussian", width=0.3),
                                   (1,), K=100)
    assert rep.passed
    assert rep.measured["duality_residual"] <= 1e-6
    assert math.isfinite(rep.measured["norm_ratio"])


def test_weak_derivative_flags_boundary():
    x = np.linspace(-1, 1, 513)
    f = SampledField(np.cos(x)[None], [-1.0], [x[1] - x[0]])
    rep = em.check_weak_derivative(f, (1,), K=10)
    assert rep.notes  # non-vanishing boundary is reported
    assert not rep.passed


def test_duality_residual_refines_with_grid():
    res = []
    for pts in (1025, 2049, 4097):
        spec = em.CorpusSpec(dim=1, lo=-1.5, hi=1.5, points=pts, K=20)
        rep = em.check_weak_derivative(
            em.generate(spec, "gaussian", width=0.3), (1,), K=20)
        res.append(rep.measured["duality_residual"])
    order = math.log2(res[0] / res[1])
    order2 = math.log2(res[1] / res[2])
    assert min(order, order2) > 1.5


def test_sobolev_membership():
    rep = em.check_sobolev_membership(_gauss(), kmax=1, p=2.0, K=100)
    assert rep.passed
    rep_inf = em.check_sobolev_membership(_gauss(), kmax=1, p=math.inf,
                                          K=100)
    assert rep_inf.passed


# ---------------------------------------------------------------------------
# Minkowski and nesting
# ---------------------------------------------------------------------------

def test_minkowski_cancellation():
    f = _gauss()
    g = SampledField(-f.components, f.origin, f.spacing)
    rep = em.check_minkowski(f, g, 2.0, K=60)
    assert rep.passed
    assert rep.measured["lhs"] == pytest.approx(0.0, abs=1e-15)


def test_minkowski_homogeneity():
    from sdnse.sdspace import sd_norm_p
    f = _gauss()
    rep = em.check_minkowski(f, f, 2.0, K=60)
    assert rep.passed
    # lhs equals the sum of the two norms exactly (homogeneity)
    assert rep.measured["lhs"] == pytest.approx(
        2.0 * float(sd_norm_p(f, 2.0, 60).value), rel=1e-12)


def test_minkowski_random_pair():
    f = _gauss()
    g = em.generate(SPEC1, "oscillatory", frequency=5.0)
    for p in (1.0, 2.0, math.inf):
        assert em.check_minkowski(f, g, p, K=60).passed


def test_sdinfty_in_sdp():
    for p in (1.0, 2.0, 4.0):
        rep = em.check_sdinfty_in_sdp(_gauss(), p, K=60)
        assert rep.passed
        assert rep.measured["lhs"] <= rep.measured["mid"] * (1 + 1e-12)


def test_sdinfty_zero_field():
    f = SampledField(np.zeros((1, 101)), [-1.0], [0.02])
    assert em.check_sdinfty_in_sdp(f, 2.0, K=30).passed


# ---------------------------------------------------------------------------
# BMO
# ---------------------------------------------------------------------------

def test_bmo_constant_is_zero():
    f = SampledField(np.full((1, 257), 2.5), [-1.0], [1.0 / 128])
    assert em.bmo_norm(f, cube_samples=500) == 0.0


def test_bmo_bounded_by_sup():
    x = np.linspace(-1, 1, 513)
    g = np.tanh(5 * x)
    f = SampledField(g[None], [-1.0], [x[1] - x[0]])
    val = em.bmo_norm(f, cube_samples=2000)
    assert 0 < val <= 2 * np.max(np.abs(g))


def test_bmo_log_finite_and_stable():
    f = em.generate(SPEC1, "bmo-log")
    scalar = SampledField(f.components[:1], f.origin, f.spacing)
    v1 = em.bmo_norm(scalar, cube_samples=1000, seed=0)
    v2 = em.bmo_norm(scalar, cube_samples=4000, seed=1)
    assert math.isfinite(v1) and v1 > 0
    # a larger family can only move the lower bound up, and not by much
    assert v1 <= v2 * (1 + 1e-12)
    assert v2 < 3.0 * max(v1, 1.0)


def test_bmo_requires_scalar():
    f = _gauss()
    two = SampledField(np.vstack([f.components, f.components]),
                       f.origin, f.spacing)
    with pytest.raises(ValueError):
        em.bmo_norm(two)


def test_bmo_inverse_pairing_constant_potential():
    const = SampledField(np.full((1, 2049), 1.0), [-1.5], [3.0 / 2048])
    rep = em.check_bmo_inverse_pairing([const], K=30, duality_K=10)
    assert rep.passed
    assert rep.measured["sup_F"] == pytest.approx(0.0, abs=1e-12)


def test_bmo_inverse_pairing_log_potential():
    spec = em.CorpusSpec(dim=1, lo=-1.5, hi=1.5, points=8193, K=60)
    logf = em.generate(spec, "bmo-log")
    window = em.generate(spec, "bump", radius=1.2)
    logw = SampledField(logf.components[:1] * window.components[:1],
                        logf.origin, logf.spacing)
    rep = em.check_bmo_inverse_pairing([logw], K=60, duality_K=30)
    assert math.isfinite(rep.measured["sup_F"])
    assert rep.measured["duality_residual"] <= 1e-6
    assert rep.passed


# ---------------------------------------------------------------------------
# suite
# ---------------------------------------------------------------------------

def test_suite_extras_all_pass():
    spec = em.CorpusSpec(dim=1, points=2049, K=60)
    reports = em.suite_extras(spec)
    names = [r.name for r in reports]
    assert any("compactness" in n for n in names)
    assert any("weak-derivative" in n for n in names)
    assert any("bmo" in n for n in names)
    failed = [r.name for r in reports if not r.passed]
    assert not failed, failed
