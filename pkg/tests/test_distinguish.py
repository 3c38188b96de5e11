import math

import numpy as np
import pytest

from bkw_lwe.core import LweParams, ParameterError, Rng, noise_after_steps, rounded_gaussian_pmf
from bkw_lwe.distinguish import (
    FFT,
    FFT_PRUNED,
    LLR,
    CosineFit,
    HypothesisSpace,
    cosine_approximation,
    default_magnitude_bound,
    fft_distinguish,
    llr_distinguish,
    pruned_fft_distinguish,
    residual_error,
    theory_samples,
    theory_samples_pruned,
)
from bkw_lwe.instance import UNIFORM, generate_instance
from bkw_lwe.reduction import SampleSet


def _samples(q, k, m, seed, alpha=0.05):
    """A small already-reduced-looking sample batch with a planted secret."""
    inst = generate_instance(LweParams(n=k, q=q, alpha=alpha), m, UNIFORM, Rng(seed, 0))
    return inst.A, inst.b, inst.secret.s


def test_hypothesis_space_basics():
    full = HypothesisSpace(k=2, q=11)
    assert full.is_full and full.size == 121
    hyps = full.enumerate()
    assert hyps.shape == (121, 2)
    # ascending lexicographic order of signed coordinates
    assert np.array_equal(hyps[0], [-5, -5]) and np.array_equal(hyps[-1], [5, 5])
    order = np.lexsort((hyps[:, 1], hyps[:, 0]))
    assert np.array_equal(order, np.arange(121))

    pruned = HypothesisSpace(k=2, q=11, d=2)
    assert not pruned.is_full and pruned.size == 25
    assert pruned.contains([2, -2]) and not pruned.contains([3, 0])
    with pytest.raises(ParameterError):
        HypothesisSpace(k=0, q=11)
    with pytest.raises(ParameterError):
        HypothesisSpace(k=1, q=11, d=6)


def test_residual_error():
    assert residual_error([[2, 3]], [5], [1, 1], 11)[0] == 0
    assert residual_error([[2, 3]], [7], [1, 1], 11)[0] == 2


def test_llr_brute_force_oracle():
    # independent per-hypothesis loop evaluation of the LLR definition
    q, k, m = 11, 1, 50
    A, b, s = _samples(q, k, m, seed=17, alpha=0.08)
    sigma_f = 0.08 * q
    table = rounded_gaussian_pmf(sigma_f, q).table
    space = HypothesisSpace(k=k, q=q)
    st = llr_distinguish((A, b, q), space, sigma_f, method="direct")
    for idx, hyp in enumerate(space.enumerate()):
        score = 0.0
        for j in range(m):
            e_hat = int((b[j] - A[j] @ hyp) % q)
            score += math.log(q * table[e_hat])
        assert abs(score - st.scores[idx]) < 1e-10


def test_llr_counting_matches_direct():
    for q, k in [(11, 1), (11, 2), (101, 1)]:
        A, b, _ = _samples(q, k, 4000, seed=23)
        space = HypothesisSpace(k=k, q=q)
        sigma_f = 0.4 * q
        direct = llr_distinguish((A, b, q), space, sigma_f, method="direct")
        counting = llr_distinguish((A, b, q), space, sigma_f, method="counting")
        assert np.max(np.abs(direct.scores - counting.scores)) < 1e-9 * max(
            1.0, np.abs(direct.scores).max()
        )
        assert counting.argmax == direct.argmax


def test_llr_counting_requires_full_space():
    A, b, _ = _samples(11, 1, 100, seed=2)
    with pytest.raises(ParameterError):
        llr_distinguish((A, b, 11), HypothesisSpace(k=1, q=11, d=2), 1.0, method="counting")
    with pytest.raises(ParameterError):
        llr_distinguish((A, b, 11), HypothesisSpace(k=1, q=11), 0.0)


@pytest.mark.parametrize("q", [5, 11, 101])
@pytest.mark.parametrize("k", [1, 2])
def test_fft_transform_matches_direct(q, k):
    A, b, _ = _samples(q, k, 500, seed=31)
    space = HypothesisSpace(k=k, q=q)
    direct = fft_distinguish((A, b, q), space, method="direct")
    transform = fft_distinguish((A, b, q), space, method="transform")
    assert np.max(np.abs(direct.scores - transform.scores)) < 1e-6
    assert direct.tag == transform.tag == FFT


def test_pruned_fft_routes():
    q, k, d = 101, 2, 10
    A, b, _ = _samples(q, k, 800, seed=37)
    space = HypothesisSpace(k=k, q=q, d=d)
    hyps = space.enumerate()
    full_direct = fft_distinguish((A, b, q), HypothesisSpace(k=k, q=q), method="direct")
    full_transform = fft_distinguish((A, b, q), HypothesisSpace(k=k, q=q), method="transform")
    in_bound = np.all(np.abs(full_direct.hypotheses) <= d, axis=1)

    pr_direct = pruned_fft_distinguish((A, b, q), k, q, d, method="direct")
    pr_slice = pruned_fft_distinguish((A, b, q), k, q, d, method="slice")
    pr_transform = pruned_fft_distinguish((A, b, q), k, q, d, method="pruned-transform")
    assert np.array_equal(pr_direct.hypotheses, hyps)
    # pruned table == filtered full table, exactly, route by matching route
    assert np.array_equal(pr_direct.scores, full_direct.scores[in_bound])
    assert np.array_equal(pr_slice.scores, full_transform.scores[in_bound])
    assert np.max(np.abs(pr_transform.scores - pr_slice.scores)) < 1e-9
    assert pr_direct.tag == FFT_PRUNED
    with pytest.raises(ParameterError):
        pruned_fft_distinguish((A, b, q), k, q, 0)


def test_noiseless_determinism():
    # with e = 0 every distinguisher must return the planted secret exactly
    q, k = 11, 2
    gen = np.random.Generator(np.random.Philox(key=5))
    A = gen.integers(0, q, size=(30, k), dtype=np.int64)
    s = np.array([3, -2], dtype=np.int64)
    b = (A @ s) % q
    space = HypothesisSpace(k=k, q=q)
    for st in (
        fft_distinguish((A, b, q), space),
        llr_distinguish((A, b, q), space, 0.5),
        pruned_fft_distinguish((A, b, q), k, q, 4),
    ):
        assert np.array_equal(st.best, s)
        assert st.margin() > 0


def test_score_translation_identity():
    # shifting every b by c rotates every residual by c: score_alpha(b + c)
    # equals sum cos(2 pi (e_hat + c)/q) recomputed directly
    q, k, c = 11, 1, 4
    A, b, _ = _samples(q, k, 200, seed=41)
    space = HypothesisSpace(k=k, q=q)
    shifted = fft_distinguish((A, (b + c) % q, q), space, method="direct")
    for idx, hyp in enumerate(space.enumerate()):
        e_hat = residual_error(A, b, hyp, q)
        expected = np.cos(2.0 * np.pi * ((e_hat + c) % q) / q).sum()
        assert abs(shifted.scores[idx] - expected) < 1e-9


def test_fft_sampleset_input():
    inst = generate_instance(LweParams(n=2, q=11, alpha=0.05), 100, UNIFORM, Rng(1, 0))
    ss = SampleSet.from_instance(inst)
    st = fft_distinguish(ss)
    assert st.scores.shape == (121,)


def test_theory_samples_against_mpmath_oracle():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 60

    def oracle(q, k, sigma, t, eps, numerator_count):
        C = (mp.mpf(q) / mp.pi) * mp.sin(mp.pi / q) * mp.e ** (
            -2 * mp.pi**2 * mp.mpf(sigma) ** 2 / q**2
        )
        return 8 * mp.log(mp.mpf(numerator_count) ** k / mp.mpf(eps)) * C ** (
            -(2 ** (t + 1))
        )

    cases = [(1601, 2, 8.005, 13, 0.5), (101, 2, 9.0496, 5, 0.5), (101, 2, 9.0496, 5, 0.1)]
    for q, k, sigma, t, eps in cases:
        got = theory_samples(q, k, sigma, t, eps)
        want = float(oracle(q, k, sigma, t, eps, q))
        assert got == pytest.approx(want, rel=1e-9)
        d = default_magnitude_bound(noise_after_steps(sigma, t))
        d = min(d, (q - 1) // 2)
        got_p = theory_samples_pruned(q, k, sigma, t, eps, d)
        want_p = float(oracle(q, k, sigma, t, eps, 2 * d + 1))
        assert got_p == pytest.approx(want_p, rel=1e-9)


def test_theory_edge_cases():
    # eps equal to the hypothesis count collapses the bound to zero
    assert theory_samples(11, 1, 1.0, 1, 11.0) == 0.0
    with pytest.raises(ParameterError):
        theory_samples(11, 1, 1.0, 1, 12.0)
    with pytest.raises(ParameterError):
        theory_samples(11, 1, 1.0, 1, 0.0)
    with pytest.raises(ParameterError):
        theory_samples(11, 1, 0.0, 1, 0.5)
    with pytest.raises(ParameterError):
        theory_samples_pruned(11, 1, 1.0, 1, 0.5, 0)


def test_default_magnitude_bound():
    assert default_magnitude_bound(8.0) == 24
    assert default_magnitude_bound(8.1) == 25


def test_cosine_approximation_shrinks_with_noise():
    q, sigma = 1601, 8.005
    dev12 = cosine_approximation(noise_after_steps(sigma, 12), q).max_abs_deviation
    dev13 = cosine_approximation(noise_after_steps(sigma, 13), q).max_abs_deviation
    assert dev13 < dev12


def test_cosine_fit_construction():
    fit = cosine_approximation(10.0, 101)
    assert isinstance(fit, CosineFit)
    # pinned at the extremes of g
    g = fit.g_table
    assert fit.amplitude == pytest.approx((g.max() - g.min()) / 2)
    assert fit.offset == pytest.approx((g.max() + g.min()) / 2)
    # model matches g at e = 0 (the max) by construction
    zero_idx = np.flatnonzero(fit.support == 0)[0]
    assert fit.model[zero_idx] == pytest.approx(g.max())
    # deviation recomputed from an independent pmf evaluation
    rg = rounded_gaussian_pmf(10.0, 101)
    g2 = np.log(101 * rg.table[fit.support % 101])
    model2 = fit.offset + fit.amplitude * np.cos(2 * np.pi * fit.support / 101)
    assert fit.max_abs_deviation == pytest.approx(np.abs(g2 - model2).max(), abs=1e-12)
    with pytest.raises(ParameterError):
        cosine_approximation(0.0, 101)


def test_margin_and_best():
    scores = np.array([1.0, 5.0, 3.0])
    from bkw_lwe.distinguish import ScoreTable

    st = ScoreTable(np.array([[0], [1], [2]]), scores, 1, FFT)
    assert st.best[0] == 1
    assert st.margin() == pytest.approx(2.0)
