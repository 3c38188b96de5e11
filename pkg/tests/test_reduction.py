import itertools
import math

import numpy as np
import pytest

from bkw_lwe.core import LweParams, ParameterError, Rng
from bkw_lwe.instance import UNIFORM, generate_instance
from bkw_lwe.reduction import (
    LF1,
    LF2,
    AMPLIFIED,
    SampleSet,
    _pair_ranks_to_ij,
    _proportional_cap,
    _unrank_triples,
    categorize,
    reduce_step_lf1,
    reduce_step_lf2,
    sample_amplify,
)


def _fresh(params, m, seed, stream=0):
    inst = generate_instance(params, m, UNIFORM, Rng(seed, stream))
    return SampleSet.from_instance(inst)


def _check_error_tracking(ss):
    """b - <a, s> must equal the tracked signed error combination mod q."""
    q = ss.params.q
    lhs = (ss.b - ss.A @ ss.secret) % q
    assert np.array_equal(lhs, ss.e_true % q)


def test_categorize_examples():
    q = 11
    c1 = categorize([3, 7], q)
    c2 = categorize([8, 4], q)  # the negation of (3, 7)
    assert c1.key == c2.key == (3, 7)
    assert c1.sign == 1 and c2.sign == -1
    z = categorize([0, 0], q)
    assert z.key == (0, 0) and z.sign == 1


@pytest.mark.parametrize("q,b", [(3, 1), (3, 2), (5, 2), (7, 2), (11, 2), (13, 2)])
def test_categorize_negation_symmetry_exhaustive(q, b):
    # every prefix and its negation map to the same canonical key
    keys = set()
    for v in itertools.product(range(q), repeat=b):
        cv = categorize(v, q)
        cn = categorize([(-x) % q for x in v], q)
        assert cv.key == cn.key
        keys.add(cv.key)
    # (q^b - 1) / 2 nonzero categories plus the zero category
    assert len(keys) == (q**b - 1) // 2 + 1


def test_lf1_zeroes_and_tracks_errors():
    params = LweParams(n=6, q=11, alpha=0.08)
    ss = _fresh(params, 1000, 42)
    _check_error_tracking(ss)
    out = reduce_step_lf1(ss, 2)
    assert out.zeroed == 2 and out.steps_taken == 1
    assert np.all(out.A[:, :2] == 0)
    assert out.strategy_log == [LF1]
    _check_error_tracking(out)
    out2 = reduce_step_lf1(out, 2)
    assert np.all(out2.A[:, :4] == 0)
    _check_error_tracking(out2)
    assert out2.sigma_current == pytest.approx(2.0 * params.sigma)


def test_lf1_expected_output_count():
    # m - (zero passthrough) nonzero samples spread over N categories; each
    # occupied category donates its representative, so E[out] over many runs
    # is close to m - N(1 - (1 - 2/q^b)^m) - E[zeros lost] ~ occupancy formula
    params = LweParams(n=4, q=11, alpha=0.08)
    q, b, m = 11, 2, 800
    N = (q**b - 1) / 2.0
    outs = []
    for trial in range(100):
        ss = _fresh(params, m, 77, trial)
        outs.append(reduce_step_lf1(ss, b).m)
    p_zero = 1.0 / q**b
    m_nz = m * (1 - p_zero)
    expected = m - N * (1.0 - (1.0 - 2.0 / q**b) ** m_nz)
    assert abs(np.mean(outs) - expected) / expected < 0.02


def test_lf2_full_pair_expansion():
    params = LweParams(n=4, q=5, alpha=0.1)
    ss = _fresh(params, 400, 3)
    out = reduce_step_lf2(ss, 2)
    assert np.all(out.A[:, :2] == 0)
    assert out.strategy_log == [LF2]
    _check_error_tracking(out)
    # output size equals zero passthrough + sum of C(c, 2) over categories
    keys = {}
    zeros = 0
    for row in ss.A[:, :2]:
        c = categorize(row, 5)
        if c.key == (0, 0):
            zeros += 1
        else:
            keys[c.key] = keys.get(c.key, 0) + 1
    expected = zeros + sum(c * (c - 1) // 2 for c in keys.values())
    assert out.m == expected


def test_lf2_sufficiency_at_recommended_size():
    # with m = 3 (q^b - 1) / 2 inputs an uncapped step keeps at least m
    params = LweParams(n=6, q=11, alpha=0.08)
    q, b = 11, 2
    m = 3 * (q**b - 1) // 2
    sizes = []
    for trial in range(50):
        ss = _fresh(params, m, 13, trial)
        sizes.append(reduce_step_lf2(ss, b).m)
    assert np.mean(sizes) >= m


def test_lf2_capped_size_and_rng_requirement():
    params = LweParams(n=4, q=11, alpha=0.08)
    ss = _fresh(params, 2000, 5)
    zeros = int(np.sum(np.all(ss.A[:, :2] % 11 == 0, axis=1)))
    out = reduce_step_lf2(ss, 2, max_outputs=500, rng=Rng(5, 1))
    assert out.m == 500 + zeros
    _check_error_tracking(out)
    with pytest.raises(ParameterError):
        reduce_step_lf2(ss, 2, max_outputs=500)
    # deterministic under equal seeds
    out2 = reduce_step_lf2(ss, 2, max_outputs=500, rng=Rng(5, 1))
    assert np.array_equal(out.A, out2.A) and np.array_equal(out.b, out2.b)


def test_lf2_cap_larger_than_pairs_is_uncapped():
    params = LweParams(n=4, q=11, alpha=0.08)
    ss = _fresh(params, 300, 6)
    full = reduce_step_lf2(ss, 2)
    capped = reduce_step_lf2(ss, 2, max_outputs=10**9, rng=Rng(6, 1))
    assert np.array_equal(full.A, capped.A)


def test_step_width_validation():
    params = LweParams(n=3, q=11, alpha=0.08)
    ss = _fresh(params, 100, 7)
    with pytest.raises(ParameterError):
        reduce_step_lf1(ss, 4)
    with pytest.raises(ParameterError):
        reduce_step_lf2(ss, 4)


def test_pair_unranking_exhaustive():
    n = 40
    ranks = np.arange(math.comb(n, 2), dtype=np.int64)
    i, j = _pair_ranks_to_ij(ranks)
    assert np.all(i < j)
    pairs = set(zip(i.tolist(), j.tolist()))
    assert len(pairs) == ranks.size
    assert np.array_equal(j * (j - 1) // 2 + i, ranks)


def test_triple_unranking_exhaustive():
    m = 15
    ranks = np.arange(math.comb(m, 3), dtype=np.int64)
    i, j, k = _unrank_triples(ranks, m)
    assert np.all((i < j) & (j < k)) and k.max() < m
    expected = list(itertools.combinations(range(m), 3))
    assert list(zip(i.tolist(), j.tolist(), k.tolist())) == expected


def test_proportional_cap():
    counts = np.array([10, 30, 60], dtype=np.int64)
    alloc = _proportional_cap(counts, 50)
    assert alloc.sum() == 50
    assert np.all(alloc <= counts)
    # proportions preserved to within a unit
    assert np.all(np.abs(alloc - np.array([5, 15, 30])) <= 1)


def test_amplify_algebra_and_variance():
    params = LweParams(n=6, q=101, alpha=0.05)
    ss = _fresh(params, 3000, 9)
    target = 100_000
    out = sample_amplify(ss, target, Rng(9, 1))
    assert out.m == target and out.amplified
    assert out.strategy_log == [AMPLIFIED]
    _check_error_tracking(out)
    # tripled variance: e = +-e_i +- e_j +- e_k with independent signs
    var = np.var(out.e_true.astype(float))
    base = np.var(ss.e_true.astype(float))
    assert abs(var - 3 * base) / (3 * base) < 0.05
    assert out.sigma_current == pytest.approx(math.sqrt(3.0) * params.sigma)


def test_amplify_limit_and_determinism():
    params = LweParams(n=3, q=11, alpha=0.08)
    ss = _fresh(params, 10, 4)
    limit = 4 * math.comb(10, 3)
    full = sample_amplify(ss, limit, Rng(4, 1))
    assert full.m == limit
    # all emitted rows distinct as (triple, sign pattern) combinations
    with pytest.raises(ParameterError):
        sample_amplify(ss, limit + 1, Rng(4, 1))
    with pytest.raises(ParameterError):
        sample_amplify(ss, 0, Rng(4, 1))
    a = sample_amplify(ss, 300, Rng(4, 2))
    b = sample_amplify(ss, 300, Rng(4, 2))
    assert np.array_equal(a.A, b.A) and np.array_equal(a.b, b.b)


def test_amplified_then_reduced_noise_bookkeeping():
    params = LweParams(n=4, q=101, alpha=0.02)
    ss = _fresh(params, 60, 10)
    amp = sample_amplify(ss, 5000, Rng(10, 1))
    out = reduce_step_lf1(amp, 2)
    _check_error_tracking(out)
    assert out.sigma_current == pytest.approx(
        math.sqrt(2.0) * math.sqrt(3.0) * params.sigma
    )


def test_take_subset():
    params = LweParams(n=4, q=11, alpha=0.08)
    ss = _fresh(params, 100, 11)
    sub = ss.take(np.arange(10))
    assert sub.m == 10
    _check_error_tracking(sub)
