"""Plain BKW reduction: category bookkeeping, LF1/LF2 steps, amplification.

A step zeroes the next `width` coordinates of every a-vector by combining
samples whose prefixes cancel under addition or subtraction.  Categories pair
a prefix v with -v mod q; the canonical key is whichever of the two has its
first nonzero coordinate in [1, (q-1)/2], so there are exactly (q^width - 1)/2
nonzero categories plus a distinguished zero category that passes through
unreduced.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import LweParams, ParameterError, Rng, noise_after_steps, signed
from .instance import LweInstance

LF1 = "LF1"
LF2 = "LF2"
AMPLIFIED = "amplified"


@dataclass(frozen=True)
class CategoryIndex:
    """Canonical key for a prefix plus the sign used to canonicalize it."""

    key: tuple
    sign: int


@dataclass
class SampleSet:
    """A batch of samples with noise and reduction bookkeeping.

    The first `zeroed` coordinates of every a-vector are 0.  `e_true` (when a
    planted secret is available) carries the exact signed integer combination
    of original error terms for every sample, so b - <a, s> can be checked
    against it mod q at any point of the pipeline.
    """

    params: LweParams
    A: np.ndarray
    b: np.ndarray
    sigma_current: float
    steps_taken: int = 0
    zeroed: int = 0
    amplified: bool = False
    strategy_log: list = field(default_factory=list)
    e_true: np.ndarray | None = None
    secret: np.ndarray | None = None

    @classmethod
    def from_instance(cls, instance: LweInstance) -> "SampleSet":
        e_true = None
        secret = None
        if instance.secret is not None:
            secret = instance.secret.s
            q = instance.params.q
            e_true = signed((instance.b - instance.A @ secret) % q, q).astype(np.int64)
        return cls(
            params=instance.params,
            A=instance.A,
            b=instance.b,
            sigma_current=instance.params.sigma,
            e_true=e_true,
            secret=secret,
        )

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def dim(self) -> int:
        """Positions not yet zeroed."""
        return self.A.shape[1] - self.zeroed

    def active(self) -> tuple[np.ndarray, np.ndarray]:
        """(a-columns not yet zeroed, b)."""
        return self.A[:, self.zeroed:], self.b

    def take(self, idx) -> "SampleSet":
        """Row subset, same bookkeeping."""
        return replace(
            self,
            A=self.A[idx],
            b=self.b[idx],
            e_true=None if self.e_true is None else self.e_true[idx],
            strategy_log=list(self.strategy_log),
        )


def categorize(a_prefix, q: int) -> CategoryIndex:
    """Canonical category of one prefix vector."""
    v = np.asarray(a_prefix, dtype=np.int64) % q
    nz = np.nonzero(v)[0]
    if nz.size == 0:
        return CategoryIndex(key=tuple(v), sign=1)
    if v[nz[0]] <= (q - 1) // 2:
        return CategoryIndex(key=tuple(v), sign=1)
    return CategoryIndex(key=tuple((-v) % q), sign=-1)


def _canonicalize(P: np.ndarray, q: int):
    """Vectorized categorize: (key integers, signs, zero-prefix mask).

    Keys encode the canonical prefix in base q; q^width must fit in int64.
    """
    m, w = P.shape
    nonzero = P != 0
    any_nz = nonzero.any(axis=1)
    first_nz = np.where(any_nz, nonzero.argmax(axis=1), 0)
    lead = P[np.arange(m), first_nz]
    sign = np.where(lead <= (q - 1) // 2, 1, -1).astype(np.int64)
    sign[~any_nz] = 1
    canon = np.where(sign[:, None] == 1, P, (-P) % q)
    weights = q ** np.arange(w, dtype=np.int64)
    return canon @ weights, sign, ~any_nz


def _combine(ss: SampleSet, i_idx, j_idx, signs, q):
    """Samples row[j] -/+ row[i] so the active prefixes cancel.

    Same canonical sign means equal prefixes (subtract); opposite signs mean
    negated prefixes (add).
    """
    pm = np.where(signs[i_idx] == signs[j_idx], -1, 1).astype(np.int64)
    A_new = (ss.A[j_idx] + pm[:, None] * ss.A[i_idx]) % q
    b_new = (ss.b[j_idx] + pm * ss.b[i_idx]) % q
    e_new = None
    if ss.e_true is not None:
        e_new = ss.e_true[j_idx] + pm * ss.e_true[i_idx]
    return A_new, b_new, e_new


def _finish_step(ss, tag, A_parts, b_parts, e_parts, width):
    A = np.concatenate(A_parts) if A_parts else np.empty((0, ss.A.shape[1]), np.int64)
    b = np.concatenate(b_parts) if b_parts else np.empty(0, np.int64)
    e = None
    if ss.e_true is not None:
        e = np.concatenate(e_parts) if e_parts else np.empty(0, np.int64)
    t = ss.steps_taken + 1
    return replace(
        ss,
        A=A,
        b=b,
        e_true=e,
        steps_taken=t,
        zeroed=ss.zeroed + width,
        sigma_current=noise_after_steps(ss.params.sigma, t, ss.amplified),
        strategy_log=ss.strategy_log + [tag],
    )


def reduce_step_lf1(ss: SampleSet, width: int) -> SampleSet:
    """One LF1 step: per category, combine everything with one representative.

    The representative is the first-inserted sample of its category; a
    category with c samples emits c - 1, all mutually independent given
    independent inputs.  Output order: zero-category passthrough first, then
    combinations in (category key, insertion) order.
    """
    if ss.dim < width:
        raise ParameterError(f"dim {ss.dim} < step width {width}")
    q = ss.params.q
    keys, signs, zero_mask = _canonicalize(ss.A[:, ss.zeroed:ss.zeroed + width], q)

    nz = np.flatnonzero(~zero_mask)
    if nz.size == 0:
        # every prefix already zero: pure passthrough
        return _finish_step(
            ss, LF1, [ss.A], [ss.b],
            None if ss.e_true is None else [ss.e_true], width,
        )
    order = nz[np.argsort(keys[nz], kind="stable")]
    sorted_keys = keys[order]
    group_start = np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1]])
    counts = np.diff(np.r_[group_start, sorted_keys.size])
    rep_for_member = np.repeat(order[group_start], counts)
    # rep_for_member is aligned with `order`; drop the representatives themselves
    keep = np.ones(order.size, dtype=bool)
    keep[group_start] = False
    members = order[keep]
    reps = rep_for_member[keep]

    A_new, b_new, e_new = _combine(ss, reps, members, signs, q)
    A_parts = [ss.A[zero_mask], A_new]
    b_parts = [ss.b[zero_mask], b_new]
    e_parts = None
    if ss.e_true is not None:
        e_parts = [ss.e_true[zero_mask], e_new]
    return _finish_step(ss, LF1, A_parts, b_parts, e_parts, width)


def _pair_ranks_to_ij(ranks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unrank pairs (i < j) enumerated as rank = C(j, 2) + i."""
    j = ((1.0 + np.sqrt(1.0 + 8.0 * ranks)) / 2.0).astype(np.int64)
    # float sqrt can be off by one near triangular numbers
    j = np.where(j * (j - 1) // 2 > ranks, j - 1, j)
    j = np.where((j + 1) * j // 2 <= ranks, j + 1, j)
    i = ranks - j * (j - 1) // 2
    return i, j


def _proportional_cap(pair_counts: np.ndarray, cap: int) -> np.ndarray:
    """Allocate `cap` outputs across categories proportionally to C(c, 2)."""
    total = int(pair_counts.sum())
    alloc = pair_counts * cap // total
    remainder = cap - int(alloc.sum())
    if remainder > 0:
        frac = pair_counts * cap - alloc * total
        top = np.argsort(-frac, kind="stable")[:remainder]
        alloc[top] += 1
    return np.minimum(alloc, pair_counts)


def reduce_step_lf2(
    ss: SampleSet, width: int, max_outputs: int | None = None, rng: Rng | None = None
) -> SampleSet:
    """One LF2 step: all C(c, 2) pairwise combinations per category.

    With max_outputs set, a random subset of pairs is kept instead,
    distributed across categories proportionally to C(c, 2); this needs an
    rng.  Outputs of LF2 are dependent.
    """
    if ss.dim < width:
        raise ParameterError(f"dim {ss.dim} < step width {width}")
    q = ss.params.q
    keys, signs, zero_mask = _canonicalize(ss.A[:, ss.zeroed:ss.zeroed + width], q)

    nz = np.flatnonzero(~zero_mask)
    if nz.size == 0:
        return _finish_step(
            ss, LF2, [ss.A], [ss.b],
            None if ss.e_true is None else [ss.e_true], width,
        )
    order = nz[np.argsort(keys[nz], kind="stable")]
    sorted_keys = keys[order]
    group_start = np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1]])
    counts = np.diff(np.r_[group_start, sorted_keys.size])
    pair_counts = counts * (counts - 1) // 2
    total_pairs = int(pair_counts.sum())

    if max_outputs is not None and total_pairs > max_outputs:
        if rng is None:
            raise ParameterError("capped LF2 requires an rng")
        alloc = _proportional_cap(pair_counts, max_outputs)
        i_loc_parts, j_loc_parts, base_parts = [], [], []
        for g in np.flatnonzero(alloc):
            ranks = np.sort(
                rng.gen.choice(int(pair_counts[g]), size=int(alloc[g]), replace=False)
            )
            i_loc, j_loc = _pair_ranks_to_ij(ranks.astype(np.int64))
            i_loc_parts.append(i_loc)
            j_loc_parts.append(j_loc)
            base_parts.append(np.full(i_loc.size, group_start[g], dtype=np.int64))
        if i_loc_parts:
            base = np.concatenate(base_parts)
            i_pos = base + np.concatenate(i_loc_parts)
            j_pos = base + np.concatenate(j_loc_parts)
        else:
            i_pos = j_pos = np.empty(0, dtype=np.int64)
    else:
        # all pairs, vectorized over all categories at once
        start_per_elem = np.repeat(group_start, counts)
        within = np.arange(order.size) - start_per_elem
        j_pos = np.repeat(np.arange(order.size), within)
        i_pos = (
            np.arange(int(within.sum()))
            - np.repeat(np.r_[0, np.cumsum(within)[:-1]], within)
            + np.repeat(start_per_elem, within)
        )

    i_idx = order[i_pos]
    j_idx = order[j_pos]
    A_new, b_new, e_new = _combine(ss, i_idx, j_idx, signs, q)
    A_parts = [ss.A[zero_mask], A_new]
    b_parts = [ss.b[zero_mask], b_new]
    e_parts = None
    if ss.e_true is not None:
        e_parts = [ss.e_true[zero_mask], e_new]
    return _finish_step(ss, LF2, A_parts, b_parts, e_parts, width)


def _unrank_triples(ranks: np.ndarray, m: int) -> tuple[np.ndarray, ...]:
    """Lexicographic unranking of combinations (i < j < k) out of m."""
    # triples starting at i: C(m - 1 - i, 2); cumulative table over i
    per_i = np.array([math.comb(m - 1 - i, 2) for i in range(m)], dtype=np.int64)
    cum_i = np.r_[0, np.cumsum(per_i)]
    i = np.searchsorted(cum_i, ranks, side="right") - 1
    rem = ranks - cum_i[i]
    # pairs (j, k) with i < j < k: for fixed j, m - 1 - j choices of k
    # cumulative count for j in (i, m): offset by prefix sums of (m - 1 - j)
    per_j = np.arange(m - 1, -1, -1, dtype=np.int64)  # m-1-j for j = 0..m-1
    cum_j = np.r_[0, np.cumsum(per_j)]
    v = rem + cum_j[i + 1]  # shift into the global j table
    j = np.searchsorted(cum_j, v, side="right") - 1
    k = v - cum_j[j] + j + 1
    return i, j, k


_TRIPLE_SIGNS = np.array(
    [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]], dtype=np.int64
)


def sample_amplify(ss: SampleSet, target_m: int, rng: Rng) -> SampleSet:
    """Amplify to target_m samples of the form +-a_i +- a_j +- a_k (i<j<k).

    Sign patterns are counted modulo global negation (4 per triple), so the
    ceiling is 4 * C(m, 3).  Combinations are drawn without repetition and
    emitted in ascending enumeration order; noise std grows by sqrt(3).
    """
    m = ss.m
    limit = 4 * math.comb(m, 3)
    if target_m > limit:
        raise ParameterError(f"target_m {target_m} exceeds 4*C({m},3) = {limit}")
    if target_m < 1:
        raise ParameterError("target_m must be >= 1")

    if target_m == limit:
        chosen = np.arange(limit, dtype=np.int64)
    else:
        picked = set()
        while len(picked) < target_m:
            batch = rng.gen.integers(0, limit, size=2 * (target_m - len(picked)))
            picked.update(int(v) for v in batch)
            if len(picked) > target_m:
                picked = set(sorted(picked)[:target_m])
        chosen = np.array(sorted(picked), dtype=np.int64)

    tr = chosen // 4
    pat = _TRIPLE_SIGNS[chosen % 4]
    i, j, k = _unrank_triples(tr, m)
    q = ss.params.q
    A_new = (
        pat[:, 0:1] * ss.A[i] + pat[:, 1:2] * ss.A[j] + pat[:, 2:3] * ss.A[k]
    ) % q
    b_new = (pat[:, 0] * ss.b[i] + pat[:, 1] * ss.b[j] + pat[:, 2] * ss.b[k]) % q
    e_new = None
    if ss.e_true is not None:
        e_new = (
            pat[:, 0] * ss.e_true[i]
            + pat[:, 1] * ss.e_true[j]
            + pat[:, 2] * ss.e_true[k]
        )
    return replace(
        ss,
        A=A_new,
        b=b_new,
        e_true=e_new,
        amplified=True,
        sigma_current=noise_after_steps(ss.params.sigma, ss.steps_taken, True),
        strategy_log=ss.strategy_log + [AMPLIFIED],
    )
