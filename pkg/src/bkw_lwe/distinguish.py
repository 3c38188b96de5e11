"""Solving phase: hypothesis enumeration, LLR / FFT / pruned-FFT distinguishers,
theoretical sample-complexity formulas and the cosine-approximation analysis.

All distinguishers accept either a SampleSet or a plain (A_active, b) pair,
where A_active holds the k not-yet-reduced coordinates of each sample.
Hypotheses are enumerated in ascending lexicographic order of their signed
coordinates, and argmax ties resolve to the first (lexicographically
smallest) hypothesis.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ParameterError, rounded_gaussian_pmf

LLR = "LLR"
FFT = "FFT"
FFT_PRUNED = "FFT_PRUNED"

LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class HypothesisSpace:
    """Guessed positions k with per-coordinate magnitude bound d (None = full).

    Full space has q^k hypotheses; a bound d gives (2d + 1)^k, signed
    coordinates in [-d, d].
    """

    k: int
    q: int
    d: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.d is not None and not 0 <= self.d <= (self.q - 1) // 2:
            raise ParameterError(f"d must lie in [0, (q-1)/2], got {self.d}")

    @property
    def is_full(self) -> bool:
        return self.d is None or self.d == (self.q - 1) // 2

    @property
    def size(self) -> int:
        per_axis = self.q if self.d is None else 2 * self.d + 1
        return per_axis**self.k

    def axis_values(self) -> np.ndarray:
        """Signed per-coordinate candidates, ascending."""
        bound = (self.q - 1) // 2 if self.d is None else self.d
        return np.arange(-bound, bound + 1, dtype=np.int64)

    def enumerate(self) -> np.ndarray:
        """(size, k) signed hypotheses in ascending lexicographic order."""
        vals = self.axis_values()
        grids = np.meshgrid(*([vals] * self.k), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def contains(self, guess_signed) -> bool:
        g = np.asarray(guess_signed)
        bound = (self.q - 1) // 2 if self.d is None else self.d
        return bool(np.all(np.abs(g) <= bound))


@dataclass
class ScoreTable:
    """Per-hypothesis scores of one distinguisher run."""

    hypotheses: np.ndarray  # (N, k), signed coordinates
    scores: np.ndarray
    argmax: int
    tag: str
    floored: bool = False

    @property
    def best(self) -> np.ndarray:
        return self.hypotheses[self.argmax]

    def margin(self) -> float:
        """Best score minus runner-up score (0.0 for a single hypothesis)."""
        if self.scores.size < 2:
            return 0.0
        top = np.partition(self.scores, -2)[-2:]
        return float(top[1] - top[0])


def _active(samples) -> tuple[np.ndarray, np.ndarray, int]:
    if hasattr(samples, "active"):
        a, b = samples.active()
        return np.asarray(a), np.asarray(b), samples.params.q
    a, b, q = samples
    return np.asarray(a), np.asarray(b), q


def _argmax_first(scores: np.ndarray) -> int:
    return int(np.argmax(scores))


def residual_error(a, b, guess, q: int):
    """e_hat = (b - <a, guess>) mod q for one sample or a batch."""
    a = np.asarray(a, dtype=np.int64)
    g = np.asarray(guess, dtype=np.int64)
    return (np.asarray(b) - a @ g) % q


# ---------------------------------------------------------------------------
# Optimal (log-likelihood ratio) distinguisher.
# ---------------------------------------------------------------------------


def _llr_g_table(sigma_f: float, q: int) -> tuple[np.ndarray, bool]:
    """g(e) = log(q * pmf(e)) by canonical residue, floored where pmf is 0."""
    table = rounded_gaussian_pmf(sigma_f, q).table
    floored = bool(np.any(table <= 0.0))
    return np.log(np.maximum(q * table, LOG_FLOOR)), floored


def _scores_direct(A, b, q, hyps_signed, per_residue, chunk=512):
    """sum_j f(e_hat_j) for every hypothesis, f given as a residue table."""
    out = np.empty(hyps_signed.shape[0])
    At = A.T
    for lo in range(0, hyps_signed.shape[0], chunk):
        H = hyps_signed[lo : lo + chunk]
        resid = (b[None, :] - H @ At) % q
        out[lo : lo + H.shape[0]] = per_residue[resid].sum(axis=1)
    return out


def _llr_counting_full(A, b, q, g) -> np.ndarray:
    """Full-space LLR scores via (a, b)-cell counts; cost independent of m.

    score(alpha) = sum_cells count[a, c] * g((c - <a, alpha>) mod q); the
    inner correlation over c is one matrix product, leaving only modular
    index gathers.  Supported for k in {1, 2}.
    """
    k = A.shape[1]
    cells = q**k
    flat_a = np.ravel_multi_index(tuple(A.T % q), (q,) * k)
    T = np.bincount(flat_a * q + b % q, minlength=cells * q).reshape(cells, q)
    shift = (np.arange(q)[:, None] - np.arange(q)[None, :]) % q
    G = g[shift]  # G[c, s] = g((c - s) mod q)
    W = T.astype(float) @ G  # W[cell, s]
    prod = (np.arange(q)[:, None] * np.arange(q)[None, :]) % q  # (x * alpha) mod q
    if k == 1:
        return W[np.arange(q)[:, None], prod].sum(axis=0)
    W3 = W.reshape(q, q, q)
    scores = np.empty((q, q))
    rows = np.arange(q)
    for a1_shift_col in range(q):
        idx = (rows[None, :] + prod[:, a1_shift_col][:, None]) % q
        V = W3[rows[:, None, None], rows[None, :, None], idx[:, None, :]].sum(axis=0)
        scores[a1_shift_col] = V[rows[:, None], prod].sum(axis=0)
    return scores.ravel()


def llr_distinguish(samples, space: HypothesisSpace, sigma_f: float, method="auto"):
    """Optimal distinguisher: score = sum_e N(e) log(q * pmf(e)).

    method "direct" evaluates per hypothesis in O(m * #hypotheses); "counting"
    bins samples into (a, b) cells first, which wins for large m on the full
    space with k <= 2.  "auto" picks by cost estimate.
    """
    if sigma_f <= 0:
        raise ParameterError(f"sigma_f must be > 0, got {sigma_f}")
    A, b, q = _active(samples)
    g, floored = _llr_g_table(sigma_f, q)
    hyps = space.enumerate()
    if method == "auto":
        use_counting = (
            space.is_full
            and space.k <= 2
            and A.shape[0] * hyps.shape[0] > 5 * q ** (space.k + 2)
        )
        method = "counting" if use_counting else "direct"
    if method == "counting":
        if not (space.is_full and space.k <= 2):
            raise ParameterError("counting path requires the full space and k <= 2")
        grid = _llr_counting_full(A, b, q, g)
        flat = np.ravel_multi_index(tuple((hyps % q).T), (q,) * space.k)
        scores = grid[flat]
    elif method == "direct":
        scores = _scores_direct(A, b, q, hyps, g)
    else:
        raise ParameterError(f"unknown llr method {method!r}")
    return ScoreTable(hyps, scores, _argmax_first(scores), LLR, floored=floored)


# ---------------------------------------------------------------------------
# FFT distinguisher: score(alpha) = Re(f_hat(alpha)) = sum_j cos(2 pi e_hat_j / q).
# ---------------------------------------------------------------------------


def _fft_grid(A, b, q, k) -> np.ndarray:
    """Accumulator f(x) = sum_j 1[a_j = x] * exp(2 pi i b_j / q)."""
    flat = np.ravel_multi_index(tuple(A.T % q), (q,) * k)
    phase = 2.0 * np.pi * (b % q) / q
    re = np.bincount(flat, weights=np.cos(phase), minlength=q**k)
    im = np.bincount(flat, weights=np.sin(phase), minlength=q**k)
    return (re + 1j * im).reshape((q,) * k)


def _fft_scores_transform(A, b, q, k) -> np.ndarray:
    """Full score grid via an exact-size-q DFT along each axis."""
    return np.fft.fftn(_fft_grid(A, b, q, k)).real


def _fft_scores_pruned_transform(A, b, q, space: HypothesisSpace) -> np.ndarray:
    """Scores restricted to the space via per-axis restricted DFT matrices."""
    grid = _fft_grid(A, b, q, space.k)
    vals = space.axis_values()
    M = np.exp(-2j * np.pi * np.outer(vals, np.arange(q)) / q)
    out = grid
    for axis in range(space.k):
        out = np.moveaxis(np.tensordot(M, out, axes=([1], [axis])), 0, axis)
    return out.real.ravel()


def _cos_table(q: int) -> np.ndarray:
    return np.cos(2.0 * np.pi * np.arange(q) / q)


def fft_distinguish(samples, space: HypothesisSpace | None = None, method="auto"):
    """FFT distinguisher over the given space (full space by default).

    method "direct" sums cosines per hypothesis, O(m * #hypotheses);
    "transform" builds the accumulator grid and applies a k-dimensional
    exact-size-q DFT, O(m + k q^k log q).  Both agree within 1e-6 per score.
    """
    A, b, q = _active(samples)
    k = A.shape[1]
    if space is None:
        space = HypothesisSpace(k=k, q=q)
    if space.k != k:
        raise ParameterError(f"space.k = {space.k} but samples have {k} active dims")
    hyps = space.enumerate()
    if method == "auto":
        direct_cost = A.shape[0] * hyps.shape[0]
        transform_cost = A.shape[0] + k * q**k * max(math.log(q), 1.0)
        method = "direct" if direct_cost < transform_cost else "transform"
    if method == "direct":
        scores = _scores_direct(A, b, q, hyps, _cos_table(q))
    elif method == "transform":
        if space.is_full and space.d is None:
            grid = _fft_scores_transform(A, b, q, k)
            flat = np.ravel_multi_index(tuple((hyps % q).T), (q,) * k)
            scores = grid.ravel()[flat]
        else:
            scores = _fft_scores_pruned_transform(A, b, q, space)
    else:
        raise ParameterError(f"unknown fft method {method!r}")
    return ScoreTable(hyps, scores, _argmax_first(scores), FFT)


def pruned_fft_distinguish(samples, k: int, q: int, d: int, method="auto"):
    """FFT distinguisher restricted to hypotheses with |coordinate| <= d.

    Scores equal the restriction of the full FFT table; only the argmax is
    taken over the subset.  Three routes:

    - "direct": per-hypothesis cosine sums, bit-identical to the restriction
      of the full direct table;
    - "slice": full exact-size DFT, then restriction, bit-identical to the
      full transform table;
    - "pruned-transform": per-axis restricted DFT matrices, the
      O(m + k q^k log(2d+1)) evaluation, equal within float tolerance.

    "auto" uses "direct" when m * (2d+1)^k is below the pruned-transform
    cost, else "pruned-transform".
    """
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    space = HypothesisSpace(k=k, q=q, d=d)
    A, b, q_ = _active(samples)
    if q_ != q:
        raise ParameterError(f"samples carry q={q_}, got q={q}")
    if method == "auto":
        direct_cost = A.shape[0] * space.size
        transform_cost = A.shape[0] + k * q**k * max(math.log(2 * d + 1), 1.0)
        method = "direct" if direct_cost < transform_cost else "pruned-transform"
    hyps = space.enumerate()
    if method == "direct":
        scores = _scores_direct(A, b, q, hyps, _cos_table(q))
    elif method == "slice":
        grid = _fft_scores_transform(A, b, q, k)
        flat = np.ravel_multi_index(tuple((hyps % q).T), (q,) * k)
        scores = grid.ravel()[flat]
    elif method == "pruned-transform":
        scores = _fft_scores_pruned_transform(A, b, q, space)
    else:
        raise ParameterError(f"unknown pruned fft method {method!r}")
    return ScoreTable(hyps, scores, _argmax_first(scores), FFT_PRUNED)


# ---------------------------------------------------------------------------
# Theoretical sample complexity.
# ---------------------------------------------------------------------------


def _theory(q: int, sigma: float, t: int, log_numerator: float) -> float:
    if log_numerator < 0:
        raise ParameterError("failure probability eps exceeds the hypothesis count")
    if log_numerator == 0.0:
        return 0.0
    log_c = (
        math.log(q / math.pi)
        + math.log(math.sin(math.pi / q))
        - 2.0 * math.pi**2 * sigma**2 / q**2
    )
    return math.exp(math.log(8.0) + math.log(log_numerator) - 2 ** (t + 1) * log_c)


def theory_samples(q: int, k: int, sigma: float, t: int, eps: float) -> float:
    """Upper-bound sample count 8 ln(q^k/eps) * ((q/pi) sin(pi/q) e^{-2 pi^2 s^2/q^2})^{-2^{t+1}}.

    sigma is the pre-reduction noise std; the 2^{t+1} exponent absorbs the
    noise growth of t reduction steps.  Evaluated in log space.
    """
    if eps <= 0:
        raise ParameterError(f"eps must be > 0, got {eps}")
    if sigma <= 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    return _theory(q, sigma, t, k * math.log(q) - math.log(eps))


def theory_samples_pruned(
    q: int, k: int, sigma: float, t: int, eps: float, d: int
) -> float:
    """As theory_samples with the hypothesis count reduced to (2d + 1)^k."""
    if eps <= 0:
        raise ParameterError(f"eps must be > 0, got {eps}")
    if sigma <= 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    if not 1 <= d <= (q - 1) // 2:
        raise ParameterError(f"d must lie in [1, (q-1)/2], got {d}")
    return _theory(q, sigma, t, k * math.log(2 * d + 1) - math.log(eps))


def default_magnitude_bound(sigma: float) -> int:
    """Guessing bound ceil(3 sigma) used by the pruned distinguisher."""
    return math.ceil(3.0 * sigma)


# ---------------------------------------------------------------------------
# Cosine approximation of the LLR terms.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CosineFit:
    """Cosine model of g(e) = log(q * pmf(e)) pinned at its extremes."""

    support: np.ndarray = field(repr=False)  # signed residues
    g_table: np.ndarray = field(repr=False)
    model: np.ndarray = field(repr=False)
    amplitude: float
    offset: float
    max_abs_deviation: float


def cosine_approximation(sigma_f: float, q: int) -> CosineFit:
    """Fit offset + amplitude * cos(2 pi e / q) to the LLR term g(e).

    The fit matches the largest and smallest value of g, not the best L2 fit:
    amplitude = (g_max - g_min)/2, offset = (g_max + g_min)/2.  The deviation
    shrinks as the noise level grows.
    """
    if sigma_f <= 0:
        raise ParameterError(f"sigma_f must be > 0, got {sigma_f}")
    rg = rounded_gaussian_pmf(sigma_f, q)
    e = rg.signed_support
    g = np.log(np.maximum(q * rg.table[e % q], LOG_FLOOR))
    amplitude = float(g.max() - g.min()) / 2.0
    offset = float(g.max() + g.min()) / 2.0
    model = offset + amplitude * np.cos(2.0 * np.pi * e / q)
    return CosineFit(
        support=e,
        g_table=g,
        model=model,
        amplitude=amplitude,
        offset=offset,
        max_abs_deviation=float(np.abs(g - model).max()),
    )
