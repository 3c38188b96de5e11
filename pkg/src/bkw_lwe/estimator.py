"""Scikit-learn style wrappers so the pipeline composes with the ecosystem.

`BkwReducer` is a transformer over sample matrices X = [A | b] (n + 1 columns
of canonical residues); `BkwSolver` is an estimator whose fit(A, b) recovers
the last k secret positions with a chosen distinguisher.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import LweParams, Rng, noise_after_steps
from .distinguish import (
    HypothesisSpace,
    fft_distinguish,
    llr_distinguish,
    pruned_fft_distinguish,
)
from .reduction import SampleSet, reduce_step_lf1, reduce_step_lf2


def _as_sample_set(A, b, q, alpha, sigma_current, zeroed=0, steps=0):
    params = LweParams(n=A.shape[1], q=q, alpha=alpha)
    return SampleSet(
        params=params,
        A=np.asarray(A, dtype=np.int64) % q,
        b=np.asarray(b, dtype=np.int64) % q,
        sigma_current=sigma_current,
        steps_taken=steps,
        zeroed=zeroed,
    )


class BkwReducer(BaseEstimator, TransformerMixin):
    """Plain BKW reduction steps as a stateless transformer.

    Parameters mirror the reduction module: `steps` steps of `width`
    positions each, LF1 or LF2 combination, optional LF2 output cap.
    """

    def __init__(self, q, alpha, steps=1, width=2, strategy="lf1",
                 lf2_cap=None, seed=0):
        self.q = q
        self.alpha = alpha
        self.steps = steps
        self.width = width
        self.strategy = strategy
        self.lf2_cap = lf2_cap
        self.seed = seed

    def fit(self, X, y=None):
        check_array(X, dtype="numeric")
        return self

    def transform(self, X):
        X = check_array(X, dtype="numeric")
        A, b = X[:, :-1].astype(np.int64), X[:, -1].astype(np.int64)
        # resume where a previous reducer stopped: leading all-zero columns
        # are treated as already reduced
        nonzero_cols = np.flatnonzero(A.any(axis=0))
        zeroed = int(nonzero_cols[0]) if nonzero_cols.size else A.shape[1]
        ss = _as_sample_set(A, b, self.q, self.alpha, self.alpha * self.q,
                            zeroed=zeroed)
        rng = Rng(self.seed)
        for _ in range(self.steps):
            if self.strategy == "lf1":
                ss = reduce_step_lf1(ss, self.width)
            else:
                ss = reduce_step_lf2(ss, self.width, max_outputs=self.lf2_cap,
                                     rng=rng)
        return np.concatenate([ss.A, ss.b[:, None]], axis=1)


class BkwSolver(BaseEstimator):
    """Recover the last k secret positions from LWE samples.

    fit(X, y) takes the a-vectors and b-values, reduces all but k positions
    and ranks hypotheses; the winner lands in `secret_tail_` (signed
    residues) with the full table in `score_table_`.
    """

    def __init__(self, q, alpha, steps=1, width=2, k=2, strategy="lf1",
                 distinguisher="fft", d=None, lf2_cap=None, seed=0):
        self.q = q
        self.alpha = alpha
        self.steps = steps
        self.width = width
        self.k = k
        self.strategy = strategy
        self.distinguisher = distinguisher
        self.d = d
        self.lf2_cap = lf2_cap
        self.seed = seed

    def fit(self, X, y):
        A = check_array(X, dtype="numeric").astype(np.int64)
        b = np.asarray(y, dtype=np.int64)
        if A.shape[1] != self.steps * self.width + self.k:
            raise ValueError(
                f"need n = steps*width + k = {self.steps * self.width + self.k} "
                f"columns, got {A.shape[1]}"
            )
        reducer = BkwReducer(self.q, self.alpha, self.steps, self.width,
                             self.strategy, self.lf2_cap, self.seed)
        reduced = reducer.transform(np.concatenate([A, b[:, None]], axis=1))
        a_k, b_red = reduced[:, -self.k - 1:-1], reduced[:, -1]
        samples = (a_k, b_red, self.q)
        sigma_f = noise_after_steps(self.alpha * self.q, self.steps)
        if self.distinguisher == "llr":
            table = llr_distinguish(
                samples, HypothesisSpace(k=self.k, q=self.q, d=self.d), sigma_f
            )
        elif self.distinguisher == "fft-pruned":
            d = self.d if self.d is not None else (self.q - 1) // 2
            table = pruned_fft_distinguish(samples, self.k, self.q, d)
        else:
            table = fft_distinguish(
                samples, HypothesisSpace(k=self.k, q=self.q, d=self.d)
            )
        self.score_table_ = table
        self.secret_tail_ = table.best
        self.n_features_in_ = A.shape[1]
        return self

    def predict(self, X):
        """Noise-free b for the guessed tail: <x[-k:], secret_tail_> mod q."""
        check_is_fitted(self, "secret_tail_")
        X = check_array(X, dtype="numeric").astype(np.int64)
        return (X[:, -self.k:] @ self.secret_tail_) % self.q
