"""Modular arithmetic, the rounded Gaussian distribution and seeded randomness.

Everything else in the package builds on the primitives here: canonical /
signed residue conversion mod an odd prime q, the rounded (wrapped) Gaussian
error distribution, and a counter-based PRNG so that parallel trials are
reproducible from (master_seed, stream_id).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr


class ParameterError(ValueError):
    """Invalid problem parameters (bad modulus, non-positive sigma, ...)."""


def is_odd_prime(q: int) -> bool:
    if q < 3 or q % 2 == 0:
        return False
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def check_odd_prime(q: int) -> None:
    if not is_odd_prime(q):
        raise ParameterError(f"modulus must be an odd prime, got {q}")


def signed(x, q: int):
    """Map canonical residues in [0, q) to signed residues in [-(q-1)/2, (q-1)/2]."""
    half = (q - 1) // 2
    return (np.asarray(x) + half) % q - half


def canonical(x, q: int):
    """Map arbitrary integers to canonical residues in [0, q)."""
    return np.asarray(x) % q


@dataclass(frozen=True)
class LweParams:
    """Problem dimensions and noise description.

    n: secret dimension, q: odd prime modulus, alpha: relative error size.
    sigma = alpha * q is the noise standard deviation in Z_q units.
    """

    n: int
    q: int
    alpha: float

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        check_odd_prime(self.q)
        if self.alpha <= 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")

    @property
    def sigma(self) -> float:
        return self.alpha * self.q


@dataclass(frozen=True)
class RoundedGaussian:
    """Continuous Gaussian rounded to the nearest integer and wrapped mod q.

    `table[r]` is the probability of the canonical residue r; interpret r as
    the signed residue in [-(q-1)/2, (q-1)/2] for magnitudes.
    """

    sigma: float
    q: int
    table: np.ndarray = field(repr=False)

    def pmf(self, e) -> np.ndarray:
        """Probability of residue e (any integer representation)."""
        return self.table[np.asarray(e) % self.q]

    @property
    def signed_support(self) -> np.ndarray:
        half = (self.q - 1) // 2
        return np.arange(-half, half + 1)

    def variance(self) -> float:
        """Exact variance of the signed residue under the table."""
        e = self.signed_support
        return float(np.sum(self.table[e % self.q] * e.astype(float) ** 2))


def rounded_gaussian_pmf(sigma: float, q: int) -> RoundedGaussian:
    """Tabulate the rounded Gaussian over Z_q.

    pmf(e) = sum_k Phi((e + 1/2 + k q)/sigma) - Phi((e - 1/2 + k q)/sigma),
    with the wrap sum truncated to |k| <= ceil(10 sigma / q) + 1.  Beyond ten
    standard deviations the tail is < 1e-22, negligible against the 1e-9
    normalization tolerance.  The table is not renormalized; normalization is
    asserted in tests.
    """
    if sigma <= 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    check_odd_prime(q)
    half = (q - 1) // 2
    kmax = math.ceil(10.0 * sigma / q) + 1
    # evaluate e >= 0 only and mirror, so pmf(e) == pmf(-e) holds exactly
    e = np.arange(0, half + 1, dtype=float)[:, None]
    k = np.arange(-kmax, kmax + 1, dtype=float)[None, :]
    upper = ndtr((e + 0.5 + k * q) / sigma)
    lower = ndtr((e - 0.5 + k * q) / sigma)
    p_nonneg = np.sum(upper - lower, axis=1)
    table = np.empty(q)
    table[: half + 1] = p_nonneg
    table[half + 1:] = p_nonneg[1:][::-1]
    return RoundedGaussian(sigma=sigma, q=q, table=table)


class Rng:
    """Counter-based PRNG keyed by (master_seed, stream_id).

    Identical keys reproduce identical streams; distinct stream ids give
    statistically independent streams, so parallel trials can each own one.
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        self.gen = np.random.Generator(np.random.Philox(key=key))

    def substream(self, stream_id: int) -> "Rng":
        """Fresh stream with the same master seed."""
        return Rng(self.master_seed, stream_id)

    def __repr__(self):
        return f"Rng(master_seed={self.master_seed}, stream_id={self.stream_id})"


def sample_rounded_gaussian(rg: RoundedGaussian, rng: Rng, size=None) -> np.ndarray:
    """Draw round(x) mod q for x ~ N(0, sigma^2), as canonical residues."""
    x = rng.gen.normal(0.0, rg.sigma, size=size)
    return np.rint(x).astype(np.int64) % rg.q


def noise_after_steps(sigma: float, t: int, amplified: bool = False) -> float:
    """Heuristic noise std after t reduction steps: 2^(t/2) * sigma.

    Sample amplification from triples contributes a further sqrt(3), via the
    usual sum-of-Gaussians approximation.
    """
    out = 2.0 ** (t / 2.0) * sigma
    if amplified:
        out *= math.sqrt(3.0)
    return out
