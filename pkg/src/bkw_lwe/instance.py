"""LWE instance generation, challenge-file I/O and the secret-noise transform.

Samples are stored in bulk as an (m, n) matrix A of canonical residues plus a
length-m vector b with b = A s + e mod q.  Challenge files deliberately carry
no secret; generated instances keep theirs so tests can verify algebra
exactly.
"""

from dataclasses import dataclass

import numpy as np

from .core import (
    LweParams,
    ParameterError,
    Rng,
    check_odd_prime,
    is_odd_prime,
    rounded_gaussian_pmf,
    sample_rounded_gaussian,
    signed,
)

UNIFORM = "uniform"
NOISE = "noise"


class ChallengeParseError(ValueError):
    """Malformed challenge file; carries the 1-based offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SingularInstanceError(ValueError):
    """No invertible n x n submatrix found among the sample vectors."""


@dataclass(frozen=True)
class Secret:
    """Hidden vector s with its distribution tag (uniform or noise)."""

    s: np.ndarray
    distribution: str

    def __post_init__(self):
        if self.distribution not in (UNIFORM, NOISE):
            raise ParameterError(f"unknown secret distribution {self.distribution!r}")


@dataclass
class LweInstance:
    params: LweParams
    A: np.ndarray  # (m, n) canonical residues
    b: np.ndarray  # (m,) canonical residues
    secret: Secret | None = None

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def errors_signed(self) -> np.ndarray:
        """Signed residues b - <a, s>; requires the planted secret."""
        if self.secret is None:
            raise ValueError("instance carries no secret")
        q = self.params.q
        return signed((self.b - self.A @ self.secret.s) % q, q)


def generate_instance(
    params: LweParams, m: int, secret_dist: str, rng: Rng
) -> LweInstance:
    """Sample a fresh LWE instance with m samples and a planted secret.

    a-vectors are uniform over Z_q^n, errors are rounded Gaussian with the
    params' sigma, and the secret is either uniform or itself
    noise-distributed (equivalent to applying the secret-noise transform).
    """
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    n, q = params.n, params.q
    rg = rounded_gaussian_pmf(params.sigma, q)
    if secret_dist == UNIFORM:
        s = rng.gen.integers(0, q, size=n, dtype=np.int64)
    elif secret_dist == NOISE:
        s = sample_rounded_gaussian(rg, rng, size=n)
    else:
        raise ParameterError(f"unknown secret distribution {secret_dist!r}")
    A = rng.gen.integers(0, q, size=(m, n), dtype=np.int64)
    e = sample_rounded_gaussian(rg, rng, size=m)
    b = (A @ s + e) % q
    return LweInstance(params=params, A=A, b=b, secret=Secret(s, secret_dist))


# ---------------------------------------------------------------------------
# Challenge files.  Plain text:
#   line 1: n
#   line 2: m
#   line 3: q
#   line 4: alpha
#   line 5: the m values of b, space-separated
#   lines 6 .. 5+m: one a-vector (n values) per line
# ---------------------------------------------------------------------------


def write_challenge(instance: LweInstance, path) -> None:
    p = instance.params
    lines = [str(p.n), str(instance.m), str(p.q), repr(p.alpha)]
    lines.append(" ".join(str(int(v)) for v in instance.b))
    for row in instance.A:
        lines.append(" ".join(str(int(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_int(token: str, line: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ChallengeParseError(line, f"expected integer {what}, got {token!r}")


def read_challenge(path) -> LweInstance:
    with open(path) as fh:
        raw = fh.read().splitlines()
    if len(raw) < 5:
        raise ChallengeParseError(len(raw) + 1, "truncated header")
    n = _parse_int(raw[0].strip(), 1, "n")
    m = _parse_int(raw[1].strip(), 2, "m")
    q = _parse_int(raw[2].strip(), 3, "q")
    if n < 1:
        raise ChallengeParseError(1, f"n must be >= 1, got {n}")
    if m < 1:
        raise ChallengeParseError(2, f"m must be >= 1, got {m}")
    if not is_odd_prime(q):
        raise ChallengeParseError(3, f"q must be an odd prime, got {q}")
    try:
        alpha = float(raw[3].strip())
    except ValueError:
        raise ChallengeParseError(4, f"expected real alpha, got {raw[3]!r}")
    if alpha <= 0:
        raise ChallengeParseError(4, f"alpha must be > 0, got {alpha}")

    b_tokens = raw[4].split()
    if len(b_tokens) != m:
        raise ChallengeParseError(5, f"expected {m} b-values, got {len(b_tokens)}")
    b = np.array([_parse_int(t, 5, "b-value") for t in b_tokens], dtype=np.int64)
    if np.any(b < 0) or np.any(b >= q):
        raise ChallengeParseError(5, "b-value out of range [0, q)")

    if len(raw) < 5 + m:
        raise ChallengeParseError(len(raw) + 1, f"expected {m} a-vector lines")
    A = np.empty((m, n), dtype=np.int64)
    for i in range(m):
        lineno = 6 + i
        tokens = raw[5 + i].split()
        if len(tokens) != n:
            raise ChallengeParseError(
                lineno, f"expected {n} values in a-vector, got {len(tokens)}"
            )
        row = [_parse_int(t, lineno, "a-value") for t in tokens]
        A[i] = row
        if np.any(A[i] < 0) or np.any(A[i] >= q):
            raise ChallengeParseError(lineno, "a-value out of range [0, q)")
    params = LweParams(n=n, q=q, alpha=alpha)
    return LweInstance(params=params, A=A, b=b, secret=None)


# ---------------------------------------------------------------------------
# Secret-noise transformation.
# ---------------------------------------------------------------------------


def _gauss_jordan_inverse(M: np.ndarray, q: int) -> np.ndarray | None:
    """Inverse of a square matrix over Z_q (q prime), or None if singular."""
    n = M.shape[0]
    work = np.concatenate([M % q, np.eye(n, dtype=np.int64)], axis=1)
    for col in range(n):
        pivot_rows = np.nonzero(work[col:, col])[0]
        if pivot_rows.size == 0:
            return None
        pr = col + pivot_rows[0]
        if pr != col:
            work[[col, pr]] = work[[pr, col]]
        inv = pow(int(work[col, col]), -1, q)
        work[col] = (work[col] * inv) % q
        mask = np.ones(n, dtype=bool)
        mask[col] = False
        work[mask] = (work[mask] - np.outer(work[mask, col], work[col])) % q
    return work[:, n:]


@dataclass(frozen=True)
class BasisInfo:
    """What is needed to map a recovered transformed secret back to s."""

    A0: np.ndarray  # (n, n) rows are the selected a-vectors
    b0: np.ndarray  # (n,)
    A0_inv: np.ndarray
    indices: np.ndarray  # which samples were consumed

    def recover_secret(self, transformed_secret: np.ndarray, q: int) -> np.ndarray:
        """Original s from the transformed instance's secret (= e0)."""
        return (self.A0_inv @ ((self.b0 - transformed_secret) % q)) % q


def secret_noise_transform(
    instance: LweInstance, rng: Rng, max_scans: int = 100
) -> tuple[LweInstance, BasisInfo]:
    """Change basis so the secret follows the error distribution.

    Selects n samples whose a-vectors form an invertible A0 (first-n window,
    sliding by one on failure), then rewrites every remaining sample so that
    the new instance's secret equals the error vector of the selected samples.
    The per-sample error terms are untouched, so the noise distribution is
    unchanged and the transformed instance has m - n samples.
    """
    p = instance.params
    n, q = p.n, p.q
    if instance.m < n + 1:
        raise ParameterError(f"need more than n={n} samples, got {instance.m}")
    A0_inv = None
    limit = min(max_scans, instance.m - n + 1)
    for start in range(limit):
        idx = np.arange(start, start + n)
        A0 = instance.A[idx]
        A0_inv = _gauss_jordan_inverse(A0, q)
        if A0_inv is not None:
            break
    if A0_inv is None:
        raise SingularInstanceError(
            f"no invertible {n}x{n} submatrix in the first {limit} windows"
        )
    b0 = instance.b[idx]
    keep = np.ones(instance.m, dtype=bool)
    keep[idx] = False
    A_rest = instance.A[keep]
    b_rest = instance.b[keep]
    # b - a^T A0^{-1} b0 = <-A0^{-T} a, e0> + e  with e0 = b0 - A0 s
    A_hat = (-(A_rest @ A0_inv)) % q
    b_hat = (b_rest - A_rest @ ((A0_inv @ b0) % q)) % q
    secret = None
    if instance.secret is not None:
        e0 = (b0 - A0 @ instance.secret.s) % q
        secret = Secret(e0, NOISE)
    transformed = LweInstance(params=p, A=A_hat, b=b_hat, secret=secret)
    info = BasisInfo(A0=A0, b0=b0, A0_inv=A0_inv, indices=idx)
    return transformed, info
