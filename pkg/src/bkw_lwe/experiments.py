"""Monte Carlo harness: measure the minimum samples needed to guess the secret.

A trial generates an instance, optionally amplifies, reduces it with the
configured strategy and locates the smallest sample prefix at which a
distinguisher ranks the true secret first.  Points aggregate medians over the
successful trials; everything is reproducible from (master_seed, stream ids).
"""

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .core import LweParams, ParameterError, Rng, signed
from .distinguish import (
    FFT,
    FFT_PRUNED,
    LLR,
    HypothesisSpace,
    default_magnitude_bound,
    fft_distinguish,
    llr_distinguish,
    pruned_fft_distinguish,
    theory_samples,
)
from .instance import NOISE, generate_instance
from .reduction import (
    SampleSet,
    reduce_step_lf1,
    reduce_step_lf2,
    sample_amplify,
)

CSV_HEADER = (
    "experiment,point,q,n,alpha,t,b,k,strategy,amplified,distinguisher,"
    "d,trial,seed,min_samples,success,wall_time_ms"
)

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class ExperimentPoint:
    """One parameter point: (q, alpha, t); n is forced to t*b + k."""

    q: int
    alpha: float
    t: int

    def n(self, b: int, k: int) -> int:
        return self.t * b + k


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    points: tuple
    b: int = 2
    k: int = 2
    strategy: str = "LF1"
    distinguishers: tuple = (FFT,)
    d_policy: str | int = "3sigma"  # "3sigma", "full", or an explicit bound
    trials: int = 30
    master_seed: int = 0
    amplify: bool = False
    amplify_initial: int = 1600
    lf2_policy: str = "target"  # "target" (capped) or "min-regen" (3(q^b-1)/2)
    budget_divisor: float = 3.0
    budget: int | None = None  # absolute final-sample target, overrides divisor
    timings: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.strategy not in ("LF1", "LF2"):
            raise ParameterError(f"unknown strategy {self.strategy!r}")
        if self.lf2_policy not in ("target", "min-regen"):
            raise ParameterError(f"unknown lf2 policy {self.lf2_policy!r}")
        for dist in self.distinguishers:
            if dist not in (FFT, FFT_PRUNED, LLR):
                raise ParameterError(f"unknown distinguisher {dist!r}")


@dataclass(frozen=True)
class ExperimentRecord:
    """One trial outcome for one distinguisher."""

    experiment: str
    point: int
    q: int
    n: int
    alpha: float
    t: int
    b: int
    k: int
    strategy: str
    amplified: bool
    distinguisher: str
    d: int | None
    trial: int
    seed: int
    min_samples: int
    success: bool
    wall_time_ms: int

    def csv_row(self) -> str:
        return ",".join(
            [
                self.experiment,
                str(self.point),
                str(self.q),
                str(self.n),
                repr(self.alpha),
                str(self.t),
                str(self.b),
                str(self.k),
                self.strategy,
                "true" if self.amplified else "false",
                self.distinguisher,
                "" if self.d is None else str(self.d),
                str(self.trial),
                str(self.seed),
                str(self.min_samples),
                "true" if self.success else "false",
                str(self.wall_time_ms),
            ]
        )


def magnitude_bound(policy, sigma: float, q: int) -> int | None:
    """Resolve the d policy; None means the full hypothesis space."""
    if policy == "full":
        return None
    if policy == "3sigma":
        return min(default_magnitude_bound(sigma), (q - 1) // 2)
    return int(policy)


def point_theory(
    config: ExperimentConfig, point: ExperimentPoint, eps: float = 0.5
) -> float:
    """Theoretical sample complexity at the point (amplification included)."""
    sigma = point.alpha * point.q * (SQRT3 if config.amplify else 1.0)
    return theory_samples(point.q, config.k, sigma, point.t, eps)


def _final_target(config: ExperimentConfig, point: ExperimentPoint) -> int:
    if config.budget is not None:
        return config.budget
    return max(64, math.ceil(point_theory(config, point) / config.budget_divisor))


def _make_distinguisher(name, q, k, d, sigma_f):
    space_full = HypothesisSpace(k=k, q=q)
    if name == FFT:
        return lambda a, b: fft_distinguish((a, b, q), space_full)
    if name == LLR:
        return lambda a, b: llr_distinguish((a, b, q), space_full, sigma_f)
    if name == FFT_PRUNED:
        if d is None:
            return lambda a, b: fft_distinguish((a, b, q), space_full)
        return lambda a, b: pruned_fft_distinguish((a, b, q), k, q, d)
    raise ParameterError(f"unknown distinguisher {name!r}")


def min_samples_to_success(
    reduced: SampleSet, truth_signed, distinguisher, rng: Rng
) -> int | None:
    """Smallest sample prefix at which the distinguisher returns the secret.

    Samples are put in a fixed seeded order, then the first-success boundary
    is located by doubling from 32 and bisecting.  None when even the full
    set fails.
    """
    A, b = reduced.active()
    m = A.shape[0]
    if m < 1:
        return None
    perm = rng.gen.permutation(m)
    A = np.ascontiguousarray(A[perm])
    b = np.ascontiguousarray(b[perm])
    truth = np.asarray(truth_signed, dtype=np.int64)

    def ok(size: int) -> bool:
        table = distinguisher(A[:size], b[:size])
        return np.array_equal(table.best, truth)

    lo = 0  # largest size known to fail
    size = 32
    while True:
        probe = min(size, m)
        if ok(probe):
            hi = probe
            break
        if probe == m:
            return None
        lo = probe
        size *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _reduce_pipeline(config, point, rng):
    """Generate + (amplify) + reduce; returns the reduced SampleSet."""
    q, alpha, t = point.q, point.alpha, point.t
    n = point.n(config.b, config.k)
    params = LweParams(n=n, q=q, alpha=alpha)
    n_categories = (q**config.b - 1) // 2
    target = _final_target(config, point)

    if config.strategy == "LF1":
        m_reduced = target + t * n_categories
    elif config.lf2_policy == "target":
        m_reduced = target
    else:
        m_reduced = max(target, (3 * (q**config.b - 1)) // 2)

    if config.amplify:
        inst = generate_instance(params, config.amplify_initial, NOISE, rng)
        ss = SampleSet.from_instance(inst)
        ss = sample_amplify(ss, m_reduced, rng)
    else:
        inst = generate_instance(params, m_reduced, NOISE, rng)
        ss = SampleSet.from_instance(inst)

    for _ in range(t):
        if config.strategy == "LF1":
            ss = reduce_step_lf1(ss, config.b)
        elif config.lf2_policy == "target":
            ss = reduce_step_lf2(ss, config.b, max_outputs=m_reduced, rng=rng)
        else:
            ss = reduce_step_lf2(ss, config.b)
    return ss, inst


def run_trial(config, point, point_index, trial_index) -> list[ExperimentRecord]:
    stream_id = point_index * 100_000 + trial_index
    rng = Rng(config.master_seed, stream_id)
    reduced, inst = _reduce_pipeline(config, point, rng)
    q, k = point.q, config.k
    truth = signed(inst.secret.s[-k:], q)
    d = magnitude_bound(config.d_policy, inst.params.sigma, q)
    sigma_f = reduced.sigma_current
    # same stream id for every distinguisher: identical sample order within
    # a trial, so per-trial ratios compare like with like
    search_stream = stream_id + 60_000_000

    records = []
    for name in config.distinguishers:
        dist_d = d if name == FFT_PRUNED else None
        fn = _make_distinguisher(name, q, k, dist_d, sigma_f)
        t0 = time.perf_counter()
        if dist_d is not None and not np.all(np.abs(truth) <= dist_d):
            ms = None  # secret outside the pruned bound: unrecoverable
        else:
            ms = min_samples_to_success(
                reduced, truth, fn, rng.substream(search_stream)
            )
        wall = int(round((time.perf_counter() - t0) * 1000)) if config.timings else 0
        records.append(
            ExperimentRecord(
                experiment=config.name,
                point=point_index,
                q=q,
                n=point.n(config.b, config.k),
                alpha=point.alpha,
                t=point.t,
                b=config.b,
                k=k,
                strategy=config.strategy,
                amplified=config.amplify,
                distinguisher=name,
                d=dist_d,
                trial=trial_index,
                seed=stream_id,
                min_samples=0 if ms is None else ms,
                success=ms is not None,
                wall_time_ms=wall,
            )
        )
    return records


def run_point(config: ExperimentConfig, point_index: int) -> list[ExperimentRecord]:
    point = config.points[point_index]
    records = []
    for trial in range(config.trials):
        records.extend(run_trial(config, point, point_index, trial))
    return records


def run_experiment(config: ExperimentConfig, out_path=None) -> list[ExperimentRecord]:
    records = []
    for idx in range(len(config.points)):
        records.extend(run_point(config, idx))
    if out_path is not None:
        write_csv(records, out_path)
    return records


def write_csv(records, path) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(rec.csv_row() + "\n")


def read_csv(path) -> list[ExperimentRecord]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ParameterError(f"{path}: not an experiment CSV")
    out = []
    for line in lines[1:]:
        f = line.split(",")
        out.append(
            ExperimentRecord(
                experiment=f[0],
                point=int(f[1]),
                q=int(f[2]),
                n=int(f[3]),
                alpha=float(f[4]),
                t=int(f[5]),
                b=int(f[6]),
                k=int(f[7]),
                strategy=f[8],
                amplified=f[9] == "true",
                distinguisher=f[10],
                d=None if f[11] == "" else int(f[11]),
                trial=int(f[12]),
                seed=int(f[13]),
                min_samples=int(f[14]),
                success=f[15] == "true",
                wall_time_ms=int(f[16]),
            )
        )
    return out


def median_min_samples(records, point=None, distinguisher=None) -> float | None:
    """Median over successful trials only; None when there are none."""
    vals = [
        r.min_samples
        for r in records
        if r.success
        and (point is None or r.point == point)
        and (distinguisher is None or r.distinguisher == distinguisher)
    ]
    if not vals:
        return None
    return float(np.median(vals))


def distinguisher_agreement(
    config: ExperimentConfig, point_index: int = 0, trials: int | None = None
) -> tuple[int, int]:
    """(agreeing, total) trials where LLR and FFT argmax coincide.

    The point's success threshold is measured first (median FFT min_samples
    over the trials), then both distinguishers run on each trial's
    threshold-sized sample prefix and their argmax hypotheses are compared.
    The two may agree on a wrong guess; what is compared is the ranking, not
    correctness.  Comparing at each trial's own first-success prefix instead
    would condition on a near-zero score margin and say nothing about how
    similar the two rankings are.
    """
    point = config.points[point_index]
    q, k = point.q, config.k
    space = HypothesisSpace(k=k, q=q)
    n_trials = config.trials if trials is None else trials
    thresholds = []
    for trial in range(n_trials):
        stream_id = point_index * 100_000 + trial
        rng = Rng(config.master_seed, stream_id)
        reduced, inst = _reduce_pipeline(config, point, rng)
        truth = signed(inst.secret.s[-k:], q)
        fft_fn = _make_distinguisher(FFT, q, k, None, reduced.sigma_current)
        ms = min_samples_to_success(
            reduced, truth, fft_fn, rng.substream(stream_id + 60_000_000)
        )
        if ms is not None:
            thresholds.append(ms)
    if not thresholds:
        return 0, 0
    threshold = int(np.median(thresholds))
    agree = 0
    total = 0
    # second pass regenerates each reduced set instead of holding all of
    # them in memory at once
    for trial in range(n_trials):
        stream_id = point_index * 100_000 + trial
        rng = Rng(config.master_seed, stream_id)
        reduced, _ = _reduce_pipeline(config, point, rng)
        A, b = reduced.active()
        perm = Rng(config.master_seed, stream_id + 60_000_000).gen.permutation(
            A.shape[0]
        )
        m_use = min(threshold, A.shape[0])
        A, b = A[perm][:m_use], b[perm][:m_use]
        fft_best = fft_distinguish((A, b, q), space).best
        llr_best = llr_distinguish((A, b, q), space, reduced.sigma_current).best
        total += 1
        if np.array_equal(fft_best, llr_best):
            agree += 1
    return agree, total


# ---------------------------------------------------------------------------
# Presets and flat key=value config files.
# ---------------------------------------------------------------------------

_VA_ALPHAS = (0.005, 0.0052, 0.0054, 0.0056, 0.0058, 0.006)
_VB_Q = (101, 201, 401, 801, 1601, 3201)
_VB_ALPHA = (0.0896, 0.0448, 0.0224, 0.0112, 0.0056, 0.0028)
_VB_T = (5, 7, 9, 11, 13, 15)


def _points(qs, alphas, ts):
    return tuple(ExperimentPoint(q, a, t) for q, a, t in zip(qs, alphas, ts))


PRESETS = {
    # small and fast; used by CLI round-trip and determinism checks
    "toy": ExperimentConfig(
        name="toy",
        points=(ExperimentPoint(q=11, alpha=0.1, t=1),),
        trials=30,
        distinguishers=(FFT,),
        d_policy="full",
        budget=96,
    ),
    # the first varying-q point, desk scale: q=101, five LF1 steps
    "v-a-quick": ExperimentConfig(
        name="v-a-quick",
        points=(ExperimentPoint(q=101, alpha=0.0896, t=5),),
        trials=100,
        distinguishers=(FFT, FFT_PRUNED),
    ),
    "v-a-quick-lf2": ExperimentConfig(
        name="v-a-quick-lf2",
        points=(ExperimentPoint(q=101, alpha=0.0896, t=5),),
        trials=100,
        strategy="LF2",
        distinguishers=(FFT_PRUNED,),
    ),
    # Amplified-vs-unlimited comparison pair.  Both arms use the full-space
    # FFT: the pruned bound d tracks the per-arm secret std, so pruned
    # hypothesis spaces would differ between arms and bias the comparison.
    # The point uses t=9 rather than t=5 so each reduced sample mixes
    # 3*2^9 base errors; with fewer steps the amplified arm's final-error
    # distribution keeps a measurably higher effective signal (the CLT
    # mixing that equalises the arms at scale has not kicked in) and the
    # two arms are not comparable.  The base pool is sized so reduced
    # samples share almost no base errors.
    "amp-quick-base": ExperimentConfig(
        name="amp-quick-base",
        points=(ExperimentPoint(q=401, alpha=0.0224, t=9),),
        trials=50,
        distinguishers=(FFT,),
    ),
    "amp-quick": ExperimentConfig(
        name="amp-quick",
        points=(ExperimentPoint(q=401, alpha=0.0224 / SQRT3, t=9),),
        trials=50,
        amplify=True,
        amplify_initial=64000,
        distinguishers=(FFT,),
    ),
    # full-scale presets from the measurement campaigns; hours of runtime
    "v-a": ExperimentConfig(
        name="v-a",
        points=_points((1601,) * 6, _VA_ALPHAS, (13,) * 6),
        trials=30,
        distinguishers=(FFT, FFT_PRUNED),
    ),
    "v-b": ExperimentConfig(
        name="v-b",
        points=_points(_VB_Q, _VB_ALPHA, _VB_T),
        trials=30,
        distinguishers=(FFT, FFT_PRUNED),
    ),
    "v-a-point": ExperimentConfig(
        name="v-a-point",
        points=(ExperimentPoint(q=1601, alpha=0.005, t=13),),
        trials=30,
        distinguishers=(FFT,),
    ),
}


def _parse_bool(value: str) -> bool:
    if value.lower() in ("true", "1", "yes"):
        return True
    if value.lower() in ("false", "0", "no"):
        return False
    raise ParameterError(f"expected boolean, got {value!r}")


def config_from_mapping(kv: dict) -> ExperimentConfig:
    """Build a config from flat string keys (config file / CLI overrides).

    q, alpha and t accept comma lists; scalars broadcast against the longest
    list so a six-point alpha sweep needs one line.
    """
    kv = dict(kv)
    if "preset" in kv:
        base = PRESETS[kv.pop("preset")]
        cfg = {
            "name": base.name,
            "q": ",".join(str(p.q) for p in base.points),
            "alpha": ",".join(repr(p.alpha) for p in base.points),
            "t": ",".join(str(p.t) for p in base.points),
            "b": str(base.b),
            "k": str(base.k),
            "strategy": base.strategy,
            "distinguishers": ",".join(base.distinguishers),
            "d": str(base.d_policy),
            "trials": str(base.trials),
            "seed": str(base.master_seed),
            "amplify": str(base.amplify).lower(),
            "amplify_initial": str(base.amplify_initial),
            "lf2_policy": base.lf2_policy,
            "budget_divisor": repr(base.budget_divisor),
            "timings": str(base.timings).lower(),
        }
        if base.budget is not None:
            cfg["budget"] = str(base.budget)
        cfg.update(kv)
        kv = cfg
    qs = [int(v) for v in str(kv.get("q", "101")).split(",")]
    alphas = [float(v) for v in str(kv.get("alpha", "0.0896")).split(",")]
    ts = [int(v) for v in str(kv.get("t", "5")).split(",")]
    n_points = max(len(qs), len(alphas), len(ts))
    for lst in (qs, alphas, ts):
        if len(lst) not in (1, n_points):
            raise ParameterError("q, alpha and t lists must broadcast")
        while len(lst) < n_points:
            lst.append(lst[0])
    d_raw = str(kv.get("d", "3sigma"))
    d_policy = d_raw if d_raw in ("3sigma", "full") else int(d_raw)
    return ExperimentConfig(
        name=str(kv.get("name", "custom")),
        points=_points(qs, alphas, ts),
        b=int(kv.get("b", 2)),
        k=int(kv.get("k", 2)),
        strategy=str(kv.get("strategy", "LF1")).upper(),
        distinguishers=tuple(
            s.strip().upper() for s in str(kv.get("distinguishers", "FFT")).split(",")
        ),
        d_policy=d_policy,
        trials=int(kv.get("trials", 30)),
        master_seed=int(kv.get("seed", 0)),
        amplify=_parse_bool(str(kv.get("amplify", "false"))),
        amplify_initial=int(kv.get("amplify_initial", 1600)),
        lf2_policy=str(kv.get("lf2_policy", "target")),
        budget_divisor=float(kv.get("budget_divisor", 3.0)),
        budget=None if kv.get("budget") in (None, "") else int(kv["budget"]),
        timings=_parse_bool(str(kv.get("timings", "false"))),
    )


def read_config_file(path) -> dict:
    """Flat key=value text, one pair per line; '#' starts a comment."""
    kv = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            kv[key.strip()] = value.strip()
    return kv
