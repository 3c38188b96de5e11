import math

import numpy as np
import pytest

from bkw_lwe.core import LweParams, ParameterError, Rng, signed
from bkw_lwe.distinguish import FFT, FFT_PRUNED, LLR, fft_distinguish, HypothesisSpace
from bkw_lwe.experiments import (
    CSV_HEADER,
    PRESETS,
    ExperimentConfig,
    ExperimentPoint,
    config_from_mapping,
    magnitude_bound,
    median_min_samples,
    min_samples_to_success,
    point_theory,
    read_config_file,
    read_csv,
    run_experiment,
    run_trial,
    write_csv,
)
from bkw_lwe.instance import UNIFORM, generate_instance
from bkw_lwe.reduction import SampleSet


def test_point_n():
    p = ExperimentPoint(q=101, alpha=0.0896, t=5)
    assert p.n(b=2, k=2) == 12


def test_config_validation():
    base = PRESETS["toy"]
    with pytest.raises(ParameterError):
        ExperimentConfig(name="x", points=base.points, trials=0)
    with pytest.raises(ParameterError):
        ExperimentConfig(name="x", points=base.points, strategy="LF3")
    with pytest.raises(ParameterError):
        ExperimentConfig(name="x", points=base.points, distinguishers=("WALSH",))
    with pytest.raises(ParameterError):
        ExperimentConfig(name="x", points=base.points, lf2_policy="greedy")


def test_magnitude_bound_policies():
    assert magnitude_bound("full", 5.0, 101) is None
    assert magnitude_bound("3sigma", 8.1, 101) == 25
    assert magnitude_bound("3sigma", 1000.0, 101) == 50  # clamped to (q-1)/2
    assert magnitude_bound(7, 5.0, 101) == 7


def test_point_theory_amplification_scaling():
    p = ExperimentPoint(q=101, alpha=0.0896, t=5)
    plain = point_theory(ExperimentConfig(name="a", points=(p,)), p)
    amped_cfg = ExperimentConfig(name="b", points=(p,), amplify=True)
    amped = point_theory(amped_cfg, p)
    assert amped > plain  # sigma scaled by sqrt(3) raises the bound


def _monotone_distinguisher(truth, flip_at):
    """Succeeds exactly when given >= flip_at samples (monotone oracle)."""

    class T:
        def __init__(self, best):
            self.best = np.asarray(best)

    def fn(A, b):
        return T(truth if A.shape[0] >= flip_at else [truth[0] + 1])

    return fn


def test_min_samples_linear_scan_oracle():
    # bisection against an exhaustive linear scan on a monotone distinguisher
    inst = generate_instance(LweParams(n=2, q=11, alpha=0.05), 300, UNIFORM, Rng(0, 0))
    ss = SampleSet.from_instance(inst)
    truth = np.array([1, 2])
    for flip_at in [1, 2, 31, 32, 33, 100, 299, 300]:
        fn = _monotone_distinguisher(truth, flip_at)
        got = min_samples_to_success(ss, truth, fn, Rng(0, 1))
        # linear scan oracle
        A, b = ss.active()
        expected = None
        for m in range(1, A.shape[0] + 1):
            if fn(A[:m], b[:m]).best is not None and np.array_equal(
                fn(A[:m], b[:m]).best, truth
            ):
                expected = m
                break
        assert got == expected == flip_at

    never = _monotone_distinguisher(truth, 301)
    assert min_samples_to_success(ss, truth, never, Rng(0, 1)) is None


def test_min_samples_real_distinguisher_is_boundary():
    # the returned size succeeds and size-1 fails, under the same permutation
    inst = generate_instance(LweParams(n=2, q=11, alpha=0.03), 400, UNIFORM, Rng(7, 0))
    ss = SampleSet.from_instance(inst)
    truth = signed(inst.secret.s, 11)
    space = HypothesisSpace(k=2, q=11)
    fn = lambda a, b: fft_distinguish((a, b, 11), space)
    ms = min_samples_to_success(ss, truth, fn, Rng(7, 1))
    assert ms is not None and ms >= 1
    A, b = ss.active()
    perm = Rng(7, 1).gen.permutation(A.shape[0])
    A, b = A[perm], b[perm]
    assert np.array_equal(fn(A[:ms], b[:ms]).best, truth)
    if ms > 1:
        assert not np.array_equal(fn(A[: ms - 1], b[: ms - 1]).best, truth)


def test_toy_experiment_csv_roundtrip_and_determinism(tmp_path):
    cfg = PRESETS["toy"]
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    records = run_experiment(cfg, out_path=p1)
    run_experiment(cfg, out_path=p2)
    assert p1.read_bytes() == p2.read_bytes()  # byte-reproducible under a seed
    assert p1.read_text().splitlines()[0] == CSV_HEADER
    back = read_csv(p1)
    assert back == records
    assert len(records) == cfg.trials * len(cfg.distinguishers)
    assert all(r.wall_time_ms == 0 for r in records)  # timings off by default
    med = median_min_samples(records, point=0, distinguisher=FFT)
    assert med is not None and med > 0


def test_read_csv_rejects_garbage(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("nope\n")
    with pytest.raises(ParameterError):
        read_csv(p)


def test_run_trial_record_fields():
    cfg = PRESETS["toy"]
    recs = run_trial(cfg, cfg.points[0], 0, 3)
    (rec,) = recs
    assert rec.experiment == "toy"
    assert rec.q == 11 and rec.t == 1 and rec.n == 4
    assert rec.trial == 3 and rec.seed == 3
    assert rec.strategy == "LF1" and not rec.amplified
    assert rec.distinguisher == FFT and rec.d is None
    row = rec.csv_row()
    assert row.count(",") == CSV_HEADER.count(",")


def test_config_from_mapping_broadcast():
    cfg = config_from_mapping(
        {"name": "sweep", "q": "101", "alpha": "0.005,0.006", "t": "5"}
    )
    assert len(cfg.points) == 2
    assert cfg.points[0].q == cfg.points[1].q == 101
    assert cfg.points[1].alpha == 0.006
    with pytest.raises(ParameterError):
        config_from_mapping({"q": "101,201,401", "alpha": "0.1,0.2"})


def test_config_from_mapping_preset_override():
    cfg = config_from_mapping({"preset": "toy", "trials": "5", "seed": "9"})
    assert cfg.name == "toy" and cfg.trials == 5 and cfg.master_seed == 9
    assert cfg.points == PRESETS["toy"].points
    assert cfg.budget == PRESETS["toy"].budget


def test_config_file_parsing(tmp_path):
    p = tmp_path / "exp.cfg"
    p.write_text(
        "# a comment\n"
        "preset = toy\n"
        "trials=4   # inline comment\n"
        "\n"
        "seed = 3\n"
    )
    kv = read_config_file(p)
    assert kv == {"preset": "toy", "trials": "4", "seed": "3"}
    cfg = config_from_mapping(kv)
    assert cfg.trials == 4 and cfg.master_seed == 3
    bad = tmp_path / "bad.cfg"
    bad.write_text("just words\n")
    with pytest.raises(ParameterError):
        read_config_file(bad)


def test_presets_well_formed():
    for name, cfg in PRESETS.items():
        assert cfg.name == name
        assert cfg.trials >= 30
        for p in cfg.points:
            assert p.q % 2 == 1 and p.alpha > 0 and p.t >= 1
