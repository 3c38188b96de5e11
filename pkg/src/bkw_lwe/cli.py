"""Command-line surface: gen, transform, reduce, solve, experiment, theory,
cosine-check.

Exit codes: 0 success, 1 domain error, 2 usage error.  Errors go to stderr
prefixed "error:".
"""

import argparse
import math
import sys

import numpy as np

from .core import LweParams, Rng, noise_after_steps, signed
from .distinguish import (
    HypothesisSpace,
    cosine_approximation,
    fft_distinguish,
    llr_distinguish,
    pruned_fft_distinguish,
    theory_samples,
    theory_samples_pruned,
)
from .experiments import (
    PRESETS,
    config_from_mapping,
    magnitude_bound,
    read_config_file,
    run_experiment,
)
from .instance import (
    LweInstance,
    Secret,
    generate_instance,
    read_challenge,
    secret_noise_transform,
    write_challenge,
)
from .reduction import SampleSet, reduce_step_lf1, reduce_step_lf2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _write_secret(secret: Secret, q: int, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{len(secret.s)}\n{q}\n{secret.distribution}\n")
        fh.write(" ".join(str(int(v)) for v in secret.s) + "\n")


def read_secret(path) -> Secret:
    with open(path) as fh:
        lines = fh.read().splitlines()
    n = int(lines[0])
    s = np.array([int(v) for v in lines[3].split()], dtype=np.int64)
    if s.size != n:
        raise ValueError(f"secret file {path}: expected {n} values, got {s.size}")
    return Secret(s, lines[2])


def _cmd_gen(args) -> int:
    params = LweParams(n=args.n, q=args.q, alpha=args.alpha)
    rng = Rng(args.seed)
    inst = generate_instance(params, args.m, args.secret_dist, rng)
    write_challenge(inst, args.out)
    if args.secret_out:
        _write_secret(inst.secret, args.q, args.secret_out)
    print(f"wrote {args.m} samples (n={args.n}, q={args.q}) to {args.out}")
    return 0


def _cmd_transform(args) -> int:
    inst = read_challenge(args.infile)
    transformed, info = secret_noise_transform(inst, Rng(args.seed))
    write_challenge(transformed, args.out)
    if args.basis_out:
        np.savez(args.basis_out, A0=info.A0, b0=info.b0,
                 A0_inv=info.A0_inv, indices=info.indices)
    print(f"transformed instance: {transformed.m} samples to {args.out}")
    return 0


def _cmd_reduce(args) -> int:
    inst = read_challenge(args.infile)
    ss = SampleSet.from_instance(inst)
    rng = Rng(args.seed)
    for _ in range(args.steps):
        if args.strategy == "lf1":
            ss = reduce_step_lf1(ss, args.width)
        else:
            ss = reduce_step_lf2(ss, args.width, max_outputs=args.cap, rng=rng)
    out = LweInstance(
        params=LweParams(
            n=inst.params.n, q=inst.params.q,
            alpha=ss.sigma_current / inst.params.q,
        ),
        A=ss.A,
        b=ss.b,
    )
    write_challenge(out, args.out)
    print(
        f"reduced {args.steps} steps of width {args.width} ({args.strategy}): "
        f"{ss.m} samples, sigma_f={ss.sigma_current:.4f}, wrote {args.out}"
    )
    return 0


def _cmd_solve(args) -> int:
    inst = read_challenge(args.infile)
    q = inst.params.q
    a_k = inst.A[:, -args.k:]
    if np.any(inst.A[:, : inst.params.n - args.k]):
        raise ValueError(
            f"instance is not reduced to the last {args.k} positions"
        )
    sigma_f = inst.params.sigma
    samples = (a_k, inst.b, q)
    if args.distinguisher == "llr":
        space = HypothesisSpace(k=args.k, q=q, d=args.d)
        table = llr_distinguish(samples, space, sigma_f)
    elif args.distinguisher == "fft":
        table = fft_distinguish(samples, HypothesisSpace(k=args.k, q=q, d=args.d))
    else:
        d = args.d if args.d is not None else magnitude_bound("3sigma", sigma_f, q)
        table = pruned_fft_distinguish(samples, args.k, q, d)
    guess = table.best
    print(f"recovered positions (signed): {' '.join(str(int(v)) for v in guess)}")
    print(f"score margin: {table.margin():.6g}")
    if args.secret:
        truth = signed(read_secret(args.secret).s[-args.k:], q)
        match = bool(np.array_equal(guess, truth))
        print(f"matches secret: {match}")
        return 0 if match else 1
    return 0


def _cmd_experiment(args) -> int:
    kv = {}
    if args.config:
        kv.update(read_config_file(args.config))
    if args.preset:
        kv["preset"] = args.preset
    for override in args.set or []:
        if "=" not in override:
            raise ValueError(f"--set expects key=value, got {override!r}")
        key, value = override.split("=", 1)
        kv[key.strip()] = value.strip()
    if args.seed is not None:
        kv["seed"] = str(args.seed)
    if args.trials is not None:
        kv["trials"] = str(args.trials)
    if args.timings:
        kv["timings"] = "true"
    if not kv:
        raise ValueError("experiment needs --preset or --config")
    config = config_from_mapping(kv)
    records = run_experiment(config, args.out)
    ok = sum(1 for r in records if r.success)
    print(f"wrote {len(records)} records ({ok} successes) to {args.out}")
    return 0


def _cmd_theory(args) -> int:
    qs = args.q
    alphas = args.alpha
    ts = args.t
    n_points = max(len(qs), len(alphas), len(ts))
    for lst in (qs, alphas, ts):
        if len(lst) not in (1, n_points):
            raise ValueError("q, alpha and t lists must broadcast")
        while len(lst) < n_points:
            lst.append(lst[0])
    rows = []
    for q, alpha, t in zip(qs, alphas, ts):
        sigma = alpha * q
        full = theory_samples(q, args.k, sigma, t, args.eps)
        d = args.d if args.d is not None else magnitude_bound("3sigma", sigma, q)
        pruned = theory_samples_pruned(q, args.k, sigma, t, args.eps, d)
        rows.append((q, alpha, t, d, full, pruned))
        print(
            f"q={q} alpha={alpha} t={t} k={args.k} eps={args.eps}: "
            f"full={full:.6g} pruned(d={d})={pruned:.6g} gain={full / pruned:.4f}"
        )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("q,alpha,t,k,eps,d,distinguisher,samples\n")
            for q, alpha, t, d, full, pruned in rows:
                fh.write(f"{q},{alpha!r},{t},{args.k},{args.eps!r},,FFT,{full!r}\n")
                fh.write(
                    f"{q},{alpha!r},{t},{args.k},{args.eps!r},{d},FFT_PRUNED,{pruned!r}\n"
                )
    return 0


def _cmd_cosine_check(args) -> int:
    sigma_f = noise_after_steps(args.alpha * args.q, args.t)
    fit = cosine_approximation(sigma_f, args.q)
    print(f"sigma_f={sigma_f:.6g} amplitude={fit.amplitude:.6g} "
          f"offset={fit.offset:.6g} max_deviation={fit.max_abs_deviation:.6g}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("e,g,model\n")
            for e, g, mod in zip(fit.support, fit.g_table, fit.model):
                fh.write(f"{int(e)},{g!r},{mod!r}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bkw-lwe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a challenge file")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--secret-dist", choices=["uniform", "noise"], default="uniform")
    p.add_argument("--out", required=True)
    p.add_argument("--secret-out", help="write the secret to a sidecar file")
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("transform", help="secret-noise transform a challenge file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--basis-out", help="save basis info (npz) for mapping back")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_transform)

    p = sub.add_parser("reduce", help="apply BKW reduction steps")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--width", type=int, default=2)
    p.add_argument("--strategy", choices=["lf1", "lf2"], default="lf1")
    p.add_argument("--cap", type=int, help="LF2 output cap per step")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_reduce)

    p = sub.add_parser("solve", help="run a distinguisher on a reduced file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument(
        "--distinguisher", choices=["llr", "fft", "fft-pruned"], default="fft"
    )
    p.add_argument("--d", type=int, help="magnitude bound for hypotheses")
    p.add_argument("--secret", help="secret sidecar file to verify against")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("experiment", help="run a measurement campaign")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--timings", action="store_true",
                   help="record wall times (breaks byte-reproducibility)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_experiment)

    p = sub.add_parser("theory", help="theoretical sample-complexity values")
    p.add_argument("--q", type=lambda s: [int(v) for v in s.split(",")],
                   required=True)
    p.add_argument("--alpha", type=lambda s: [float(v) for v in s.split(",")],
                   required=True)
    p.add_argument("--t", type=lambda s: [int(v) for v in s.split(",")],
                   required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--d", type=int)
    p.add_argument("--out", help="also write a theory CSV")
    p.set_defaults(fn=_cmd_theory)

    p = sub.add_parser("cosine-check", help="cosine approximation of LLR terms")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--out", help="write e,g,model CSV")
    p.set_defaults(fn=_cmd_cosine_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
