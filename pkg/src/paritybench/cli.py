"""Command-line front end.

    paritybench gen    --n 14 --range 0.25 --seed 1 --out inst.json
    paritybench solve  inst.json
    paritybench run    --instance inst.json --scheme slhz --arm c --beta 16 --gamma 1 \\
                       --samples 4096 --reps 1000 --seed 7 --out curve.tsv
    paritybench sweep  --instance inst.json --scheme me --arm b --betas 1,2,4 \\
                       --gammas 1,2,4 --samples 4096 --out land.tsv
    paritybench decode --scheme slhz --n 14 --readout r.txt

Exit status: 0 on success (including zero success probability), 1 on I/O or
file-format failures, 2 on invalid arguments.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .decoders import bf_decode, mv_decode
from .embedding import build_embedding
from .experiments import (
    CURVE_COLUMNS,
    LANDSCAPE_COLUMNS,
    ExperimentSpec,
    run_experiment,
    sweep_landscape,
    threads_default,
    write_table,
)
from .instances import (
    ENUMERATION_CAP,
    InstanceParseError,
    ResourceError,
    ValidationError,
    generate_instance,
    instance_id,
    read_instance,
    solve_exhaustive,
    truth_from_dict,
    truth_to_dict,
    write_instance,
)
from .parity import PairCodebook


@dataclass
class RunConfig:
    """Resolved settings of a run/sweep; echoed into every table header.

    The thread count is deliberately left out: it never changes the numbers.
    """

    subcommand: str
    instance: str
    truth: str
    scheme: str
    arm: str
    beta: float
    gamma: float
    samples: int
    reps: int
    seed: int
    max_iter: int
    out: str | None = None
    betas: list = field(default_factory=list)
    gammas: list = field(default_factory=list)

    def to_argv(self) -> list[str]:
        argv = [self.subcommand, "--instance", self.instance, "--truth", self.truth,
                "--scheme", self.scheme, "--arm", self.arm, "--samples", str(self.samples),
                "--reps", str(self.reps), "--seed", str(self.seed),
                "--max-iter", str(self.max_iter)]
        if self.subcommand == "run":
            argv += ["--beta", repr(self.beta), "--gamma", repr(self.gamma)]
        else:
            argv += ["--betas", ",".join(repr(b) for b in self.betas),
                     "--gammas", ",".join(repr(g) for g in self.gammas)]
        if self.out is not None:
            argv += ["--out", self.out]
        return argv

    @classmethod
    def from_header(cls, meta: dict) -> "RunConfig":
        return cls(**meta["config"])


def truth_path_for(instance: str) -> str:
    return str(instance) + ".truth.json"


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def cmd_gen(args) -> int:
    problem = generate_instance(args.n, args.range, args.seed)
    write_instance(problem, args.out)
    n = problem.n
    print(f"wrote {args.out}: n={n}, couplings={len(problem.values)}")
    print(f"slhz k={n * (n - 1) // 2}")
    print(f"slhz3 k={n * (n - 1) // 2}")
    print(f"me k={n * (math.ceil(n / 4) + 1)}")
    return 0


def cmd_solve(args) -> int:
    problem = read_instance(args.instance)
    truth = solve_exhaustive(problem, cap=args.cap)
    out = args.truth or truth_path_for(args.instance)
    doc = {"instance_id": instance_id(problem), **truth_to_dict(truth)}
    Path(out).write_text(json.dumps(doc, indent=1) + "\n")
    print(f"energy {truth.energy!r}")
    print(f"states {truth.states.shape[0]}")
    print(f"p_exhaustive {truth.p_exhaustive!r}")
    print(f"wrote {out}")
    return 0


def _load(args):
    problem = read_instance(args.instance)
    tpath = args.truth or truth_path_for(args.instance)
    try:
        doc = json.loads(Path(tpath).read_text())
    except FileNotFoundError:
        raise FileNotFoundError(f"truth sidecar {tpath} not found; run 'paritybench solve' first")
    if doc.get("instance_id") != instance_id(problem):
        raise InstanceParseError(f"truth sidecar {tpath} belongs to a different instance")
    return problem, truth_from_dict(doc), tpath


def _config(args, tpath) -> RunConfig:
    return RunConfig(
        subcommand=args.command, instance=args.instance, truth=tpath, scheme=args.scheme,
        arm=args.arm, beta=getattr(args, "beta", 0.0), gamma=getattr(args, "gamma", 0.0),
        samples=args.samples, reps=args.reps, seed=args.seed, max_iter=args.max_iter,
        out=args.out, betas=getattr(args, "betas", None) or [],
        gammas=getattr(args, "gammas", None) or [],
    )


def _emit(args, columns, rows, meta):
    if args.out:
        with open(args.out, "w") as fh:
            write_table(fh, columns, rows, meta)
    else:
        write_table(sys.stdout, columns, rows, meta)


def cmd_run(args) -> int:
    problem, truth, tpath = _load(args)
    spec = ExperimentSpec(args.scheme, args.arm, args.beta, args.gamma, args.samples, args.reps,
                          args.seed, instance_id(problem), args.max_iter)
    curve = run_experiment(spec, problem, truth, threads=args.threads)
    meta = {"config": asdict(_config(args, tpath)), "instance_id": spec.instance_id,
            "p_exhaustive": truth.p_exhaustive}
    _emit(args, CURVE_COLUMNS, curve.rows(), meta)
    return 0


def cmd_sweep(args) -> int:
    problem, truth, tpath = _load(args)
    if args.arm not in ("b", "c"):
        raise ValidationError("sweeps are defined for arms b and c")
    base = ExperimentSpec(args.scheme, args.arm, args.betas[0], args.gammas[0], args.samples,
                          args.reps, args.seed, instance_id(problem), args.max_iter)
    land = sweep_landscape(base, args.betas, args.gammas, args.samples, problem, truth,
                           threads=args.threads)
    beta, gamma = land.optimum
    meta = {"config": asdict(_config(args, tpath)), "instance_id": base.instance_id,
            "p_exhaustive": truth.p_exhaustive, "argmax": {"beta": beta, "gamma": gamma}}
    _emit(args, LANDSCAPE_COLUMNS, land.rows(), meta)
    return 0


def _read_readouts(path) -> list[np.ndarray]:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals = np.array([int(v) for v in line.replace(",", " ").split()], dtype=np.int8)
        except ValueError:
            raise InstanceParseError(f"{path}:{lineno}: readout values must be integers")
        rows.append(vals)
    return rows


def cmd_decode(args) -> int:
    readouts = _read_readouts(args.readout)
    out = sys.stdout
    if args.scheme in ("slhz", "slhz3"):
        book = PairCodebook(args.n)
        out.write("line\tlogical\tconverged\titerations\n")
        for t, r in enumerate(readouts):
            res = bf_decode(r, book, args.max_iter)
            out.write(f"{t}\t{' '.join(str(int(v)) for v in res.logical)}\t"
                      f"{int(res.converged)}\t{res.iterations}\n")
    elif args.scheme == "me":
        e = build_embedding(args.n)
        out.write("line\tlogical\n")
        for t, r in enumerate(readouts):
            Z = mv_decode(r, e, args.seed + t)
            out.write(f"{t}\t{' '.join(str(int(v)) for v in Z)}\n")
    else:
        raise ValidationError("decode supports schemes slhz, slhz3 and me")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paritybench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--range", type=float, default=0.25, help="couplings drawn from [-r, r]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="exact ground truth by enumeration")
    p.add_argument("instance")
    p.add_argument("--truth", help="sidecar path (default: <instance>.truth.json)")
    p.add_argument("--cap", type=int, default=ENUMERATION_CAP)
    p.set_defaults(func=cmd_solve)

    for name, func in (("run", cmd_run), ("sweep", cmd_sweep)):
        p = sub.add_parser(name, help="success curve" if name == "run" else "(beta, gamma) grid")
        p.add_argument("--instance", required=True)
        p.add_argument("--truth")
        p.add_argument("--scheme", required=True, choices=("logical", "slhz", "slhz3", "me"))
        p.add_argument("--arm", required=True, choices=("a", "b", "c", "d"))
        if name == "run":
            p.add_argument("--beta", type=float, default=0.0)
            p.add_argument("--gamma", type=float, default=0.0)
        else:
            p.add_argument("--betas", type=_float_list, required=True)
            p.add_argument("--gammas", type=_float_list, required=True)
        p.add_argument("--samples", "-M", type=int, required=True)
        p.add_argument("--reps", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-iter", type=int, default=6)
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: $PARITYBENCH_THREADS or CPU count)")
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("decode", help="decode readouts, one per line")
    p.add_argument("--scheme", required=True, choices=("slhz", "slhz3", "me"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--readout", required=True)
    p.add_argument("--seed", type=int, default=0, help="MV coin seed (line t uses seed + t)")
    p.add_argument("--max-iter", type=int, default=6)
    p.set_defaults(func=cmd_decode)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None) is None and hasattr(args, "threads"):
        args.threads = threads_default()
    try:
        return args.func(args)
    except (ValidationError, ResourceError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, InstanceParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
