"""Benchmark arms, success-probability curves and (beta, gamma) landscapes.

Arms:
    a  uniform random samples, no decoding
    b  rejection-free MCMC samples, no decoding
    c  rejection-free MCMC samples, decoded (BF for parity schemes, MV for ME)
    d  uniform random samples, decoded

A repetition draws its samples from ``make_generator(seed, rep)``; MV tie coins
come from the separate stream ``make_generator(seed, rep, 1)``.  Each
repetition records the 1-based index of its first successful sample (or -1),
from which any checkpoint grid of sample sizes is derived.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property

import numpy as np

from . import __version__
from ._rng import RNG_NAME, make_generator
from .decoders import bf_decode, bf_decode_batch, majority_vote, mv_decode
from .embedding import MinorEmbedding, build_embedding
from .instances import GroundTruth, LogicalProblem, ValidationError, as_spins, canonical_code
from .parity import PairCodebook, encode_batch
from .sampler import PENALTY_PARAM, SCHEMES, ChainState, make_model, random_spins

ARMS = ("a", "b", "c", "d")
DEFAULT_REPS = 1000
DEFAULT_MAX_ITER = 6


def threads_default() -> int:
    env = os.environ.get("PARITYBENCH_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentSpec:
    scheme: str
    arm: str
    beta: float = 0.0
    gamma: float = 0.0
    M: int = 1024
    reps: int = DEFAULT_REPS
    seed: int = 0
    instance_id: str | None = None
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}")
        if self.arm not in ARMS:
            raise ValidationError(f"unknown arm {self.arm!r}")
        if self.scheme == "logical" and self.arm in ("c", "d"):
            raise ValidationError("arms c and d need a decoder; scheme 'logical' has none")
        if int(self.M) != self.M or self.M < 1:
            raise ValidationError("M must be a positive integer")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ValidationError("reps must be >= 1")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if self.arm in ("b", "c"):
            if not (self.beta > 0) or not math.isfinite(self.beta):
                raise ValidationError("arms b and c need a finite beta > 0")
            if self.scheme != "logical" and (not (self.gamma > 0) or not math.isfinite(self.gamma)):
                raise ValidationError("penalized schemes need a finite gamma > 0")

    @property
    def penalty(self) -> float | None:
        """Penalty weight C = gamma / beta (None when unused)."""
        if self.scheme == "logical" or self.arm in ("a", "d"):
            return None
        return self.gamma / self.beta

    def to_dict(self) -> dict:
        return asdict(self)


def checkpoint_grid(M: int) -> list[int]:
    """Powers of two below ``M``, then ``M`` itself."""
    grid = []
    q = 1
    while q < M:
        grid.append(q)
        q *= 2
    grid.append(int(M))
    return grid


@dataclass(frozen=True, eq=False)
class SuccessCurve:
    spec: ExperimentSpec
    first_hits: np.ndarray
    checkpoints: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.checkpoints:
            object.__setattr__(self, "checkpoints", tuple(checkpoint_grid(self.spec.M)))

    def success_at(self, M: int) -> float:
        hits = self.first_hits
        return float(np.mean((hits > 0) & (hits <= M)))

    def stderr_at(self, M: int) -> float:
        p = self.success_at(M)
        return math.sqrt(p * (1 - p) / self.first_hits.size)

    @property
    def success(self) -> np.ndarray:
        return np.array([self.success_at(m) for m in self.checkpoints])

    @property
    def stderr(self) -> np.ndarray:
        return np.array([self.stderr_at(m) for m in self.checkpoints])

    def rows(self):
        s = self.spec
        for m in self.checkpoints:
            yield (s.scheme, s.arm, s.beta, s.gamma, m, self.success_at(m), self.stderr_at(m),
                   s.reps)


@dataclass(frozen=True, eq=False)
class Landscape:
    base: ExperimentSpec
    betas: tuple[float, ...]
    gammas: tuple[float, ...]
    M: int
    success: np.ndarray
    stderr: np.ndarray

    @property
    def argmax(self) -> tuple[int, int]:
        """Grid cell (beta index, gamma index) of the best success; first wins ties."""
        flat = int(np.argmax(self.success))
        return divmod(flat, len(self.gammas))

    @property
    def optimum(self) -> tuple[float, float]:
        a, b = self.argmax
        return self.betas[a], self.gammas[b]

    def cells(self):
        for a, beta in enumerate(self.betas):
            for b, gamma in enumerate(self.gammas):
                yield beta, gamma, float(self.success[a, b]), float(self.stderr[a, b])

    def rows(self):
        s = self.base
        for beta, gamma, p, se in self.cells():
            yield (s.scheme, s.arm, beta, gamma, self.M, p, se)


def analytic_success(p: float, M: int) -> float:
    """``1 - (1 - p)**M`` without cancellation for small ``p``."""
    if not (0.0 <= p <= 1.0):
        raise ValidationError("p must lie in [0, 1]")
    if int(M) != M or M < 0:
        raise ValidationError("M must be a non-negative integer")
    if M == 0:
        return 0.0
    if p == 1.0:
        return 1.0
    return float(-math.expm1(M * math.log1p(-p)))


def exact_hit_probability(scheme: str, arm: str, truth: GroundTruth) -> float:
    """Per-sample success probability of a uniform random sample (arms a and d)."""
    n = truth.n
    classes = truth.states.shape[0] // 2
    if arm == "d":
        # both decoders commute with spin-gauge transformations, so a uniform
        # readout decodes to a uniform logical class
        return truth.p_exhaustive
    if arm != "a":
        raise ValidationError("exact hit probability is defined for arms a and d only")
    if scheme == "logical":
        return truth.p_exhaustive
    if scheme in ("slhz", "slhz3"):
        return classes * 2.0 ** (-(n * (n - 1) // 2))
    k = n * (math.ceil(n / 4) + 1)
    return truth.states.shape[0] * 2.0 ** (-k)


class SuccessContext:
    """Per-(problem, scheme) tables used to judge batches of samples."""

    def __init__(self, scheme: str, problem: LogicalProblem, truth: GroundTruth,
                 embedding: MinorEmbedding | None = None):
        if truth.n != problem.n:
            raise ValidationError("ground truth does not match the problem")
        self.scheme = scheme
        self.problem = problem
        self.truth = truth
        self.n = problem.n
        self.targets = truth.canonical_codes()
        if scheme == "me":
            self.embedding = embedding if embedding is not None else build_embedding(problem.n)
            self.chain_idx = self.embedding.chain_array()
            self.size = self.embedding.k
        else:
            self.embedding = None
            self.size = problem.n if scheme == "logical" else PairCodebook(problem.n).k

    @cached_property
    def codebook(self) -> PairCodebook:
        return PairCodebook(self.n)

    def hit_logical(self, Z: np.ndarray) -> np.ndarray:
        codes = canonical_code(Z)
        pos = np.searchsorted(self.targets, codes)
        pos = np.minimum(pos, self.targets.size - 1)
        return self.targets[pos] == codes

    def judge(self, states: np.ndarray, arm: str, coins: np.ndarray | None = None,
              max_iter: int = DEFAULT_MAX_ITER) -> np.ndarray:
        """Success flag per row of ``states``."""
        n = self.n
        if self.scheme == "logical":
            return self.hit_logical(states)
        if self.scheme in ("slhz", "slhz3"):
            if arm in ("a", "b"):
                Z = np.ones((states.shape[0], n), dtype=np.int8)
                Z[:, 1:] = states[:, : n - 1]
                codeword = np.all(encode_batch(Z) == states, axis=1)
                return codeword & self.hit_logical(Z)
            Z = np.empty((states.shape[0], n), dtype=np.int8)
            conv = np.empty(states.shape[0], dtype=np.bool_)
            bf_decode_batch(np.ascontiguousarray(states), n, max_iter, Z, conv)
            return self.hit_logical(Z)
        chains = states[:, self.chain_idx]
        if arm in ("a", "b"):
            intact = np.all(chains == chains[:, :, :1], axis=(1, 2))
            return intact & self.hit_logical(chains[:, :, 0])
        if coins is None:
            coins = np.ones((states.shape[0], n), dtype=np.int8)
        return self.hit_logical(majority_vote(chains, coins))


def is_success(sample, spec: ExperimentSpec, truth: GroundTruth,
               problem: LogicalProblem | None = None,
               embedding: MinorEmbedding | None = None) -> bool:
    """Whether one sample counts as finding the optimum under ``spec``'s scheme and arm.

    MV ties on a single sample are settled with a coin from ``spec.seed``.
    """
    scheme, arm = spec.scheme, spec.arm
    n = truth.n
    if scheme == "logical":
        return truth.contains(as_spins(sample, n))
    if scheme in ("slhz", "slhz3"):
        book = PairCodebook(n)
        z = as_spins(sample, book.k)
        if arm in ("c", "d"):
            Z = bf_decode(z, book, spec.max_iter).logical
            return truth.contains(Z)
        Z = np.concatenate([[1], z[: n - 1]]).astype(np.int8)
        return bool(np.array_equal(encode_batch(Z[None])[0], z)) and truth.contains(Z)
    e = embedding if embedding is not None else build_embedding(n)
    z = as_spins(sample, e.k)
    chains = z[e.chain_array()]
    if arm in ("c", "d"):
        return truth.contains(mv_decode(z, e, spec.seed))
    if not np.all(chains == chains[:, :1]):
        return False
    return truth.contains(chains[:, 0])


def _coin_rows(rng, rows, n):
    return random_spins(rng, rows, n)


def _chunks(M: int):
    done, size = 0, 256
    while done < M:
        step = min(size, M - done)
        yield done, step
        done += step
        size = min(size * 2, 1 << 14)


def _first_hit(spec: ExperimentSpec, ctx: SuccessContext, model, rep: int) -> int:
    rng = make_generator(spec.seed, rep)
    need_coins = ctx.scheme == "me" and spec.arm in ("c", "d") and ctx.chain_idx.shape[1] % 2 == 0
    coin_rng = make_generator(spec.seed, rep, 1) if need_coins else None
    chain = None
    if spec.arm in ("b", "c"):
        z0 = random_spins(rng, 1, ctx.size)[0]
        chain = ChainState(model, spec.beta, z0)
    for done, step in _chunks(spec.M):
        if chain is None:
            states = random_spins(rng, step, ctx.size)
        else:
            states, _, _ = chain.advance(rng.random(step))
        coins = _coin_rows(coin_rng, step, ctx.n) if need_coins else None
        ok = ctx.judge(states, spec.arm, coins, spec.max_iter)
        hit = np.flatnonzero(ok)
        if hit.size:
            return done + int(hit[0]) + 1
    return -1


def build_model_for(spec: ExperimentSpec, problem: LogicalProblem, embedding=None):
    if spec.arm in ("a", "d"):
        return None
    if spec.scheme == "logical":
        return make_model("logical", problem)
    return make_model(spec.scheme, problem, {PENALTY_PARAM[spec.scheme]: spec.penalty},
                      embedding=embedding)


def run_experiment(spec: ExperimentSpec, problem: LogicalProblem, truth: GroundTruth,
                   threads: int | None = None, rep_order=None,
                   context: SuccessContext | None = None) -> SuccessCurve:
    """Estimate the success curve over ``spec.reps`` independent repetitions.

    ``rep_order`` permutes the execution order (results are indexed by
    repetition, so the outcome does not depend on it).
    """
    ctx = context if context is not None and context.scheme == spec.scheme else \
        SuccessContext(spec.scheme, problem, truth)
    model = build_model_for(spec, problem, ctx.embedding)
    order = list(range(spec.reps)) if rep_order is None else [int(r) for r in rep_order]
    if sorted(order) != list(range(spec.reps)):
        raise ValidationError("rep_order must be a permutation of range(reps)")
    threads = threads or threads_default()
    hits = np.empty(spec.reps, dtype=np.int64)

    def work(rep):
        hits[rep] = _first_hit(spec, ctx, model, rep)

    if threads == 1:
        for rep in order:
            work(rep)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, order))
    return SuccessCurve(spec, hits)


def sweep_landscape(base: ExperimentSpec, betas, gammas, M_fixed: int,
                    problem: LogicalProblem, truth: GroundTruth,
                    threads: int | None = None) -> Landscape:
    """Success at ``M_fixed`` over a beta x gamma grid.

    Every cell reuses ``base.seed``, so a 1 x 1 sweep reproduces the matching
    single run exactly and neighbouring cells share random numbers.
    """
    betas, gammas = tuple(float(b) for b in betas), tuple(float(g) for g in gammas)
    if not betas or not gammas:
        raise ValidationError("beta and gamma grids must be non-empty")
    if base.arm not in ("b", "c"):
        raise ValidationError("landscapes are defined for arms b and c")
    ctx = SuccessContext(base.scheme, problem, truth)
    success = np.empty((len(betas), len(gammas)))
    stderr = np.empty_like(success)
    for a, beta in enumerate(betas):
        for b, gamma in enumerate(gammas):
            spec = replace(base, beta=beta, gamma=gamma, M=int(M_fixed))
            curve = run_experiment(spec, problem, truth, threads=threads, context=ctx)
            success[a, b] = curve.success_at(M_fixed)
            stderr[a, b] = curve.stderr_at(M_fixed)
    return Landscape(base, betas, gammas, int(M_fixed), success, stderr)


CURVE_COLUMNS = ("scheme", "arm", "beta", "gamma", "M", "success", "stderr", "reps")
LANDSCAPE_COLUMNS = ("scheme", "arm", "beta", "gamma", "M", "success", "stderr")


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_table(fh, columns, rows, meta: dict) -> None:
    """Tab-separated table behind a ``#``-commented metadata header."""
    fh.write(f"# paritybench {__version__}\n")
    fh.write(f"# rng: {RNG_NAME}\n")
    for key in sorted(meta):
        fh.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n")
    fh.write("\t".join(columns) + "\n")
    for row in rows:
        fh.write("\t".join(_fmt(v) for v in row) + "\n")


def read_table(fh) -> tuple[dict, list[dict]]:
    meta, rows, columns = {}, [], None
    for line in fh:
        line = line.rstrip("\n")
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            if key in ("rng",) or key.startswith("paritybench"):
                meta[key] = value
            else:
                meta[key] = json.loads(value)
            continue
        if columns is None:
            columns = line.split("\t")
            continue
        rows.append(dict(zip(columns, line.split("\t"))))
    return meta, rows
