"""Energy models over the four Hamiltonians and a rejection-free MCMC sampler.

Every Hamiltonian is compiled to the same sparse polynomial form

    E(z) = offset + sum_t coef[t] * prod_{m in t} z[m]

which is all the sampler kernel needs: flipping spin ``m`` negates every term
containing ``m``, so ``dE_m = -2 * sum_{t contains m} coef[t] * value[t]``.
After a flip only spins sharing a term with the flipped one get new deltas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._rng import make_generator
from .embedding import MinorEmbedding, build_embedding, me_energy
from .instances import LogicalProblem, ValidationError, as_spins, logical_energy
from .parity import _cached_plaquettes, _cached_triads, slhz3_energy, slhz_energy

SCHEMES = ("logical", "slhz", "slhz3", "me")
PENALTY_PARAM = {"slhz": "C4", "slhz3": "C3", "me": "C_ME"}


def _csr(groups, size):
    ptr = np.zeros(size + 1, dtype=np.int64)
    for g, members in enumerate(groups):
        ptr[g + 1] = ptr[g] + len(members)
    idx = np.fromiter((m for members in groups for m in members), dtype=np.int64,
                      count=int(ptr[-1]))
    return ptr, idx


@dataclass(frozen=True, eq=False)
class EnergyModel:
    scheme: str
    size: int
    problem: LogicalProblem | None
    params: dict
    embedding: MinorEmbedding | None
    term_ptr: np.ndarray = field(repr=False)
    term_idx: np.ndarray = field(repr=False)
    coef: np.ndarray = field(repr=False)
    offset: float
    spin_term_ptr: np.ndarray = field(repr=False)
    spin_term_idx: np.ndarray = field(repr=False)
    nbr_ptr: np.ndarray = field(repr=False)
    nbr_idx: np.ndarray = field(repr=False)

    def energy(self, z) -> float:
        z = as_spins(z, self.size, "z")
        if self.scheme == "logical":
            return logical_energy(self.problem, z)
        if self.scheme == "slhz":
            return slhz_energy(z, self.problem, self.params["C4"])
        if self.scheme == "slhz3":
            return slhz3_energy(z, self.problem, self.params["C3"])
        if self.scheme == "custom":
            return self.polynomial_energy(z)
        return me_energy(z, self.embedding, self.problem, self.params["C_ME"])

    def term_values(self, z) -> np.ndarray:
        return _term_values(np.asarray(z, dtype=np.int8), self.term_ptr, self.term_idx)

    def delta(self, z, m: int) -> float:
        """Energy change of flipping spin ``m``."""
        z = as_spins(z, self.size, "z")
        tv = self.term_values(z)
        return float(_delta_one(m, tv, self.coef, self.spin_term_ptr, self.spin_term_idx))

    def deltas(self, z) -> np.ndarray:
        z = as_spins(z, self.size, "z")
        tv = self.term_values(z)
        out = np.empty(self.size)
        for m in range(self.size):
            out[m] = _delta_one(m, tv, self.coef, self.spin_term_ptr, self.spin_term_idx)
        return out

    def polynomial_energy(self, z) -> float:
        """Energy from the compiled term list (independent of the module functions)."""
        return float(self.offset + np.dot(self.coef, self.term_values(z)))


def _compile(scheme, size, problem, params, embedding, terms, coefs, offset):
    term_ptr, term_idx = _csr(terms, len(terms))
    spin_terms = [[] for _ in range(size)]
    for t, members in enumerate(terms):
        for m in members:
            spin_terms[m].append(t)
    st_ptr, st_idx = _csr(spin_terms, size)
    nbrs = []
    for m in range(size):
        s = {m}
        for t in spin_terms[m]:
            s.update(terms[t])
        nbrs.append(sorted(s))
    nb_ptr, nb_idx = _csr(nbrs, size)
    return EnergyModel(scheme, size, problem, dict(params), embedding, term_ptr, term_idx,
                       np.asarray(coefs, dtype=np.float64), float(offset), st_ptr, st_idx,
                       nb_ptr, nb_idx)


def make_model(scheme: str, problem: LogicalProblem, params: dict | None = None,
               embedding: MinorEmbedding | None = None) -> EnergyModel:
    """Energy model for ``scheme`` in {logical, slhz, slhz3, me}.

    ``params`` carries ``C4``, ``C3`` or ``C_ME`` as the scheme requires.
    """
    params = dict(params or {})
    if scheme not in SCHEMES:
        raise ValidationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    n = problem.n
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if scheme == "logical":
        return _compile(scheme, n, problem, {}, None, pairs, -problem.values, 0.0)

    name = PENALTY_PARAM[scheme]
    if name not in params:
        raise ValidationError(f"scheme {scheme!r} requires parameter {name}")
    C = float(params[name])
    if not (C > 0) or not math.isfinite(C):
        raise ValidationError(f"{name} must be positive and finite")
    params = {name: C}

    if scheme in ("slhz", "slhz3"):
        constraints = _cached_plaquettes(n) if scheme == "slhz" else _cached_triads(n)
        terms = [(p,) for p in range(len(pairs))]
        coefs = list(-problem.values)
        offset = 0.0
        for c in constraints:
            w = getattr(c, "weight", 1.0)
            terms.append(tuple(c.free))
            coefs.append(-0.5 * C * w)
            offset += 0.5 * C * w
        return _compile(scheme, len(pairs), problem, params, None, terms, coefs, offset)

    e = embedding if embedding is not None else build_embedding(n)
    if e.n != n:
        raise ValidationError("embedding size does not match the problem")
    terms = [tuple(e.crossing[(i + 1, j + 1)]) for i, j in pairs]
    coefs = list(-problem.values)
    for a, b in e.chain_edges:
        terms.append((a, b))
        coefs.append(-C)
    return _compile(scheme, e.k, problem, params, e, terms, coefs, 0.0)


def polynomial_model(size: int, terms, coefs, offset: float = 0.0) -> EnergyModel:
    """Model from an explicit term list, for toy chains and diagnostics."""
    terms = [tuple(int(m) for m in t) for t in terms]
    if any(not 0 <= m < size for t in terms for m in t):
        raise ValidationError("term member out of range")
    return _compile("custom", int(size), None, {}, None, terms, coefs, offset)


@njit(cache=True, nogil=True)
def _term_values(z, term_ptr, term_idx):
    nt = term_ptr.size - 1
    tv = np.empty(nt, dtype=np.float64)
    for t in range(nt):
        v = 1
        for q in range(term_ptr[t], term_ptr[t + 1]):
            v *= z[term_idx[q]]
        tv[t] = v
    return tv


@njit(cache=True, nogil=True)
def _delta_one(m, tv, coef, st_ptr, st_idx):
    acc = 0.0
    for q in range(st_ptr[m], st_ptr[m + 1]):
        t = st_idx[q]
        acc += coef[t] * tv[t]
    return -2.0 * acc


@njit(cache=True, nogil=True)
def _weight(beta, d):
    if d <= 0.0:
        return 1.0
    return math.exp(-beta * d)


@njit(cache=True, nogil=True)
def _rf_steps(z, tv, delta, w, energy, beta, term_ptr, term_idx, coef, st_ptr, st_idx,
              nb_ptr, nb_idx, uniforms, out_states, out_flips, out_energies):
    """Advance the chain ``uniforms.size`` steps in place; returns the final energy."""
    size = z.size
    for s in range(uniforms.size):
        total = 0.0
        for m in range(size):
            total += w[m]
        if total > 0.0:
            target = uniforms[s] * total
            pick = -1
            acc = 0.0
            last = -1
            for m in range(size):
                if w[m] > 0.0:
                    last = m
                    acc += w[m]
                    if acc > target:
                        pick = m
                        break
            if pick < 0:
                pick = last
        else:
            # every weight underflowed: select relative to the cheapest flip
            dmin = delta[0]
            for m in range(1, size):
                if delta[m] < dmin:
                    dmin = delta[m]
            total = 0.0
            for m in range(size):
                total += math.exp(-beta * (delta[m] - dmin))
            target = uniforms[s] * total
            acc = 0.0
            pick = size - 1
            for m in range(size):
                acc += math.exp(-beta * (delta[m] - dmin))
                if acc > target:
                    pick = m
                    break
        energy += delta[pick]
        z[pick] = -z[pick]
        for q in range(st_ptr[pick], st_ptr[pick + 1]):
            t = st_idx[q]
            tv[t] = -tv[t]
        for q in range(nb_ptr[pick], nb_ptr[pick + 1]):
            m = nb_idx[q]
            d = _delta_one(m, tv, coef, st_ptr, st_idx)
            delta[m] = d
            w[m] = _weight(beta, d)
        out_flips[s] = pick
        out_energies[s] = energy
        for m in range(size):
            out_states[s, m] = z[m]
    return energy


class ChainState:
    """Mutable rejection-free chain bound to one model and inverse temperature."""

    def __init__(self, model: EnergyModel, beta: float, z0: np.ndarray):
        if not (beta >= 0) or math.isinf(beta):
            raise ValidationError("beta must be a finite non-negative number")
        self.model = model
        self.beta = float(beta)
        self.z = np.array(as_spins(z0, model.size, "init"), dtype=np.int8)
        self.tv = model.term_values(self.z)
        self.delta = np.array(
            [_delta_one(m, self.tv, model.coef, model.spin_term_ptr, model.spin_term_idx)
             for m in range(model.size)], dtype=np.float64)
        self.w = np.array([_weight(self.beta, d) for d in self.delta])
        self.energy = model.energy(self.z)

    def advance(self, uniforms: np.ndarray):
        """Run one step per uniform; returns (states, flipped indices, energies)."""
        steps = uniforms.size
        states = np.empty((steps, self.model.size), dtype=np.int8)
        flips = np.empty(steps, dtype=np.int64)
        energies = np.empty(steps)
        m = self.model
        self.energy = _rf_steps(self.z, self.tv, self.delta, self.w, self.energy, self.beta,
                                m.term_ptr, m.term_idx, m.coef, m.spin_term_ptr,
                                m.spin_term_idx, m.nbr_ptr, m.nbr_idx,
                                np.ascontiguousarray(uniforms, dtype=np.float64),
                                states, flips, energies)
        return states, flips, energies


@dataclass(frozen=True, eq=False)
class SampleSequence:
    states: np.ndarray
    energies: np.ndarray
    meta: dict
    flips: np.ndarray | None = None
    init: np.ndarray | None = None

    def __len__(self):
        return self.states.shape[0]

    def write_trace(self, fh) -> None:
        """Tab-separated (step, flipped index, energy) records."""
        fh.write("step\tflipped\tenergy\n")
        flips = self.flips if self.flips is not None else [-1] * len(self)
        for t, (m, e) in enumerate(zip(flips, self.energies)):
            fh.write(f"{t}\t{int(m)}\t{float(e)!r}\n")


def random_spins(rng: np.random.Generator, rows: int, size: int) -> np.ndarray:
    """Uniform +/-1 rows built from raw 64-bit draws, one block of words per row.

    Drawing ``a`` rows then ``b`` rows yields the same spins as drawing
    ``a + b`` rows at once, so chunked consumers see one stream.
    """
    words = -(-size // 64)
    raw = rng.bit_generator.random_raw(rows * words).astype("<u8", copy=False)
    bits = np.unpackbits(raw.view(np.uint8).reshape(rows, words * 8), axis=1,
                         bitorder="little")[:, :size]
    return (1 - 2 * bits.astype(np.int8)).astype(np.int8)


def rf_mcmc_run(model: EnergyModel, beta: float, M: int, seed: int, init=None) -> SampleSequence:
    """Rejection-free single-spin-flip Metropolis chain of ``M`` recorded steps.

    Each step flips exactly one spin, chosen with probability proportional to
    ``min(1, exp(-beta * dE))``.  With ``init=None`` the start state is drawn
    uniformly from the same seeded stream.
    """
    if int(M) != M or M < 1:
        raise ValidationError("M must be a positive integer")
    rng = make_generator(seed)
    z0 = random_spins(rng, 1, model.size)[0] if init is None else as_spins(init, model.size)
    chain = ChainState(model, beta, z0)
    uniforms = rng.random(int(M))
    states, flips, energies = chain.advance(uniforms)
    meta = {"scheme": model.scheme, "beta": float(beta), "seed": int(seed), **model.params}
    return SampleSequence(states, energies, meta, flips, np.array(z0))


def random_states(size: int, M: int, seed: int) -> SampleSequence:
    """``M`` independent uniform draws from {+1, -1}^size."""
    if int(M) != M or M < 1:
        raise ValidationError("M must be a positive integer")
    if int(size) != size or size < 1:
        raise ValidationError("size must be a positive integer")
    rng = make_generator(seed)
    states = random_spins(rng, int(M), int(size))
    return SampleSequence(states, np.full(int(M), np.nan), {"scheme": "random", "seed": int(seed)})
