"""Postreadout decoders: matrix bit-flip decoding for parity readouts and
majority vote for minor-embedded readouts."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numba import njit

from ._rng import make_generator
from .embedding import MinorEmbedding
from .instances import ResourceError, ValidationError, as_spins
from .parity import PairCodebook, encode_batch

ORACLE_CAP = 20


def to_matrix(r, codebook: PairCodebook) -> np.ndarray:
    """Symmetric n x n readout matrix with unit diagonal."""
    r = as_spins(r, codebook.k, "r")
    n = codebook.n
    m = np.ones((n, n), dtype=np.int64)
    iu = np.triu_indices(n, k=1)
    m[iu] = r
    m.T[iu] = r
    return m


def from_matrix(m) -> np.ndarray:
    m = np.asarray(m)
    iu = np.triu_indices(m.shape[0], k=1)
    return m[iu].astype(np.int8)


def is_codeword_matrix(m) -> bool:
    m = np.asarray(m, dtype=np.int64)
    return bool(np.array_equal(m @ m, m.shape[0] * m))


@njit(cache=True, nogil=True)
def _bf_step_into(m, prod, out):
    """``out = sign(m @ (m - I))``; a zero entry keeps the value from ``m``."""
    n = m.shape[0]
    for i in range(n):
        for j in range(n):
            s = prod[i, j] - m[i, j]
            if s > 0:
                out[i, j] = 1
            elif s < 0:
                out[i, j] = -1
            else:
                out[i, j] = m[i, j]


@njit(cache=True, nogil=True)
def _matmul(a, out):
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            out[i, j] = 0
        for q in range(n):
            aiq = a[i, q]
            for j in range(n):
                out[i, j] += aiq * a[q, j]


@njit(cache=True, nogil=True)
def _is_codeword(m, prod):
    n = m.shape[0]
    for i in range(n):
        for j in range(n):
            if prod[i, j] != n * m[i, j]:
                return False
    return True


def bf_step(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.int64)
    out = np.empty_like(m)
    _bf_step_into(m, m @ m, out)
    return out


class BFResult(NamedTuple):
    codeword: np.ndarray
    logical: np.ndarray
    converged: bool
    iterations: int


def bf_decode(r, codebook: PairCodebook, max_iter: int = 6) -> BFResult:
    """Iterate the sign map until the readout matrix is a codeword or ``max_iter`` runs out.

    The logical state is row 1 of the final matrix, so ``Z_1 = +1``.  Failure
    to converge is reported through ``converged`` rather than raised.
    """
    if max_iter < 1:
        raise ValidationError("max_iter must be >= 1")
    m = to_matrix(r, codebook)
    prod = np.empty_like(m)
    nxt = np.empty_like(m)
    it = _bf_iterate(m, prod, nxt, max_iter)
    conv = it >= 0
    iterations = it if conv else max_iter
    return BFResult(from_matrix(m), m[0].astype(np.int8), bool(conv), int(iterations))


@njit(cache=True, nogil=True)
def _bf_iterate(m, prod, nxt, max_iter):
    """Decode ``m`` in place; returns the iteration count, or -1 if not converged."""
    it = 0
    while True:
        _matmul(m, prod)
        if _is_codeword(m, prod):
            return it
        if it == max_iter:
            return -1
        _bf_step_into(m, prod, nxt)
        m[:, :] = nxt
        it += 1


@njit(cache=True, nogil=True)
def _fast_codeword(r, n, out_logical):
    """Check ``r_ij == r_1i r_1j`` directly, filling the candidate logical state."""
    out_logical[0] = 1
    for j in range(1, n):
        out_logical[j] = r[j - 1]
    p = n - 1
    for i in range(1, n):
        for j in range(i + 1, n):
            if r[p] != out_logical[i] * out_logical[j]:
                return False
            p += 1
    return True


@njit(cache=True, nogil=True)
def bf_decode_batch(R, n, max_iter, out_logical, out_converged):
    """Row-wise :func:`bf_decode` over a readout batch."""
    m = np.empty((n, n), dtype=np.int64)
    prod = np.empty((n, n), dtype=np.int64)
    nxt = np.empty((n, n), dtype=np.int64)
    row = np.empty(n, dtype=np.int8)
    for b in range(R.shape[0]):
        if _fast_codeword(R[b], n, row):
            out_logical[b, :] = row
            out_converged[b] = True
            continue
        p = 0
        for i in range(n):
            m[i, i] = 1
            for j in range(i + 1, n):
                m[i, j] = R[b, p]
                m[j, i] = R[b, p]
                p += 1
        it = _bf_iterate(m, prod, nxt, max_iter)
        out_converged[b] = it >= 0
        for j in range(n):
            out_logical[b, j] = m[0, j]


def all_codewords(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Every codeword (with the generating ``Z``, ``Z_1 = +1``) in lexicographic codeword order."""
    half = 1 << (n - 1)
    codes = np.arange(half, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n - 2, -1, -1, dtype=np.int64)) & 1
    Z = np.ones((half, n), dtype=np.int8)
    Z[:, 1:] = 1 - 2 * bits.astype(np.int8)
    C = encode_batch(Z)
    order = np.lexsort(C.T[::-1])
    return C[order], Z[order]


class OracleResult(NamedTuple):
    codeword: np.ndarray
    distance: int
    ties: int


def nearest_codeword_oracle(r, codebook: PairCodebook, cap: int = ORACLE_CAP) -> OracleResult:
    """Exhaustive minimum-Hamming-distance codeword.

    Ties go to the lexicographically smallest codeword (-1 sorts before +1);
    ``ties`` counts how many codewords share the minimum distance.
    """
    n = codebook.n
    if n > cap:
        raise ResourceError(f"n={n} exceeds the oracle cap of {cap}")
    r = as_spins(r, codebook.k, "r").astype(np.int64)
    C, _ = all_codewords(n)
    dist = (codebook.k - C.astype(np.int64) @ r) // 2
    best = int(dist.min())
    hits = np.flatnonzero(dist == best)
    return OracleResult(C[hits[0]].copy(), best, int(hits.size))


def majority_vote(Z_chains: np.ndarray, coins: np.ndarray) -> np.ndarray:
    """Majority over the last axis; ``coins`` (+/-1, same leading shape) settle ties."""
    totals = Z_chains.astype(np.int64).sum(axis=-1)
    return np.where(totals > 0, 1, np.where(totals < 0, -1, coins)).astype(np.int8)


def mv_decode(z, e: MinorEmbedding, seed: int) -> np.ndarray:
    """Per-chain majority vote, with a fair coin from ``seed`` for split chains."""
    z = as_spins(z, e.k, "z")
    rng = make_generator(seed)
    coins = (1 - 2 * rng.integers(0, 2, size=e.n)).astype(np.int8)
    return majority_vote(z[e.chain_array()], coins)
