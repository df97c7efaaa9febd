"""Parity (SLHZ) encoding of an all-to-all Ising problem.

Physical spin ``z_ij`` carries the product ``Z_i Z_j`` of a logical pair.  Two
constraint families make a physical state a codeword:

* plaquettes: weight-4 products ``z_ik z_jk z_jl z_il`` over the unit cells of
  the triangular LHZ lattice, with the diagonal ``z_ii`` fixed to +1;
* triads: weight-3 products ``z_ij z_jk z_ik`` over every logical triple.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .instances import LogicalProblem, ValidationError, as_spins, pair_count


@dataclass(frozen=True)
class PairCodebook:
    """Lexicographic bijection between logical pairs ``{i, j}`` and physical indices."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError("a codebook needs n >= 2")

    @property
    def k(self) -> int:
        return pair_count(self.n)

    def to_index(self, i: int, j: int) -> int:
        """0-based physical index of the 1-based pair ``{i, j}``."""
        if i == j:
            raise ValidationError("diagonal pairs have no physical spin")
        if i > j:
            i, j = j, i
        if i < 1 or j > self.n:
            raise ValidationError(f"pair ({i},{j}) out of range for n={self.n}")
        # pairs starting with a < i come first: sum_{a<i} (n - a)
        return (i - 1) * self.n - (i - 1) * i // 2 + (j - i - 1)

    def to_pair(self, index: int) -> tuple[int, int]:
        return self.pairs[index]

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return _pairs(self.n)

    def index_matrix(self) -> np.ndarray:
        """n x n matrix of physical indices (0-based rows/cols), -1 on the diagonal."""
        idx = np.full((self.n, self.n), -1, dtype=np.int64)
        iu = np.triu_indices(self.n, k=1)
        idx[iu] = np.arange(self.k)
        idx.T[iu] = np.arange(self.k)
        return idx


@lru_cache(maxsize=None)
def _pairs(n: int):
    return tuple(combinations(range(1, n + 1), 2))


def build_codebook(n: int) -> PairCodebook:
    return PairCodebook(n)


@dataclass(frozen=True)
class Plaquette:
    """Weight-4 constraint; ``members`` holds physical indices, ``None`` for a fixed z_ii.

    ``pairs`` lists the four logical pairs in the order (i,k), (j,k), (j,l), (i,l).
    """

    pairs: tuple[tuple[int, int], ...]
    members: tuple[int | None, ...]
    weight: float = 1.0

    @property
    def free(self) -> tuple[int, ...]:
        return tuple(m for m in self.members if m is not None)


@dataclass(frozen=True)
class Triad:
    """Weight-3 constraint ``z_ij z_jk z_ik`` for one logical triple ``i < j < k``."""

    triple: tuple[int, int, int]
    members: tuple[int, int, int]

    @property
    def free(self) -> tuple[int, ...]:
        return self.members


def encode(Z) -> np.ndarray:
    """Codeword ``z_ij = Z_i Z_j`` in codebook order."""
    Z = as_spins(Z, name="Z")
    if Z.size < 2:
        raise ValidationError("encoding needs at least two logical spins")
    iu = np.triu_indices(Z.size, k=1)
    return (Z[iu[0]] * Z[iu[1]]).astype(np.int8)


def encode_batch(Z: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.int8)
    iu = np.triu_indices(Z.shape[1], k=1)
    return Z[:, iu[0]] * Z[:, iu[1]]


def build_plaquettes(n: int, weight: float = 1.0) -> list[Plaquette]:
    """Unit cells ``(i, i+1, k, k+1)`` for ``1 <= i < k <= n-1``.

    Cells with ``k = i + 1`` sit on the lattice boundary; their ``(j, k)``
    member is the fixed diagonal spin and the constraint has weight 3.
    """
    if int(n) != n or n < 3:
        raise ValidationError("plaquettes need n >= 3")
    book = PairCodebook(n)
    cells = []
    for i in range(1, n):
        for k in range(i + 1, n):
            j, l = i + 1, k + 1
            pairs = ((i, k), (j, k), (j, l), (i, l))
            members = tuple(None if a == b else book.to_index(a, b) for a, b in pairs)
            cells.append(Plaquette(pairs, members, weight))
    return cells


def build_triads(n: int) -> list[Triad]:
    if int(n) != n or n < 3:
        raise ValidationError("triads need n >= 3")
    book = PairCodebook(n)
    return [
        Triad((i, j, k), (book.to_index(i, j), book.to_index(j, k), book.to_index(i, k)))
        for i, j, k in combinations(range(1, n + 1), 3)
    ]


def syndrome(z, constraint: Plaquette | Triad) -> int:
    """Product of the constraint's spins; fixed members contribute +1."""
    z = np.asarray(z)
    s = 1
    for m in constraint.free:
        s *= int(z[m])
    return s


def constraint_matrix(constraints) -> np.ndarray:
    """Member-index array (one row per constraint), padded with -1."""
    width = max(len(c.free) for c in constraints)
    out = np.full((len(constraints), width), -1, dtype=np.int64)
    for r, c in enumerate(constraints):
        out[r, : len(c.free)] = c.free
    return out


def syndromes(z, constraints) -> np.ndarray:
    """All syndromes of ``z`` at once."""
    z = np.asarray(z)
    idx = constraint_matrix(constraints)
    vals = np.where(idx >= 0, z[np.maximum(idx, 0)], 1)
    return np.prod(vals, axis=1).astype(np.int8)


def _penalized_energy(z, problem: LogicalProblem, constraints, C: float) -> float:
    if not (C > 0):
        raise ValidationError("penalty weight must be positive")
    z = as_spins(z, pair_count(problem.n), "z")
    field_term = -float(np.dot(problem.values, z.astype(np.float64)))
    s = syndromes(z, constraints)
    weights = np.array([getattr(c, "weight", 1.0) for c in constraints])
    violated = float(np.dot(weights, (1 - s) // 2))
    return field_term + C * violated


def slhz_energy(z, problem: LogicalProblem, C4: float) -> float:
    """Local fields plus ``C4`` per violated plaquette."""
    return _penalized_energy(z, problem, _cached_plaquettes(problem.n), C4)


def slhz3_energy(z, problem: LogicalProblem, C3: float) -> float:
    """Local fields plus ``C3`` per violated triad."""
    return _penalized_energy(z, problem, _cached_triads(problem.n), C3)


@lru_cache(maxsize=64)
def _cached_plaquettes(n):
    return tuple(build_plaquettes(n))


@lru_cache(maxsize=64)
def _cached_triads(n):
    return tuple(build_triads(n))


def is_codeword(z) -> bool:
    """True iff ``z_ij = z_1i z_1j`` for all pairs (equivalently, all triads hold)."""
    z = np.asarray(z)
    k = z.size
    n = int(round((1 + np.sqrt(1 + 8 * k)) / 2))
    Z = np.ones(n, dtype=np.int8)
    Z[1:] = z[: n - 1]
    return bool(np.array_equal(encode(Z), z))


def constraint_listing(constraints) -> str:
    """Debug listing, one constraint per line."""
    lines = []
    for c in constraints:
        if isinstance(c, Plaquette):
            parts = [
                f"z{a},{b}=fixed" if m is None else f"z{a},{b}=[{m}]"
                for (a, b), m in zip(c.pairs, c.members)
            ]
            lines.append(f"plaquette w={c.weight:g} " + " ".join(parts))
        else:
            i, j, k = c.triple
            lines.append(f"triad {i},{j},{k} " + " ".join(f"[{m}]" for m in c.members))
    return "\n".join(lines) + "\n"
