"""Logical all-to-all Ising instances, exact ground truth and instance files.

Spins are stored as ``int8`` arrays of +1/-1.  Couplings are kept as a flat
vector in lexicographic pair order ``(1,2), (1,3), ..., (n-1,n)``, which is the
same order used by the parity codebook, so ``problem.values[p]`` is the local
field on physical spin ``p`` of the parity-encoded schemes.

Pair indices in the public mapping (:attr:`LogicalProblem.couplings`) and in
instance files are 1-based, as in the usual ``J_ij`` notation.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from ._rng import make_generator

FORMAT_VERSION = 1
ENUMERATION_CAP = 24


class ValidationError(ValueError):
    """Invalid argument to a public operation."""


class ResourceError(RuntimeError):
    """Request exceeds a configured size cap."""


class InstanceParseError(ValueError):
    """Malformed instance file."""


def as_spins(values, length: int | None = None, name: str = "spins") -> np.ndarray:
    """Coerce ``values`` to an int8 +/-1 vector and validate it."""
    z = np.asarray(values)
    if z.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    if not np.all((z == 1) | (z == -1)):
        raise ValidationError(f"{name} must contain only +1/-1")
    if length is not None and z.size != length:
        raise ValidationError(f"{name} has length {z.size}, expected {length}")
    return z.astype(np.int8, copy=False)


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class LogicalProblem:
    """N logical spins with a complete table of pairwise couplings."""

    n: int
    values: np.ndarray
    seed: int | None = None
    half_range: float | None = None
    _matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.n) < 2:
            raise ValidationError("a logical problem needs n >= 2 spins")
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (pair_count(self.n),):
            raise ValidationError(
                f"expected {pair_count(self.n)} couplings for n={self.n}, got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("couplings must be finite")
        object.__setattr__(self, "values", _frozen(values))
        iu = np.triu_indices(self.n, k=1)
        mat = np.zeros((self.n, self.n))
        mat[iu] = values
        mat = mat + mat.T
        object.__setattr__(self, "_matrix", _frozen(mat))

    @classmethod
    def from_couplings(cls, n: int, couplings: dict, seed=None, half_range=None):
        """Build from a ``{(i, j): J_ij}`` mapping with 1-based ``i < j``."""
        values = np.empty(pair_count(n))
        seen = set()
        for p, (i, j) in enumerate(combinations(range(1, n + 1), 2)):
            if (i, j) not in couplings:
                raise ValidationError(f"missing coupling ({i},{j})")
            values[p] = couplings[(i, j)]
            seen.add((i, j))
        extra = set(couplings) - seen
        if extra:
            raise ValidationError(f"unexpected pairs {sorted(extra)}")
        return cls(n, values, seed=seed, half_range=half_range)

    @property
    def couplings(self) -> dict:
        pairs = combinations(range(1, self.n + 1), 2)
        return {pair: float(v) for pair, v in zip(pairs, self.values)}

    @property
    def matrix(self) -> np.ndarray:
        """Symmetric coupling matrix with zero diagonal (0-based)."""
        return self._matrix

    def __eq__(self, other):
        if not isinstance(other, LogicalProblem):
            return NotImplemented
        return (
            self.n == other.n
            and self.seed == other.seed
            and self.half_range == other.half_range
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.n, self.seed, self.values.tobytes()))


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Exact minimum of the logical energy and all of its minimizers."""

    energy: float
    states: np.ndarray
    p_exhaustive: float

    def __post_init__(self):
        object.__setattr__(self, "states", _frozen(np.asarray(self.states, dtype=np.int8)))

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def contains(self, Z) -> bool:
        Z = np.asarray(Z)
        return bool(np.any(np.all(self.states == Z, axis=1)))

    def canonical_codes(self) -> np.ndarray:
        """Sorted integer codes of the minimizers modulo global flip."""
        return np.unique(canonical_code(self.states))


def canonical_code(Z: np.ndarray) -> np.ndarray:
    """Integer code of a logical state (or rows of a batch) modulo global flip.

    The state is first normalized so that spin 1 is +1; bit ``i-1`` of the code
    is set when spin ``i`` (for ``i >= 2``) is -1 after normalization.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=np.int64))
    Z = Z * Z[:, :1]
    bits = (Z[:, 1:] < 0).astype(np.int64)
    weights = np.left_shift(np.int64(1), np.arange(Z.shape[1] - 1, dtype=np.int64))
    return bits @ weights


def generate_instance(n: int, half_range: float, seed: int) -> LogicalProblem:
    """Uniform random couplings ``J_ij ~ U[-half_range, half_range]``."""
    if int(n) != n or n < 2:
        raise ValidationError("n must be an integer >= 2")
    if not (half_range > 0) or not math.isfinite(half_range):
        raise ValidationError("half_range must be a positive finite number")
    rng = make_generator(seed)
    values = rng.uniform(-half_range, half_range, size=pair_count(n))
    return LogicalProblem(int(n), values, seed=int(seed), half_range=float(half_range))


def logical_energy(problem: LogicalProblem, Z) -> float:
    """``-sum_{i<j} J_ij Z_i Z_j``."""
    Z = as_spins(Z, problem.n, "Z").astype(np.float64)
    iu = np.triu_indices(problem.n, k=1)
    return float(-np.dot(problem.values, Z[iu[0]] * Z[iu[1]]))


def _enumerate_half(n: int, start: int, stop: int) -> np.ndarray:
    """Logical states with Z_1 = +1 for codes in ``[start, stop)``."""
    codes = np.arange(start, stop, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n - 1, dtype=np.int64)) & 1
    Z = np.ones((codes.size, n), dtype=np.int8)
    Z[:, 1:] = 1 - 2 * bits.astype(np.int8)
    return Z


def solve_exhaustive(problem: LogicalProblem, cap: int = ENUMERATION_CAP,
                     chunk: int = 1 << 16) -> GroundTruth:
    """Enumerate all ``2**n`` logical states.

    Only the half with ``Z_1 = +1`` is evaluated; the other half follows from
    global-flip symmetry, so the returned minimizer set is flip-closed by
    construction.  States within ``1e-12 * max(1, |E_min|)`` of the minimum
    count as degenerate.
    """
    n = problem.n
    if n > cap:
        raise ResourceError(f"n={n} exceeds the enumeration cap of {cap}")
    J = problem.matrix
    half = 1 << (n - 1)
    energies = np.empty(half)
    for start in range(0, half, chunk):
        stop = min(start + chunk, half)
        Z = _enumerate_half(n, start, stop).astype(np.float64)
        energies[start:stop] = -0.5 * np.einsum("bi,bi->b", Z @ J, Z)
    e_min = float(energies.min())
    tol = 1e-12 * max(1.0, abs(e_min))
    codes = np.flatnonzero(energies <= e_min + tol)
    winners = np.concatenate([_enumerate_half(n, c, c + 1) for c in codes])
    states = np.concatenate([winners, -winners])
    order = np.lexsort(states.T[::-1])
    states = states[order]
    return GroundTruth(e_min, states, states.shape[0] / 2.0 ** n)


def instance_to_dict(problem: LogicalProblem) -> dict:
    couplings = [
        {"i": i, "j": j, "v": float(v)}
        for (i, j), v in zip(combinations(range(1, problem.n + 1), 2), problem.values)
    ]
    return {
        "format_version": FORMAT_VERSION,
        "n": problem.n,
        "seed": problem.seed,
        "half_range": problem.half_range,
        "couplings": couplings,
    }


def instance_from_dict(doc: dict) -> LogicalProblem:
    try:
        version = doc["format_version"]
        n = doc["n"]
        entries = doc["couplings"]
    except (KeyError, TypeError) as exc:
        raise InstanceParseError(f"missing field {exc}") from None
    if version != FORMAT_VERSION:
        raise InstanceParseError(f"unsupported format_version {version!r}")
    if not isinstance(n, int) or n < 2:
        raise InstanceParseError(f"invalid n {n!r}")
    table = {}
    for pos, entry in enumerate(entries):
        try:
            i, j, v = entry["i"], entry["j"], entry["v"]
        except (KeyError, TypeError):
            raise InstanceParseError(f"coupling entry {pos} must have fields i, j, v") from None
        if not (isinstance(i, int) and isinstance(j, int)):
            raise InstanceParseError(f"coupling entry {pos}: indices must be integers")
        if i >= j:
            raise InstanceParseError(
                f"coupling entry {pos} ({i},{j}): indices not strictly increasing"
            )
        if i < 1 or j > n:
            raise InstanceParseError(f"coupling entry {pos} ({i},{j}): index out of range 1..{n}")
        if (i, j) in table:
            raise InstanceParseError(f"coupling entry {pos} ({i},{j}): duplicate pair")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise InstanceParseError(f"coupling entry {pos} ({i},{j}): non-finite value {v!r}")
        table[(i, j)] = float(v)
    if len(table) != pair_count(n):
        raise InstanceParseError(
            f"incomplete coupling table: {len(table)} of {pair_count(n)} pairs present"
        )
    seed = doc.get("seed")
    half_range = doc.get("half_range")
    return LogicalProblem.from_couplings(n, table, seed=seed, half_range=half_range)


def write_instance(problem: LogicalProblem, path) -> None:
    text = json.dumps(instance_to_dict(problem), indent=1)
    Path(path).write_text(text + "\n")


def read_instance(path) -> LogicalProblem:
    try:
        doc = json.loads(Path(path).read_text(), parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"{path}: not valid JSON ({exc})") from None
    return instance_from_dict(doc)


def _reject_constant(name):
    raise InstanceParseError(f"non-finite value {name}")


def instance_id(problem: LogicalProblem) -> str:
    """Short content hash identifying an instance in result metadata."""
    payload = json.dumps(instance_to_dict(problem), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:12]


def truth_to_dict(truth: GroundTruth) -> dict:
    return {
        "energy": truth.energy,
        "p_exhaustive": truth.p_exhaustive,
        "states": truth.states.tolist(),
    }


def truth_from_dict(doc: dict) -> GroundTruth:
    return GroundTruth(float(doc["energy"]), np.array(doc["states"], dtype=np.int8),
                       float(doc["p_exhaustive"]))
