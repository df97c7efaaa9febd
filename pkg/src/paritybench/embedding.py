"""Triangular minor embedding of K_n into an L x L Chimera grid of K_{4,4} cells.

Logical spins are grouped in blocks of four.  The chains of block ``b`` run down
column ``b`` on the vertical (left) side of the cells in rows ``0..b`` and then
along row ``b`` on the horizontal (right) side of the cells in columns
``b..L-1``.  In the diagonal cell ``(b, b)`` each chain holds one left and one
right qubit joined by an intra-cell coupler, which gives ``L + 1`` qubits per
chain.  Chains of blocks ``a < b`` meet only in cell ``(a, b)``; chains of the
same block meet in their diagonal cell.

Qubit coordinates are ``(row, col, side, pos)`` with side 0 = left (vertical
inter-cell couplers) and side 1 = right (horizontal inter-cell couplers).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .instances import LogicalProblem, ValidationError, as_spins


@dataclass(frozen=True)
class MinorEmbedding:
    n: int
    l: int
    chains: tuple[tuple[int, ...], ...]
    chain_edges: tuple[tuple[int, int], ...]
    crossing: dict
    coords: tuple[tuple[int, int, int, int], ...]

    @property
    def k(self) -> int:
        return len(self.coords)

    @property
    def chain_length(self) -> int:
        return self.l + 1

    def chain_array(self) -> np.ndarray:
        """``(n, l+1)`` array of physical indices."""
        return np.array(self.chains, dtype=np.int64)

    def crossing_array(self) -> np.ndarray:
        """``(C(n,2), 2)`` crossing edges in lexicographic logical-pair order."""
        return np.array([self.crossing[p] for p in combinations(range(1, self.n + 1), 2)],
                        dtype=np.int64)

    def owner(self) -> np.ndarray:
        """Logical spin (0-based) owning each physical spin."""
        out = np.empty(self.k, dtype=np.int64)
        for i, chain in enumerate(self.chains):
            out[list(chain)] = i
        return out


def chimera_adjacent(a: tuple, b: tuple) -> bool:
    """Whether two qubit coordinates share a Chimera coupler."""
    (r1, c1, s1, p1), (r2, c2, s2, p2) = a, b
    if (r1, c1) == (r2, c2):
        return s1 != s2
    if s1 != s2 or p1 != p2:
        return False
    if s1 == 0:
        return c1 == c2 and abs(r1 - r2) == 1
    return r1 == r2 and abs(c1 - c2) == 1


def build_embedding(n: int) -> MinorEmbedding:
    if int(n) != n or n < 2:
        raise ValidationError("an embedding needs n >= 2")
    L = math.ceil(n / 4)
    coords = []
    chains = []
    chain_edges = []
    for i in range(n):
        b, p = divmod(i, 4)
        path = [(r, b, 0, p) for r in range(b + 1)] + [(b, c, 1, p) for c in range(b, L)]
        start = len(coords)
        coords.extend(path)
        chain = tuple(range(start, start + len(path)))
        chains.append(chain)
        chain_edges.extend(zip(chain[:-1], chain[1:]))

    by_cell = {}
    for q, (r, c, s, _) in enumerate(coords):
        by_cell.setdefault((r, c), []).append(q)
    owner = {q: i for i, chain in enumerate(chains) for q in chain}

    crossing = {}
    for i, j in combinations(range(n), 2):
        shared = {(coords[q][0], coords[q][1]) for q in chains[i]} & {
            (coords[q][0], coords[q][1]) for q in chains[j]
        }
        candidates = []
        for cell in shared:
            for a in by_cell[cell]:
                if owner[a] != i:
                    continue
                for b in by_cell[cell]:
                    if owner[b] == j and coords[a][2] != coords[b][2]:
                        candidates.append((a, b))
        if not candidates:
            raise AssertionError(f"chains {i} and {j} never meet")  # construction bug
        crossing[(i + 1, j + 1)] = min(candidates)

    return MinorEmbedding(n, L, tuple(chains), tuple(chain_edges), crossing, tuple(coords))


def embed(Z, e: MinorEmbedding) -> np.ndarray:
    """Copy each logical spin onto every member of its chain."""
    Z = as_spins(Z, e.n, "Z")
    return Z[e.owner()].astype(np.int8)


def me_energy(z, e: MinorEmbedding, problem: LogicalProblem, C_ME: float) -> float:
    """Problem couplers on crossing edges plus ferromagnetic chain couplers of strength C_ME."""
    if not (C_ME > 0):
        raise ValidationError("C_ME must be positive")
    z = as_spins(z, e.k, "z").astype(np.float64)
    cross = e.crossing_array()
    problem_term = -float(np.dot(problem.values, z[cross[:, 0]] * z[cross[:, 1]]))
    edges = np.array(e.chain_edges, dtype=np.int64).reshape(-1, 2)
    chain_term = -float(np.sum(z[edges[:, 0]] * z[edges[:, 1]]))
    return problem_term + C_ME * chain_term


def chain_report(z, e: MinorEmbedding) -> list[int]:
    """1-based logical spins whose chains are broken."""
    z = as_spins(z, e.k, "z")
    vals = z[e.chain_array()]
    broken = np.any(vals != vals[:, :1], axis=1)
    return [int(i) + 1 for i in np.flatnonzero(broken)]


def chain_intact(z, e: MinorEmbedding) -> bool:
    return not chain_report(z, e)


def unembed(z, e: MinorEmbedding) -> np.ndarray:
    """Logical state read from the first member of each chain."""
    z = as_spins(z, e.k, "z")
    return z[e.chain_array()[:, 0]]


def audit_embedding(e: MinorEmbedding) -> list[str]:
    """Check every structural invariant; returns a list of violations (empty if sound)."""
    problems = []
    if e.l != math.ceil(e.n / 4):
        problems.append(f"grid size {e.l} != ceil(n/4)")
    if e.k != e.n * (e.l + 1):
        problems.append(f"k={e.k} != n(ceil(n/4)+1)")
    seen = [q for chain in e.chains for q in chain]
    if sorted(seen) != list(range(e.k)):
        problems.append("chains do not partition the physical index space")
    for i, chain in enumerate(e.chains):
        if len(chain) != e.l + 1:
            problems.append(f"chain {i + 1} has length {len(chain)}")
    owner = e.owner()
    adj = {q: set() for q in range(e.k)}
    for a, b in e.chain_edges:
        if owner[a] != owner[b]:
            problems.append(f"chain edge ({a},{b}) joins different chains")
        adj[a].add(b)
        adj[b].add(a)
        if not chimera_adjacent(e.coords[a], e.coords[b]):
            problems.append(f"chain edge ({a},{b}) is not a Chimera coupler")
    for i, chain in enumerate(e.chains):
        reached, frontier = {chain[0]}, [chain[0]]
        while frontier:
            q = frontier.pop()
            for nb in adj[q]:
                if nb not in reached and owner[nb] == i:
                    reached.add(nb)
                    frontier.append(nb)
        if reached != set(chain):
            problems.append(f"chain {i + 1} is not connected")
    expected = set(combinations(range(1, e.n + 1), 2))
    if set(e.crossing) != expected:
        problems.append("crossing does not cover every logical pair exactly once")
    for (i, j), (a, b) in e.crossing.items():
        if owner[a] != i - 1 or owner[b] != j - 1:
            problems.append(f"crossing for ({i},{j}) uses foreign qubits")
        if not chimera_adjacent(e.coords[a], e.coords[b]):
            problems.append(f"crossing ({a},{b}) is not a Chimera coupler")
        if e.coords[a][:2] != e.coords[b][:2]:
            problems.append(f"crossing ({a},{b}) is not intra-cell")
    if len(set(e.crossing.values())) != len(e.crossing):
        problems.append("a physical coupler is reused by two logical pairs")
    return problems


def embedding_to_dict(e: MinorEmbedding) -> dict:
    return {
        "n": e.n,
        "L": e.l,
        "k": e.k,
        "qubits": [
            {"index": q, "chain": int(o) + 1, "row": r, "col": c, "side": s, "pos": p}
            for q, ((r, c, s, p), o) in enumerate(zip(e.coords, e.owner()))
        ],
        "chains": [list(c) for c in e.chains],
        "chain_edges": [list(x) for x in e.chain_edges],
        "crossings": [{"i": i, "j": j, "a": a, "b": b} for (i, j), (a, b) in e.crossing.items()],
    }


def dump_embedding(e: MinorEmbedding, path) -> None:
    with open(path, "w") as fh:
        json.dump(embedding_to_dict(e), fh, indent=1)
        fh.write("\n")
