import itertools

import numpy as np
import pytest

from paritybench import (
    ValidationError,
    build_codebook,
    build_plaquettes,
    build_triads,
    encode,
    generate_instance,
    logical_energy,
    slhz3_energy,
    slhz_energy,
    solve_exhaustive,
    syndrome,
)
from paritybench.parity import constraint_listing, is_codeword, syndromes

from conftest import all_spin_states, uniform_problem


def gf2_rank(rows):
    """Rank over GF(2) by Gaussian elimination on Python ints."""
    basis = []
    for r in rows:
        v = sum(1 << b for b in r)
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


@pytest.mark.parametrize("n, k", [(2, 1), (5, 10), (14, 91)])
def test_codebook_size(n, k):
    assert build_codebook(n).k == k


def test_codebook_order_and_round_trip():
    book = build_codebook(8)
    assert book.to_index(1, 2) == 0
    assert book.to_index(1, 3) == 1
    assert book.to_index(7, 8) == book.k - 1
    for idx, (i, j) in enumerate(itertools.combinations(range(1, 9), 2)):
        assert book.to_index(i, j) == idx
        assert book.to_pair(book.to_index(i, j)) == (i, j)
        assert book.to_index(j, i) == idx


def test_codebook_rejects_small_n():
    with pytest.raises(ValidationError):
        build_codebook(1)


def test_encode_examples(rng):
    assert np.all(encode(np.ones(6)) == 1)
    assert encode([1, -1, 1]).tolist() == [-1, 1, -1]
    for _ in range(20):
        Z = rng.choice([-1, 1], size=7)
        assert np.array_equal(encode(Z), encode(-Z))


def test_plaquette_counts_and_rank():
    for n in range(3, 10):
        cells = build_plaquettes(n)
        assert len(cells) == (n - 1) * (n - 2) // 2
        k = n * (n - 1) // 2
        assert gf2_rank([c.free for c in cells]) == k - (n - 1)


def test_plaquette_shape_and_single_fixed_member():
    for c in build_plaquettes(7):
        (i, k), (j, k2), (j2, l), (i2, l2) = c.pairs
        assert (j, l) == (i + 1, k + 1) and k2 == k and j2 == j and i2 == i and l2 == l
        assert sum(m is None for m in c.members) <= 1


def test_n3_single_plaquette():
    (c,) = build_plaquettes(3)
    book = build_codebook(3)
    assert c.members[1] is None
    assert sorted(c.free) == sorted([book.to_index(1, 2), book.to_index(2, 3), book.to_index(1, 3)])


@pytest.mark.parametrize("n, count", [(3, 1), (5, 10), (6, 20)])
def test_triad_counts(n, count):
    triads = build_triads(n)
    assert len(triads) == count
    for t in triads:
        assert len(set(t.members)) == 3


def test_small_n_constraints_rejected():
    with pytest.raises(ValidationError):
        build_plaquettes(2)
    with pytest.raises(ValidationError):
        build_triads(2)


def test_codewords_satisfy_every_constraint(rng):
    cells, triads = build_plaquettes(6), build_triads(6)
    for _ in range(50):
        z = encode(rng.choice([-1, 1], size=6))
        assert all(syndrome(z, c) == 1 for c in cells)
        assert all(syndrome(z, t) == 1 for t in triads)
    ones = np.ones(15, dtype=np.int8)
    assert all(syndrome(ones, c) == 1 for c in cells + triads)


def test_single_flip_violates_exactly_containing_constraints(rng):
    n = 6
    for constraints in (build_plaquettes(n), build_triads(n)):
        for _ in range(10):
            z = encode(rng.choice([-1, 1], size=n))
            m = int(rng.integers(15))
            z2 = z.copy()
            z2[m] = -z2[m]
            for c in constraints:
                brute = int(np.prod([z2[q] for q in c.free]))
                assert syndrome(z2, c) == brute
                assert (brute == -1) == (m in c.free)


def test_converse_exhaustive_n5():
    n = 5
    codewords = {tuple(encode(Z)) for Z in all_spin_states(n)}
    assert len(codewords) == 2 ** (n - 1)
    states = all_spin_states(10)
    cells, triads = build_plaquettes(n), build_triads(n)
    sat4 = {tuple(z) for z in states if np.all(syndromes(z, cells) == 1)}
    sat3 = {tuple(z) for z in states if np.all(syndromes(z, triads) == 1)}
    assert sat4 == sat3 == codewords


def test_converse_randomized_n6(rng):
    cells, triads = build_plaquettes(6), build_triads(6)
    for _ in range(2000):
        z = rng.choice([-1, 1], size=15).astype(np.int8)
        cw = is_codeword(z)
        assert np.all(syndromes(z, cells) == 1) == cw
        assert np.all(syndromes(z, triads) == 1) == cw


def test_penalized_energies_equal_logical_on_codewords(rng):
    p = generate_instance(7, 0.25, 5)
    for _ in range(20):
        Z = rng.choice([-1, 1], size=7)
        z = encode(Z)
        C = float(rng.uniform(0.1, 5))
        assert slhz_energy(z, p, C) == pytest.approx(logical_energy(p, Z), abs=1e-12)
        assert slhz3_energy(z, p, C) == pytest.approx(logical_energy(p, Z), abs=1e-12)


def test_slhz_single_violation_example():
    p = uniform_problem(3, 0.25)
    z = encode([1, 1, 1])
    z[0] = -1
    C4 = 0.7
    assert slhz_energy(z, p, C4) == pytest.approx(-0.25 * (-1 + 1 + 1) + C4)


def test_penalty_weight_must_be_positive():
    p = uniform_problem(3, 0.25)
    with pytest.raises(ValidationError):
        slhz_energy(np.ones(3), p, 0.0)
    with pytest.raises(ValidationError):
        slhz3_energy(np.ones(3), p, -1.0)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_slhz_minimum_matches_logical_above_threshold(n):
    p = generate_instance(n, 0.25, 21 + n)
    truth = solve_exhaustive(p)
    states = all_spin_states(n * (n - 1) // 2)
    for C in (0.05, 0.25, 0.5, 1.0, 2.0, 4.0):
        e_min = min(slhz_energy(z, p, C) for z in states)
        if abs(e_min - truth.energy) < 1e-12:
            break
    else:
        pytest.fail("no penalty weight reproduced the logical ground energy")
    # once above threshold it stays there
    assert min(slhz_energy(z, p, 2 * C) for z in states) == pytest.approx(truth.energy)


def test_constraint_listing_one_line_each():
    text = constraint_listing(build_plaquettes(4))
    assert len(text.splitlines()) == 3
    assert "fixed" in text
    assert len(constraint_listing(build_triads(4)).splitlines()) == 4
