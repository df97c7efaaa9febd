import json

import numpy as np
import pytest

from paritybench import (
    ValidationError,
    build_embedding,
    chain_intact,
    embed,
    generate_instance,
    logical_energy,
    me_energy,
    solve_exhaustive,
)
from paritybench.decoders import mv_decode
from paritybench.embedding import audit_embedding, chain_report, dump_embedding, unembed

from conftest import all_spin_states


@pytest.mark.parametrize("n", range(2, 33))
def test_audit_all_sizes(n):
    e = build_embedding(n)
    assert audit_embedding(e) == []


@pytest.mark.parametrize("n, l, k", [(14, 4, 70), (8, 2, 24), (4, 1, 8), (5, 2, 15)])
def test_sizes(n, l, k):
    e = build_embedding(n)
    assert e.l == l
    assert e.chain_length == l + 1
    assert e.k == k


def test_n14_chain_edges():
    assert len(build_embedding(14).chain_edges) == 56


def test_n4_single_cell():
    e = build_embedding(4)
    assert {e.coords[q][:2] for q in range(e.k)} == {(0, 0)}
    assert len(e.crossing) == 6


def test_rejects_small_n():
    with pytest.raises(ValidationError):
        build_embedding(1)


def test_embed_examples(rng):
    e = build_embedding(9)
    assert np.all(embed(np.ones(9), e) == 1)
    for _ in range(10):
        Z = rng.choice([-1, 1], size=9)
        assert chain_intact(embed(Z, e), e)
        assert np.array_equal(embed(-Z, e), -embed(Z, e))
        assert np.array_equal(unembed(embed(Z, e), e), Z)


def test_energy_identity_n8(rng):
    p = generate_instance(8, 0.25, 2)
    e = build_embedding(8)
    for _ in range(50):
        Z = rng.choice([-1, 1], size=8)
        C = float(rng.uniform(0.1, 3))
        expected = logical_energy(p, Z) - C * len(e.chain_edges)
        assert me_energy(embed(Z, e), e, p, C) == pytest.approx(expected, abs=1e-12)


def test_energy_difference_cancels_chain_offset(rng):
    for _ in range(100):
        n = int(rng.integers(2, 17))
        p = generate_instance(n, 0.25, int(rng.integers(1 << 30)))
        e = build_embedding(n)
        Z, Z2 = rng.choice([-1, 1], size=(2, n))
        d = me_energy(embed(Z, e), e, p, 1.3) - me_energy(embed(Z2, e), e, p, 1.3)
        assert d == pytest.approx(logical_energy(p, Z) - logical_energy(p, Z2), abs=1e-12)


def test_interior_flip_breaks_two_edges():
    p = generate_instance(14, 0.25, 1)
    e = build_embedding(14)
    z = embed(np.ones(14), e)
    C = 0.9
    chain = e.chains[5]
    interior = chain[2]
    z2 = z.copy()
    z2[interior] = -1
    base = me_energy(z, e, p, C)
    cross = e.crossing_array()
    touching = [(a, b) for a, b in cross if interior in (a, b)]
    problem_change = sum(2 * p.values[list(map(tuple, cross)).index((a, b))] for a, b in touching)
    assert me_energy(z2, e, p, C) - base == pytest.approx(2 * 2 * C + problem_change)


def test_me_energy_rejects_bad_weight():
    e = build_embedding(4)
    with pytest.raises(ValidationError):
        me_energy(np.ones(8), e, generate_instance(4, 0.25, 0), 0.0)


def test_chain_report_names_broken_chain():
    e = build_embedding(6)
    z = embed(np.ones(6), e)
    z[e.chains[3][1]] = -1
    assert not chain_intact(z, e)
    assert chain_report(z, e) == [4]


def test_negated_whole_chain_is_intact(rng):
    e = build_embedding(6)
    Z = rng.choice([-1, 1], size=6)
    z = embed(Z, e)
    z[list(e.chains[2])] *= -1
    assert chain_intact(z, e)
    Z2 = Z.copy()
    Z2[2] = -Z2[2]
    assert np.array_equal(mv_decode(z, e, 0), Z2)


def test_ground_states_above_threshold_n4():
    p = generate_instance(4, 0.25, 8)
    truth = solve_exhaustive(p)
    e = build_embedding(4)
    states = all_spin_states(e.k)
    targets = {tuple(embed(Z, e)) for Z in truth.states}
    for C in (0.05, 0.1, 0.25, 0.5, 1.0, 2.0):
        energies = np.array([me_energy(z, e, p, C) for z in states])
        winners = {tuple(z) for z in states[np.isclose(energies, energies.min(), atol=1e-12)]}
        if winners == targets:
            break
    else:
        pytest.fail("no chain strength made the embedded ground states optimal")
    assert len(targets) == 2


def test_dump_is_structured(tmp_path):
    e = build_embedding(5)
    dump_embedding(e, tmp_path / "e.json")
    doc = json.loads((tmp_path / "e.json").read_text())
    assert doc["k"] == 15
    assert len(doc["crossings"]) == 10
    assert len(doc["chain_edges"]) == len(e.chain_edges)
