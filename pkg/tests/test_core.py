"""Graph container behavior: literals, hashing, folding, MFFC, lifecycle."""

import numpy as np
import pytest

import oracles as O
from conftest import build_chain3, build_single_and
from aigrefac import aiger
from aigrefac.core import (Aig, FALSE, TRUE, IntegrityError, Literal, double)
from aigrefac.circuits import adder, random_aig


def test_literal_encoding():
    a = Literal(5, False)
    assert a.index == 10
    assert (~a).index == 11
    assert ~~a == a
    assert Literal.from_index(11) == Literal(5, True)
    assert FALSE.index == 0 and TRUE.index == 1
    with pytest.raises(ValueError):
        Literal.from_index(-2)


def test_empty_graph():
    aig = Aig()
    assert aig.num_nodes == 1      # constant node only
    assert aig.area() == 0
    assert aig.depth() == 0
    aig.audit()


def test_structural_hashing_dedup():
    aig = Aig()
    a, b = aig.add_pi(), aig.add_pi()
    x = aig.add_and(a, b)
    assert aig.add_and(a, b) == x
    assert aig.add_and(b, a) == x          # commuted
    assert aig.add_and(~a, b) != x         # different polarity is new
    assert aig.num_ands == 2


def test_and_folding_rules():
    aig = Aig()
    a = aig.add_pi()
    assert aig.add_and(a, FALSE) == FALSE
    assert aig.add_and(a, TRUE) == a
    assert aig.add_and(a, a) == a
    assert aig.add_and(a, ~a) == FALSE
    assert aig.num_ands == 0               # all four folded away


def test_levelize_matches_oracle():
    aig = random_aig(10, 400, seed=11)
    aig.levelize()
    exp = O.levels_py(aig)
    for i in O.live_ands(aig):
        assert int(aig.lvl[i]) == exp[i]
    assert aig.depth() == max(exp[p >> 1] for p in aig.pos)


def test_refcounts_match_oracle():
    aig = random_aig(12, 500, seed=5)
    assert np.array_equal(O.recount_refs(aig), aig.ref[:aig.num_nodes])


def test_mffc_chain_and_shared_node():
    aig = Aig()
    a, b, c = (aig.add_pi() for _ in range(3))
    m = aig.add_and(a, b)
    r = aig.add_and(m, c)
    aig.add_po(r)
    got = aig.mffc_collect(r.node_id)
    assert set(got.members) == {r.node_id, m.node_id}
    assert got.size == 2
    # a second consumer of m shrinks the cone to the root alone
    aig.add_po(m)
    got = aig.mffc_collect(r.node_id)
    assert got.members == (r.node_id,)


def test_mffc_matches_oracle_on_random_graph():
    aig = random_aig(14, 600, seed=23)
    for root in O.live_ands(aig):
        assert set(aig.mffc_collect(root).members) == O.mffc_py(aig, root)


def test_mffc_anchored_pins_support():
    aig, m, m2, (a, b, d) = build_chain3()
    # plain cone of m eats m2; anchoring m2 keeps it out
    assert set(aig.mffc_collect(m).members) == {m, m2}
    anchored = aig.mffc_collect(m, anchors=[m2])
    assert anchored.members == (m,)
    assert O.mffc_anchored_py(aig, m, keep={m2}) == {m}


def test_mffc_walk_restores_counts():
    aig = random_aig(8, 200, seed=2)
    before = aig.ref[:aig.num_nodes].copy()
    for root in O.live_ands(aig)[:50]:
        aig.mffc_collect(root)
    assert np.array_equal(before, aig.ref[:aig.num_nodes])


def test_delete_dereferenced_cascades():
    aig = Aig()
    a, b, c = (aig.add_pi() for _ in range(3))
    m = aig.add_and(a, b)
    r = aig.add_and(m, c)
    po = aig.add_po(r)
    aig.pos.pop(po)                       # drop the only consumer
    aig.ref[r.node_id] -= 1
    deleted = aig.delete_dereferenced(r.node_id)
    assert set(deleted) == {r.node_id, m.node_id}
    assert aig.is_dead(r.node_id) and aig.is_dead(m.node_id)
    assert aig.num_ands == 0
    with pytest.raises(IntegrityError):
        aig.delete_dereferenced(r.node_id)  # double tombstone is rejected


def test_compact_preserves_function_and_orders_ids():
    aig = random_aig(9, 300, seed=31)
    tables = O.exhaustive_po_tables(aig)
    aig.compact()
    aig.audit()
    aig.audit_topo_ids()
    assert O.exhaustive_po_tables(aig) == tables
    # ids are dense: every id below num_nodes is live
    assert not any(aig.dead[i] for i in range(aig.num_nodes))


def test_compact_after_deletions():
    aig = Aig()
    a, b, c = (aig.add_pi() for _ in range(3))
    m = aig.add_and(a, b)
    r = aig.add_and(m, c)
    keep = aig.add_and(a, c)
    aig.add_po(keep)
    tables = O.exhaustive_po_tables(aig)
    aig.ref[r.node_id] = 0
    aig.delete_dereferenced(r.node_id)
    aig.compact()
    aig.audit()
    assert aig.num_ands == 1
    assert O.exhaustive_po_tables(aig) == tables


def test_snapshot_restore_roundtrip():
    aig = random_aig(8, 150, seed=17)
    aig.compact()
    before = aiger.write_bytes(aig)
    snap = aig.state_snapshot()
    aig.add_and(Literal(1), Literal(2, True))
    aig.add_po(Literal(1))
    aig.state_restore(snap)
    assert aiger.write_bytes(aig) == before


def test_copy_is_independent():
    aig = random_aig(8, 150, seed=19)
    dup = aig.copy()
    dup.add_pi()
    dup.add_and(Literal(1), Literal(2))
    assert dup.num_nodes != aig.num_nodes
    aig.audit()
    dup.audit()


def test_double_duplicates_stats():
    base = adder(4)
    twice = double(base, 1)
    assert twice.num_ands == 2 * base.num_ands
    assert len(twice.pis) == 2 * len(base.pis)
    assert len(twice.pos) == 2 * len(base.pos)
    assert twice.depth() == base.depth()
    twice.audit()
    # each copy computes the original function on its own PI block
    tb = O.exhaustive_po_tables(base)
    rng = np.random.default_rng(3)
    for _ in range(16):
        bits = [bool(v) for v in rng.integers(0, 2, size=len(base.pis))]
        exp = O.po_values(base, bits)
        got = O.po_values(twice, bits + bits)
        assert got[:len(exp)] == exp and got[len(exp):] == exp
    assert tb  # adder(4) is not trivially empty


def test_audit_flags_broken_refcount():
    aig, root = build_single_and()
    aig.ref[root] += 1
    with pytest.raises(IntegrityError):
        aig.audit()


def test_audit_flags_unnormalized_pair():
    aig = Aig()
    a, b = aig.add_pi(), aig.add_pi()
    r = aig.add_and(a, b)
    aig.add_po(r)
    f0 = int(aig.f0[r.node_id])
    aig.f0[r.node_id] = aig.f1[r.node_id]
    aig.f1[r.node_id] = f0
    with pytest.raises(IntegrityError):
        aig.audit()


def test_grow_preserves_structure():
    aig = random_aig(8, 100, seed=41)
    pairs = O.strash_pairs(aig)
    aig.grow(aig.capacity * 4)
    aig.audit()
    assert O.strash_pairs(aig) == pairs
    a = Literal(int(aig.pis[0]))
    b = Literal(int(aig.pis[1]))
    aig.add_and(a, b)   # hash table still functional after rehash
    aig.audit()
