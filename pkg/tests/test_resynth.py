"""Cut growth, truth tables, covers, and candidate costing."""

import numpy as np
import pytest

import oracles as O
from conftest import build_chain3, build_redundancy, build_single_and
from aigrefac.core import Aig
from aigrefac.circuits import random_aig, voter
from aigrefac.resynth import (Cut, TruthTable, build_candidate, compute_tt,
                              evaluate, isop, recon_cut)


# -- isop: frozen tables, then bulk properties -------------------------------

ISOP_FROZEN = [
    # (k, bits, expected (pos, neg) cubes)
    (2, 0x8, [(3, 0)]),                      # a AND b
    (2, 0x6, [(1, 2), (2, 1)]),              # XOR
    (2, 0x5, [(0, 1)]),                      # NOT a (leaf 0)
    (3, 0xE8, [(3, 0), (5, 0), (6, 0)]),     # majority of three
    (2, 0x0, []),                            # constant false
    (2, 0xF, [(0, 0)]),                      # tautology: one empty cube
    (3, 0x96, [(1, 6), (2, 5), (4, 3), (7, 0)]),  # 3-input XOR
]


@pytest.mark.parametrize("k,bits,cubes", ISOP_FROZEN,
                         ids=[hex(c[1]) for c in ISOP_FROZEN])
def test_isop_frozen_cases(k, bits, cubes):
    sop = isop(TruthTable(k, bits))
    assert [(c.pos, c.neg) for c in sop.cubes] == cubes
    assert sop.k == k


def test_isop_cover_properties_bulk():
    rng = np.random.default_rng(77)
    for _ in range(300):
        k = int(rng.integers(2, 7))
        nbytes = max(1, (1 << k) // 8)
        bits = int.from_bytes(rng.bytes(nbytes), "little")
        bits &= (1 << (1 << k)) - 1
        sop = isop(TruthTable(k, bits))
        cubes = [(c.pos, c.neg) for c in sop.cubes]
        assert O.cover_is_exact(cubes, k, bits), hex(bits)
        assert O.every_cube_essential(cubes, k, bits), hex(bits)


# -- cuts and truth tables ----------------------------------------------------


def test_cut_covers_cone_and_sorts_leaves():
    aig = random_aig(12, 400, seed=51)
    for root in O.live_ands(aig)[:60]:
        cut = recon_cut(aig, root, 8)
        assert list(cut.leaves) == sorted(cut.leaves)
        assert root not in cut.leaves
        assert cut.k <= 8
        # the published cone is exactly the interior above the leaf frontier
        assert set(cut.cone) == O.cone_nodes(aig, root, cut.leaves)
        assert cut.cone[-1] == root


def test_cut_on_pi_fanins_is_trivial():
    aig, root = build_single_and()
    cut = recon_cut(aig, root, 8)
    assert cut.leaves == tuple(sorted(aig.pis))
    assert cut.cone == (root,)


def test_compute_tt_matches_interpretive_oracle():
    aig = random_aig(10, 350, seed=63)
    roots = O.live_ands(aig)
    rng = np.random.default_rng(1)
    for root in rng.choice(roots, size=50, replace=False):
        cut = recon_cut(aig, int(root), 8)
        tt = compute_tt(aig, cut)
        assert tt.bits == O.cone_truth_table(aig, int(root), cut.leaves)


def test_compute_tt_known_majority():
    # hand-built majority: ab + ac + bc, PO complemented off the top NOR
    aig = Aig()
    a, b, c = (aig.add_pi() for _ in range(3))
    n1 = aig.add_and(a, b)
    n2 = aig.add_and(a, c)
    n3 = aig.add_and(b, c)
    o1 = aig.add_and(~n1, ~n2)          # NOR(ab, ac)
    root = aig.add_and(o1, ~n3)         # NOT majority
    aig.add_po(~root)
    aig.levelize()
    cut = recon_cut(aig, root.node_id, 4)
    assert cut.leaves == tuple(aig.pis)
    tt = compute_tt(aig, cut)
    assert tt.bits == 0xE8 ^ 0xFF       # node polarity is the complement
    assert O.exhaustive_po_tables(aig) == [0xE8]


# -- candidate building and evaluation ---------------------------------------


def test_redundancy_candidate_is_free_and_wins():
    aig, root, a, b = build_redundancy()
    cut = recon_cut(aig, root, 8)
    assert cut.leaves == (a.node_id, b.node_id)
    tt = compute_tt(aig, cut)
    assert tt.bits == 0x5                    # NOT a
    sop = isop(tt)
    members = set(aig.mffc_collect(root).members)
    assert len(members) == 3
    cand = build_candidate(aig, cut, sop, members)
    assert cand.cost == 0                    # pure wire: no new nodes
    assert cand.steps == ()
    assert cand.output == (~a).index
    decision = evaluate(len(members), cand, zero_gain=False)
    assert decision.accepted and decision.gain == 3


def test_rebuild_self_costs_its_own_subtree():
    aig, root = build_single_and()
    cut = recon_cut(aig, root, 8)
    sop = isop(compute_tt(aig, cut))
    members = set(aig.mffc_collect(root).members)
    cand = build_candidate(aig, cut, sop, members)
    assert cand.hits == (root,)
    assert cand.cost == 1                    # the kept root itself
    assert evaluate(1, cand, zero_gain=False).accepted is False
    ok = evaluate(1, cand, zero_gain=True)
    assert ok.accepted and ok.gain == 0


def test_member_hit_charges_subtree_transitively():
    aig, m, m2, (a, b, d) = build_chain3()
    cut = recon_cut(aig, m, 8)
    assert set(cut.leaves) == {a.node_id, b.node_id, d.node_id}
    sop = isop(compute_tt(aig, cut))
    members = set(aig.mffc_collect(m).members)
    assert members == {m, m2}
    cand = build_candidate(aig, cut, sop, members)
    # rebuilding a AND b hits m2; chaining d on top hits m itself, and
    # keeping m transitively keeps m2 (already charged once)
    assert set(cand.hits) == {m, m2}
    assert cand.cost == 2
    assert evaluate(len(members), cand, zero_gain=True).gain == 0


def test_constant_cover_collapses_to_false():
    aig = Aig()
    a = aig.add_pi()
    b = aig.add_pi()
    n1 = aig.add_and(a, b)
    root = aig.add_and(n1, ~b)    # a AND b AND NOT b == false structurally
    aig.add_po(root)
    cut = recon_cut(aig, root.node_id, 8)
    tt = compute_tt(aig, cut)
    assert tt.bits == 0
    cand = build_candidate(aig, cut, isop(tt), set())
    assert cand.output == 0       # constant-false literal
    assert cand.cost == 0


def test_shared_hit_outside_mffc_costs_nothing():
    aig = Aig()
    a, b, c = (aig.add_pi() for _ in range(3))
    shared = aig.add_and(a, b)     # first leaf pair, so the builder re-forms it
    aig.add_po(shared)             # external consumer pins it outside the cone
    root = aig.add_and(shared, c)
    aig.add_po(root)
    cut = recon_cut(aig, root.node_id, 8)
    sop = isop(compute_tt(aig, cut))
    members = set(aig.mffc_collect(root.node_id).members)
    assert members == {root.node_id}
    cand = build_candidate(aig, cut, sop, members)
    # the ab product is live shared logic, free; only the kept root costs
    assert set(cand.hits) == {shared.node_id, root.node_id}
    assert cand.cost == 1
    assert evaluate(len(members), cand, zero_gain=True).gain == 0


def test_evaluate_gain_arithmetic():
    aig, root = build_single_and()
    cut = recon_cut(aig, root, 8)
    cand = build_candidate(aig, cut, isop(compute_tt(aig, cut)),
                           set(aig.mffc_collect(root).members))
    for mffc_size, zero, accepted, gain in [
        (5, False, True, 4), (1, False, False, 0), (1, True, True, 0),
        (0, False, False, -1), (0, True, False, -1),
    ]:
        d = evaluate(mffc_size, cand, zero_gain=zero)
        assert (d.accepted, d.gain) == (accepted, gain)
        assert bool(d) is accepted
