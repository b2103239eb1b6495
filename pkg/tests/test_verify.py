"""Simulation and equivalence checking against the interpretive oracle."""

import numpy as np
import pytest

import oracles as O
from aigrefac import _kernels as K
from aigrefac import verify
from aigrefac.core import Aig, Literal
from aigrefac.circuits import adder, mux_tree, parity, random_aig, voter
from aigrefac.verify import InterfaceMismatchError, equiv_check, simulate, stats


def _exhaustive_words(aig):
    npi = len(aig.pis)
    w = max(1, (1 << npi) // 64)
    words = np.zeros((npi, w), dtype=np.uint64)
    K.fill_exhaustive(words, 0)
    return words, (1 << npi)


@pytest.mark.parametrize("mk", [lambda: adder(3), lambda: voter(7),
                                lambda: parity(6), lambda: mux_tree(2),
                                lambda: random_aig(8, 120, seed=4)],
                         ids=["adder3", "voter7", "parity6", "mux4", "rand"])
def test_simulate_matches_interpretive_oracle(mk):
    aig = mk()
    words, total = _exhaustive_words(aig)
    out = simulate(aig, words)
    mask = (1 << total) - 1
    exp = O.exhaustive_po_tables(aig)
    for j in range(len(aig.pos)):
        got = 0
        for wi in range(out.shape[1]):
            got |= int(out[j, wi]) << (64 * wi)
        assert got & mask == exp[j]


def test_equiv_exhaustive_on_identical_graphs():
    a = adder(5)
    res = equiv_check(a, a.copy())
    assert res.verdict == "equivalent_exhaustive"
    assert res.patterns == 1 << 10
    assert res.equivalent


def test_equiv_exhaustive_on_restructured_graph():
    # same function, different structure: balanced vs chain parity
    a = parity(8)
    b = Aig()
    pis = [b.add_pi() for _ in range(8)]
    acc = pis[0]
    for p in pis[1:]:
        t0 = b.add_and(acc, ~p)
        t1 = b.add_and(~acc, p)
        acc = ~b.add_and(~t0, ~t1)
    b.add_po(acc)
    res = equiv_check(a, b)
    assert res.verdict == "equivalent_exhaustive"
    assert res.equivalent


def test_counterexample_is_replayed_and_real():
    a = adder(3)
    b = adder(3)
    b.pos[1] ^= 1      # complement one output
    res = equiv_check(a, b)
    assert res.verdict == "counterexample"
    assert not res.equivalent
    assert res.po_index == 1
    bits = [bool(v) for v in res.assignment]
    va = O.po_values(a, bits)[res.po_index]
    vb = O.po_values(b, bits)[res.po_index]
    assert va != vb


def test_sampled_equivalence_above_exhaustive_limit():
    a = parity(20)
    b = Aig()
    pis = [b.add_pi() for _ in range(20)]
    acc = pis[0]
    for p in pis[1:]:
        t0 = b.add_and(acc, ~p)
        t1 = b.add_and(~acc, p)
        acc = ~b.add_and(~t0, ~t1)
    b.add_po(acc)
    res = equiv_check(a, b, max_patterns=1 << 16)
    assert res.verdict == "equivalent_sampled"
    assert res.patterns >= 1 << 16


def test_sampled_counterexample_found():
    a = parity(20)
    b = parity(20)
    b.pos[0] ^= 1
    res = equiv_check(a, b, max_patterns=1 << 16)
    assert res.verdict == "counterexample"
    bits = [bool(v) for v in res.assignment]
    assert O.po_values(a, bits)[0] != O.po_values(b, bits)[0]


def test_sampled_seed_determinism():
    a = random_aig(24, 900, seed=6)
    b = a.copy()
    r1 = equiv_check(a, b, max_patterns=1 << 16, seed=123)
    r2 = equiv_check(a, b, max_patterns=1 << 16, seed=123)
    assert (r1.verdict, r1.patterns) == (r2.verdict, r2.patterns)
    r3 = equiv_check(a, b, max_patterns=1 << 16, seed=456)
    assert r3.equivalent


def test_interface_mismatch_rejected():
    with pytest.raises(InterfaceMismatchError):
        equiv_check(adder(3), adder(4))
    a = adder(3)
    b = adder(3)
    b.pos.pop()              # PO arity alone differs
    with pytest.raises(InterfaceMismatchError):
        equiv_check(a, b)


def test_stats_reports_frozen_values():
    a = adder(4)
    got = stats(a)
    assert got == {"pis": 8, "pos": 5, "area": 31, "depth": 8}
    lv = O.levels_py(a)
    assert got["depth"] == max(lv[p >> 1] for p in a.pos)


def test_simulate_const_and_complement_edges():
    aig = Aig()
    a = aig.add_pi()
    aig.add_po(~a)
    aig.add_po(Literal(0, True))    # constant true
    words = np.zeros((1, 1), dtype=np.uint64)
    words[0, 0] = np.uint64(0b10)
    out = simulate(aig, words)
    assert int(out[0, 0]) & 0b11 == 0b01
    assert int(out[1, 0]) & 0b11 == 0b11
