"""Deterministic circuit generators for tests and the built-in benchmark set.

Every generator returns a freshly built :class:`~aigrefac.core.Aig`.  The
arithmetic circuits are textbook constructions (ripple-carry, array
multiplier, popcount voter) chosen to exercise a range of shapes: deep
carry chains, wide fanout, reconvergence, and XOR-heavy trees.
"""

from __future__ import annotations

from typing import List, Sequence

import numpy as np

from .core import Aig, FALSE, Literal


def _xor(aig: Aig, a: Literal, b: Literal) -> Literal:
    t0 = aig.add_and(a, ~b)
    t1 = aig.add_and(~a, b)
    return ~aig.add_and(~t0, ~t1)


def _or(aig: Aig, a: Literal, b: Literal) -> Literal:
    return ~aig.add_and(~a, ~b)


def _mux(aig: Aig, sel: Literal, t: Literal, e: Literal) -> Literal:
    return ~aig.add_and(~aig.add_and(sel, t), ~aig.add_and(~sel, e))


def _full_adder(aig: Aig, a: Literal, b: Literal, c: Literal):
    axb = _xor(aig, a, b)
    s = _xor(aig, axb, c)
    carry = _or(aig, aig.add_and(a, b), aig.add_and(axb, c))
    return s, carry


def adder(width: int) -> Aig:
    """Ripple-carry adder: 2*width PIs, width+1 POs (sum, carry-out)."""
    aig = Aig()
    xs = [aig.add_pi() for _ in range(width)]
    ys = [aig.add_pi() for _ in range(width)]
    carry = FALSE
    for i in range(width):
        s, carry = _full_adder(aig, xs[i], ys[i], carry)
        aig.add_po(s)
    aig.add_po(carry)
    aig.levelize()
    return aig


def multiplier(width: int) -> Aig:
    """Array multiplier: 2*width PIs, 2*width POs."""
    aig = Aig()
    xs = [aig.add_pi() for _ in range(width)]
    ys = [aig.add_pi() for _ in range(width)]
    acc: List[Literal] = [FALSE] * (2 * width)
    for j in range(width):
        carry = FALSE
        for i in range(width):
            pp = aig.add_and(xs[i], ys[j])
            s, carry = _full_adder(aig, acc[i + j], pp, carry)
            acc[i + j] = s
        k = j + width
        while carry != FALSE and k < 2 * width:
            acc[k], carry = _full_adder(aig, acc[k], carry, FALSE)
            k += 1
    for lit in acc:
        aig.add_po(lit)
    aig.levelize()
    return aig


def voter(n_inputs: int = 15) -> Aig:
    """Majority-of-n voter via a popcount tree; n must be 2**k - 1."""
    k = (n_inputs + 1).bit_length() - 1
    if (1 << k) - 1 != n_inputs:
        raise ValueError("voter wants 2**k - 1 inputs")
    aig = Aig()
    ins = [aig.add_pi() for _ in range(n_inputs)]
    # Reduce 3 single-bit counts to a 2-bit count per full adder, then add
    # the partial counts pairwise; majority is the top bit of the total.
    counts: List[List[Literal]] = [[x] for x in ins]
    while len(counts) > 1:
        nxt: List[List[Literal]] = []
        for i in range(0, len(counts) - 1, 2):
            a, b = counts[i], counts[i + 1]
            width = max(len(a), len(b)) + 1
            out: List[Literal] = []
            carry = FALSE
            for j in range(width):
                x = a[j] if j < len(a) else FALSE
                y = b[j] if j < len(b) else FALSE
                s, carry = _full_adder(aig, x, y, carry)
                out.append(s)
            nxt.append(out)
        if len(counts) % 2:
            nxt.append(counts[-1])
        counts = nxt
    total = counts[0]
    # count >= 2**(k-1) iff any bit of that weight or above is set; the
    # adder tree pads the total wider than k bits, so OR the top slice
    maj = total[k - 1]
    for extra in total[k:]:
        maj = _or(aig, maj, extra)
    aig.add_po(maj)
    aig.levelize()
    return aig


def mux_tree(select_bits: int) -> Aig:
    """2**s-to-1 multiplexer: s select PIs then 2**s data PIs, one PO."""
    aig = Aig()
    sels = [aig.add_pi() for _ in range(select_bits)]
    data = [aig.add_pi() for _ in range(1 << select_bits)]
    layer = data
    for s in sels:
        layer = [_mux(aig, s, layer[2 * i + 1], layer[2 * i])
                 for i in range(len(layer) // 2)]
    aig.add_po(layer[0])
    aig.levelize()
    return aig


def parity(n_inputs: int) -> Aig:
    """Balanced XOR tree over n inputs, one PO."""
    aig = Aig()
    layer = [aig.add_pi() for _ in range(n_inputs)]
    while len(layer) > 1:
        nxt = [_xor(aig, layer[2 * i], layer[2 * i + 1])
               for i in range(len(layer) // 2)]
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    aig.add_po(layer[0])
    aig.levelize()
    return aig


def comparator(width: int) -> Aig:
    """Unsigned a > b over two width-bit PIs, one PO."""
    aig = Aig()
    xs = [aig.add_pi() for _ in range(width)]
    ys = [aig.add_pi() for _ in range(width)]
    gt = FALSE
    for i in range(width):  # LSB to MSB; higher bits override
        eq = ~_xor(aig, xs[i], ys[i])
        gt = _or(aig, aig.add_and(xs[i], ~ys[i]), aig.add_and(eq, gt))
    aig.add_po(gt)
    aig.levelize()
    return aig


def random_aig(n_pis: int, n_ands: int, seed: int) -> Aig:
    """Seeded random AIG with roughly n_ands live gates.

    Fanins are drawn uniformly from all existing literals, so the result is
    a layered random DAG.  Every gate with no fanout becomes a PO, which
    keeps the whole graph live.
    """
    if n_pis < 1:
        raise ValueError("need at least one PI")
    rng = np.random.default_rng(seed)
    aig = Aig(capacity=n_pis + n_ands + 16)
    lits = [pi.index for pi in (aig.add_pi() for _ in range(n_pis))]
    guard = 0
    while aig.num_ands < n_ands:
        i, j = rng.integers(0, len(lits), size=2)
        ca, cb = rng.integers(0, 2, size=2)
        before = aig.num_ands
        res = aig.add_and(Literal.from_index(int(lits[i]) ^ int(ca)),
                          Literal.from_index(int(lits[j]) ^ int(cb)))
        if aig.num_ands > before:
            lits.append(res.index)
            guard = 0
        else:
            guard += 1
            if guard > 1000:  # saturated: tiny literal pool, all pairs hashed
                break
    g = aig.graph()
    for v in range(1 + n_pis, aig.num_nodes):
        if g.ref[v] == 0 and g.kind[v] == 2 and g.dead[v] == 0:
            aig.add_po(Literal(int(v), False))
    if not aig.pos:
        aig.add_po(Literal(0, True))
    aig.levelize()
    return aig


def builtin_suite() -> List[tuple]:
    """Name/builder pairs for the fallback benchmark set."""
    return [
        ("adder32", lambda: adder(32)),
        ("mult8", lambda: multiplier(8)),
        ("voter15", lambda: voter(15)),
        ("mux64", lambda: mux_tree(6)),
        ("parity64", lambda: parity(64)),
        ("cmp32", lambda: comparator(32)),
        ("rand4k", lambda: random_aig(64, 4000, seed=7)),
    ]
