"""Reference implementations used to freeze expected values in the tests.

Everything here is deliberately slow and simple: recursive dict-based
evaluation, per-assignment cone interpretation, deref simulation on a
plain dict, and a from-scratch AIGER encoder.  None of it shares code
with the package kernels, so agreement is meaningful evidence.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from aigrefac.core import Aig


# -- functional evaluation -------------------------------------------------


def eval_lit(aig: Aig, lit: int, env: Dict[int, bool],
             memo: Optional[Dict[int, bool]] = None) -> bool:
    """Evaluate a literal index under a PI assignment (node id -> bool)."""
    if memo is None:
        memo = {}
    node = lit >> 1
    if node not in memo:
        if node == 0:
            memo[node] = False
        elif node in env:
            memo[node] = env[node]
        else:
            a = eval_lit(aig, int(aig.f0[node]), env, memo)
            b = eval_lit(aig, int(aig.f1[node]), env, memo)
            memo[node] = a and b
    val = memo[node]
    return (not val) if (lit & 1) else val


def po_values(aig: Aig, pi_bits: Sequence[bool]) -> List[bool]:
    """Evaluate all POs for one assignment, given bits in aig.pis order."""
    env = {pid: bool(b) for pid, b in zip(aig.pis, pi_bits)}
    memo: Dict[int, bool] = {}
    return [eval_lit(aig, int(p), env, memo) for p in aig.pos]


def exhaustive_po_tables(aig: Aig) -> List[int]:
    """One truth-table int per PO over all 2^n PI assignments (n small)."""
    n = len(aig.pis)
    tables = [0] * len(aig.pos)
    for m in range(1 << n):
        bits = [bool((m >> i) & 1) for i in range(n)]
        for j, v in enumerate(po_values(aig, bits)):
            if v:
                tables[j] |= 1 << m
    return tables


def cone_truth_table(aig: Aig, root: int, leaves: Sequence[int]) -> int:
    """Truth table of node `root` over `leaves` by brute interpretation.

    Leaf v supplies bit v of each minterm.  Every path from the root must
    terminate at a leaf or the constant; a PI that is not a leaf is an
    error in the cut under test.
    """
    k = len(leaves)
    leaf_pos = {nid: i for i, nid in enumerate(leaves)}
    table = 0
    for m in range(1 << k):

        def ev(lit: int, seen: Dict[int, bool]) -> bool:
            node = lit >> 1
            if node not in seen:
                if node in leaf_pos:
                    seen[node] = bool((m >> leaf_pos[node]) & 1)
                elif node == 0:
                    seen[node] = False
                else:
                    assert int(aig.kind[node]) == 2, \
                        f"cut does not cover PI {node}"
                    seen[node] = (ev(int(aig.f0[node]), seen)
                                  and ev(int(aig.f1[node]), seen))
            v = seen[node]
            return (not v) if (lit & 1) else v

        if ev(2 * root, {}):
            table |= 1 << m
    return table


# -- structural recomputation ----------------------------------------------


def live_ands(aig: Aig) -> List[int]:
    n = aig.num_nodes
    return [i for i in range(n)
            if int(aig.kind[i]) == 2 and not aig.dead[i]]


def recount_refs(aig: Aig) -> np.ndarray:
    """Fanout counts rebuilt from nothing but fanin edges and PO list."""
    counts = np.zeros(aig.num_nodes, dtype=np.int64)
    for i in live_ands(aig):
        counts[int(aig.f0[i]) >> 1] += 1
        counts[int(aig.f1[i]) >> 1] += 1
    for p in aig.pos:
        counts[int(p) >> 1] += 1
    return counts


def strash_pairs(aig: Aig) -> Dict[Tuple[int, int], int]:
    """Fanin-pair map over live ANDs; raises on a structural duplicate."""
    pairs: Dict[Tuple[int, int], int] = {}
    for i in live_ands(aig):
        key = (int(aig.f0[i]), int(aig.f1[i]))
        assert key not in pairs, f"nodes {pairs[key]} and {i} share {key}"
        pairs[key] = i
    return pairs


def levels_py(aig: Aig) -> Dict[int, int]:
    memo: Dict[int, int] = {0: 0}

    def lv(node: int) -> int:
        if node not in memo:
            if int(aig.kind[node]) != 2:
                memo[node] = 0
            else:
                memo[node] = 1 + max(lv(int(aig.f0[node]) >> 1),
                                     lv(int(aig.f1[node]) >> 1))
        return memo[node]

    for i in live_ands(aig):
        lv(i)
    return memo


def cone_nodes(aig: Aig, root: int, leaves: Iterable[int]) -> Set[int]:
    """Interior AND nodes reachable from root without crossing the leaves."""
    stop = set(leaves)
    seen: Set[int] = set()
    stack = [root]
    while stack:
        v = stack.pop()
        if v in seen or v in stop:
            continue
        seen.add(v)
        if int(aig.kind[v]) == 2:
            stack.append(int(aig.f0[v]) >> 1)
            stack.append(int(aig.f1[v]) >> 1)
    return {v for v in seen if int(aig.kind[v]) == 2}


def mffc_py(aig: Aig, root: int) -> Set[int]:
    """Members by deref simulation on a dict copy of the counts.

    Dereference the root's fanins; every AND whose count reaches zero
    recursively releases its own.  The graph is never modified.
    """
    counts = {i: int(aig.ref[i]) for i in range(aig.num_nodes)}
    members: Set[int] = set()

    def release(node: int) -> None:
        if int(aig.kind[node]) != 2 or aig.dead[node]:
            return
        counts[node] -= 1
        if counts[node] == 0:
            members.add(node)
            release(int(aig.f0[node]) >> 1)
            release(int(aig.f1[node]) >> 1)

    members.add(root)
    release(int(aig.f0[root]) >> 1)
    release(int(aig.f1[root]) >> 1)
    return members


def mffc_anchored_py(aig: Aig, root: int, keep: Iterable[int]) -> Set[int]:
    """Deref simulation where `keep` nodes are pinned alive (cover support)."""
    counts = {i: int(aig.ref[i]) for i in range(aig.num_nodes)}
    pinned = set(keep)
    members: Set[int] = set()

    def release(node: int) -> None:
        if int(aig.kind[node]) != 2 or aig.dead[node]:
            return
        if node in pinned:
            return
        counts[node] -= 1
        if counts[node] == 0:
            members.add(node)
            release(int(aig.f0[node]) >> 1)
            release(int(aig.f1[node]) >> 1)

    members.add(root)
    release(int(aig.f0[root]) >> 1)
    release(int(aig.f1[root]) >> 1)
    return members


# -- SOP cover checks --------------------------------------------------------


def cube_value(pos: int, neg: int, minterm: int) -> bool:
    return (minterm & pos) == pos and (minterm & neg) == 0


def sop_value(cubes: Sequence[Tuple[int, int]], minterm: int) -> bool:
    return any(cube_value(p, q, minterm) for p, q in cubes)


def cover_is_exact(cubes: Sequence[Tuple[int, int]], k: int,
                   table: int) -> bool:
    for m in range(1 << k):
        if sop_value(cubes, m) != bool((table >> m) & 1):
            return False
    return True


def every_cube_essential(cubes: Sequence[Tuple[int, int]], k: int,
                         table: int) -> bool:
    """Dropping any single cube must uncover at least one onset minterm."""
    for drop in range(len(cubes)):
        rest = [c for j, c in enumerate(cubes) if j != drop]
        if cover_is_exact(rest, k, table):
            return False
    return True


# -- independent AIGER encoding ---------------------------------------------


def _aiger_vars(aig: Aig) -> Dict[int, int]:
    """Variable map per the package writer contract: PIs, then ANDs by id."""
    var = {0: 0}
    for i, pid in enumerate(aig.pis):
        var[pid] = 1 + i
    for j, nid in enumerate(live_ands(aig)):
        var[nid] = 1 + len(aig.pis) + j
    return var


def _map_lit(var: Dict[int, int], lit: int) -> int:
    return 2 * var[lit >> 1] + (lit & 1)


def encode_ascii_py(aig: Aig) -> bytes:
    var = _aiger_vars(aig)
    ands = live_ands(aig)
    m = len(aig.pis) + len(ands)
    lines = [f"aag {m} {len(aig.pis)} 0 {len(aig.pos)} {len(ands)}"]
    for pid in aig.pis:
        lines.append(str(2 * var[pid]))
    for p in aig.pos:
        lines.append(str(_map_lit(var, int(p))))
    for nid in ands:
        lhs = 2 * var[nid]
        r0 = _map_lit(var, int(aig.f0[nid]))
        r1 = _map_lit(var, int(aig.f1[nid]))
        if r0 < r1:
            r0, r1 = r1, r0
        lines.append(f"{lhs} {r0} {r1}")
    return ("\n".join(lines) + "\n").encode("ascii")


def encode_binary_py(aig: Aig) -> bytes:
    var = _aiger_vars(aig)
    ands = live_ands(aig)
    m = len(aig.pis) + len(ands)
    out = bytearray()
    out += f"aig {m} {len(aig.pis)} 0 {len(aig.pos)} {len(ands)}\n".encode()
    for p in aig.pos:
        out += f"{_map_lit(var, int(p))}\n".encode()
    for nid in ands:
        lhs = 2 * var[nid]
        r0 = _map_lit(var, int(aig.f0[nid]))
        r1 = _map_lit(var, int(aig.f1[nid]))
        if r0 < r1:
            r0, r1 = r1, r0
        assert lhs > r0 >= r1, f"and {nid} violates binary ordering"
        for delta in (lhs - r0, r0 - r1):
            while delta >= 0x80:
                out.append(0x80 | (delta & 0x7F))
                delta >>= 7
            out.append(delta)
    return bytes(out)
